//! Observed distribution tables: loading, validation, marginal derivation,
//! and the two bundled compliance-trial datasets.
//!
//! Indices follow the coordinate-label scheme: `zeta[a-1][2c+b]` is
//! P(C=c, B=b | A=a), `gamma[a-1][c]` is P(C=c | A=a), `theta[a-1][b]` is
//! P(B=b | A=a), `phi[2c+b]` is P(C=c, B=b) and `arm_weights[a-1]` is
//! P(A=a).

use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{parse_rational, ratio, rational_to_string, CoordinateSpace, Point, Rational};
use crate::error::DataError;

pub type ZetaTable = [[Rational; 4]; 2];
pub type PairTable = [[Rational; 2]; 2];

/// Tolerance on per-condition sums applied when loading decimal tables.
pub fn load_tolerance() -> Rational {
    ratio(5, 10_000)
}

/// Maximum deviation from 1 that [`ObservedTables::renormalize`] accepts.
pub fn renormalize_tolerance() -> Rational {
    ratio(1, 100)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservedTables {
    pub zeta: Option<ZetaTable>,
    pub gamma: Option<PairTable>,
    pub theta: Option<PairTable>,
    pub phi: Option<[Rational; 4]>,
    pub arm_weights: Option<[Rational; 2]>,
}

fn dec(s: &str) -> Rational {
    parse_rational(s).expect("bundled literal")
}

fn row<const N: usize>(values: [&str; N]) -> [Rational; N] {
    values.map(dec)
}

impl ObservedTables {
    /// Lipid Research Clinics coronary prevention trial (172 placebo, 165
    /// treated), as printed.
    pub fn lipid() -> Self {
        Self {
            zeta: Some([
                row(["0.919", "0", "0.081", "0"]),
                row(["0.315", "0.139", "0.073", "0.473"]),
            ]),
            gamma: Some([row(["0.919", "0.081"]), row(["0.454", "0.546"])]),
            theta: Some([row(["1", "0"]), row(["0.388", "0.612"])]),
            phi: Some(row(["0.623", "0.068", "0.077", "0.232"])),
            arm_weights: Some([ratio(172, 337), ratio(165, 337)]),
        }
    }

    /// Vitamin A supplementation trial (221 control villages, 229 treated),
    /// as printed.
    pub fn vitamin_a() -> Self {
        Self {
            zeta: Some([
                row(["0.0064", "0", "0.9936", "0"]),
                row(["0.0028", "0.0010", "0.1972", "0.7990"]),
            ]),
            gamma: Some([row(["0.0064", "0.9936"]), row(["0.0038", "0.9962"])]),
            theta: Some([row(["1", "0"]), row(["0.2", "0.8"])]),
            phi: Some(row(["0.0046", "0.0005", "0.5882", "0.4067"])),
            arm_weights: Some([ratio(221, 450), ratio(229, 450)]),
        }
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "lipid" => Some(Self::lipid()),
            "vitamin-a" => Some(Self::vitamin_a()),
            _ => None,
        }
    }

    /// A bundled dataset name, or a path to a `.json` or `.csv` file.
    /// Loaded tables are validated at [`load_tolerance`].
    pub fn load(source: &str) -> Result<Self, DataError> {
        if let Some(t) = Self::named(source) {
            return Ok(t);
        }
        let path = Path::new(source);
        if !path.exists() {
            return Err(DataError::UnknownDataset(source.to_string()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
            path: source.to_string(),
            message: e.to_string(),
        })?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let tables = if is_csv {
            Self::from_csv_str(&text)?
        } else {
            Self::from_json_str(&text)?
        };
        tables.validate(&load_tolerance())?;
        Ok(tables)
    }

    pub fn from_json_str(text: &str) -> Result<Self, DataError> {
        let raw: RawTables = serde_json::from_str(text).map_err(|e| DataError::Parse(e.to_string()))?;
        raw.into_tables()
    }

    /// `c,b,a,value` rows with a header; all eight ζ cells exactly once.
    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| DataError::Parse(e.to_string()))?.clone();
        let expected = ["c", "b", "a", "value"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(DataError::Parse(format!(
                "expected header c,b,a,value, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut cells: [[Option<Rational>; 4]; 2] = Default::default();
        for record in reader.records() {
            let record = record.map_err(|e| DataError::Parse(e.to_string()))?;
            let bit = |i: usize, lo: u8, hi: u8| -> Result<u8, DataError> {
                let v: u8 = record[i]
                    .parse()
                    .map_err(|_| DataError::Parse(format!("bad index {:?}", &record[i])))?;
                if v < lo || v > hi {
                    return Err(DataError::Parse(format!("index {v} out of range {lo}..={hi}")));
                }
                Ok(v)
            };
            let (c, b, a) = (bit(0, 0, 1)?, bit(1, 0, 1)?, bit(2, 1, 2)?);
            let value = parse_rational(&record[3])?;
            let slot = &mut cells[usize::from(a - 1)][usize::from(2 * c + b)];
            if slot.is_some() {
                return Err(DataError::Parse(format!("duplicate row for c={c} b={b} a={a}")));
            }
            *slot = Some(value);
        }
        let mut zeta: ZetaTable = Default::default();
        for a in 0..2 {
            for cb in 0..4 {
                zeta[a][cb] = cells[a][cb]
                    .take()
                    .ok_or_else(|| DataError::Parse(format!("missing row c={} b={} a={}", cb / 2, cb % 2, a + 1)))?;
            }
        }
        Ok(Self {
            zeta: Some(zeta),
            ..Self::default()
        })
    }

    /// Exact `"p/q"` strings in the JSON input schema.
    pub fn to_json(&self) -> Value {
        let s = |r: &Rational| Value::from(rational_to_string(r));
        let block = |rows: &[Vec<Rational>]| {
            json!({
                "a1": rows[0].iter().map(s).collect::<Vec<_>>(),
                "a2": rows[1].iter().map(s).collect::<Vec<_>>(),
            })
        };
        let mut out = serde_json::Map::new();
        if let Some(z) = &self.zeta {
            out.insert("zeta".into(), block(&[z[0].to_vec(), z[1].to_vec()]));
        }
        if let Some(g) = &self.gamma {
            out.insert("gamma".into(), block(&[g[0].to_vec(), g[1].to_vec()]));
        }
        if let Some(t) = &self.theta {
            out.insert("theta".into(), block(&[t[0].to_vec(), t[1].to_vec()]));
        }
        if let Some(p) = &self.phi {
            out.insert("phi".into(), p.iter().map(s).collect());
        }
        if let Some(w) = &self.arm_weights {
            out.insert("arm_weights".into(), w.iter().map(s).collect());
        }
        Value::Object(out)
    }

    fn blocks(&self) -> Vec<(String, Vec<&Rational>)> {
        let mut out = Vec::new();
        if let Some(z) = &self.zeta {
            for (a, row) in z.iter().enumerate() {
                out.push((format!("zeta a={}", a + 1), row.iter().collect()));
            }
        }
        if let Some(g) = &self.gamma {
            for (a, row) in g.iter().enumerate() {
                out.push((format!("gamma a={}", a + 1), row.iter().collect()));
            }
        }
        if let Some(t) = &self.theta {
            for (a, row) in t.iter().enumerate() {
                out.push((format!("theta a={}", a + 1), row.iter().collect()));
            }
        }
        if let Some(p) = &self.phi {
            out.push(("phi".to_string(), p.iter().collect()));
        }
        if let Some(w) = &self.arm_weights {
            out.push(("arm_weights".to_string(), w.iter().collect()));
        }
        out
    }

    /// Every entry in [0, 1] and every conditional block summing to 1
    /// within `tol`. The error names the first violation and its slack.
    pub fn validate(&self, tol: &Rational) -> Result<(), DataError> {
        for (name, block) in self.blocks() {
            for (i, v) in block.iter().enumerate() {
                if v.is_negative() {
                    return Err(DataError::Validation {
                        what: format!("{name} entry {i} >= 0"),
                        value: Box::new((*v).clone()),
                        slack: Box::new((*v).clone()),
                    });
                }
                if *v > &Rational::one() {
                    return Err(DataError::Validation {
                        what: format!("{name} entry {i} <= 1"),
                        value: Box::new((*v).clone()),
                        slack: Box::new(Rational::one() - *v),
                    });
                }
            }
            let sum: Rational = block.iter().copied().sum();
            let slack = &sum - Rational::one();
            if slack.abs() > *tol {
                return Err(DataError::Validation {
                    what: format!("{name} sums to 1"),
                    value: Box::new(sum),
                    slack: Box::new(slack),
                });
            }
        }
        Ok(())
    }

    /// Fills γ and θ from ζ where absent, and φ from ζ and the arm weights
    /// where both are available. Explicit tables are never replaced.
    pub fn derive_marginals(&self) -> Self {
        let mut out = self.clone();
        let Some(z) = &self.zeta else {
            return out;
        };
        if out.gamma.is_none() {
            out.gamma = Some(std::array::from_fn(|a| {
                std::array::from_fn(|c| &z[a][2 * c] + &z[a][2 * c + 1])
            }));
        }
        if out.theta.is_none() {
            out.theta = Some(std::array::from_fn(|a| {
                std::array::from_fn(|b| &z[a][b] + &z[a][2 + b])
            }));
        }
        if out.phi.is_none() {
            out.phi = self.derived_phi().ok();
        }
        out
    }

    /// φ_cb = Σ_a ζ_cb.a · P(A=a).
    pub fn derived_phi(&self) -> Result<[Rational; 4], DataError> {
        let z = self.zeta.as_ref().ok_or(DataError::MissingTable("zeta"))?;
        let w = self.arm_weights.as_ref().ok_or(DataError::MissingArmWeights("phi"))?;
        Ok(std::array::from_fn(|cb| &z[0][cb] * &w[0] + &z[1][cb] * &w[1]))
    }

    /// Rescales each conditional block to sum to exactly 1. Blocks further
    /// than [`renormalize_tolerance`] from 1 are rejected.
    pub fn renormalize(&self) -> Result<Self, DataError> {
        self.validate(&renormalize_tolerance())?;
        fn scale<const N: usize>(block: &[Rational; N]) -> [Rational; N] {
            let sum: Rational = block.iter().sum();
            if sum.is_zero() {
                return block.clone();
            }
            block.clone().map(|v| v / &sum)
        }
        Ok(Self {
            zeta: self.zeta.as_ref().map(|z| [scale(&z[0]), scale(&z[1])]),
            gamma: self.gamma.as_ref().map(|g| [scale(&g[0]), scale(&g[1])]),
            theta: self.theta.as_ref().map(|t| [scale(&t[0]), scale(&t[1])]),
            phi: self.phi.as_ref().map(scale),
            arm_weights: self.arm_weights.as_ref().map(scale),
        })
    }

    /// The value observed for one coordinate label.
    pub fn value(&self, label: &str) -> Result<Rational, DataError> {
        let unsupported = || DataError::UnsupportedCoordinate(label.to_string());
        let digits: Vec<usize> = label
            .chars()
            .skip(1)
            .filter(|c| *c != '.')
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(unsupported)?;
        let kind = label.chars().next().ok_or_else(unsupported)?;
        let bit = |i: usize| digits.get(i).copied().filter(|&d| d <= 1).ok_or_else(unsupported);
        let arm = |i: usize| {
            digits
                .get(i)
                .copied()
                .filter(|&d| d == 1 || d == 2)
                .map(|d| d - 1)
                .ok_or_else(unsupported)
        };
        let arity_ok = |n: usize| if digits.len() == n { Ok(()) } else { Err(unsupported()) };
        match kind {
            'g' => {
                arity_ok(2)?;
                let g = self.gamma.as_ref().ok_or(DataError::MissingTable("gamma"))?;
                Ok(g[arm(1)?][bit(0)?].clone())
            }
            't' => {
                arity_ok(2)?;
                let t = self.theta.as_ref().ok_or(DataError::MissingTable("theta"))?;
                Ok(t[arm(1)?][bit(0)?].clone())
            }
            'z' if label.contains('.') => {
                arity_ok(3)?;
                let z = self.zeta.as_ref().ok_or(DataError::MissingTable("zeta"))?;
                Ok(z[arm(2)?][2 * bit(0)? + bit(1)?].clone())
            }
            'p' => {
                arity_ok(2)?;
                let p = self.phi.as_ref().ok_or(DataError::MissingTable("phi"))?;
                Ok(p[2 * bit(0)? + bit(1)?].clone())
            }
            'x' => {
                arity_ok(3)?;
                let z = self.zeta.as_ref().ok_or(DataError::MissingTable("zeta"))?;
                let w = self.arm_weights.as_ref().ok_or(DataError::MissingArmWeights("xi"))?;
                let a = arm(2)?;
                Ok(&z[a][2 * bit(0)? + bit(1)?] * &w[a])
            }
            _ => Err(unsupported()),
        }
    }

    /// Values for `labels`, as a labeled point.
    pub fn point<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<Point, DataError> {
        labels
            .into_iter()
            .map(|l| Ok((l.to_string(), self.value(l)?)))
            .collect()
    }

    pub fn point_for_space(&self, space: &CoordinateSpace) -> Result<Point, DataError> {
        self.point(space.labels().iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(serde_json::Number),
}

impl Entry {
    fn value(&self) -> Result<Rational, DataError> {
        Ok(match self {
            Entry::Text(s) => parse_rational(s)?,
            Entry::Number(n) => parse_rational(&n.to_string())?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock<const N: usize> {
    #[serde(with = "serde_arrays")]
    a1: [Entry; N],
    #[serde(with = "serde_arrays")]
    a2: [Entry; N],
}

mod serde_arrays {
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D, T, const N: usize>(d: D) -> Result<[T; N], D::Error>
    where
        D: Deserializer<'de>,
        T: Deserialize<'de>,
    {
        let v: Vec<T> = Vec::deserialize(d)?;
        let len = v.len();
        v.try_into()
            .map_err(|_| serde::de::Error::invalid_length(len, &format!("an array of {N} entries").as_str()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTables {
    zeta: Option<RawBlock<4>>,
    gamma: Option<RawBlock<2>>,
    theta: Option<RawBlock<2>>,
    #[serde(default, deserialize_with = "optional_array")]
    phi: Option<[Entry; 4]>,
    #[serde(default, deserialize_with = "optional_array")]
    arm_weights: Option<[Entry; 2]>,
}

fn optional_array<'de, D, const N: usize>(d: D) -> Result<Option<[Entry; N]>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    serde_arrays::deserialize(d).map(Some)
}

fn convert<const N: usize>(entries: &[Entry; N]) -> Result<[Rational; N], DataError> {
    let values: Vec<Rational> = entries.iter().map(Entry::value).collect::<Result<_, _>>()?;
    Ok(values.try_into().expect("length preserved"))
}

impl RawTables {
    fn into_tables(self) -> Result<ObservedTables, DataError> {
        fn block<const N: usize>(b: &Option<RawBlock<N>>) -> Result<Option<[[Rational; N]; 2]>, DataError> {
            b.as_ref().map(|b| Ok([convert(&b.a1)?, convert(&b.a2)?])).transpose()
        }
        Ok(ObservedTables {
            zeta: block(&self.zeta)?,
            gamma: block(&self.gamma)?,
            theta: block(&self.theta)?,
            phi: self.phi.as_ref().map(convert).transpose()?,
            arm_weights: self.arm_weights.as_ref().map(convert).transpose()?,
        })
    }
}
