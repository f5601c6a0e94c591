//! Exact rational scalars, named coordinate spaces, affine forms and
//! canonical linear constraints.
//!
//! Every quantity that takes part in a derivation lives here as a
//! [`Rational`]; floating point is only produced by [`format_decimal`] for
//! display.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ArithError;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, an integer, or a plain decimal literal (`"0.919"`,
/// `"-.5"`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let s = text.trim();
    let bad = || ArithError::Parse(format!("not a rational literal: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(ArithError::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let exp: i32 = exp.parse().map_err(|_| bad())?;
        let base = parse_rational(mantissa)?;
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(10u32), exp.unsigned_abs() as usize));
        return Ok(if exp >= 0 { base * scale } else { base / scale });
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// `"p/q"`, or just `"p"` for integers.
pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `sig` significant digits.
pub fn format_decimal(r: &Rational, sig: usize) -> String {
    let x = to_f64(r);
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    let out = format!("{x:.decimals$}");
    if out.starts_with("-") && out[1..].bytes().all(|b| b == b'0' || b == b'.') {
        out[1..].to_string()
    } else {
        out
    }
}

pub(crate) fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub(crate) fn gcd_of(values: &[BigInt]) -> BigInt {
    values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

/// Ordered list of unique coordinate labels; the order fixes vector layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateSpace {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl CoordinateSpace {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Arc<Self>, ArithError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(ArithError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Arc::new(Self {
            name: name.into(),
            labels,
            index,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// The same space with `label` removed, named `name`.
    pub fn without(&self, name: &str, label: &str) -> Arc<Self> {
        let labels = self.labels.iter().filter(|l| *l != label).cloned();
        Self::new(name, labels).expect("subset of unique labels is unique")
    }
}

/// A labeled vector of rationals. Labels absent from the map are unknown,
/// not zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Point {
    values: BTreeMap<String, Rational>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dense(space: &CoordinateSpace, values: &[Rational]) -> Self {
        debug_assert_eq!(space.dim(), values.len());
        Self {
            values: space.labels().iter().cloned().zip(values.iter().cloned()).collect(),
        }
    }

    pub fn insert(&mut self, label: impl Into<String>, value: Rational) {
        self.values.insert(label.into(), value);
    }

    pub fn with(mut self, label: impl Into<String>, value: Rational) -> Self {
        self.insert(label, value);
        self
    }

    pub fn get(&self, label: &str) -> Option<&Rational> {
        self.values.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dense layout over `space`; fails on the first label the point lacks.
    pub fn to_dense(&self, space: &CoordinateSpace) -> Result<Vec<Rational>, ArithError> {
        space
            .labels()
            .iter()
            .map(|l| {
                self.get(l)
                    .cloned()
                    .ok_or_else(|| ArithError::MissingCoordinate(l.clone()))
            })
            .collect()
    }
}

impl FromIterator<(String, Rational)> for Point {
    fn from_iter<T: IntoIterator<Item = (String, Rational)>>(iter: T) -> Self {
        Self {
            values: iter.into_iter().collect(),
        }
    }
}

/// `constant + Σ coeffs[i] · x[i]` over a coordinate space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    space: Arc<CoordinateSpace>,
    coeffs: Vec<Rational>,
    constant: Rational,
}

impl AffineForm {
    pub fn zero(space: &Arc<CoordinateSpace>) -> Self {
        Self {
            space: Arc::clone(space),
            coeffs: vec![Rational::zero(); space.dim()],
            constant: Rational::zero(),
        }
    }

    pub fn from_dense(space: &Arc<CoordinateSpace>, coeffs: Vec<Rational>, constant: Rational) -> Self {
        assert_eq!(coeffs.len(), space.dim(), "coefficient vector length");
        Self {
            space: Arc::clone(space),
            coeffs,
            constant,
        }
    }

    pub fn from_terms<'a>(
        space: &Arc<CoordinateSpace>,
        terms: impl IntoIterator<Item = (&'a str, Rational)>,
        constant: Rational,
    ) -> Result<Self, ArithError> {
        let mut form = Self::zero(space);
        form.constant = constant;
        for (label, c) in terms {
            let i = space
                .index_of(label)
                .ok_or_else(|| ArithError::UnknownCoordinate(label.to_string()))?;
            form.coeffs[i] += c;
        }
        Ok(form)
    }

    /// Parses a linear expression such as `"2*g01 - g02 + 2*t01 - 3"` or
    /// `"1/2 z00.1 + 0.25"`.
    pub fn parse(space: &Arc<CoordinateSpace>, text: &str) -> Result<Self, ArithError> {
        parse_affine(space, text)
    }

    pub fn space(&self) -> &Arc<CoordinateSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, label: &str) -> Option<&Rational> {
        self.space.index_of(label).map(|i| &self.coeffs[i])
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Labels with a nonzero coefficient, in coordinate order.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| self.space.label(i))
    }

    pub fn evaluate(&self, point: &Point) -> Result<Rational, ArithError> {
        let mut acc = self.constant.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let label = self.space.label(i);
            let x = point
                .get(label)
                .ok_or_else(|| ArithError::MissingCoordinate(label.to_string()))?;
            acc += c * x;
        }
        Ok(acc)
    }

    pub fn evaluate_dense(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.coeffs.len());
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            constant: &self.constant * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.space.labels(), other.space.labels());
        Self {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// The same coefficients re-expressed over another space that contains
    /// every label in this form's support.
    pub fn rebase(&self, space: &Arc<CoordinateSpace>) -> Result<Self, ArithError> {
        let terms: Vec<(&str, Rational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.space.label(i), c.clone()))
            .collect();
        Self::from_terms(space, terms, self.constant.clone())
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: &Rational, label: Option<&str>| -> fmt::Result {
            let negative = c.is_negative();
            let mag = c.abs();
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            match label {
                Some(l) if mag.is_one() => write!(f, "{l}"),
                Some(l) => write!(f, "{}*{l}", rational_to_string(&mag)),
                None => write!(f, "{}", rational_to_string(&mag)),
            }
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                term(f, c, Some(self.space.label(i)))?;
            }
        }
        if !self.constant.is_zero() {
            term(f, &self.constant, None)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn parse_affine(space: &Arc<CoordinateSpace>, text: &str) -> Result<AffineForm, ArithError> {
    let err = |msg: &str| ArithError::Parse(format!("{msg} in expression {text:?}"));
    let mut form = AffineForm::zero(space);
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(err("empty expression"));
    }
    let mut pos = 0;
    let mut first = true;
    while pos < chars.len() {
        let mut sign = Rational::one();
        match chars[pos] {
            '+' => pos += 1,
            '-' | '−' => {
                sign = -sign;
                pos += 1;
            }
            _ if first => {}
            _ => return Err(err("expected '+' or '-'")),
        }
        first = false;
        let start = pos;
        while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.' || chars[pos] == '/') {
            pos += 1;
        }
        let coeff = if pos > start {
            let literal: String = chars[start..pos].iter().collect();
            Some(parse_rational(&literal)?)
        } else {
            None
        };
        if pos < chars.len() && chars[pos] == '*' {
            if coeff.is_none() {
                return Err(err("dangling '*'"));
            }
            pos += 1;
        }
        let lstart = pos;
        if pos < chars.len() && chars[pos].is_ascii_alphabetic() {
            while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '.' || chars[pos] == '_') {
                pos += 1;
            }
        }
        let label: String = chars[lstart..pos].iter().collect();
        match (coeff, label.is_empty()) {
            (None, true) => return Err(err("expected a term")),
            (Some(c), true) => form.constant += sign * c,
            (c, false) => {
                let i = space
                    .index_of(&label)
                    .ok_or_else(|| ArithError::UnknownCoordinate(label.clone()))?;
                form.coeffs[i] += sign * c.unwrap_or_else(Rational::one);
            }
        }
    }
    Ok(form)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `form = 0`
    Eq,
    /// `form >= 0`
    Geq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    form: AffineForm,
    relation: Relation,
}

impl LinearConstraint {
    pub fn new(form: AffineForm, relation: Relation) -> Self {
        Self { form, relation }
    }

    pub fn eq(form: AffineForm) -> Self {
        Self::new(form, Relation::Eq)
    }

    pub fn geq(form: AffineForm) -> Self {
        Self::new(form, Relation::Geq)
    }

    pub fn form(&self) -> &AffineForm {
        &self.form
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    /// Unique integer representative: coefficients and constant are
    /// coprime integers; an equality's first nonzero coefficient is positive.
    pub fn canonicalize(&self) -> Result<Self, ArithError> {
        let form = &self.form;
        if form.is_constant() {
            let c = form.constant();
            let constant = match self.relation {
                Relation::Eq if !c.is_zero() => return Err(ArithError::IdenticallyFalse(format!("{c} = 0"))),
                Relation::Geq if c.is_negative() => return Err(ArithError::IdenticallyFalse(format!("{c} >= 0"))),
                _ if c.is_zero() => Rational::zero(),
                _ => Rational::one(),
            };
            return Ok(Self::new(
                AffineForm::from_dense(form.space(), vec![Rational::zero(); form.space().dim()], constant),
                self.relation,
            ));
        }
        let row = integer_row(form);
        let g = gcd_of(&row);
        let mut row: Vec<BigInt> = row.into_iter().map(|v| v / &g).collect();
        if self.relation == Relation::Eq {
            let lead = row.iter().find(|v| !v.is_zero()).expect("nonconstant form");
            if lead.sign() == Sign::Minus {
                row.iter_mut().for_each(|v| *v = -&*v);
            }
        }
        let constant = Rational::from_integer(row.pop().expect("constant slot"));
        let coeffs = row.into_iter().map(Rational::from_integer).collect();
        Ok(Self::new(
            AffineForm::from_dense(form.space(), coeffs, constant),
            self.relation,
        ))
    }

    /// `(coeffs..., constant)` scaled to integers. Only meaningful after
    /// [`canonicalize`](Self::canonicalize).
    pub fn integer_row(&self) -> Vec<BigInt> {
        integer_row(&self.form)
    }

    pub fn slack(&self, point: &Point) -> Result<Rational, ArithError> {
        self.form.evaluate(point)
    }

    pub fn holds_at(&self, point: &Point) -> Result<bool, ArithError> {
        let v = self.form.evaluate(point)?;
        Ok(match self.relation {
            Relation::Eq => v.is_zero(),
            Relation::Geq => !v.is_negative(),
        })
    }
}

fn integer_row(form: &AffineForm) -> Vec<BigInt> {
    let scale = lcm_of_denominators(form.coeffs().iter().chain(std::iter::once(form.constant())));
    form.coeffs()
        .iter()
        .chain(std::iter::once(form.constant()))
        .map(|v| (v * Rational::from_integer(scale.clone())).to_integer())
        .collect()
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.relation {
            Relation::Eq => write!(f, "{} = 0", self.form),
            Relation::Geq => write!(f, "{} >= 0", self.form),
        }
    }
}
