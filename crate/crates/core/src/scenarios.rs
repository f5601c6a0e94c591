//! Built-in binary instrumental-variable models.
//!
//! A scenario is declared as data: an ordered list of coordinates, each
//! defined by a multilinear polynomial in the latent-response parameters
//! (η0, η1, δ1, δ2, ψ), plus an optional causal target coordinate. Parameter
//! vertices are all 0/1 assignments of the parameters the polynomials use.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::arith::{int, CoordinateSpace, Point, Rational};
use crate::error::ScenarioError;
use crate::polytope::VertexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    /// P(C=1 | B=0, U), shared by both arms.
    Eta0,
    /// P(C=1 | B=1, U), shared by both arms.
    Eta1,
    /// P(B=1 | A=1, U)
    Delta1,
    /// P(B=1 | A=2, U)
    Delta2,
    /// P(A=2 | U)
    Psi,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::Eta0, Param::Eta1, Param::Delta1, Param::Delta2, Param::Psi];

    pub fn name(self) -> &'static str {
        match self {
            Param::Eta0 => "eta0",
            Param::Eta1 => "eta1",
            Param::Delta1 => "delta1",
            Param::Delta2 => "delta2",
            Param::Psi => "psi",
        }
    }

    fn eta(b: u8) -> Self {
        if b == 0 {
            Param::Eta0
        } else {
            Param::Eta1
        }
    }

    fn delta(a: u8) -> Self {
        if a == 1 {
            Param::Delta1
        } else {
            Param::Delta2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterPoint {
    pub eta0: Rational,
    pub eta1: Rational,
    pub delta1: Rational,
    pub delta2: Rational,
    pub psi: Rational,
}

impl ParameterPoint {
    pub fn new(
        eta0: Rational,
        eta1: Rational,
        delta1: Rational,
        delta2: Rational,
        psi: Rational,
    ) -> Result<Self, ScenarioError> {
        let p = Self {
            eta0,
            eta1,
            delta1,
            delta2,
            psi,
        };
        for param in Param::ALL {
            let v = p.get(param);
            if v < &Rational::zero() || v > &Rational::one() {
                return Err(ScenarioError::ParameterOutOfRange {
                    name: param.name(),
                    value: v.clone(),
                });
            }
        }
        Ok(p)
    }

    pub fn from_bits(eta0: u8, eta1: u8, delta1: u8, delta2: u8, psi: u8) -> Self {
        let b = |x: u8| int(i64::from(x != 0));
        Self {
            eta0: b(eta0),
            eta1: b(eta1),
            delta1: b(delta1),
            delta2: b(delta2),
            psi: b(psi),
        }
    }

    pub fn get(&self, param: Param) -> &Rational {
        match param {
            Param::Eta0 => &self.eta0,
            Param::Eta1 => &self.eta1,
            Param::Delta1 => &self.delta1,
            Param::Delta2 => &self.delta2,
            Param::Psi => &self.psi,
        }
    }

    pub fn set(&mut self, param: Param, value: Rational) {
        match param {
            Param::Eta0 => self.eta0 = value,
            Param::Eta1 => self.eta1 = value,
            Param::Delta1 => self.delta1 = value,
            Param::Delta2 => self.delta2 = value,
            Param::Psi => self.psi = value,
        }
    }
}

/// A parameter `p` or its complement `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub param: Param,
    pub complement: bool,
}

impl Factor {
    fn value(&self, p: &ParameterPoint) -> Rational {
        let v = p.get(self.param);
        if self.complement {
            Rational::one() - v
        } else {
            v.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Vec<Factor>,
}

/// Sum of signed products of parameter factors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn param(p: Param) -> Self {
        Self::factor(p, false)
    }

    pub fn complement(p: Param) -> Self {
        Self::factor(p, true)
    }

    /// `p` if `on`, otherwise `1 - p`.
    pub fn indicator(p: Param, on: bool) -> Self {
        Self::factor(p, !on)
    }

    fn factor(param: Param, complement: bool) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: Rational::one(),
                factors: vec![Factor { param, complement }],
            }],
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn minus(self, other: Self) -> Self {
        self.plus(other.negate())
    }

    pub fn negate(mut self) -> Self {
        self.terms.iter_mut().for_each(|t| t.coeff = -t.coeff.clone());
        self
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().copied());
                terms.push(Monomial {
                    coeff: &a.coeff * &b.coeff,
                    factors,
                });
            }
        }
        Self { terms }
    }

    pub fn sum(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().fold(Self::default(), Self::plus)
    }

    pub fn evaluate(&self, p: &ParameterPoint) -> Rational {
        self.terms
            .iter()
            .map(|t| t.factors.iter().fold(t.coeff.clone(), |acc, f| acc * f.value(p)))
            .sum()
    }

    /// No parameter appears twice within one term, so the polynomial is
    /// affine in each parameter separately.
    pub fn is_multilinear(&self) -> bool {
        self.terms.iter().all(|t| {
            let mut seen: Vec<Param> = t.factors.iter().map(|f| f.param).collect();
            seen.sort();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn params(&self) -> Vec<Param> {
        let mut out: Vec<Param> = self
            .terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.param))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// How a coordinate's latent-conditional value relates to its observable
/// counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordinateDef {
    /// The observable is the U-average of this polynomial, so observed
    /// values lie in the convex hull of the vertex images.
    Mixture(Polynomial),
    /// A ratio such as P(C | B) whose observable value is not the U-average
    /// of its latent counterpart.
    Conditional { description: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioName {
    Fig3,
    Bivariate,
    Trivariate,
    Pairwise3,
    Beta,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::Fig3,
        ScenarioName::Bivariate,
        ScenarioName::Trivariate,
        ScenarioName::Pairwise3,
        ScenarioName::Beta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig3 => "fig3",
            ScenarioName::Bivariate => "bivariate",
            ScenarioName::Trivariate => "trivariate",
            ScenarioName::Pairwise3 => "pairwise3",
            ScenarioName::Beta => "beta",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ScenarioError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    space: Arc<CoordinateSpace>,
    transforms: Vec<Polynomial>,
    target: Option<String>,
    params: Vec<Param>,
}

impl Scenario {
    /// Declares a scenario. Every coordinate must be a multilinear mixture
    /// coordinate; conditional coordinates are rejected because their
    /// observable values need not lie in the hull of the vertex images.
    pub fn custom(
        name: &str,
        coordinates: Vec<(String, CoordinateDef)>,
        target: Option<&str>,
    ) -> Result<Self, ScenarioError> {
        let invalid = |reason: String| ScenarioError::Invalid {
            name: name.to_string(),
            reason,
        };
        let mut labels = Vec::with_capacity(coordinates.len());
        let mut transforms = Vec::with_capacity(coordinates.len());
        for (label, def) in coordinates {
            match def {
                CoordinateDef::Mixture(poly) => {
                    if !poly.is_multilinear() {
                        return Err(invalid(format!("coordinate {label} is not multilinear")));
                    }
                    transforms.push(poly);
                }
                CoordinateDef::Conditional { description } => {
                    return Err(ScenarioError::NotConvex {
                        name: name.to_string(),
                        reason: format!(
                            "coordinate {label} ({description}) is a conditional probability; \
                             its observed value is not the average over U of its latent \
                             counterpart, so it need not lie in the convex hull of the vertex images"
                        ),
                    });
                }
            }
            labels.push(label);
        }
        if labels.is_empty() {
            return Err(invalid("no coordinates".to_string()));
        }
        let space = CoordinateSpace::new(name, labels)?;
        if let Some(t) = target {
            if space.index_of(t).is_none() {
                return Err(invalid(format!("target {t:?} is not a coordinate")));
            }
        }
        let mut params: Vec<Param> = transforms.iter().flat_map(Polynomial::params).collect();
        params.sort();
        params.dedup();
        Ok(Self {
            name: name.to_string(),
            space,
            transforms,
            target: target.map(str::to_string),
            params,
        })
    }

    pub fn builtin(name: ScenarioName) -> Self {
        let coords = match name {
            ScenarioName::Fig3 => fig3_coordinates(),
            ScenarioName::Bivariate => {
                let mut c = gamma_coordinates();
                c.extend(theta_coordinates());
                c.push(("alpha".to_string(), alpha()));
                c
            }
            ScenarioName::Trivariate => {
                let mut c = zeta_coordinates();
                c.push(("alpha".to_string(), alpha()));
                c
            }
            ScenarioName::Pairwise3 => {
                let mut c = gamma_coordinates();
                c.extend(theta_coordinates());
                c.extend(phi_coordinates());
                c.push(("alpha".to_string(), alpha()));
                c
            }
            ScenarioName::Beta => {
                let mut c = theta_coordinates();
                c.push(("beta".to_string(), gamma(1, 2).minus(gamma(1, 1))));
                c
            }
        };
        let target = match name {
            ScenarioName::Fig3 => None,
            ScenarioName::Beta => Some("beta"),
            _ => Some("alpha"),
        };
        let coords = coords
            .into_iter()
            .map(|(l, p)| (l, CoordinateDef::Mixture(p)))
            .collect();
        Self::custom(name.as_str(), coords, target).expect("built-in scenarios are well formed")
    }

    pub fn from_name(name: &str) -> Result<Self, ScenarioError> {
        Ok(Self::builtin(name.parse()?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// All coordinates, target included.
    pub fn space(&self) -> &Arc<CoordinateSpace> {
        &self.space
    }

    pub fn target(&self) -> Option<&str> {
        self.target.as_deref()
    }

    pub fn uses_psi(&self) -> bool {
        self.params.contains(&Param::Psi)
    }

    /// Coordinates other than the target.
    pub fn observable_labels(&self) -> Vec<&str> {
        self.space
            .labels()
            .iter()
            .map(String::as_str)
            .filter(|l| Some(*l) != self.target())
            .collect()
    }

    pub fn transform(&self, label: &str) -> Option<&Polynomial> {
        self.space.index_of(label).map(|i| &self.transforms[i])
    }

    /// 0/1 assignments of η0, η1, δ1, δ2 (and ψ when used), with ψ the
    /// slowest-varying and δ2 the fastest.
    pub fn parameter_vertices(&self) -> Vec<ParameterPoint> {
        let psi_values: &[u8] = if self.uses_psi() { &[0, 1] } else { &[0] };
        let mut out = Vec::with_capacity(16 * psi_values.len());
        for &psi in psi_values {
            for bits in 0u8..16 {
                out.push(ParameterPoint::from_bits(
                    (bits >> 3) & 1,
                    (bits >> 2) & 1,
                    (bits >> 1) & 1,
                    bits & 1,
                    psi,
                ));
            }
        }
        out
    }

    /// The Ξ image of a parameter point, dense over [`space`](Self::space).
    pub fn xi_transform(&self, p: &ParameterPoint) -> Vec<Rational> {
        self.transforms.iter().map(|t| t.evaluate(p)).collect()
    }

    pub fn xi_point(&self, p: &ParameterPoint) -> Point {
        Point::from_dense(&self.space, &self.xi_transform(p))
    }

    pub fn vertex_set(&self) -> VertexSet {
        let images = self
            .parameter_vertices()
            .iter()
            .map(|p| self.xi_transform(p))
            .collect::<Vec<_>>();
        VertexSet::new(&self.space, images).expect("scenarios have at least one vertex")
    }
}

pub fn enumerate_parameter_vertices(s: &Scenario) -> Vec<ParameterPoint> {
    s.parameter_vertices()
}

pub fn xi_transform(s: &Scenario, p: &ParameterPoint) -> Vec<Rational> {
    s.xi_transform(p)
}

pub fn scenario_vertex_set(s: &Scenario) -> VertexSet {
    s.vertex_set()
}

/// P(C=c, B=b | A=a, U)
fn zeta(c: u8, b: u8, a: u8) -> Polynomial {
    Polynomial::indicator(Param::eta(b), c == 1).times(&Polynomial::indicator(Param::delta(a), b == 1))
}

/// P(C=c | A=a, U)
fn gamma(c: u8, a: u8) -> Polynomial {
    Polynomial::sum((0..2).map(|b| zeta(c, b, a)))
}

/// P(B=b | A=a, U)
fn theta(b: u8, a: u8) -> Polynomial {
    Polynomial::indicator(Param::delta(a), b == 1)
}

fn alpha() -> Polynomial {
    Polynomial::param(Param::Eta1).minus(Polynomial::param(Param::Eta0))
}

const CB: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

fn gamma_coordinates() -> Vec<(String, Polynomial)> {
    let mut out = Vec::new();
    for a in 1..=2 {
        for c in 0..2 {
            out.push((format!("g{c}{a}"), gamma(c, a)));
        }
    }
    out
}

fn theta_coordinates() -> Vec<(String, Polynomial)> {
    let mut out = Vec::new();
    for a in 1..=2 {
        for b in 0..2 {
            out.push((format!("t{b}{a}"), theta(b, a)));
        }
    }
    out
}

fn zeta_coordinates() -> Vec<(String, Polynomial)> {
    (1..=2)
        .flat_map(|a| CB.iter().map(move |&(c, b)| (format!("z{c}{b}.{a}"), zeta(c, b, a))))
        .collect()
}

/// P(C=c, B=b | U), mixing the two arms by ψ.
fn phi_coordinates() -> Vec<(String, Polynomial)> {
    CB.iter()
        .map(|&(c, b)| {
            let mixed = zeta(c, b, 1)
                .times(&Polynomial::complement(Param::Psi))
                .plus(zeta(c, b, 2).times(&Polynomial::param(Param::Psi)));
            (format!("p{c}{b}"), mixed)
        })
        .collect()
}

/// P(C=c, B=b, A=a | U)
fn fig3_coordinates() -> Vec<(String, Polynomial)> {
    (1..=2)
        .flat_map(|a| {
            CB.iter().map(move |&(c, b)| {
                let arm = Polynomial::indicator(Param::Psi, a == 2);
                (format!("x{c}{b}{a}"), zeta(c, b, a).times(&arm))
            })
        })
        .collect()
}
