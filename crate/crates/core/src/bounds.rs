//! Turning a hull description into symbolic causal bounds and model tests,
//! and evaluating both on observed tables.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{
    ratio, rational_to_string, AffineForm, CoordinateSpace, LinearConstraint, Point, Rational, Relation,
};
use crate::data::{PairTable, ZetaTable};
use crate::error::BoundsError;
use crate::polytope::{facet_enumeration, HRepresentation};
use crate::scenarios::Scenario;

/// Default slack allowed by [`model_check`] on decimal tables.
pub fn default_tolerance() -> Rational {
    ratio(5, 10_000)
}

/// Symbolic bounds `max(lower_forms) <= target <= min(upper_forms)` over the
/// observable coordinates, valid whenever the observable tests hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSet {
    pub scenario: String,
    pub target: String,
    pub space: Arc<CoordinateSpace>,
    pub lower_forms: Vec<AffineForm>,
    pub upper_forms: Vec<AffineForm>,
    /// Observable-only facets other than coordinate nonnegativity.
    pub observable_tests: Vec<LinearConstraint>,
    /// Observable-only facets equivalent to some coordinate being >= 0.
    pub trivial_tests: Vec<LinearConstraint>,
    pub hull_equalities: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundCounts {
    pub observable: usize,
    pub trivial: usize,
    pub equalities: usize,
    pub lower: usize,
    pub upper: usize,
}

impl BoundSet {
    pub fn counts(&self) -> BoundCounts {
        BoundCounts {
            observable: self.observable_tests.len(),
            trivial: self.trivial_tests.len(),
            equalities: self.hull_equalities.len(),
            lower: self.lower_forms.len(),
            upper: self.upper_forms.len(),
        }
    }

    pub fn to_json(&self) -> Value {
        let forms = |fs: &[AffineForm]| fs.iter().map(form_json).collect::<Vec<_>>();
        let constraints = |cs: &[LinearConstraint]| cs.iter().map(constraint_json).collect::<Vec<_>>();
        let c = self.counts();
        json!({
            "scenario": self.scenario,
            "target": self.target,
            "coordinates": self.space.labels(),
            "counts": {
                "observable": c.observable,
                "trivial": c.trivial,
                "equalities": c.equalities,
                "lower": c.lower,
                "upper": c.upper,
            },
            "hull_equalities": constraints(&self.hull_equalities),
            "observable_tests": constraints(&self.observable_tests),
            "trivial_tests": constraints(&self.trivial_tests),
            "lower": forms(&self.lower_forms),
            "upper": forms(&self.upper_forms),
        })
    }
}

pub(crate) fn form_json(f: &AffineForm) -> Value {
    let coeffs: serde_json::Map<String, Value> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (f.space().label(i).to_string(), Value::from(rational_to_string(c))))
        .collect();
    json!({
        "coeffs": coeffs,
        "const": rational_to_string(f.constant()),
        "text": f.to_string(),
    })
}

pub(crate) fn constraint_json(c: &LinearConstraint) -> Value {
    let mut v = form_json(c.form());
    v["relation"] = Value::from(match c.relation() {
        Relation::Eq => "=",
        Relation::Geq => ">=",
    });
    v["text"] = Value::from(c.to_string());
    v
}

/// Canonical `x_l >= 0` for every coordinate except `skip`.
fn nonnegativity(h: &HRepresentation, skip: Option<&str>) -> Result<Vec<LinearConstraint>, BoundsError> {
    let full = h.space();
    full.labels()
        .iter()
        .filter(|l| Some(l.as_str()) != skip)
        .map(|l| {
            let f = AffineForm::from_terms(full, [(l.as_str(), Rational::one())], Rational::zero())?;
            Ok(h.canonical(&LinearConstraint::geq(f))?)
        })
        .collect()
}

/// Splits the hull's facets by the sign of the target coefficient.
/// Equalities that involve the target identify it and contribute the same
/// form as both a lower and an upper bound.
pub fn partition(h: &HRepresentation, scenario: &str, target: &str) -> Result<BoundSet, BoundsError> {
    let full = h.space();
    let t = full
        .index_of(target)
        .ok_or_else(|| BoundsError::UnknownTarget(target.to_string()))?;
    let space = full.without(&format!("{scenario}-observable"), target);

    let nonnegativity = nonnegativity(h, Some(target))?;

    // target = -(rest)/c
    let solve_for_target = |form: &AffineForm, c: &Rational| -> Result<AffineForm, BoundsError> {
        let mut rest = form.clone();
        let zeroed: Vec<Rational> = rest
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, v)| if i == t { Rational::zero() } else { v.clone() })
            .collect();
        rest = AffineForm::from_dense(full, zeroed, rest.constant().clone());
        Ok(rest.scale(&(-Rational::one() / c)).rebase(&space)?)
    };

    let mut bounds = BoundSet {
        scenario: scenario.to_string(),
        target: target.to_string(),
        space: Arc::clone(&space),
        lower_forms: Vec::new(),
        upper_forms: Vec::new(),
        observable_tests: Vec::new(),
        trivial_tests: Vec::new(),
        hull_equalities: Vec::new(),
    };

    for eq in h.equalities() {
        let c = &eq.form().coeffs()[t];
        if c.is_zero() {
            bounds
                .hull_equalities
                .push(LinearConstraint::eq(eq.form().rebase(&space)?));
        } else {
            let identified = solve_for_target(eq.form(), c)?;
            bounds.lower_forms.push(identified.clone());
            bounds.upper_forms.push(identified);
        }
    }

    for facet in h.facets() {
        let c = &facet.form().coeffs()[t];
        if c.is_zero() {
            let observable = LinearConstraint::geq(facet.form().rebase(&space)?);
            if nonnegativity.contains(facet) {
                bounds.trivial_tests.push(observable);
            } else {
                bounds.observable_tests.push(observable);
            }
        } else if c.is_positive() {
            bounds.lower_forms.push(solve_for_target(facet.form(), c)?);
        } else {
            bounds.upper_forms.push(solve_for_target(facet.form(), c)?);
        }
    }

    if bounds.lower_forms.is_empty() && bounds.upper_forms.is_empty() {
        return Err(BoundsError::TargetUnconstrained(target.to_string()));
    }
    Ok(bounds)
}

/// Facet enumeration followed by [`partition`] on the scenario's own target.
pub fn scenario_bounds(s: &Scenario) -> Result<(HRepresentation, BoundSet), BoundsError> {
    let target = s.target().ok_or_else(|| BoundsError::NoTarget(s.name().to_string()))?;
    let h = facet_enumeration(&s.vertex_set())?;
    let bs = partition(&h, s.name(), target)?;
    Ok((h, bs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lower: Rational,
    pub upper: Rational,
    /// Index into the lower forms of the first form attaining the maximum.
    pub lower_witness: usize,
    pub upper_witness: usize,
    /// `lower > upper`: data incompatible with the model.
    pub empty: bool,
}

impl Interval {
    fn new(lower: Rational, lower_witness: usize, upper: Rational, upper_witness: usize) -> Self {
        let empty = lower > upper;
        Self {
            lower,
            upper,
            lower_witness,
            upper_witness,
            empty,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn is_within(&self, outer: &Interval) -> bool {
        outer.lower <= self.lower && self.upper <= outer.upper
    }
}

fn extreme_by<F>(values: Vec<Rational>, better: F) -> Option<(Rational, usize)>
where
    F: Fn(&Rational, &Rational) -> bool,
{
    let mut best: Option<(Rational, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match &best {
            Some((b, _)) if !better(&v, b) => {}
            _ => best = Some((v, i)),
        }
    }
    best
}

pub fn evaluate_bounds(bs: &BoundSet, data: &Point) -> Result<Interval, BoundsError> {
    let eval = |fs: &[AffineForm]| -> Result<Vec<Rational>, BoundsError> {
        fs.iter().map(|f| Ok(f.evaluate(data)?)).collect()
    };
    let (lower, lw) = extreme_by(eval(&bs.lower_forms)?, |v, b| v > b)
        .ok_or_else(|| BoundsError::TargetUnconstrained(bs.target.clone()))?;
    let (upper, uw) = extreme_by(eval(&bs.upper_forms)?, |v, b| v < b)
        .ok_or_else(|| BoundsError::TargetUnconstrained(bs.target.clone()))?;
    Ok(Interval::new(lower, lw, upper, uw))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Test,
    Trivial,
    Equality,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckEntry {
    pub constraint: LinearConstraint,
    pub kind: CheckKind,
    pub slack: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheckReport {
    pub tolerance: Rational,
    pub entries: Vec<CheckEntry>,
    pub pass: bool,
}

impl ModelCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn section(&self, kind: CheckKind) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }
}

/// Slack of every observable test, trivial constraint and hull equality.
/// Inequalities pass with slack >= -tol, equalities with |slack| <= tol.
pub fn model_check(bs: &BoundSet, data: &Point, tol: &Rational) -> Result<ModelCheckReport, BoundsError> {
    check_sections(
        [
            (CheckKind::Test, bs.observable_tests.as_slice()),
            (CheckKind::Trivial, bs.trivial_tests.as_slice()),
            (CheckKind::Equality, bs.hull_equalities.as_slice()),
        ],
        data,
        tol,
    )
}

/// Every equality and facet of a hull, for scenarios without a target.
pub fn hull_check(h: &HRepresentation, data: &Point, tol: &Rational) -> Result<ModelCheckReport, BoundsError> {
    let nonneg = nonnegativity(h, None)?;
    let (trivial, tests): (Vec<LinearConstraint>, Vec<LinearConstraint>) =
        h.facets().iter().cloned().partition(|f| nonneg.contains(f));
    check_sections(
        [
            (CheckKind::Test, tests.as_slice()),
            (CheckKind::Trivial, trivial.as_slice()),
            (CheckKind::Equality, h.equalities()),
        ],
        data,
        tol,
    )
}

fn check_sections(
    sections: [(CheckKind, &[LinearConstraint]); 3],
    data: &Point,
    tol: &Rational,
) -> Result<ModelCheckReport, BoundsError> {
    let mut entries = Vec::new();
    for (kind, constraints) in sections {
        for c in constraints {
            let slack = c.form().evaluate(data)?;
            let pass = match c.relation() {
                Relation::Eq => slack.abs() <= *tol,
                Relation::Geq => slack >= -tol.clone(),
            };
            entries.push(CheckEntry {
                constraint: c.clone(),
                kind,
                slack,
                pass,
            });
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(ModelCheckReport {
        tolerance: tol.clone(),
        entries,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentalReport {
    /// `Σ_c max_a P(c, b | a)` for b = 0, 1.
    pub sums: [Rational; 2],
    pub max: Rational,
    pub pass: bool,
}

/// `max_b Σ_c max_a P(c, b | a) <= 1 + tol`.
pub fn instrumental_inequality(zeta: &ZetaTable, tol: &Rational) -> InstrumentalReport {
    let sums: [Rational; 2] = std::array::from_fn(|b| {
        (0..2)
            .map(|c| {
                let cb = 2 * c + b;
                std::cmp::max(&zeta[0][cb], &zeta[1][cb]).clone()
            })
            .sum()
    });
    let max = std::cmp::max(&sums[0], &sums[1]).clone();
    let pass = max <= Rational::one() + tol;
    InstrumentalReport { sums, max, pass }
}

/// Closed-form bounds on P(C=1 ‖ A=2) − P(C=1 ‖ A=1) from θ alone:
/// `max(-θ01-θ02, -θ11-θ12) <= β <= min(θ01+θ02, θ11+θ12)`.
pub fn beta_bounds(theta: &PairTable) -> Interval {
    let stay_zero = &theta[0][0] + &theta[1][0];
    let stay_one = &theta[0][1] + &theta[1][1];
    let (lower, lw) = extreme_by(vec![-stay_zero.clone(), -stay_one.clone()], |v, b| v > b).expect("two forms");
    let (upper, uw) = extreme_by(vec![stay_zero, stay_one], |v, b| v < b).expect("two forms");
    Interval::new(lower, lw, upper, uw)
}
