//! Exact linear programming over mixture weights on scenario vertices.
//!
//! Independent of the facet machinery: the optimum of the target over all
//! vertex mixtures that reproduce the observed coordinates is the sharp
//! interval that [`crate::bounds`] computes in closed form.

use num_traits::{One, Signed, Zero};

use crate::arith::{rational_to_string, Point, Rational};
use crate::bounds::{evaluate_bounds, model_check, scenario_bounds, BoundSet, Interval};
use crate::data::ObservedTables;
use crate::error::OracleError;
use crate::polytope::VertexSet;
use crate::scenarios::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, weights: Vec<Rational> },
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            LpOutcome::Infeasible => None,
        }
    }
}

/// Weights `w >= 0` with `Σ w = 1` and `Σ w_i v_i[l] = observed[l]` for
/// every observed label `l`; objective `Σ w_i v_i[objective]`.
#[derive(Debug, Clone)]
pub struct MixtureLP {
    vertices: VertexSet,
    objective: usize,
    observed: Vec<(usize, Rational)>,
}

impl MixtureLP {
    /// Observed labels outside the vertex space are ignored; missing
    /// non-objective coordinates are left free.
    pub fn new(vertices: &VertexSet, objective: &str, observed: &Point) -> Result<Self, OracleError> {
        let space = vertices.space();
        let objective = space.index_of(objective).ok_or(OracleError::NoTarget)?;
        let observed = observed
            .iter()
            .filter_map(|(l, v)| space.index_of(l).map(|i| (i, v.clone())))
            .filter(|(i, _)| *i != objective)
            .collect();
        Ok(Self {
            vertices: vertices.clone(),
            objective,
            observed,
        })
    }

    fn rows(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let vs = self.vertices.vertices();
        let mut a = vec![vec![Rational::one(); vs.len()]];
        let mut b = vec![Rational::one()];
        for (i, value) in &self.observed {
            a.push(vs.iter().map(|v| v[*i].clone()).collect());
            b.push(value.clone());
        }
        (a, b)
    }

    fn objective_row(&self) -> Vec<Rational> {
        self.vertices
            .vertices()
            .iter()
            .map(|v| v[self.objective].clone())
            .collect()
    }

    /// Substitutes a weight vector into every constraint.
    pub fn is_feasible_witness(&self, weights: &[Rational]) -> bool {
        let (a, b) = self.rows();
        weights.len() == self.vertices.len()
            && weights.iter().all(|w| !w.is_negative())
            && a.iter()
                .zip(&b)
                .all(|(row, rhs)| row.iter().zip(weights).map(|(x, w)| x * w).sum::<Rational>() == *rhs)
    }

    pub fn objective_at(&self, weights: &[Rational]) -> Rational {
        self.objective_row().iter().zip(weights).map(|(c, w)| c * w).sum()
    }

    pub fn solve(&self, sense: Sense) -> LpOutcome {
        let (a, b) = self.rows();
        let c = self.objective_row();
        solve_standard(&a, &b, &c, sense)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs; `cost_value` tracks minus the objective.
    costs: Vec<Rational>,
    cost_value: Rational,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        for x in self.rows[r].iter_mut() {
            *x /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.costs[j].is_zero() {
            let f = self.costs[j].clone();
            for (x, y) in self.costs.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
            self.cost_value -= &f * &pivot_rhs;
        }
        self.basis[r] = j;
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic index. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(j) = (0..allowed).find(|&j| self.costs[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        self.rows.remove(r);
        self.rhs.remove(r);
        self.basis.remove(r);
    }
}

/// Two-phase simplex for `min/max c·x` subject to `Ax = b`, `x >= 0`.
/// The feasible region is assumed bounded whenever nonempty.
pub fn solve_standard(a: &[Vec<Rational>], b: &[Rational], c: &[Rational], sense: Sense) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut full: Vec<Rational> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
        full.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        rows.push(full);
        rhs.push(if flip { -bi } else { bi.clone() });
    }
    // phase one: minimise the sum of artificials
    let mut costs = vec![Rational::zero(); n + m];
    let mut cost_value = Rational::zero();
    for (row, r) in rows.iter().zip(&rhs) {
        for (x, y) in costs.iter_mut().zip(row).take(n) {
            *x -= y;
        }
        cost_value -= r;
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
        costs,
        cost_value,
    };
    t.optimize(n + m);
    if !t.cost_value.is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] < n {
            r += 1;
            continue;
        }
        match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
            Some(j) => {
                t.pivot(r, j);
                r += 1;
            }
            None => t.remove_row(r),
        }
    }
    // phase two
    let sign = match sense {
        Sense::Min => Rational::one(),
        Sense::Max => -Rational::one(),
    };
    t.costs = c
        .iter()
        .map(|x| x * &sign)
        .chain((0..m).map(|_| Rational::zero()))
        .collect();
    t.cost_value = Rational::zero();
    for i in 0..t.rows.len() {
        let j = t.basis[i];
        let f = t.costs[j].clone();
        if f.is_zero() {
            continue;
        }
        for (x, y) in t.costs.iter_mut().zip(&t.rows[i]) {
            *x -= &f * y;
        }
        t.cost_value -= &f * &t.rhs[i];
    }
    assert!(t.optimize(n), "mixture LP is bounded");
    let mut weights = vec![Rational::zero(); n];
    for (i, &j) in t.basis.iter().enumerate() {
        weights[j] = t.rhs[i].clone();
    }
    let value = c.iter().zip(&weights).map(|(x, w)| x * w).sum();
    LpOutcome::Optimal { value, weights }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub scenario: String,
    pub target: String,
    /// `(min, max)`, or `None` if the data lie outside the hull.
    pub oracle: Option<(Rational, Rational)>,
    pub closed_form: Interval,
    /// Model check at zero tolerance.
    pub exact_check_pass: bool,
    /// Model check at the caller's tolerance.
    pub tolerant_check_pass: bool,
    pub witnesses_verified: bool,
    pub agree: bool,
}

impl CrossCheckReport {
    pub fn closed_form_rejects(&self) -> bool {
        !self.exact_check_pass || self.closed_form.empty
    }

    pub fn into_result(self) -> Result<Self, OracleError> {
        if self.agree {
            return Ok(self);
        }
        match &self.oracle {
            None => Err(OracleError::FeasibilityMismatch {
                oracle_infeasible: true,
                closed_form_rejects: self.closed_form_rejects(),
            }),
            Some(_) if self.closed_form_rejects() => Err(OracleError::FeasibilityMismatch {
                oracle_infeasible: false,
                closed_form_rejects: true,
            }),
            Some((lo, hi)) => {
                let (side, oracle, closed) = if *lo != self.closed_form.lower {
                    ("lower", lo, &self.closed_form.lower)
                } else {
                    ("upper", hi, &self.closed_form.upper)
                };
                Err(OracleError::Mismatch {
                    side,
                    oracle: rational_to_string(oracle),
                    closed_form: rational_to_string(closed),
                })
            }
        }
    }
}

/// Solves the mixture LP in both directions and compares with the closed
/// form. Infeasibility must coincide with an exact model-check failure or an
/// empty interval; otherwise both endpoints must match exactly.
pub fn cross_check_point(s: &Scenario, data: &Point, tol: &Rational) -> Result<CrossCheckReport, OracleError> {
    let (_, bs) = scenario_bounds(s)?;
    cross_check_with(s, &bs, data, tol)
}

/// [`cross_check_point`] with the scenario's bounds already derived.
pub fn cross_check_with(
    s: &Scenario,
    bs: &BoundSet,
    data: &Point,
    tol: &Rational,
) -> Result<CrossCheckReport, OracleError> {
    let target = s.target().ok_or(OracleError::NoTarget)?;
    let closed_form = evaluate_bounds(bs, data)?;
    let exact_check_pass = model_check(bs, data, &Rational::zero())?.pass;
    let tolerant_check_pass = model_check(bs, data, tol)?.pass;

    let lp = MixtureLP::new(&s.vertex_set(), target, data)?;
    let (min, max) = (lp.solve(Sense::Min), lp.solve(Sense::Max));
    let (oracle, witnesses_verified) = match (&min, &max) {
        (LpOutcome::Optimal { value: lo, weights: wl }, LpOutcome::Optimal { value: hi, weights: wh }) => {
            let ok = lp.is_feasible_witness(wl)
                && lp.is_feasible_witness(wh)
                && lp.objective_at(wl) == *lo
                && lp.objective_at(wh) == *hi;
            (Some((lo.clone(), hi.clone())), ok)
        }
        _ => (None, true),
    };

    let mut report = CrossCheckReport {
        scenario: s.name().to_string(),
        target: target.to_string(),
        oracle,
        closed_form,
        exact_check_pass,
        tolerant_check_pass,
        witnesses_verified,
        agree: false,
    };
    report.agree = witnesses_verified
        && match &report.oracle {
            None => report.closed_form_rejects(),
            Some((lo, hi)) => {
                !report.closed_form_rejects() && *lo == report.closed_form.lower && *hi == report.closed_form.upper
            }
        };
    Ok(report)
}

pub fn cross_check(s: &Scenario, data: &ObservedTables, tol: &Rational) -> Result<CrossCheckReport, OracleError> {
    let (_, bs) = scenario_bounds(s)?;
    let point = data.point_for_space(&bs.space)?;
    cross_check_with(s, &bs, &point, tol)
}
