//! Exact V- to H-representation conversion for bounded polytopes.
//!
//! The affine hull of the vertices is computed first. Its equalities are
//! brought to reduced echelon form with pivots on the *last* possible
//! coordinates, so every constraint can be reduced to a unique
//! representative that only mentions the remaining (free) coordinates. The
//! vertices are then full-dimensional over the free coordinates and the
//! facets come out of an incremental double-description pass on the cone of
//! valid inequalities.

mod dd;
mod linalg;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arith::{AffineForm, CoordinateSpace, LinearConstraint, Point, Rational, Relation};
use crate::error::{ArithError, PolytopeError};

/// Default limit on ambient coordinates accepted by [`facet_enumeration`].
pub const DEFAULT_COORDINATE_CAP: usize = 16;

/// Finite point set in a named coordinate space, duplicates removed
/// (first occurrence wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    space: Arc<CoordinateSpace>,
    vertices: Vec<Vec<Rational>>,
}

impl VertexSet {
    pub fn new(
        space: &Arc<CoordinateSpace>,
        vertices: impl IntoIterator<Item = Vec<Rational>>,
    ) -> Result<Self, PolytopeError> {
        let mut out: Vec<Vec<Rational>> = Vec::new();
        for (index, v) in vertices.into_iter().enumerate() {
            if v.len() != space.dim() {
                return Err(PolytopeError::WrongLength {
                    index,
                    got: v.len(),
                    expected: space.dim(),
                });
            }
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(PolytopeError::Empty);
        }
        Ok(Self {
            space: Arc::clone(space),
            vertices: out,
        })
    }

    pub fn space(&self) -> &Arc<CoordinateSpace> {
        &self.space
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        Point::from_dense(&self.space, &self.vertices[i])
    }

    /// Projection onto the coordinates other than `label`.
    pub fn drop_coordinate(&self, name: &str, label: &str) -> Result<Self, PolytopeError> {
        let idx = self
            .space
            .index_of(label)
            .ok_or_else(|| ArithError::UnknownCoordinate(label.to_string()))?;
        let space = self.space.without(name, label);
        let projected = self.vertices.iter().map(|v| {
            v.iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, x)| x.clone())
                .collect()
        });
        Self::new(&space, projected)
    }
}

/// Affine hull of a vertex set as independent equalities in reduced form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHull {
    space: Arc<CoordinateSpace>,
    equalities: Vec<LinearConstraint>,
    /// Equality rows scaled so the pivot coefficient is 1, paired with it.
    reducers: Vec<(usize, AffineForm)>,
    dimension: usize,
}

impl AffineHull {
    pub fn space(&self) -> &Arc<CoordinateSpace> {
        &self.space
    }

    /// Canonical equalities, sorted.
    pub fn equalities(&self) -> &[LinearConstraint] {
        &self.equalities
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Coordinates eliminated by [`reduce`](Self::reduce), ascending.
    pub fn pivot_coordinates(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.reducers.iter().map(|(i, _)| *i).collect();
        p.sort_unstable();
        p
    }

    pub fn free_coordinates(&self) -> Vec<usize> {
        let pivots = self.pivot_coordinates();
        (0..self.space.dim()).filter(|i| !pivots.contains(i)).collect()
    }

    /// The unique representative of `form` modulo the hull equalities that
    /// has zero coefficient on every pivot coordinate. Two forms agree on the
    /// whole affine hull iff their reductions are equal.
    pub fn reduce(&self, form: &AffineForm) -> AffineForm {
        let mut out = form.clone();
        for (pivot, row) in &self.reducers {
            let c = out.coeffs()[*pivot].clone();
            if !c.is_zero() {
                out = out.sub(&row.scale(&c));
            }
        }
        out
    }

    /// Reduces then canonicalizes; constraints that coincide on the hull map
    /// to the same value.
    pub fn canonical(&self, c: &LinearConstraint) -> Result<LinearConstraint, ArithError> {
        let form = c.form().rebase(&self.space)?;
        LinearConstraint::new(self.reduce(&form), c.relation()).canonicalize()
    }
}

pub fn affine_hull(vs: &VertexSet) -> AffineHull {
    let space = Arc::clone(vs.space());
    let d = space.dim();
    let base = &vs.vertices()[0];

    // Normals of the hull are the null space of the difference vectors.
    let diffs: Vec<Vec<Rational>> = vs.vertices()[1..]
        .iter()
        .map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let forward: Vec<usize> = (0..d).collect();
    let (reduced, pivots) = linalg::rref(diffs, &forward);
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    let normals: Vec<Vec<Rational>> = free
        .iter()
        .map(|&f| {
            let mut n = vec![Rational::zero(); d];
            n[f] = Rational::from_integer(1.into());
            for (row, &p) in reduced.iter().zip(&pivots) {
                n[p] = -row[f].clone();
            }
            n
        })
        .collect();

    // Rows (n | -n·base) re-echeloned with pivots preferring late coordinates.
    let rows: Vec<Vec<Rational>> = normals
        .into_iter()
        .map(|n| {
            let c: Rational = n.iter().zip(base).map(|(a, b)| a * b).sum();
            let mut row = n;
            row.push(-c);
            row
        })
        .collect();
    let backward: Vec<usize> = (0..d).rev().collect();
    let (eq_rows, eq_pivots) = linalg::rref(rows, &backward);

    let mut reducers = Vec::with_capacity(eq_rows.len());
    let mut equalities = Vec::with_capacity(eq_rows.len());
    for (mut row, pivot) in eq_rows.into_iter().zip(eq_pivots) {
        let constant = row.pop().expect("constant column");
        let form = AffineForm::from_dense(&space, row, constant);
        equalities.push(
            LinearConstraint::eq(form.clone())
                .canonicalize()
                .expect("hull equalities are satisfiable"),
        );
        reducers.push((pivot, form));
    }
    equalities.sort_by_key(LinearConstraint::integer_row);
    AffineHull {
        dimension: d - equalities.len(),
        space,
        equalities,
        reducers,
    }
}

/// Affine-hull equalities plus irredundant facet inequalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRepresentation {
    hull: AffineHull,
    facets: Vec<LinearConstraint>,
}

impl HRepresentation {
    pub fn space(&self) -> &Arc<CoordinateSpace> {
        self.hull.space()
    }

    pub fn hull(&self) -> &AffineHull {
        &self.hull
    }

    pub fn equalities(&self) -> &[LinearConstraint] {
        self.hull.equalities()
    }

    /// Canonical, reduced modulo the equalities, sorted lexicographically by
    /// integer coefficient row.
    pub fn facets(&self) -> &[LinearConstraint] {
        &self.facets
    }

    pub fn affine_dimension(&self) -> usize {
        self.hull.dimension()
    }

    pub fn reduce(&self, form: &AffineForm) -> AffineForm {
        self.hull.reduce(form)
    }

    pub fn canonical(&self, c: &LinearConstraint) -> Result<LinearConstraint, ArithError> {
        self.hull.canonical(c)
    }

    pub fn contains(&self, point: &Point) -> Result<MembershipReport, ArithError> {
        let eval = |cs: &[LinearConstraint]| -> Result<Vec<Rational>, ArithError> {
            cs.iter().map(|c| c.form().evaluate(point)).collect()
        };
        Ok(MembershipReport::new(eval(self.equalities())?, eval(&self.facets)?))
    }

    pub fn contains_dense(&self, x: &[Rational]) -> MembershipReport {
        let eval = |cs: &[LinearConstraint]| cs.iter().map(|c| c.form().evaluate_dense(x)).collect();
        MembershipReport::new(eval(self.equalities()), eval(&self.facets))
    }

    /// `{space, coordinates, equalities, facets, dim}` with each constraint
    /// an integer row `[coeffs..., const]`.
    pub fn to_json(&self) -> Value {
        let rows = |cs: &[LinearConstraint]| -> Vec<Value> {
            cs.iter()
                .map(|c| Value::Array(c.integer_row().iter().map(int_json).collect()))
                .collect()
        };
        json!({
            "space": self.space().name(),
            "coordinates": self.space().labels(),
            "equalities": rows(self.equalities()),
            "facets": rows(&self.facets),
            "dim": self.affine_dimension(),
        })
    }
}

fn int_json(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => Value::from(i),
        None => Value::from(v.to_string()),
    }
}

/// Per-constraint slacks of a point against an H-representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipReport {
    pub equality_slacks: Vec<Rational>,
    pub facet_slacks: Vec<Rational>,
    pub member: bool,
}

impl MembershipReport {
    fn new(equality_slacks: Vec<Rational>, facet_slacks: Vec<Rational>) -> Self {
        let member = equality_slacks.iter().all(Zero::is_zero) && facet_slacks.iter().all(|s| !s.is_negative());
        Self {
            equality_slacks,
            facet_slacks,
            member,
        }
    }

    pub fn violated_equalities(&self) -> Vec<usize> {
        (0..self.equality_slacks.len())
            .filter(|&i| !self.equality_slacks[i].is_zero())
            .collect()
    }

    pub fn violated_facets(&self) -> Vec<usize> {
        (0..self.facet_slacks.len())
            .filter(|&i| self.facet_slacks[i].is_negative())
            .collect()
    }
}

pub fn contains(h: &HRepresentation, point: &Point) -> Result<MembershipReport, ArithError> {
    h.contains(point)
}

pub fn facet_enumeration(vs: &VertexSet) -> Result<HRepresentation, PolytopeError> {
    facet_enumeration_capped(vs, DEFAULT_COORDINATE_CAP)
}

pub fn facet_enumeration_capped(vs: &VertexSet, cap: usize) -> Result<HRepresentation, PolytopeError> {
    let space = vs.space();
    if space.dim() > cap {
        return Err(PolytopeError::DimensionOverflow {
            coordinates: space.dim(),
            cap,
        });
    }
    let hull = affine_hull(vs);
    let free = hull.free_coordinates();
    if free.is_empty() {
        return Ok(HRepresentation {
            hull,
            facets: Vec::new(),
        });
    }

    let rows: Vec<Vec<BigInt>> = vs
        .vertices()
        .iter()
        .map(|v| {
            let mut h = Vec::with_capacity(free.len() + 1);
            h.push(Rational::from_integer(1.into()));
            h.extend(free.iter().map(|&i| v[i].clone()));
            linalg::primitive_integer(&h)
        })
        .collect();

    let mut facets: Vec<LinearConstraint> = dd::extreme_rays(&rows)
        .into_iter()
        .map(|ray| {
            let mut coeffs = vec![Rational::zero(); space.dim()];
            for (&i, a) in free.iter().zip(&ray[1..]) {
                coeffs[i] = Rational::from_integer(a.clone());
            }
            let form = AffineForm::from_dense(space, coeffs, Rational::from_integer(ray[0].clone()));
            LinearConstraint::new(form, Relation::Geq)
                .canonicalize()
                .expect("facets of a nonempty polytope are satisfiable")
        })
        .collect();
    facets.sort_by_key(LinearConstraint::integer_row);
    facets.dedup();
    Ok(HRepresentation { hull, facets })
}
