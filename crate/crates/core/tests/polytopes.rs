use std::sync::Arc;

use ivbounds::arith::{int, ratio, CoordinateSpace, Rational};
use ivbounds::polytope::{facet_enumeration, VertexSet};
use proptest::prelude::*;

fn space(d: usize) -> Arc<CoordinateSpace> {
    CoordinateSpace::new("test", (0..d).map(|i| format!("x{i}"))).unwrap()
}

fn hypercube(d: usize) -> VertexSet {
    let vs = (0..1u32 << d).map(|bits| (0..d).map(|i| int(((bits >> i) & 1) as i64)).collect());
    VertexSet::new(&space(d), vs).unwrap()
}

fn simplex(d: usize) -> VertexSet {
    let mut vs = vec![vec![int(0); d]];
    for i in 0..d {
        let mut v = vec![int(0); d];
        v[i] = int(1);
        vs.push(v);
    }
    VertexSet::new(&space(d), vs).unwrap()
}

fn cross_polytope(d: usize) -> VertexSet {
    let mut vs = Vec::new();
    for i in 0..d {
        for s in [1, -1] {
            let mut v = vec![int(0); d];
            v[i] = int(s);
            vs.push(v);
        }
    }
    VertexSet::new(&space(d), vs).unwrap()
}

#[test]
fn hypercube_has_2d_facets() {
    for d in 2..=5 {
        let h = facet_enumeration(&hypercube(d)).unwrap();
        assert_eq!((h.facets().len(), h.affine_dimension()), (2 * d, d), "d = {d}");
    }
}

#[test]
fn simplex_has_d_plus_1_facets() {
    for d in 2..=5 {
        let h = facet_enumeration(&simplex(d)).unwrap();
        assert_eq!(h.facets().len(), d + 1, "d = {d}");
    }
}

#[test]
fn cross_polytope_has_2_pow_d_facets() {
    for d in 2..=5 {
        let h = facet_enumeration(&cross_polytope(d)).unwrap();
        assert_eq!(h.facets().len(), 1 << d, "d = {d}");
        for f in h.facets() {
            assert_eq!(f.form().constant(), &int(1));
            assert!(f.form().coeffs().iter().all(|c| c == &int(1) || c == &int(-1)));
        }
    }
}

#[test]
fn embedded_simplex_reports_equality() {
    // standard simplex in R^4 lives in the hyperplane sum = 1
    let d = 4;
    let vs = (0..d).map(|i| (0..d).map(|j| int((i == j) as i64)).collect());
    let h = facet_enumeration(&VertexSet::new(&space(d), vs).unwrap()).unwrap();
    assert_eq!(
        (h.affine_dimension(), h.equalities().len(), h.facets().len()),
        (3, 1, 4)
    );
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every input point satisfies every derived constraint, and every facet
    /// is tight on at least dimension-many input points.
    #[test]
    fn facets_are_valid_and_supported(points in prop::collection::vec(prop::collection::vec(small_rational(), 3), 4..10)) {
        let vs = VertexSet::new(&space(3), points).unwrap();
        let h = facet_enumeration(&vs).unwrap();
        for v in vs.vertices() {
            prop_assert!(h.contains_dense(v).member);
        }
        let dim = h.affine_dimension();
        for f in h.facets() {
            let tight = vs.vertices().iter().filter(|v| f.form().evaluate_dense(v) == int(0)).count();
            prop_assert!(tight >= dim, "facet {} tight on {} points", f, tight);
        }
    }

    /// Convex combinations of the inputs stay inside; a point pushed past a
    /// facet falls outside.
    #[test]
    fn membership_matches_hull(
        points in prop::collection::vec(prop::collection::vec(small_rational(), 3), 4..9),
        weights in prop::collection::vec(0i64..5, 9),
    ) {
        let vs = VertexSet::new(&space(3), points).unwrap();
        let h = facet_enumeration(&vs).unwrap();
        let n = vs.len();
        let total: i64 = weights[..n].iter().sum::<i64>().max(1);
        let mut x = vec![int(0); 3];
        for (v, w) in vs.vertices().iter().zip(&weights) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += vi * ratio(*w, total);
            }
        }
        if weights[..n].iter().sum::<i64>() > 0 {
            prop_assert!(h.contains_dense(&x).member);
        }
        if let Some(f) = h.facets().first() {
            // step along the inward normal's opposite from a vertex on the facet
            if let Some(v) = vs.vertices().iter().find(|v| f.form().evaluate_dense(v) == int(0)) {
                let outside: Vec<Rational> = v.iter().zip(f.form().coeffs()).map(|(a, c)| a - c).collect();
                prop_assert!(!h.contains_dense(&outside).member);
            }
        }
    }
}
