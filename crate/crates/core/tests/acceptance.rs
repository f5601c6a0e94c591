//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, OnceLock};

use ivbounds::arith::{
    format_decimal, int, parse_rational, AffineForm, CoordinateSpace, LinearConstraint, Point, Rational,
};
use ivbounds::bounds::{beta_bounds, evaluate_bounds, instrumental_inequality, model_check, scenario_bounds, BoundSet};
use ivbounds::data::{ObservedTables, ZetaTable};
use ivbounds::oracle::cross_check_with;
use ivbounds::polytope::{affine_hull, facet_enumeration, HRepresentation};
use ivbounds::{ParameterPoint, Scenario, ScenarioName};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x1b0d5;

struct Derived {
    scenario: Scenario,
    hull: HRepresentation,
    bounds: Option<BoundSet>,
}

fn derived(name: ScenarioName) -> &'static Derived {
    static CACHE: OnceLock<Vec<Derived>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        ScenarioName::ALL
            .iter()
            .map(|&n| {
                let scenario = Scenario::builtin(n);
                let hull = facet_enumeration(&scenario.vertex_set()).expect("facet enumeration");
                let bounds = scenario
                    .target()
                    .map(|_| scenario_bounds(&scenario).expect("partition").1);
                Derived { scenario, hull, bounds }
            })
            .collect()
    });
    &all[ScenarioName::ALL.iter().position(|&n| n == name).unwrap()]
}

fn bounds_of(name: ScenarioName) -> &'static BoundSet {
    derived(name).bounds.as_ref().expect("scenario has a target")
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn target_form(full: &Arc<CoordinateSpace>, target: &str) -> AffineForm {
    AffineForm::from_terms(full, [(target, Rational::one())], Rational::zero()).unwrap()
}

/// `target - L >= 0` (lower) or `U - target >= 0` (upper), canonical modulo
/// the hull's equalities, so forms written with different but equivalent
/// coordinates compare equal.
fn canonical_bounds(d: &Derived, forms: &[AffineForm], lower: bool) -> BTreeSet<String> {
    let full = d.hull.space();
    let t = target_form(full, d.scenario.target().unwrap());
    forms
        .iter()
        .map(|f| {
            let f = f.rebase(full).unwrap();
            let c = if lower { t.sub(&f) } else { f.sub(&t) };
            d.hull.canonical(&LinearConstraint::geq(c)).unwrap().to_string()
        })
        .collect()
}

fn canonical_tests(d: &Derived, tests: &[LinearConstraint]) -> BTreeSet<String> {
    tests
        .iter()
        .map(|c| {
            let f = c.form().rebase(d.hull.space()).unwrap();
            d.hull.canonical(&LinearConstraint::geq(f)).unwrap().to_string()
        })
        .collect()
}

fn parse_forms(space: &Arc<CoordinateSpace>, texts: &[&str]) -> Vec<AffineForm> {
    texts.iter().map(|t| AffineForm::parse(space, t).unwrap()).collect()
}

fn parse_constraints(space: &Arc<CoordinateSpace>, texts: &[&str]) -> Vec<LinearConstraint> {
    texts
        .iter()
        .map(|t| {
            let (lhs, rhs) = t.split_once(">=").unwrap();
            let l = AffineForm::parse(space, lhs).unwrap();
            let r = AffineForm::parse(space, rhs).unwrap();
            LinearConstraint::geq(l.sub(&r))
        })
        .collect()
}

fn compare_sets(what: &str, got: &BTreeSet<String>, want: &BTreeSet<String>) -> Result<(), String> {
    ensure(got == want, || {
        let missing: Vec<_> = want.difference(got).collect();
        let extra: Vec<_> = got.difference(want).collect();
        format!("{what}: missing {missing:?}, unexpected {extra:?}")
    })
}

const BIVARIATE_LOWER: [&str; 10] = [
    "2g01 - g02 + 2t01 - 3",
    "g01 + t01 - 2",
    "g02 + t02 - 2",
    "-g01 + 2g02 + 2t02 - 3",
    "-g01 + g02 - t01 + t02 - 1",
    "-g01 - t01",
    "-g02 - t02",
    "g01 - 2g02 - 2t02",
    "-2g01 + g02 - 2t01",
    "g01 - g02 + t01 - t02 - 1",
];

const BIVARIATE_UPPER: [&str; 10] = [
    "-2g01 + g02 + 2t01 + 1",
    "g01 - 2g02 + 2t02 + 1",
    "2g01 - g02 - 2t01 + 2",
    "-g01 + 2g02 - 2t02 + 2",
    "g01 - g02 - t01 + t02 + 1",
    "-g02 + t02 + 1",
    "g01 - t01 + 1",
    "g02 - t02 + 1",
    "-g01 + t01 + 1",
    "-g01 + g02 + t01 - t02 + 1",
];

const BIVARIATE_TESTS: [&str; 4] = [
    "t01 + t02 - g01 + g02 >= 0",
    "t01 + t02 + g01 - g02 >= 0",
    "t11 + t12 - g01 + g02 >= 0",
    "t11 + t12 + g01 - g02 >= 0",
];

// 2 - |g01 - g02| >= t01 + t02 >= |g01 - g02|, both signs of the difference
const BIVARIATE_TESTS_ABS: [&str; 4] = [
    "2 - g01 + g02 >= t01 + t02",
    "2 + g01 - g02 >= t01 + t02",
    "t01 + t02 >= g01 - g02",
    "t01 + t02 >= g02 - g01",
];

const TRIVARIATE_LOWER: [&str; 8] = [
    "z00.1 + z11.2 - 1",
    "z11.1 + z00.2 - 1",
    "-z01.1 - z10.1 + z11.1 - z10.2 - z11.2",
    "-z10.1 - z11.1 - z01.2 - z10.2 + z11.2",
    "-z01.1 - z10.1",
    "-z01.2 - z10.2",
    "-z00.1 - z01.1 + z00.2 - z01.2 - z10.2",
    "z00.1 - z01.1 - z10.1 - z00.2 - z01.2",
];

const TRIVARIATE_UPPER: [&str; 8] = [
    "1 - z10.1 - z01.2",
    "1 - z01.1 - z10.2",
    "z00.1 - z01.1 + z11.1 + z00.2 + z01.2",
    "z00.1 + z01.1 - z01.2 + z00.2 + z11.2",
    "z00.1 + z11.1",
    "z00.2 + z11.2",
    "z10.1 + z11.1 + z00.2 + z11.2 - z10.2",
    "z00.1 - z10.1 + z11.1 + z10.2 + z11.2",
];

const TRIVARIATE_TESTS: [&str; 4] = [
    "1 >= z00.1 + z10.2",
    "1 >= z10.1 + z00.2",
    "1 >= z11.1 + z01.2",
    "1 >= z01.1 + z11.2",
];

fn bivariate_derivation() -> Outcome {
    let d = derived(ScenarioName::Bivariate);
    let bs = bounds_of(ScenarioName::Bivariate);
    let tests = canonical_tests(d, &bs.observable_tests);
    compare_sets(
        "sum form",
        &tests,
        &canonical_tests(d, &parse_constraints(&bs.space, &BIVARIATE_TESTS)),
    )?;
    compare_sets(
        "absolute-value form",
        &tests,
        &canonical_tests(d, &parse_constraints(&bs.space, &BIVARIATE_TESTS_ABS)),
    )?;
    let lower = canonical_bounds(d, &bs.lower_forms, true);
    compare_sets(
        "lower",
        &lower,
        &canonical_bounds(d, &parse_forms(&bs.space, &BIVARIATE_LOWER), true),
    )?;
    let upper = canonical_bounds(d, &bs.upper_forms, false);
    compare_sets(
        "upper",
        &upper,
        &canonical_bounds(d, &parse_forms(&bs.space, &BIVARIATE_UPPER), false),
    )?;
    ensure(lower.len() == 10 && upper.len() == 10 && tests.len() == 4, || {
        "wrong counts".into()
    })?;
    Ok("4 tests, 10 lower, 10 upper; exact set match".into())
}

fn trivariate_derivation() -> Outcome {
    let d = derived(ScenarioName::Trivariate);
    let bs = bounds_of(ScenarioName::Trivariate);
    let tests = canonical_tests(d, &bs.observable_tests);
    compare_sets(
        "tests",
        &tests,
        &canonical_tests(d, &parse_constraints(&bs.space, &TRIVARIATE_TESTS)),
    )?;
    let lower = canonical_bounds(d, &bs.lower_forms, true);
    compare_sets(
        "lower",
        &lower,
        &canonical_bounds(d, &parse_forms(&bs.space, &TRIVARIATE_LOWER), true),
    )?;
    let upper = canonical_bounds(d, &bs.upper_forms, false);
    compare_sets(
        "upper",
        &upper,
        &canonical_bounds(d, &parse_forms(&bs.space, &TRIVARIATE_UPPER), false),
    )?;
    ensure(lower.len() == 8 && upper.len() == 8 && tests.len() == 4, || {
        "wrong counts".into()
    })?;
    Ok("4 tests, 8 lower, 8 upper; exact set match".into())
}

fn pairwise3_counts() -> Outcome {
    let c = bounds_of(ScenarioName::Pairwise3).counts();
    let msg = format!(
        "{} nontrivial tests ({} trivial), {} lower, {} upper",
        c.observable, c.trivial, c.lower, c.upper
    );
    ensure((c.observable, c.lower, c.upper) == (56, 37, 37), || msg.clone())?;
    Ok(msg)
}

fn dataset_intervals(dataset: &str, expected: [(ScenarioName, &str, &str); 3]) -> Outcome {
    let tables = ObservedTables::named(dataset).unwrap();
    let tol = d("0.0005");
    let mut parts = Vec::new();
    for (name, lo, hi) in expected {
        let bs = bounds_of(name);
        let p = tables.point_for_space(&bs.space).map_err(|e| e.to_string())?;
        let iv = evaluate_bounds(bs, &p).map_err(|e| e.to_string())?;
        let shown = format!(
            "{name} [{}, {}]",
            format_decimal(&iv.lower, 4),
            format_decimal(&iv.upper, 4)
        );
        ensure(
            (&iv.lower - d(lo)).abs() <= tol && (&iv.upper - d(hi)).abs() <= tol && !iv.empty,
            || format!("{shown}, expected [{lo}, {hi}]"),
        )?;
        parts.push(shown);
    }
    Ok(parts.join("; "))
}

fn lipid_intervals() -> Outcome {
    dataset_intervals(
        "lipid",
        [
            (ScenarioName::Trivariate, "0.392", "0.780"),
            (ScenarioName::Bivariate, "0.384", "0.853"),
            (ScenarioName::Pairwise3, "0.388", "0.851"),
        ],
    )
}

fn vitamin_intervals() -> Outcome {
    dataset_intervals(
        "vitamin-a",
        [
            (ScenarioName::Trivariate, "-0.1946", "0.0054"),
            (ScenarioName::Bivariate, "-0.1974", "0.0064"),
            (ScenarioName::Pairwise3, "-0.1974", "0.0059"),
        ],
    )
}

fn fig3_trivial() -> Outcome {
    let h = &derived(ScenarioName::Fig3).hull;
    let space = h.space();
    let nonneg: BTreeSet<String> = space
        .labels()
        .iter()
        .map(|l| LinearConstraint::geq(target_form(space, l)))
        .map(|c| h.canonical(&c).unwrap().to_string())
        .collect();
    let facets: BTreeSet<String> = h.facets().iter().map(|f| f.to_string()).collect();
    let msg = format!(
        "dim {}, {} equality, {} facets",
        h.affine_dimension(),
        h.equalities().len(),
        h.facets().len()
    );
    ensure(h.affine_dimension() == 7 && h.equalities().len() == 1, || msg.clone())?;
    compare_sets("facets", &facets, &nonneg)?;
    Ok(format!("{msg}, all nonnegativity"))
}

fn bivariate_observable_dimension() -> Outcome {
    let vs = derived(ScenarioName::Bivariate)
        .scenario
        .vertex_set()
        .drop_coordinate("bivariate-observable", "alpha")
        .map_err(|e| e.to_string())?;
    let dim = affine_hull(&vs).dimension();
    ensure(dim == 4, || format!("dimension {dim}"))?;
    Ok(format!("dimension {dim}"))
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let raw: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=6) })
            .collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.iter().map(|&w| Rational::new(w.into(), total.into())).collect();
        }
    }
}

fn mix(vertices: &[Vec<Rational>], weights: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); vertices[0].len()];
    for (v, w) in vertices.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * w;
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = d("0.0005");
    let mut summary = Vec::new();
    for name in [
        ScenarioName::Bivariate,
        ScenarioName::Trivariate,
        ScenarioName::Pairwise3,
        ScenarioName::Beta,
    ] {
        let der = derived(name);
        let bs = bounds_of(name);
        let vs = der.scenario.vertex_set();
        let space = vs.space();
        let target = der.scenario.target().unwrap();
        for trial in 0..200 {
            let w = random_weights(&mut rng, vs.len());
            let mixture = Point::from_dense(space, &mix(vs.vertices(), &w));
            let truth = mixture.get(target).unwrap().clone();
            let r = cross_check_with(&der.scenario, bs, &mixture, &tol).map_err(|e| e.to_string())?;
            ensure(r.agree && r.oracle.is_some(), || format!("{name} trial {trial}: {r:?}"))?;
            ensure(r.closed_form.contains(&truth), || {
                format!("{name} trial {trial}: true {target} outside interval")
            })?;
        }
        summary.push(format!("{name} 200/200"));
    }
    Ok(summary.join(", "))
}

fn random_parameter_point(rng: &mut ChaCha8Rng) -> ParameterPoint {
    let mut r = || Rational::new(rng.gen_range(0..=12).into(), 12.into());
    ParameterPoint::new(r(), r(), r(), r(), r()).unwrap()
}

fn parameter_membership() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    for name in ScenarioName::ALL {
        let der = derived(name);
        for _ in 0..1000 {
            let p = random_parameter_point(&mut rng);
            let x = der.scenario.xi_transform(&p);
            let report = der.hull.contains_dense(&x);
            ensure(report.member, || {
                format!(
                    "{name}: {p:?} violates equalities {:?} facets {:?}",
                    report.violated_equalities(),
                    report.violated_facets()
                )
            })?;
        }
    }
    Ok("1000 points in each of 5 scenarios lie in the derived hull".into())
}

fn instrumental() -> Outcome {
    let zero = Rational::zero();
    let mut parts = Vec::new();
    for name in ["lipid", "vitamin-a"] {
        let zeta = ObservedTables::named(name).unwrap().zeta.unwrap();
        let r = instrumental_inequality(&zeta, &zero);
        ensure(r.pass, || format!("{name} fails with max {}", r.max))?;
        parts.push(format!("{name} max {}", format_decimal(&r.max, 4)));
    }
    // same B under both arms, opposite C
    let mut bad: ZetaTable = Default::default();
    bad[0][0] = int(1);
    bad[1][2] = int(1);
    let r = instrumental_inequality(&bad, &d("0.0005"));
    ensure(!r.pass, || "contradiction table passes".into())?;
    parts.push(format!("contradiction max {} fails", r.max));
    Ok(parts.join("; "))
}

fn beta_consistency() -> Outcome {
    let bs = bounds_of(ScenarioName::Beta);
    let mut parts = Vec::new();
    for name in ["lipid", "vitamin-a"] {
        let t = ObservedTables::named(name).unwrap();
        let closed = beta_bounds(t.theta.as_ref().unwrap());
        let identified = t.value("g12").unwrap() - t.value("g11").unwrap();
        ensure(closed.contains(&identified), || {
            format!("{name}: beta {identified} outside")
        })?;
        let p = t.point_for_space(&bs.space).map_err(|e| e.to_string())?;
        let poly = evaluate_bounds(bs, &p).map_err(|e| e.to_string())?;
        ensure(poly.lower == closed.lower && poly.upper == closed.upper, || {
            format!(
                "{name}: polytope [{}, {}] vs closed form [{}, {}]",
                poly.lower, poly.upper, closed.lower, closed.upper
            )
        })?;
        parts.push(format!(
            "{name} beta {} in [{}, {}]",
            format_decimal(&identified, 4),
            format_decimal(&closed.lower, 4),
            format_decimal(&closed.upper, 4)
        ));
    }
    Ok(parts.join("; "))
}

/// Latent types drawn independently of the arm, so A ⊥ U holds.
fn consistent_joint(rng: &mut ChaCha8Rng) -> Point {
    let type_weights = random_weights(rng, 16);
    let q = Rational::new(rng.gen_range(1..=9).into(), 10.into());
    let mut data = Point::new();
    for name in [ScenarioName::Trivariate, ScenarioName::Pairwise3] {
        let s = &derived(name).scenario;
        let mut acc = vec![Rational::zero(); s.space().dim()];
        for (bits, w) in type_weights.iter().enumerate() {
            let b = |k: u32| ((bits >> k) & 1) as u8;
            for (psi, pw) in [(0u8, Rational::one() - &q), (1, q.clone())] {
                let image = s.xi_transform(&ParameterPoint::from_bits(b(3), b(2), b(1), b(0), psi));
                for (a, x) in acc.iter_mut().zip(image) {
                    *a += x * w * &pw;
                }
            }
        }
        for (l, v) in s.space().labels().iter().zip(acc) {
            data.insert(l.clone(), v);
        }
    }
    data
}

fn nesting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 12);
    let zero = Rational::zero();
    let mut strict = 0;
    for trial in 0..100 {
        let data = consistent_joint(&mut rng);
        let mut intervals = Vec::new();
        for name in [
            ScenarioName::Trivariate,
            ScenarioName::Pairwise3,
            ScenarioName::Bivariate,
        ] {
            let bs = bounds_of(name);
            let check = model_check(bs, &data, &zero).map_err(|e| e.to_string())?;
            ensure(check.pass, || format!("trial {trial}: {name} model check fails"))?;
            intervals.push(evaluate_bounds(bs, &data).map_err(|e| e.to_string())?);
        }
        let [tri, pair, bi] = [&intervals[0], &intervals[1], &intervals[2]];
        ensure(tri.is_within(pair) && pair.is_within(bi), || {
            format!(
                "trial {trial}: tri [{}, {}] pair [{}, {}] bi [{}, {}]",
                tri.lower, tri.upper, pair.lower, pair.upper, bi.lower, bi.upper
            )
        })?;
        if tri != bi {
            strict += 1;
        }
    }
    Ok(format!(
        "100/100 nested ({strict} with trivariate strictly tighter than bivariate)"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("bivariate derivation", bivariate_derivation),
        ("trivariate derivation", trivariate_derivation),
        ("pairwise3 counts", pairwise3_counts),
        ("lipid intervals", lipid_intervals),
        ("vitamin-a intervals", vitamin_intervals),
        ("fig3 hull triviality", fig3_trivial),
        ("bivariate observable dimension", bivariate_observable_dimension),
        ("oracle equivalence", oracle_equivalence),
        ("parameter-point membership", parameter_membership),
        ("instrumental inequality", instrumental),
        ("beta consistency", beta_consistency),
        ("nesting", nesting),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {label}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {label}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
