use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ivbounds::arith::{format_decimal, parse_rational, rational_to_string, Point, Rational};
use ivbounds::bounds::{
    default_tolerance, evaluate_bounds, hull_check, instrumental_inequality, model_check, partition, BoundSet,
    CheckKind, InstrumentalReport, Interval, ModelCheckReport,
};
use ivbounds::data::ObservedTables;
use ivbounds::oracle::{cross_check_with, CrossCheckReport};
use ivbounds::polytope::{facet_enumeration, HRepresentation};
use ivbounds::{Scenario, ScenarioName};

const EXIT_ERROR: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ivbounds",
    version,
    about = "Sharp causal bounds for binary instrumental-variable models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hull equalities, observable tests and bound forms for a scenario.
    Derive {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the observable tests on data (exit 2 on failure).
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Interval for the target on data (exit 3 if empty).
    Bound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Compare the closed-form interval with exact LP (exit 4 on mismatch).
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
    },
    /// List the built-in scenarios.
    Scenario {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(clap::Args)]
struct Common {
    #[arg(long, value_parser = parse_scenario)]
    scenario: ScenarioName,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Causal target; defaults to the scenario's own.
    #[arg(long, value_parser = ["alpha", "beta"])]
    target: Option<String>,
}

#[derive(clap::Args)]
struct DataArgs {
    /// Bundled dataset (lipid, vitamin-a) or a .json/.csv path.
    #[arg(long)]
    data: String,
    #[arg(long, value_parser = parse_tolerance)]
    tolerance: Option<Rational>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_scenario(s: &str) -> Result<ScenarioName, String> {
    s.parse().map_err(|e: ivbounds::ScenarioError| e.to_string())
}

fn parse_tolerance(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if r < Rational::from_integer(0.into()) {
        return Err("tolerance must be nonnegative".into());
    }
    Ok(r)
}

struct Derivation {
    scenario: Scenario,
    hull: HRepresentation,
    bounds: Option<BoundSet>,
}

fn derive(common: &Common) -> Result<Derivation, String> {
    let scenario = Scenario::builtin(common.scenario);
    let hull = facet_enumeration(&scenario.vertex_set()).map_err(|e| e.to_string())?;
    let target = common.target.as_deref().or(scenario.target());
    let bounds = match target {
        Some(t) => Some(partition(&hull, scenario.name(), t).map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(Derivation { scenario, hull, bounds })
}

fn load(args: &DataArgs) -> Result<ObservedTables, String> {
    ObservedTables::load(&args.data).map_err(|e| format!("{}: {e}", args.data))
}

fn rational_json(r: &Rational) -> Value {
    json!({ "exact": rational_to_string(r), "decimal": format_decimal(r, 6) })
}

fn show(r: &Rational) -> String {
    format!("{} ({})", rational_to_string(r), format_decimal(r, 6))
}

fn emit(format: Format, text: String, value: Value) {
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("JSON values serialize")
        ),
    }
}

fn run_derive(common: &Common) -> Result<u8, String> {
    let d = derive(common)?;
    let h = &d.hull;
    let mut text = String::new();
    let vertices = d.scenario.vertex_set().len();
    let _ = writeln!(text, "scenario {}", d.scenario.name());
    let _ = writeln!(text, "coordinates: {}", h.space().labels().join(" "));
    let _ = writeln!(text, "vertices: {vertices}, affine dimension: {}", h.affine_dimension());
    let value = match &d.bounds {
        None => {
            section(
                &mut text,
                "hull equalities",
                h.equalities().iter().map(|c| c.to_string()),
            );
            section(&mut text, "facets", h.facets().iter().map(|c| c.to_string()));
            json!({
                "scenario": d.scenario.name(),
                "vertices": vertices,
                "affine_dimension": h.affine_dimension(),
                "hull": h.to_json(),
                "counts": { "equalities": h.equalities().len(), "facets": h.facets().len() },
            })
        }
        Some(bs) => {
            let t = &bs.target;
            section(
                &mut text,
                "hull equalities",
                bs.hull_equalities.iter().map(|c| c.to_string()),
            );
            section(
                &mut text,
                "observable tests",
                bs.observable_tests.iter().map(|c| c.to_string()),
            );
            section(
                &mut text,
                "trivial tests",
                bs.trivial_tests.iter().map(|c| c.to_string()),
            );
            section(
                &mut text,
                &format!("{t} >= max of"),
                bs.lower_forms.iter().map(|f| f.to_string()),
            );
            section(
                &mut text,
                &format!("{t} <= min of"),
                bs.upper_forms.iter().map(|f| f.to_string()),
            );
            let mut v = bs.to_json();
            v["vertices"] = json!(vertices);
            v["affine_dimension"] = json!(h.affine_dimension());
            v["counts"]["facets"] = json!(h.facets().len());
            v
        }
    };
    emit(common.format, text, value);
    Ok(0)
}

fn section(text: &mut String, title: &str, items: impl ExactSizeIterator<Item = String>) {
    let _ = writeln!(text, "{title} ({}):", items.len());
    for (i, item) in items.enumerate() {
        let _ = writeln!(text, "  [{i}] {item}");
    }
}

fn data_point(d: &Derivation, tables: &ObservedTables) -> Result<Point, String> {
    let space = match &d.bounds {
        Some(bs) => &bs.space,
        None => d.hull.space(),
    };
    tables.point_for_space(space).map_err(|e| e.to_string())
}

fn check_json(r: &ModelCheckReport) -> Value {
    let kind = |k: CheckKind| match k {
        CheckKind::Test => "test",
        CheckKind::Trivial => "trivial",
        CheckKind::Equality => "equality",
    };
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            json!({
                "constraint": e.constraint.to_string(),
                "kind": kind(e.kind),
                "slack": rational_json(&e.slack),
                "pass": e.pass,
            })
        })
        .collect();
    json!({ "pass": r.pass, "tolerance": rational_json(&r.tolerance), "constraints": entries })
}

fn instrumental_json(r: &InstrumentalReport) -> Value {
    json!({
        "pass": r.pass,
        "sums": [rational_json(&r.sums[0]), rational_json(&r.sums[1])],
        "max": rational_json(&r.max),
    })
}

fn run_check(common: &Common, args: &DataArgs) -> Result<u8, String> {
    let d = derive(common)?;
    let tables = load(args)?;
    let tol = args.tolerance.clone().unwrap_or_else(default_tolerance);
    let p = data_point(&d, &tables)?;
    let report = match &d.bounds {
        Some(bs) => model_check(bs, &p, &tol),
        None => hull_check(&d.hull, &p, &tol),
    }
    .map_err(|e| e.to_string())?;
    let instrumental = match (common.scenario, &tables.zeta) {
        (ScenarioName::Trivariate, Some(zeta)) => Some(instrumental_inequality(zeta, &tol)),
        _ => None,
    };
    let pass = report.pass && instrumental.as_ref().is_none_or(|r| r.pass);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "scenario {} on {} (tolerance {})",
        d.scenario.name(),
        args.data,
        show(&tol)
    );
    for e in &report.entries {
        if e.kind == CheckKind::Trivial && e.pass {
            continue;
        }
        let status = if e.pass { "ok  " } else { "FAIL" };
        let _ = writeln!(text, "  {status} {}  slack {}", e.constraint, show(&e.slack));
    }
    let trivial = report.section(CheckKind::Trivial).count();
    let _ = writeln!(text, "  ({trivial} nonnegativity constraints, shown only on failure)");
    if let Some(r) = &instrumental {
        let _ = writeln!(
            text,
            "  {} instrumental inequality: b=0 sum {}, b=1 sum {}",
            if r.pass { "ok  " } else { "FAIL" },
            show(&r.sums[0]),
            show(&r.sums[1])
        );
    }
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });

    let value = json!({
        "scenario": d.scenario.name(),
        "data": args.data,
        "pass": pass,
        "model_check": check_json(&report),
        "instrumental_inequality": instrumental.as_ref().map(instrumental_json),
    });
    emit(common.format, text, value);
    Ok(if pass { 0 } else { EXIT_CHECK_FAILED })
}

fn interval_json(bs: &BoundSet, iv: &Interval) -> Value {
    json!({
        "target": bs.target,
        "lower": rational_json(&iv.lower),
        "upper": rational_json(&iv.upper),
        "lower_witness": { "index": iv.lower_witness, "form": bs.lower_forms[iv.lower_witness].to_string() },
        "upper_witness": { "index": iv.upper_witness, "form": bs.upper_forms[iv.upper_witness].to_string() },
        "empty": iv.empty,
    })
}

fn target_bounds(d: &Derivation) -> Result<&BoundSet, String> {
    d.bounds
        .as_ref()
        .ok_or_else(|| format!("scenario {} has no causal target", d.scenario.name()))
}

fn run_bound(common: &Common, args: &DataArgs) -> Result<u8, String> {
    let d = derive(common)?;
    let bs = target_bounds(&d)?;
    let tables = load(args)?;
    let p = data_point(&d, &tables)?;
    let iv = evaluate_bounds(bs, &p).map_err(|e| e.to_string())?;

    let mut text = String::new();
    let _ = writeln!(text, "scenario {} on {}", d.scenario.name(), args.data);
    let _ = writeln!(
        text,
        "{} ≤ {} ≤ {}",
        format_decimal(&iv.lower, 6),
        bs.target,
        format_decimal(&iv.upper, 6)
    );
    let _ = writeln!(
        text,
        "  lower {} from [{}] {}",
        rational_to_string(&iv.lower),
        iv.lower_witness,
        bs.lower_forms[iv.lower_witness]
    );
    let _ = writeln!(
        text,
        "  upper {} from [{}] {}",
        rational_to_string(&iv.upper),
        iv.upper_witness,
        bs.upper_forms[iv.upper_witness]
    );
    if iv.empty {
        let _ = writeln!(text, "EMPTY: data incompatible with the model");
    }
    let value = json!({
        "scenario": d.scenario.name(),
        "data": args.data,
        "interval": interval_json(bs, &iv),
    });
    emit(common.format, text, value);
    Ok(if iv.empty { EXIT_EMPTY } else { 0 })
}

fn oracle_json(r: &CrossCheckReport) -> Value {
    json!({
        "oracle": r.oracle.as_ref().map(|(lo, hi)| json!({ "lower": rational_json(lo), "upper": rational_json(hi) })),
        "closed_form": {
            "lower": rational_json(&r.closed_form.lower),
            "upper": rational_json(&r.closed_form.upper),
            "empty": r.closed_form.empty,
        },
        "exact_check_pass": r.exact_check_pass,
        "tolerant_check_pass": r.tolerant_check_pass,
        "witnesses_verified": r.witnesses_verified,
        "agree": r.agree,
    })
}

fn run_oracle(common: &Common, args: &DataArgs) -> Result<u8, String> {
    let d = derive(common)?;
    let bs = target_bounds(&d)?;
    if d.scenario.target() != Some(bs.target.as_str()) {
        return Err(format!(
            "the oracle optimizes the scenario's own target ({:?})",
            d.scenario.target()
        ));
    }
    let tables = load(args)?;
    let tol = args.tolerance.clone().unwrap_or_else(default_tolerance);
    let p = data_point(&d, &tables)?;
    let r = cross_check_with(&d.scenario, bs, &p, &tol).map_err(|e| e.to_string())?;

    let mut text = String::new();
    let _ = writeln!(text, "scenario {} on {}", d.scenario.name(), args.data);
    let _ = writeln!(text, "{:<12} {:<28} {:<28}", "", "lower", "upper");
    match &r.oracle {
        Some((lo, hi)) => {
            let _ = writeln!(text, "{:<12} {:<28} {:<28}", "oracle", show(lo), show(hi));
        }
        None => {
            let _ = writeln!(text, "{:<12} INFEASIBLE", "oracle");
        }
    }
    let _ = writeln!(
        text,
        "{:<12} {:<28} {:<28}{}",
        "closed form",
        show(&r.closed_form.lower),
        show(&r.closed_form.upper),
        if r.closed_form.empty { " (empty)" } else { "" }
    );
    let _ = writeln!(text, "{}", if r.agree { "AGREE" } else { "MISMATCH" });
    let value = json!({ "scenario": d.scenario.name(), "data": args.data, "report": oracle_json(&r) });
    emit(common.format, text, value);
    Ok(oracle_exit_code(r))
}

fn oracle_exit_code(r: CrossCheckReport) -> u8 {
    match r.into_result() {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_MISMATCH
        }
    }
}

fn run_scenarios(format: Format) -> Result<u8, String> {
    let mut text = String::new();
    let mut list = Vec::new();
    for name in ScenarioName::ALL {
        let s = Scenario::builtin(name);
        let _ = writeln!(
            text,
            "{:<11} target {:<6} {}",
            s.name(),
            s.target().unwrap_or("-"),
            s.space().labels().join(" ")
        );
        list.push(json!({ "name": s.name(), "target": s.target(), "coordinates": s.space().labels() }));
    }
    emit(format, text, json!({ "scenarios": list }));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Derive { common } => run_derive(common),
        Command::Check { common, data } => run_check(common, data),
        Command::Bound { common, data } => run_bound(common, data),
        Command::Oracle { common, data } => run_oracle(common, data),
        Command::Scenario { format } => run_scenarios(*format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
