//! `singpack` command-line front end.
//!
//! Every subcommand prints one JSON document on stdout. Exit status is 0 on
//! success, 1 when an asserted identity or tolerance fails, 2 on malformed
//! input. Diagnostics go to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use singpack::bubbling::{self, BlowupClass, Constraints, FilterConfig};
use singpack::decompose;
use singpack::lattice::ManifoldFile;
use singpack::localmodel::{ChartPoint, DiscBundleChart};
use singpack::packing::Polarization;
use singpack::par::Execution;
use singpack::rational::{format_rational, parse_rational, parse_rational_list, serde_str, serde_vec, to_f64};
use singpack::svg::{area_label, Figure};
use singpack::toric::{self, Point, PolytopeKind, ToricField};
use singpack::verify::{self, SuiteConfig};
use singpack::{Error, LatticeModel, Rational};

#[derive(Parser)]
#[command(name = "singpack", version, about = "Exact ellipsoid packings and their local Liouville models")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rational approximation of [omega] and the resulting polarization sketch.
    Decompose {
        manifold: PathBuf,
        /// Grid denominator.
        #[arg(long)]
        q: u64,
    },
    /// Packing ledger for the model's curves with the given weights.
    Pack {
        manifold: PathBuf,
        /// Comma-separated rational weights, one per curve.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        /// JSON file `{"weights": [...], "epsilon": "..."}`.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Local model quantities at one chart point.
    Flow {
        #[arg(long)]
        a: String,
        #[arg(long)]
        gamma: String,
        #[arg(long = "A")]
        base_area: String,
        #[arg(long, default_value = "0")]
        delta: String,
        /// `P,zeta,R,theta`.
        #[arg(long)]
        point: String,
        #[arg(long, default_value = "0")]
        t: String,
    },
    /// Invariant suite of the floating-point modules.
    Verify {
        /// Monte Carlo samples for the basin volume.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Moment polygons.
    Toric {
        #[arg(value_enum)]
        mode: ToricMode,
        /// Second sphere area (product) or ball capacity (cubic).
        #[arg(long, default_value = "7/10")]
        mu: String,
        /// Polygon kind for `polytope` mode.
        #[arg(long, value_enum, default_value = "rectangle")]
        kind: PolygonKind,
        /// Two comma-separated rationals: sides or ellipsoid parameters.
        #[arg(long, default_value = "1,1")]
        params: String,
        /// `corner:size`, applied after building the polygon.
        #[arg(long)]
        chop: Option<String>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Candidate splittings of a class kL - sum l_j E_j.
    Bubble {
        /// `k,l1[,l2,...]`.
        #[arg(long)]
        target: String,
        #[arg(long = "max-parts")]
        max_parts: usize,
        #[arg(long)]
        filters: bool,
        /// Point conditions the parts must carry; defaults to the target's.
        #[arg(long = "point-budget")]
        point_budget: Option<i64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ToricMode {
    Product,
    Cubic,
    Polytope,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolygonKind {
    Rectangle,
    EllipsoidTriangle,
}

#[derive(Deserialize)]
struct PackParams {
    #[serde(with = "serde_vec")]
    weights: Vec<Rational>,
    #[serde(with = "serde_str")]
    epsilon: Rational,
}

/// A run either produced output (with a pass flag) or failed.
struct Outcome {
    json: Value,
    passed: bool,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, passed: true }
    }
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IdentityViolation { .. }
            | Error::DegeneratePiece { .. }
            | Error::DegeneratePolarization { .. }
            | Error::SingularLocus => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult = Result<Outcome, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn read_manifold(path: &Path) -> Result<LatticeModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: ManifoldFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("bad manifold file {}: {e}", path.display())))?;
    Ok(LatticeModel::from_file(&file)?)
}

fn parse_f64(name: &str, text: &str) -> Result<f64, Failure> {
    let r = parse_rational(text).map_err(|e| Failure::Input(format!("--{name}: {e}")))?;
    Ok(to_f64(&r))
}

fn decompose_cmd(manifold: &Path, q: u64) -> CliResult {
    let model = read_manifold(manifold)?;
    let s = decompose::synthesize_polarization(&model, q)?;
    Ok(Outcome::ok(to_value(&s)))
}

fn pack_cmd(
    manifold: &Path,
    weights: Option<String>,
    epsilon: Option<String>,
    params: Option<PathBuf>,
) -> CliResult {
    let model = read_manifold(manifold)?;
    let (weights, epsilon) = match params {
        Some(p) => {
            let text = fs::read_to_string(&p)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
            let parsed: PackParams = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("bad params file {}: {e}", p.display())))?;
            (parsed.weights, parsed.epsilon)
        }
        None => {
            let w = weights.ok_or_else(|| Failure::Input("--weights or --params is required".into()))?;
            let e = epsilon.unwrap_or_else(|| "0".into());
            (
                parse_rational_list(&w).map_err(|e| Failure::Input(format!("--weights: {e}")))?,
                parse_rational(&e).map_err(|e| Failure::Input(format!("--epsilon: {e}")))?,
            )
        }
    };
    let polarization = Polarization::from_model_curves(&model, weights, epsilon)?;
    let report = polarization.packing_report()?;
    let gammas = polarization.gamma_coefficients().map(|g| to_value(&g)).unwrap_or(Value::Null);
    let passed = report.residual_matches;
    if !passed {
        eprintln!(
            "residual {} differs from (eps/2) sum a = {}",
            format_rational(&report.residual),
            format_rational(&report.expected_residual)
        );
    }
    Ok(Outcome { json: json!({ "report": to_value(&report), "gamma": gammas }), passed })
}

fn flow_cmd(a: &str, gamma: &str, base: &str, delta: &str, point: &str, t: &str) -> CliResult {
    let chart = DiscBundleChart::new(
        parse_f64("a", a)?,
        parse_f64("gamma", gamma)?,
        parse_f64("A", base)?,
        parse_f64("delta", delta)?,
    )?;
    let coords = parse_rational_list(point).map_err(|e| Failure::Input(format!("--point: {e}")))?;
    if coords.len() != 4 {
        return Err(Failure::Input(format!("--point needs 4 values, got {}", coords.len())));
    }
    let p = ChartPoint::new(to_f64(&coords[0]), to_f64(&coords[1]), to_f64(&coords[2]), to_f64(&coords[3]));
    let t = parse_f64("t", t)?;

    let forms = chart.forms_at(&p)?;
    let field = match chart.liouville_field(&p) {
        Ok(v) => to_value(&v),
        Err(Error::SingularLocus) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let image = chart.phi_map(&p)?;
    let flowed = chart.flow_closed_form(&image, t);
    let flowed_rk4 = chart.flow_rk4(&image, t, verify::FLOW_DT);
    let basin = match chart.basin_membership(&image) {
        Ok(m) => to_value(&m),
        Err(e) => json!({ "unsupported": e.to_string() }),
    };
    Ok(Outcome::ok(json!({
        "chart": to_value(&chart),
        "point": to_value(&p),
        "forms": to_value(&forms),
        "liouville_field": field,
        "image": to_value(&image),
        "t": t,
        "flowed": to_value(&flowed),
        "flowed_rk4": to_value(&flowed_rk4),
        "flow_tolerance": verify::FLOW_TOL,
        "basin": basin,
        "note": "angular components of the flow are not contractual",
    })))
}

fn verify_cmd(samples: usize) -> CliResult {
    let cfg = SuiteConfig { seed: verify::seed_from_env(), volume_samples: samples, ..SuiteConfig::default() };
    let reports = verify::run_suite(&cfg)?;
    let passed = reports.iter().all(|r| r.passed);
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!("{}: defect {:e} exceeds tolerance {:e}", r.name, r.max_defect, r.tolerance);
    }
    Ok(Outcome { json: json!({ "seed": cfg.seed, "passed": passed, "invariants": to_value(&reports) }), passed })
}

fn write_svg(path: &Path, figure: &Figure) -> Result<(), Failure> {
    fs::write(path, figure.to_svg())
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse_pair(text: &str) -> Result<(Rational, Rational), Failure> {
    let v = parse_rational_list(text).map_err(|e| Failure::Input(format!("--params: {e}")))?;
    match <[Rational; 2]>::try_from(v) {
        Ok([x, y]) => Ok((x, y)),
        Err(v) => Err(Failure::Input(format!("--params needs 2 values, got {}", v.len()))),
    }
}

fn parse_chop(text: &str) -> Result<(usize, Rational), Failure> {
    let (corner, size) = text
        .split_once(':')
        .ok_or_else(|| Failure::Input("--chop expects corner:size".into()))?;
    let corner = corner.trim().parse().map_err(|e| Failure::Input(format!("--chop corner: {e}")))?;
    let size = parse_rational(size).map_err(|e| Failure::Input(format!("--chop size: {e}")))?;
    Ok((corner, size))
}

fn toric_cmd(
    mode: ToricMode,
    mu: &str,
    kind: PolygonKind,
    params: &str,
    chop: Option<String>,
    svg: Option<PathBuf>,
) -> CliResult {
    let mu = parse_rational(mu).map_err(|e| Failure::Input(format!("--mu: {e}")))?;
    match mode {
        ToricMode::Product => {
            let report = toric::product_report(&mu)?;
            if let Some(path) = &svg {
                let field = ToricField::product(mu.clone())?;
                let (lo, hi) = field.basin_polygons();
                let corner = Point::new(field.area1.clone(), field.area2.clone());
                let origin = Point::new(Rational::from_integer(0.into()), Rational::from_integer(0.into()));
                let figure = Figure::new(format!("S2 x S2, areas 1 and {}", format_rational(&mu)), field.rectangle())
                    .shade(lo.clone(), "steelblue", &area_label("basin of R2 = 0", &lo.area()))
                    .shade(hi.clone(), "darkorange", &area_label("basin of R1 = 0", &hi.area()))
                    .line(origin, corner, "separatrix");
                write_svg(path, &figure)?;
            }
            let passed = report.basins_fill_rectangle && report.basin_matches_ellipsoid && report.packing_matches_basins;
            Ok(Outcome { json: to_value(&report), passed })
        }
        ToricMode::Cubic => {
            let report = toric::cubic_pipeline(&mu)?;
            if let Some(path) = &svg {
                let ball = toric::build_polytope(PolytopeKind::EllipsoidTriangle { a: mu.clone(), b: mu.clone() })?;
                let figure = Figure::new(
                    format!("blow-up of the plane at a ball of capacity {}", format_rational(&mu)),
                    toric::unit_triangle(),
                )
                .shade(report.blowup_polytope.clone(), "steelblue", &area_label("blow-up", &report.blowup_area))
                .shade(ball.clone(), "darkorange", &area_label("ball", &ball.area()));
                write_svg(path, &figure)?;
            }
            let passed = report.identity_holds && report.total_matches && report.blowup_area_matches;
            Ok(Outcome { json: to_value(&report), passed })
        }
        ToricMode::Polytope => {
            let (x, y) = parse_pair(params)?;
            let base = match kind {
                PolygonKind::Rectangle => PolytopeKind::Rectangle { width: x, height: y },
                PolygonKind::EllipsoidTriangle => PolytopeKind::EllipsoidTriangle { a: x, b: y },
            };
            let mut polytope = toric::build_polytope(base)?;
            if let Some(c) = chop {
                let (corner, size) = parse_chop(&c)?;
                polytope = toric::build_polytope(PolytopeKind::Chop { polytope, corner, size })?;
            }
            if let Some(path) = &svg {
                write_svg(path, &Figure::new("moment polygon", polytope.clone()))?;
            }
            Ok(Outcome::ok(json!({
                "polytope": to_value(&polytope),
                "area": format_rational(&polytope.area()),
            })))
        }
    }
}

fn bubble_cmd(target: &str, max_parts: usize, filters: bool, point_budget: Option<i64>) -> CliResult {
    let target = BlowupClass::parse(target)?;
    let list = bubbling::enumerate_decompositions(&target, max_parts, &Constraints::default(), Execution::Parallel)?;
    let list = if filters { bubbling::with_filters(list, &FilterConfig { point_budget }) } else { list };
    let survivors = list.iter().filter(|d| d.verdicts.as_ref().is_some_and(|v| v.survives())).count();
    Ok(Outcome::ok(json!({
        "target": target.to_string(),
        "max_parts": max_parts,
        "count": list.len(),
        "filters": filters,
        "survivors": if filters { json!(survivors) } else { Value::Null },
        "decompositions": list.iter().map(|d| {
            let mut v = to_value(d);
            v["labels"] = to_value(&d.labels());
            v
        }).collect::<Vec<_>>(),
    })))
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Decompose { manifold, q } => decompose_cmd(&manifold, q),
        Command::Pack { manifold, weights, epsilon, params } => pack_cmd(&manifold, weights, epsilon, params),
        Command::Flow { a, gamma, base_area, delta, point, t } => {
            flow_cmd(&a, &gamma, &base_area, &delta, &point, &t)
        }
        Command::Verify { samples } => verify_cmd(samples),
        Command::Toric { mode, mu, kind, params, chop, svg } => toric_cmd(mode, &mu, kind, &params, chop, svg),
        Command::Bubble { target, max_parts, filters, point_budget } => {
            bubble_cmd(&target, max_parts, filters, point_budget)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("json");
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
