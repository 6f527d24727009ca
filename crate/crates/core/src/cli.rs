//! Experiment runner: JSON config in, CSV and JSON tables out.
//!
//! A config is a flat JSON object naming an `experiment` plus that
//! experiment's parameters. `--validate` checks the schema without running.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error as ThisError;

use crate::domain::{
    appendix_report, inradius, koebe_check, lambda1_fd, ConformalMap, Lambda1Options,
    LatticeDomainSpec, PlanarDomainMask, Shape,
};
use crate::error::Error;
use crate::hyperbolic::{GeodesicGrid, Grading, PowerFactor};
use crate::liouville::{
    explicit_family, relate_backgrounds, solve_dirichlet_convex, solve_ratio_functional,
    Background as MetricBackground, CurvatureData, CurvatureProblem, RadialMesh, SolverOptions,
};
use crate::moser::{
    blowup_experiment, centers_for_targets, critical_sweep, default_eps_schedule, BlowupOptions,
    Mobius,
};
use crate::sobolev::{
    asymptotic_sweep, degenerate_sp_witness, measured_mt_sup, Background, SpOptions, EIGHT_PI_E,
};

#[derive(Debug, Parser)]
#[command(
    name = "mtdisc",
    version,
    about = "Run a Moser–Trudinger / Sobolev / Liouville experiment"
)]
pub struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for `<experiment>.csv` and `<experiment>.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized suites; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check the config schema and exit.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config invalid: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),
    #[error("contract violated: {}", .0.join("; "))]
    ContractViolation(Vec<String>),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigInvalid(_) => 2,
            Self::Compute(Error::InvalidArgument(_) | Error::InvalidGrid(_) | Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

pub const EXPERIMENTS: [&str; 10] = [
    "moser-blowup",
    "mt-critical-sweep",
    "sobolev-asymptotics",
    "sp-degenerate",
    "solve-liouville",
    "relate-solutions",
    "lambda1",
    "inradius",
    "appendix",
    "koebe",
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Num,
    Int,
    Str(&'static [&'static str]),
    Path,
    NumList,
    Point,
    Maps,
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Num => "a number".into(),
            Kind::Int => "a non-negative integer".into(),
            Kind::Str(choices) => format!("one of {choices:?}"),
            Kind::Path => "a string".into(),
            Kind::NumList => "an array of numbers".into(),
            Kind::Point => "an array of two numbers".into(),
            Kind::Maps => "an array of map objects".into(),
        }
    }

    fn accepts(self, v: &Value) -> bool {
        let is_num = |v: &Value| v.as_f64().is_some_and(f64::is_finite);
        match self {
            Kind::Num => is_num(v),
            Kind::Int => v.as_u64().is_some(),
            Kind::Str(choices) => v.as_str().is_some_and(|s| choices.contains(&s)),
            Kind::Path => v.is_string(),
            Kind::NumList => v
                .as_array()
                .is_some_and(|a| !a.is_empty() && a.iter().all(is_num)),
            Kind::Point => v
                .as_array()
                .is_some_and(|a| a.len() == 2 && a.iter().all(is_num)),
            Kind::Maps => v
                .as_array()
                .is_some_and(|a| !a.is_empty() && a.iter().all(Value::is_object)),
        }
    }
}

struct Field {
    key: &'static str,
    kind: Kind,
    required: bool,
}

const fn opt(key: &'static str, kind: Kind) -> Field {
    Field {
        key,
        kind,
        required: false,
    }
}

const fn req(key: &'static str, kind: Kind) -> Field {
    Field {
        key,
        kind,
        required: true,
    }
}

const BACKGROUNDS: &[&str] = &["euclidean", "hyperbolic"];
const SHAPES: &[&str] = &["disc", "square", "annulus"];
const MAP_NAMES: &[&str] = &["identity", "mobius", "strip", "power"];

const DOMAIN_FIELDS: [Field; 9] = [
    opt("shape", Kind::Str(SHAPES)),
    opt("center", Kind::Point),
    opt("radius", Kind::Num),
    opt("side", Kind::Num),
    opt("inner", Kind::Num),
    opt("outer", Kind::Num),
    opt("h", Kind::Num),
    opt("mask", Kind::Path),
    opt("header", Kind::Path),
];

fn schema(experiment: &str) -> Option<Vec<Field>> {
    let mut fields = vec![req("experiment", Kind::Path), opt("seed", Kind::Int)];
    let specific: Vec<Field> = match experiment {
        "moser-blowup" => vec![
            opt("count", Kind::Int),
            opt("eps", Kind::NumList),
            opt("zeta_exponent", Kind::Num),
        ],
        "mt-critical-sweep" => vec![
            opt("alpha_over_pi", Kind::NumList),
            opt("eps", Kind::NumList),
            opt("background", Kind::Str(BACKGROUNDS)),
        ],
        "sobolev-asymptotics" => vec![
            req("p_list", Kind::NumList),
            opt("background", Kind::Str(BACKGROUNDS)),
            opt("mt_constant", Kind::Num),
            opt("max_iterations", Kind::Int),
        ],
        "sp-degenerate" => vec![opt("p", Kind::Num), opt("deltas", Kind::NumList)],
        "solve-liouville" => vec![
            opt("functional", Kind::Str(&["dirichlet", "ratio"])),
            opt("background", Kind::Str(BACKGROUNDS)),
            opt("mesh", Kind::Str(&["geodesic", "euclidean"])),
            opt("r_max", Kind::Num),
            opt("nodes", Kind::Int),
            opt("alpha", Kind::Num),
            opt("k", Kind::Num),
            opt("k1", Kind::Num),
            opt("k2", Kind::Num),
            opt("boundary_value", Kind::Num),
            opt("random_starts", Kind::Int),
            opt("residual_tol", Kind::Num),
        ],
        "relate-solutions" => vec![
            opt("alpha", Kind::Num),
            opt("r_max", Kind::Num),
            opt("nodes", Kind::Int),
            opt("tol", Kind::Num),
        ],
        "lambda1" | "inradius" => DOMAIN_FIELDS.into_iter().collect(),
        "appendix" => vec![req("k_list", Kind::NumList), opt("truncation", Kind::Int)],
        "koebe" => vec![req("maps", Kind::Maps), opt("samples", Kind::Int)],
        _ => return None,
    };
    fields.extend(specific);
    Some(fields)
}

fn check_fields(
    obj: &Map<String, Value>,
    fields: &[Field],
    prefix: &str,
    errors: &mut Vec<String>,
) {
    for key in obj.keys() {
        if !fields.iter().any(|f| f.key == key) {
            errors.push(format!("unknown key `{prefix}{key}`"));
        }
    }
    for f in fields {
        match obj.get(f.key) {
            None if f.required => errors.push(format!("missing required key `{prefix}{}`", f.key)),
            Some(v) if !f.kind.accepts(v) => errors.push(format!(
                "`{prefix}{}` must be {}, got {v}",
                f.key,
                f.kind.describe()
            )),
            _ => {}
        }
    }
}

/// Full schema check; returns every problem found.
pub fn validate_config(config: &Value) -> Vec<String> {
    let Some(obj) = config.as_object() else {
        return vec!["config must be a JSON object".into()];
    };
    let name = match obj.get("experiment") {
        Some(Value::String(s)) => s.as_str(),
        Some(v) => return vec![format!("`experiment` must be a string, got {v}")],
        None => return vec!["missing required key `experiment`".into()],
    };
    let Some(fields) = schema(name) else {
        return vec![format!(
            "unknown experiment `{name}` (expected one of {})",
            EXPERIMENTS.join(", ")
        )];
    };
    let mut errors = Vec::new();
    check_fields(obj, &fields, "", &mut errors);
    if name == "koebe" {
        if let Some(maps) = obj.get("maps").and_then(Value::as_array) {
            let map_fields = [
                req("map", Kind::Str(MAP_NAMES)),
                opt("r", Kind::Num),
                opt("a", Kind::Point),
                opt("beta", Kind::Num),
            ];
            for (i, m) in maps.iter().enumerate() {
                if let Some(m) = m.as_object() {
                    check_fields(m, &map_fields, &format!("maps[{i}]."), &mut errors);
                    if m.get("map").and_then(Value::as_str) == Some("power") && !m.contains_key("r")
                    {
                        errors.push(format!(
                            "missing required key `maps[{i}].r` for a power map"
                        ));
                    }
                }
            }
        }
    }
    if matches!(name, "lambda1" | "inradius") {
        let has_shape = obj.contains_key("shape");
        let has_mask = obj.contains_key("mask");
        if has_shape == has_mask {
            errors.push("exactly one of `shape` and `mask` is required".into());
        }
        if has_mask && !obj.contains_key("header") {
            errors.push("missing required key `header` for a mask file".into());
        }
        if let Some(shape) = obj.get("shape").and_then(Value::as_str) {
            let needed: &[&str] = match shape {
                "disc" => &["radius"],
                "square" => &["side"],
                _ => &["inner", "outer"],
            };
            for k in needed {
                if !obj.contains_key(*k) {
                    errors.push(format!("missing required key `{k}` for shape `{shape}`"));
                }
            }
        }
    }
    errors
}

pub fn load_config(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Compute(Error::Parse(format!("{}: {e}", path.display()))))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Compute(Error::Parse(format!("{}: {e}", path.display()))))
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub experiment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
    pub violations: Vec<String>,
}

impl Outcome {
    fn new(experiment: &str, columns: &[&'static str]) -> Self {
        Self {
            experiment: experiment.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Map::new(),
            violations: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.violations.push(what.into());
        }
    }

    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn json(&self, seed: u64) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({
            "experiment": self.experiment,
            "seed": seed,
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary,
            "contract_holds": self.violations.is_empty(),
            "violations": self.violations,
        })
    }
}

struct Params<'a>(&'a Map<String, Value>);

impl Params<'_> {
    fn num(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).and_then(Value::as_f64).unwrap_or(default)
    }

    fn num_opt(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(Value::as_f64)
    }

    fn int(&self, key: &str, default: u64) -> u64 {
        self.0.get(key).and_then(Value::as_u64).unwrap_or(default)
    }

    fn str<'b>(&'b self, key: &str, default: &'b str) -> &'b str {
        self.0.get(key).and_then(Value::as_str).unwrap_or(default)
    }

    fn list(&self, key: &str) -> Option<Vec<f64>> {
        self.0
            .get(key)
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
    }

    fn point(&self, key: &str) -> Option<[f64; 2]> {
        self.list(key).map(|v| [v[0], v[1]])
    }
}

fn decades(count: i32) -> Vec<f64> {
    (1..=count).map(|k| 10f64.powi(-k)).collect()
}

fn sobolev_background(name: &str) -> Background {
    match name {
        "hyperbolic" => Background::HyperbolicDisc,
        _ => Background::EuclideanDisc,
    }
}

fn metric_background(name: &str) -> MetricBackground {
    match name {
        "hyperbolic" => MetricBackground::Hyperbolic,
        _ => MetricBackground::Euclidean,
    }
}

/// Runs a validated config.
pub fn run(config: &Value, seed: u64) -> Result<Outcome, CliError> {
    let errors = validate_config(config);
    if !errors.is_empty() {
        return Err(CliError::ConfigInvalid(errors));
    }
    let obj = config.as_object().expect("validated object");
    let p = Params(obj);
    let name = p.str("experiment", "");
    match name {
        "moser-blowup" => moser_blowup(&p),
        "mt-critical-sweep" => mt_critical_sweep(&p),
        "sobolev-asymptotics" => sobolev_asymptotics(&p),
        "sp-degenerate" => sp_degenerate(&p),
        "solve-liouville" => solve_liouville(&p, seed),
        "relate-solutions" => relate_solutions(&p),
        "lambda1" => lambda1(&p),
        "inradius" => inradius_experiment(&p),
        "appendix" => appendix(&p),
        "koebe" => koebe(&p),
        _ => unreachable!("validated experiment name"),
    }
}

fn moser_blowup(p: &Params) -> Result<Outcome, CliError> {
    let count = p.int("count", 10).max(1) as usize;
    let zeta = PowerFactor {
        scale: 1.0,
        exponent: p.num("zeta_exponent", 0.5),
    };
    let eps = p.list("eps").unwrap_or_else(|| default_eps_schedule(count));
    let targets: Vec<f64> = (1..=eps.len()).map(|n| n as f64).collect();
    let centers = centers_for_targets(&zeta, &targets)?;
    let rep = blowup_experiment(&zeta, &centers, &eps, BlowupOptions::default())?;
    let mut out = Outcome::new(
        "moser-blowup",
        &[
            "n",
            "center",
            "zeta_center",
            "eps",
            "mt_value",
            "lower_bound",
        ],
    );
    for r in &rep.rows {
        out.rows.push(vec![
            Cell::Int(r.n as u64),
            Cell::Num(r.center.re),
            Cell::Num(r.zeta_center),
            Cell::Num(r.eps),
            Cell::Num(r.mt_value),
            Cell::Num(r.lower_bound),
        ]);
    }
    out.note("diverging", json!(rep.diverging));
    out.require(
        rep.contract_holds,
        "a measured value fell below its lower bound",
    );
    Ok(out)
}

fn mt_critical_sweep(p: &Params) -> Result<Outcome, CliError> {
    let alphas = p.list("alpha_over_pi").unwrap_or_else(|| vec![4.0, 4.4]);
    let eps = p.list("eps").unwrap_or_else(|| decades(6));
    let zeta = sobolev_background(p.str("background", "hyperbolic")).zeta();
    let mut out = Outcome::new("mt-critical-sweep", &["alpha_over_pi", "eps", "value"]);
    for &a in &alphas {
        let values = critical_sweep(a * PI, &eps, &zeta, Grading::default())?;
        for (&e, &v) in eps.iter().zip(&values) {
            out.rows
                .push(vec![Cell::Num(a), Cell::Num(e), Cell::Num(v)]);
        }
        let sup = values.iter().copied().fold(0.0, f64::max);
        out.note(&format!("sup_at_{a}pi"), json!(sup));
        if let [.., x, y] = values[..] {
            out.note(&format!("last_ratio_at_{a}pi"), json!(y / x));
        }
    }
    Ok(out)
}

fn sobolev_asymptotics(p: &Params) -> Result<Outcome, CliError> {
    let p_list = p.list("p_list").unwrap_or_default();
    let background = sobolev_background(p.str("background", "euclidean"));
    let opts = SpOptions {
        max_iterations: p.int("max_iterations", SpOptions::default().max_iterations as u64)
            as usize,
        ..SpOptions::default()
    };
    let c = match p.num_opt("mt_constant") {
        Some(c) => c,
        None => measured_mt_sup(&background.zeta(), &decades(6))?,
    };
    let rows = asymptotic_sweep(&p_list, background, Some(c), &opts)?;
    let mut out = Outcome::new(
        "sobolev-asymptotics",
        &["p", "p_times_upper", "p_times_lower", "iterations", "flag"],
    );
    for r in &rows {
        out.rows.push(vec![
            Cell::Num(r.p),
            Cell::Num(r.p * r.upper),
            Cell::Num(r.lower.map_or(f64::NAN, |l| r.p * l)),
            Cell::Int(r.iterations as u64),
            Cell::Text(r.flag().into()),
        ]);
        if let Some(l) = r.lower {
            out.require(
                l <= r.upper,
                format!("lower bound exceeds upper estimate at p = {}", r.p),
            );
        }
    }
    out.note("mt_constant", json!(c));
    out.note("eight_pi_e", json!(EIGHT_PI_E));
    out.note("background", json!(background.name()));
    Ok(out)
}

fn sp_degenerate(p: &Params) -> Result<Outcome, CliError> {
    let exponent = p.num("p", 1.0);
    let deltas = p.list("deltas").unwrap_or_else(|| decades(6));
    let w = degenerate_sp_witness(exponent, &deltas)?;
    let mut out = Outcome::new(
        "sp-degenerate",
        &["delta", "norm_pow", "norm_pow_exact", "quotient"],
    );
    for r in &w.rows {
        out.rows.push(vec![
            Cell::Num(r.delta),
            Cell::Num(r.norm_pow),
            Cell::Num(r.norm_pow_exact),
            Cell::Num(r.quotient),
        ]);
    }
    out.note("energy", json!(w.energy));
    Ok(out)
}

fn build_mesh(kind: &str, r_max: f64, nodes: usize) -> Result<RadialMesh, CliError> {
    if !(r_max > 0.0 && r_max <= 1.0) {
        return Err(Error::InvalidArgument(format!("r_max = {r_max} not in (0, 1]")).into());
    }
    if nodes < 3 {
        return Err(Error::InvalidGrid(format!("{nodes} nodes are too few")).into());
    }
    Ok(match kind {
        "euclidean" => RadialMesh::euclidean_uniform(r_max, nodes)?,
        _ => {
            if r_max >= 1.0 {
                return Err(
                    Error::InvalidArgument("a geodesic mesh needs r_max < 1".into()).into(),
                );
            }
            RadialMesh::geodesic(GeodesicGrid::uniform(2.0 * r_max.atanh(), nodes - 1)?)
        }
    })
}

fn solve_liouville(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let functional = p.str("functional", "dirichlet");
    let background = metric_background(p.str("background", "euclidean"));
    let default_mesh = if functional == "ratio" {
        "euclidean"
    } else {
        "geodesic"
    };
    let default_r = if functional == "ratio" { 1.0 } else { 0.9 };
    let mesh = build_mesh(
        p.str("mesh", default_mesh),
        p.num("r_max", default_r),
        p.int("nodes", 4096) as usize,
    )?;
    let n = mesh.len();
    let mut opts = SolverOptions::default();
    if let Some(t) = p.num_opt("residual_tol") {
        opts.residual_tol = t;
    }
    let radii = mesh.radii();
    let mut out = Outcome::new("solve-liouville", &["r", "v", "exact", "error"]);

    if functional == "ratio" {
        let data = CurvatureData::Pair {
            k1: vec![p.num("k1", 0.0); n],
            k2: vec![p.num("k2", 1.0); n],
        };
        let problem = CurvatureProblem::new(mesh, background, data, 0.0)?;
        let rep = solve_ratio_functional(&problem, &opts)?;
        for (r, v) in radii.iter().zip(&rep.report.solution) {
            out.rows.push(vec![
                Cell::Num(*r),
                Cell::Num(*v),
                Cell::Num(f64::NAN),
                Cell::Num(f64::NAN),
            ]);
        }
        out.note("residual", json!(rep.report.residual_norm));
        out.note("iterations", json!(rep.report.iterations));
        out.note("integral", json!(rep.integral));
        out.note("shift", json!(rep.shift));
        out.require(rep.report.converged, "ratio minimization did not converge");
        return Ok(out);
    }

    let (k, exact) = match (p.num_opt("alpha"), p.num_opt("k")) {
        (_, Some(k)) => (vec![k; n], None),
        (alpha, None) => {
            let (k, v) = explicit_family(alpha.unwrap_or(1.0), &mesh)?;
            (k, Some(v))
        }
    };
    let boundary = p
        .num_opt("boundary_value")
        .or_else(|| exact.as_ref().map(|v| v[n - 1]))
        .unwrap_or(0.0);
    let problem = CurvatureProblem::new(mesh, background, CurvatureData::Single(k), boundary)?;
    let rep = solve_dirichlet_convex(&problem, &opts)?;
    let mut max_err: f64 = 0.0;
    for (i, (r, v)) in radii.iter().zip(&rep.solution).enumerate() {
        let (e, err) = match &exact {
            Some(x) => (x[i], (v - x[i]).abs()),
            None => (f64::NAN, f64::NAN),
        };
        if err.is_finite() {
            max_err = max_err.max(err);
        }
        out.rows.push(vec![
            Cell::Num(*r),
            Cell::Num(*v),
            Cell::Num(e),
            Cell::Num(err),
        ]);
    }
    out.note("residual", json!(rep.residual_norm));
    out.note("iterations", json!(rep.iterations));
    out.note("energy", json!(rep.energy));
    if exact.is_some() {
        out.note("max_error", json!(max_err));
    }
    out.require(rep.converged, "Dirichlet solve did not converge");
    out.require(
        rep.step_changes.iter().all(|&d| d < 0.0),
        "an accepted step did not decrease the energy",
    );

    let starts = p.int("random_starts", 0);
    if starts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spread: f64 = 0.0;
        for _ in 0..starts {
            let init: Vec<f64> = (0..n)
                .map(|_| boundary + rng.random_range(-1.0..1.0))
                .collect();
            let o = SolverOptions {
                initial: Some(init),
                ..opts.clone()
            };
            let other = solve_dirichlet_convex(&problem, &o)?;
            let d = rep
                .solution
                .iter()
                .zip(&other.solution)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            spread = spread.max(d);
        }
        out.note("random_start_spread", json!(spread));
        out.require(
            spread <= 1e-6,
            format!("random starts disagree by {spread:e}"),
        );
    }
    Ok(out)
}

fn relate_solutions(p: &Params) -> Result<Outcome, CliError> {
    let alpha = p.num("alpha", 1.0);
    let mesh = build_mesh(
        "geodesic",
        p.num("r_max", 0.9),
        p.int("nodes", 4096) as usize,
    )?;
    let tol = p.num("tol", 1e-4);
    let n = mesh.len();
    let (k, exact) = explicit_family(alpha, &mesh)?;
    let log_rho = mesh.hyperbolic_log_density();
    let opts = SolverOptions::default();
    let euclid = CurvatureProblem::new(
        mesh.clone(),
        MetricBackground::Euclidean,
        CurvatureData::Single(k.clone()),
        exact[n - 1],
    )?;
    let hyper = CurvatureProblem::new(
        mesh.clone(),
        MetricBackground::Hyperbolic,
        CurvatureData::Single(k),
        exact[n - 1] - log_rho[n - 1],
    )?;
    let v = solve_dirichlet_convex(&euclid, &opts)?;
    let u = solve_dirichlet_convex(&hyper, &opts)?;
    let solved = relate_backgrounds(&mesh, &v.solution, &mesh, &u.solution)?;
    let against_exact = relate_backgrounds(&mesh, &exact, &mesh, &u.solution)?;
    let mut out = Outcome::new(
        "relate-solutions",
        &["r", "v", "u", "v_minus_u_minus_log_rho"],
    );
    for (i, r) in mesh.radii().iter().enumerate() {
        out.rows.push(vec![
            Cell::Num(*r),
            Cell::Num(v.solution[i]),
            Cell::Num(u.solution[i]),
            Cell::Num(v.solution[i] - u.solution[i] - log_rho[i]),
        ]);
    }
    out.note("alpha", json!(alpha));
    out.note("max_relation_error", json!(solved));
    out.note("max_relation_error_exact_v", json!(against_exact));
    out.require(
        v.converged && u.converged,
        "a Dirichlet solve did not converge",
    );
    out.require(
        solved <= tol,
        format!("relation error {solved:e} exceeds {tol:e}"),
    );
    Ok(out)
}

fn domain_mask(p: &Params) -> Result<PlanarDomainMask, CliError> {
    if let Some(mask) = p.0.get("mask").and_then(Value::as_str) {
        let header = p.str("header", "");
        return Ok(PlanarDomainMask::load(Path::new(mask), Path::new(header))?);
    }
    let center = p.point("center").unwrap_or([0.0, 0.0]);
    let shape = match p.str("shape", "disc") {
        "disc" => Shape::Disc {
            center,
            radius: p.num("radius", 1.0),
        },
        "square" => Shape::Square {
            center,
            side: p.num("side", 1.0),
        },
        _ => Shape::Annulus {
            center,
            inner: p.num("inner", 0.5),
            outer: p.num("outer", 1.0),
        },
    };
    Ok(PlanarDomainMask::rasterize(shape, p.num("h", 1.0 / 128.0))?)
}

fn lambda1(p: &Params) -> Result<Outcome, CliError> {
    let mask = domain_mask(p)?;
    let rep = lambda1_fd(&mask, &Lambda1Options::default())?;
    let mut out = Outcome::new("lambda1", &["h", "lambda_h", "lambda_half", "richardson"]);
    out.rows.push(vec![
        Cell::Num(rep.h),
        Cell::Num(rep.lambda_h),
        Cell::Num(rep.lambda_half),
        Cell::Num(rep.richardson),
    ]);
    out.note("iterations", json!(rep.iterations));
    Ok(out)
}

fn inradius_experiment(p: &Params) -> Result<Outcome, CliError> {
    let mask = domain_mask(p)?;
    let w = inradius(&mask)?;
    let mut out = Outcome::new(
        "inradius",
        &["h", "inradius", "band", "center_x", "center_y"],
    );
    out.rows.push(vec![
        Cell::Num(mask.h()),
        Cell::Num(w.value),
        Cell::Num(w.band),
        Cell::Num(w.center[0]),
        Cell::Num(w.center[1]),
    ]);
    Ok(out)
}

fn appendix(p: &Params) -> Result<Outcome, CliError> {
    let ks = p.list("k_list").unwrap_or_default();
    let truncation = p.int("truncation", 20) as u32;
    let mut out = Outcome::new("appendix", &["k", "energy_bound", "l2_lower", "quotient"]);
    let mut reports = Vec::with_capacity(ks.len());
    for &k in &ks {
        let r = appendix_report(&LatticeDomainSpec::new(k, truncation)?);
        out.rows.push(vec![
            Cell::Num(r.k),
            Cell::Num(r.energy_bound),
            Cell::Num(r.l2_lower),
            Cell::Num(r.quotient),
        ]);
        reports.push(r);
    }
    if let Some(first) = reports.first() {
        out.note(
            "energy_coefficient_over_pi",
            json!(first.full_coefficient.to_string()),
        );
        out.note(
            "truncated_coefficient_over_pi",
            json!(first.truncated_coefficient.to_string()),
        );
        out.note("radius_sum", json!(first.radius_sum));
        out.note("inradius_bound", json!(first.inradius_bound));
        out.require(
            *first.full_coefficient.numer() == 44 && *first.full_coefficient.denom() == 1,
            "full-lattice energy coefficient is not 44",
        );
        out.require(
            first.truncated_energy_bound <= first.energy_bound,
            "truncated energy exceeds the full-lattice bound",
        );
    }
    for w in reports.windows(2) {
        if w[1].k > w[0].k {
            out.require(
                w[1].quotient < w[0].quotient,
                format!(
                    "quotient not decreasing between k = {} and k = {}",
                    w[0].k, w[1].k
                ),
            );
        }
    }
    Ok(out)
}

fn koebe(p: &Params) -> Result<Outcome, CliError> {
    let samples = p.int("samples", 256) as usize;
    let maps =
        p.0.get("maps")
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();
    let mut out = Outcome::new(
        "koebe",
        &[
            "map",
            "r",
            "image_inradius",
            "disc_form_max",
            "proof_form_max",
        ],
    );
    for m in &maps {
        let mp = Params(m.as_object().expect("validated map object"));
        let map = match mp.str("map", "identity") {
            "identity" => ConformalMap::Identity,
            "strip" => ConformalMap::Strip,
            "mobius" => {
                let a = mp.point("a").unwrap_or([0.5, 0.0]);
                ConformalMap::Mobius(Mobius::new(Complex64::new(a[0], a[1]))?)
            }
            _ => ConformalMap::power(mp.num("beta", 1.5))?,
        };
        let omega = map.image_inradius();
        let r = mp
            .num_opt("r")
            .or(omega.map(|w| 1.1 * w))
            .expect("validated radius");
        let rep = koebe_check(&map, r, samples)?;
        out.rows.push(vec![
            Cell::Text(map.name().into()),
            Cell::Num(r),
            Cell::Num(omega.unwrap_or(f64::NAN)),
            Cell::Num(rep.disc_form_max),
            Cell::Num(rep.proof_form_max),
        ]);
        if let Some(w) = omega {
            out.require(
                r > w,
                format!(
                    "{}: R = {r} does not exceed the image inradius {w}",
                    map.name()
                ),
            );
        }
        out.require(
            rep.contract_holds(),
            format!(
                "{}: (1−|z|)² form reached {}",
                map.name(),
                rep.proof_form_max
            ),
        );
    }
    Ok(out)
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(dir.join(name))
        .map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path, seed: u64) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_atomic(
        dir,
        &format!("{}.csv", outcome.experiment),
        outcome.csv().as_bytes(),
    )?;
    let mut json = serde_json::to_string_pretty(&outcome.json(seed))
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    json.push('\n');
    write_atomic(
        dir,
        &format!("{}.json", outcome.experiment),
        json.as_bytes(),
    )
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let config = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if args.validate {
        let errors = validate_config(&config);
        if errors.is_empty() {
            println!("ok");
            return 0;
        }
        for e in &errors {
            println!("error: {e}");
        }
        return 2;
    }
    let seed = args
        .seed
        .or_else(|| config.get("seed").and_then(Value::as_u64))
        .unwrap_or(0);
    let outcome = match run(&config, seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_outputs(&outcome, &args.out, seed) {
        eprintln!("error: {e}");
        return 1;
    }
    if outcome.violations.is_empty() {
        println!("ok: {}", outcome.experiment);
        0
    } else {
        let e = CliError::ContractViolation(outcome.violations.clone());
        eprintln!("error: {e}");
        e.exit_code()
    }
}
