//! Command implementations behind the `nwise` binary.
//!
//! Every command returns a [`Report`] holding the effective configuration, a
//! results payload and residuals. Reports render as JSON or CSV.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::assemblage::{self, Assemblage};
use crate::config::Tolerances;
use crate::error::Error;
use crate::feasibility::FeasibilityStatus;
use crate::gptfrag::{self, io as fragio, GptFragment, GptMeasurement};
use crate::jointmeas::{self, qubit_unbiased_threshold, JointPovm};
use crate::matcore::{self, her_eig, psd_project, tensor_herm, HermitianOperator, Subsystem};
use crate::observables::{
    anticommutation_check, bloch_observable, clifford_generators, paulis, unsharp_povm, unsharp_povms,
    DichotomicObservable, UnsharpnessParam,
};
use crate::states::{maximally_entangled, maximally_mixed};
use crate::witness::{self, Delta};
use crate::random;

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const SCAN_CSV_HEADER: [&str; 6] = ["set", "eta", "engine", "verdict", "value", "residual"];
pub const SELFTEST_CSV_HEADER: [&str; 4] = ["invariant", "passed", "value", "tolerance"];
pub const KV_CSV_HEADER: [&str; 2] = ["key", "value"];

#[derive(Parser, Debug, Clone)]
#[command(name = "nwise", version, about = "Joint measurability, incompatibility witnesses and steering tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the command's primary tolerance (see the README).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Record wall-clock time in the report (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Critical unsharpness of an observable set.
    JmThreshold {
        /// paulis | clifford:<n> | axes:<x,y,z;...> | gbit-fiducials
        #[arg(long)]
        set: String,
    },
    /// Optimized witness for Clifford observables on Alice's side.
    Witness {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// phi+ | mixed
        #[arg(long, default_value = "phi+")]
        state: String,
        /// One shared value or one comma-separated value per sign row.
        #[arg(long)]
        delta: Option<String>,
    },
    /// Verdicts of several engines over a grid of unsharpness values.
    Scan {
        #[arg(long)]
        set: String,
        /// Comma-separated values in [0, 1]; may be empty.
        #[arg(long, default_value = "")]
        grid: String,
        /// Comma-separated subset of jm, lhs, witness.
        #[arg(long, default_value = "jm")]
        engines: String,
    },
    /// Builds or imports an assemblage and tests it for an LHS model.
    Assemblage {
        #[arg(long, default_value = "paulis")]
        set: String,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// phi+ | mixed
        #[arg(long, default_value = "phi+")]
        state: String,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Incompatibility of a polytopic fragment (the gbit by default).
    GbitDemo {
        #[arg(long)]
        fragment: Option<PathBuf>,
    },
    /// Runs the invariant suite at reduced instance counts.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::JmThreshold { .. } => "jm-threshold",
            Command::Witness { .. } => "witness",
            Command::Scan { .. } => "scan",
            Command::Assemblage { .. } => "assemblage",
            Command::GbitDemo { .. } => "gbit-demo",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Lib(Error),
}

impl AppError {
    /// 2 for usage and input errors, 1 for engine and numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Lib(Error::Domain(_) | Error::Parse { .. }) => 2,
            AppError::Lib(_) => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Lib(e)
    }
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

type AppResult<T> = std::result::Result<T, AppError>;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tol_override: Option<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub residuals: Value,
    pub wall_clock_ms: Option<f64>,
}

/// A finished command: the report and whether every check inside it passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub success: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.success {
            0
        } else {
            1
        }
    }
}

/// Runs `cli` with tolerances from the environment override file, if any.
pub fn run(cli: &Cli) -> AppResult<Outcome> {
    let base = Tolerances::from_env().map_err(|e| usage(format!("tolerance file: {e}")))?;
    run_with(cli, base)
}

pub fn run_with(cli: &Cli, base: Tolerances) -> AppResult<Outcome> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(usage(format!("--tol must be positive, got {t}")));
        }
    }
    let start = Instant::now();
    let mut tol = base;
    let (results, residuals, success) = match &cli.command {
        Command::JmThreshold { set } => {
            if let Some(t) = cli.tol {
                tol.eta = t;
            }
            cmd_jm_threshold(set, &tol)?
        }
        Command::Witness { n, eta, state, delta } => {
            if let Some(t) = cli.tol {
                tol.violation = t;
            }
            cmd_witness(*n, *eta, state, delta.as_deref(), &tol)?
        }
        Command::Scan { set, grid, engines } => {
            if let Some(t) = cli.tol {
                tol.feasibility = t;
            }
            cmd_scan(set, grid, engines, &tol)?
        }
        Command::Assemblage { set, eta, state, input, export } => {
            if let Some(t) = cli.tol {
                tol.feasibility = t;
            }
            cmd_assemblage(set, *eta, state, input.as_ref(), export.as_ref(), &tol)?
        }
        Command::GbitDemo { fragment } => {
            if let Some(t) = cli.tol {
                tol.eta = t;
            }
            cmd_gbit_demo(fragment.as_ref(), &tol)?
        }
        Command::Selftest => cmd_selftest(cli.seed, cli.tol, &tol)?,
    };
    let report = Report {
        command: cli.command.name().to_string(),
        config: RunConfig {
            command: cli.command.clone(),
            format: cli.format,
            out: cli.out.clone(),
            tol_override: cli.tol,
            seed: cli.seed,
            tolerances: tol,
        },
        results,
        residuals,
        wall_clock_ms: cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Outcome { report, success })
}

// ---------------------------------------------------------------- rendering

pub fn render(report: &Report, format: Format) -> AppResult<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| usage(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => render_csv(report),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// Row-shaped results (`scan`, `selftest`) become one CSV row each under a fixed
/// header; other commands become flattened `key,value` pairs.
fn render_csv(report: &Report) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Option<&[&str]> = match report.command.as_str() {
        "scan" => Some(&SCAN_CSV_HEADER),
        "selftest" => Some(&SELFTEST_CSV_HEADER),
        _ => None,
    };
    let csv_err = |e: csv::Error| AppError::Lib(Error::Io(std::io::Error::other(e)));
    match header {
        Some(h) => {
            w.write_record(h).map_err(csv_err)?;
            for row in report.results["rows"].as_array().into_iter().flatten() {
                w.write_record(h.iter().map(|k| scalar(&row[*k]))).map_err(csv_err)?;
            }
        }
        None => {
            w.write_record(KV_CSV_HEADER).map_err(csv_err)?;
            let mut pairs = Vec::new();
            flatten("", &report.results, &mut pairs);
            flatten("residuals", &report.residuals, &mut pairs);
            for (k, v) in pairs {
                w.write_record([k, v]).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| usage(e.to_string()))
}

// ---------------------------------------------------------------- specs

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Paulis,
    Clifford(usize),
    Axes(Vec<[f64; 3]>),
    GbitFiducials,
}

impl SetSpec {
    pub fn parse(s: &str) -> AppResult<Self> {
        let s = s.trim();
        if s == "paulis" {
            return Ok(SetSpec::Paulis);
        }
        if s == "gbit-fiducials" {
            return Ok(SetSpec::GbitFiducials);
        }
        if let Some(n) = s.strip_prefix("clifford:") {
            let n: usize = n.parse().map_err(|_| usage(format!("bad Clifford count {n:?}")))?;
            if !(1..=crate::observables::MAX_CLIFFORD_GENERATORS).contains(&n) {
                return Err(usage(format!(
                    "clifford:n needs 1 <= n <= {}",
                    crate::observables::MAX_CLIFFORD_GENERATORS
                )));
            }
            return Ok(SetSpec::Clifford(n));
        }
        if let Some(list) = s.strip_prefix("axes:") {
            let axes = list
                .split(';')
                .map(|v| {
                    let c: Vec<f64> = v
                        .split(',')
                        .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("bad axis component {x:?}"))))
                        .collect::<AppResult<_>>()?;
                    let [a, b, c] = c[..] else { return Err(usage(format!("axis {v:?} needs three components"))) };
                    let norm = (a * a + b * b + c * c).sqrt();
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(usage(format!("axis {v:?} has no direction")));
                    }
                    Ok([a / norm, b / norm, c / norm])
                })
                .collect::<AppResult<Vec<_>>>()?;
            return Ok(SetSpec::Axes(axes));
        }
        Err(usage(format!("unknown set {s:?}; expected paulis, clifford:<n>, axes:<x,y,z;...> or gbit-fiducials")))
    }

    /// Quantum observables; `None` for the gbit.
    pub fn observables(&self) -> AppResult<Option<Vec<DichotomicObservable>>> {
        Ok(match self {
            SetSpec::Paulis => Some(paulis()),
            SetSpec::Clifford(n) => Some(clifford_generators(*n)?),
            SetSpec::Axes(ax) => Some(ax.iter().map(|k| bloch_observable(*k)).collect::<Result<_, _>>()?),
            SetSpec::GbitFiducials => None,
        })
    }

    fn bloch_axes(&self) -> Option<Vec<[f64; 3]>> {
        match self {
            SetSpec::Paulis => Some(vec![[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]]),
            SetSpec::Axes(a) => Some(a.clone()),
            _ => None,
        }
    }
}

fn quantum_set(spec: &SetSpec) -> AppResult<Vec<DichotomicObservable>> {
    spec.observables()?.ok_or_else(|| usage("this command needs a quantum observable set"))
}

fn bipartite_state(spec: &str, dim_a: usize) -> AppResult<HermitianOperator> {
    match spec {
        "phi+" => Ok(maximally_entangled(dim_a)),
        "mixed" => Ok(maximally_mixed(dim_a * dim_a)),
        other => Err(usage(format!("unknown state {other:?}; expected phi+ or mixed"))),
    }
}

fn check_eta(eta: f64) -> AppResult<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(usage(format!("eta must lie in [0, 1], got {eta}")))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize")
}

type CmdOut = (Value, Value, bool);

// ---------------------------------------------------------------- commands

fn cmd_jm_threshold(set: &str, tol: &Tolerances) -> AppResult<CmdOut> {
    let spec = SetSpec::parse(set)?;
    let (result, engine, reference) = match spec.observables()? {
        Some(obs) => {
            let r = jointmeas::jm_threshold_with(&obs, tol)?;
            let reference = match (&spec, spec.bloch_axes()) {
                (_, Some(axes)) => Some(qubit_unbiased_threshold(&axes)?),
                (SetSpec::Clifford(n), None) if *n >= 2 => Some(1.0 / (*n as f64).sqrt()),
                _ => None,
            };
            (r, "psd-alternating-projections", reference)
        }
        None => {
            let r = gptfrag::gpt_jm_threshold(&gptfrag::gbit(), &gptfrag::gbit_fiducials(), tol.eta)?;
            (r, "linear-program", None)
        }
    };
    let results = json!({
        "set": set,
        "engine": engine,
        "eta_star": result.eta_star,
        "bracket": [result.bracket.0, result.bracket.1],
        "undecided_at": result.undecided_at,
        "evaluations": result.evaluations,
        "iterations": result.iterations,
        "reference": reference,
    });
    let residuals = json!({ "bracket_width": result.width(), "tol_eta": tol.eta });
    Ok((results, residuals, true))
}

fn parse_delta(s: Option<&str>) -> AppResult<Delta> {
    let Some(s) = s else { return Ok(Delta::default()) };
    let vals = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad delta value {v:?}"))))
        .collect::<AppResult<Vec<_>>>()?;
    Ok(if vals.len() == 1 { Delta::Shared(vals[0]) } else { Delta::PerRow(vals) })
}

fn cmd_witness(n: usize, eta: f64, state: &str, delta: Option<&str>, tol: &Tolerances) -> AppResult<CmdOut> {
    if !(2..=5).contains(&n) {
        return Err(usage(format!("--n must be between 2 and 5, got {n}")));
    }
    check_eta(eta)?;
    let delta = parse_delta(delta)?;
    let rows = 1usize << (n - 1);
    if let Delta::PerRow(v) = &delta {
        if v.len() != rows {
            return Err(usage(format!("--delta needs 1 or {rows} values, got {}", v.len())));
        }
    }
    let alice = clifford_generators(n)?;
    let rho = bipartite_state(state, alice[0].dim())?;
    let opt = witness::optimize_bob(&rho, &alice, eta)?;
    let r = witness::witness_value_with(&rho, &alice, eta, &opt.bob, &delta, tol)?;
    let results = json!({
        "n": n,
        "eta": eta,
        "state": state,
        "value": r.value,
        "bound_local": r.bound_local,
        "bound_quantum": r.bound_quantum,
        "per_y_terms": r.per_y_terms,
        "delta_used": r.delta_used,
        "violation": r.violation,
    });
    let residuals = json!({ "sos_gap": r.sos_gap });
    Ok((results, residuals, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Engine {
    Jm,
    Lhs,
    Witness,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Jm => "jm",
            Engine::Lhs => "lhs",
            Engine::Witness => "witness",
        }
    }
}

fn parse_grid(grid: &str) -> AppResult<Vec<f64>> {
    grid.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: f64 = s.parse().map_err(|_| usage(format!("bad grid value {s:?}")))?;
            check_eta(v)?;
            Ok(v)
        })
        .collect()
}

fn parse_engines(s: &str) -> AppResult<Vec<Engine>> {
    let mut out: Vec<Engine> = s
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|e| match e {
            "jm" => Ok(Engine::Jm),
            "lhs" => Ok(Engine::Lhs),
            "witness" => Ok(Engine::Witness),
            other => Err(usage(format!("unknown engine {other:?}; expected jm, lhs or witness"))),
        })
        .collect::<AppResult<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(usage("no engines selected"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct ScanRow {
    set: String,
    eta: f64,
    engine: &'static str,
    verdict: String,
    value: Option<f64>,
    residual: Option<f64>,
}

fn scan_point(set: &str, spec: &SetSpec, eta: f64, engine: Engine, tol: &Tolerances) -> AppResult<ScanRow> {
    let row = |verdict: &str, value, residual| ScanRow {
        set: set.to_string(),
        eta,
        engine: engine.name(),
        verdict: verdict.to_string(),
        value,
        residual,
    };
    let Some(obs) = spec.observables()? else {
        if engine != Engine::Jm {
            return Err(usage("the gbit set supports only the jm engine"));
        }
        let g = gptfrag::gbit();
        let ms = gptfrag::gbit_fiducials()
            .iter()
            .map(|m| m.smeared(eta, g.unit()))
            .collect::<Result<Vec<_>, _>>()?;
        let out = gptfrag::gpt_jm_feasible(&g, &ms)?;
        let verdict = if out.is_feasible() { "feasible" } else { "infeasible" };
        return Ok(row(verdict, None, out.verification_residual));
    };
    let povms = unsharp_povms(&obs, UnsharpnessParam::new(eta)?);
    Ok(match engine {
        Engine::Jm => {
            let v = jointmeas::jm_feasible_with(&povms, tol)?;
            row(v.status.as_str(), None, Some(v.residual))
        }
        Engine::Lhs => {
            let rho = maximally_entangled(obs[0].dim());
            let v = assemblage::lhs_feasible_with(&assemblage::steer(&rho, &povms)?, tol)?;
            row(v.status.as_str(), None, Some(v.residual))
        }
        Engine::Witness => {
            if obs.len() < witness::MIN_SETTINGS {
                return Err(usage("the witness engine needs at least two observables"));
            }
            let rho = maximally_entangled(obs[0].dim());
            let opt = witness::optimize_bob(&rho, &obs, eta)?;
            let bound = (1u64 << (obs.len() - 1)) as f64;
            let gap = witness::sos_certificate_with(&rho, &obs, eta, &opt.bob, tol)?.difference_form;
            let verdict = if opt.value > bound + tol.violation { "violation" } else { "no-violation" };
            row(verdict, Some(opt.value), Some(gap))
        }
    })
}

fn cmd_scan(set: &str, grid: &str, engines: &str, tol: &Tolerances) -> AppResult<CmdOut> {
    let spec = SetSpec::parse(set)?;
    let mut grid = parse_grid(grid)?;
    let engines = parse_engines(engines)?;
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len() * engines.len());
    for &eta in &grid {
        for &e in &engines {
            rows.push(scan_point(set, &spec, eta, e, tol)?);
        }
    }
    let worst = rows.iter().filter_map(|r| r.residual).fold(None, |m: Option<f64>, r| {
        Some(m.map_or(r, |m| m.max(r)))
    });
    let results = json!({ "rows": to_value(&rows) });
    Ok((results, json!({ "max_residual": worst }), true))
}

fn cmd_assemblage(
    set: &str,
    eta: f64,
    state: &str,
    input: Option<&PathBuf>,
    export: Option<&PathBuf>,
    tol: &Tolerances,
) -> AppResult<CmdOut> {
    let asm: Assemblage = match input {
        Some(path) => assemblage::io::parse(&std::fs::read_to_string(path).map_err(Error::Io)?)?,
        None => {
            check_eta(eta)?;
            let obs = quantum_set(&SetSpec::parse(set)?)?;
            let rho = bipartite_state(state, obs[0].dim())?;
            assemblage::steer(&rho, &unsharp_povms(&obs, UnsharpnessParam::new(eta)?))?
        }
    };
    if let Some(path) = export {
        std::fs::write(path, assemblage::io::write(&asm)).map_err(Error::Io)?;
    }
    let v = assemblage::lhs_feasible_with(&asm, tol)?;
    let (embeddable, _) = assemblage::simplex_embeddable_verdict(&asm, tol)?;
    let source = match input {
        Some(p) => json!({ "input": p }),
        None => json!({ "set": set, "eta": eta, "state": state }),
    };
    let results = json!({
        "source": source,
        "n": asm.n(),
        "dim_b": asm.dim_b(),
        "lhs_status": v.status,
        "lhs_iterations": v.iterations,
        "simplex_embeddable": embeddable,
        "exported": export,
    });
    let residuals = json!({ "lhs": v.residual, "no_signalling": asm.no_signalling_residual() });
    Ok((results, residuals, true))
}

fn cmd_gbit_demo(fragment: Option<&PathBuf>, tol: &Tolerances) -> AppResult<CmdOut> {
    let (frag, ms): (GptFragment, Vec<GptMeasurement>) = match fragment {
        Some(path) => {
            let f = fragio::parse(&std::fs::read_to_string(path).map_err(Error::Io)?)?;
            (f.fragment, f.measurements)
        }
        None => (gptfrag::gbit(), gptfrag::gbit_fiducials().to_vec()),
    };
    if ms.is_empty() {
        return Err(usage("the fragment file lists no measurements"));
    }
    let sharp = gptfrag::gpt_jm_feasible(&frag, &ms)?;
    let t = gptfrag::gpt_jm_threshold(&frag, &ms, tol.eta)?;
    let quantum_pair = std::f64::consts::FRAC_1_SQRT_2;
    let mut classical = Vec::new();
    for d in 2..=4 {
        classical.push(json!({ "d": d, "all_pairs_and_triples_feasible": simplicial_all_feasible(d)? }));
    }
    let results = json!({
        "fragment": fragment.map_or_else(|| json!("gbit"), |p| json!(p)),
        "vec_dim": frag.vec_dim(),
        "states": frag.states().len(),
        "effects": frag.effects().len(),
        "measurements": ms.len(),
        "sharp_jointly_measurable": sharp.is_feasible(),
        "eta_star": t.eta_star,
        "bracket": [t.bracket.0, t.bracket.1],
        "quantum_pair_threshold": quantum_pair,
        "below_quantum_pair": ms.len() == 2 && t.bracket.1 < quantum_pair,
        "simplicial": classical,
    });
    let residuals = json!({ "bracket_width": t.width(), "tol_eta": tol.eta, "lp_pivots_sharp": sharp.solution.pivots });
    Ok((results, residuals, true))
}

/// Every pair and triple of distinct nontrivial indicator measurements on the
/// `d`-simplex is jointly measurable.
pub fn simplicial_all_feasible(d: usize) -> crate::Result<bool> {
    let f = gptfrag::simplicial_gpt(d)?;
    let nontrivial: Vec<usize> = (1..f.effects().len() - 1).collect();
    let ms = nontrivial.iter().map(|&e| f.binary_measurement(e)).collect::<crate::Result<Vec<_>>>()?;
    let k = ms.len();
    for i in 0..k {
        for j in i + 1..k {
            if !gptfrag::gpt_jm_feasible(&f, &[ms[i].clone(), ms[j].clone()])?.is_feasible() {
                return Ok(false);
            }
            for l in j + 1..k {
                let set = [ms[i].clone(), ms[j].clone(), ms[l].clone()];
                if !gptfrag::gpt_jm_feasible(&f, &set)?.is_feasible() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- selftest

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub invariant: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
    /// Set when the check itself failed to run.
    pub error: Option<String>,
}

type Check = fn(&mut random::SeededRng, &Tolerances) -> crate::Result<f64>;

/// `(name, default tolerance, measurement)`; each measurement returns a worst-case
/// deviation that passes when it is at most the tolerance.
const INVARIANTS: &[(&str, f64, Check)] = &[
    ("eig_reconstruction", 1e-10, inv_eig),
    ("psd_projection_idempotent", 1e-10, inv_psd),
    ("kron_op_norm_multiplicative", 1e-10, inv_kron),
    ("partial_trace_linear", 1e-12, inv_ptrace),
    ("clifford_anticommutation", 1e-12, inv_clifford),
    ("unsharp_povm_identities", 1e-12, inv_unsharp),
    ("jm_pair_threshold", 2e-3, inv_pair),
    ("jm_triple_threshold", 2e-3, inv_triple),
    ("qubit_closed_form", 1e-12, inv_closed_form),
    ("witness_optimum", 1e-8, inv_witness_opt),
    ("witness_boundary", 1e-6, inv_boundary),
    ("sos_gap_nonnegative", 1e-8, inv_sos),
    ("steer_no_signalling", 1e-12, inv_steer),
    ("lhs_jm_agreement", 0.5, inv_lhs_jm),
    ("gbit_threshold", 2e-3, inv_gbit),
    ("simplicial_classical", 0.5, inv_simplicial),
    ("sign_pattern_normalization", 1e-9, inv_normalization),
];

fn cmd_selftest(seed: u64, check_tol: Option<f64>, tol: &Tolerances) -> AppResult<CmdOut> {
    let mut rng = random::seeded(seed);
    let mut rows = Vec::with_capacity(INVARIANTS.len());
    for &(name, default_tol, check) in INVARIANTS {
        let tolerance = check_tol.unwrap_or(default_tol);
        let (value, error) = match check(&mut rng, tol) {
            Ok(v) => (v, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        rows.push(InvariantResult { invariant: name, passed: value <= tolerance, value, tolerance, error });
    }
    let failures: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.invariant).collect();
    let success = failures.is_empty();
    let results = json!({ "seed": seed, "passed": success, "failures": failures, "rows": to_value(&rows) });
    let worst = rows.iter().map(|r| r.value / r.tolerance).fold(0.0, f64::max);
    Ok((results, json!({ "worst_value_to_tolerance": worst }), success))
}

fn inv_eig(rng: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..12 {
        let h = random::hermitian(2 + k % 5, rng);
        let e = her_eig(&h)?;
        let v = &e.vectors;
        let gram = &v.adjoint() * v;
        worst = worst
            .max(e.reconstruct().distance(h.matrix()))
            .max(gram.distance(&matcore::ComplexMatrix::identity(h.dim())));
    }
    Ok(worst)
}

fn inv_psd(rng: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..12 {
        let p = psd_project(&random::hermitian(2 + k % 4, rng))?;
        worst = worst.max(psd_project(&p)?.distance(&p)).max(-p.min_eigenvalue()?);
    }
    Ok(worst)
}

fn inv_kron(rng: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let (a, b) = (random::hermitian(2, rng), random::hermitian(3, rng));
        let lhs = matcore::op_norm(&tensor_herm(&a, &b))?;
        worst = worst.max((lhs - matcore::op_norm(&a)? * matcore::op_norm(&b)?).abs());
    }
    Ok(worst)
}

fn inv_ptrace(rng: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let (x, y) = (random::hermitian(6, rng), random::hermitian(6, rng));
        let c = random::uniform(rng);
        for keep in [Subsystem::A, Subsystem::B] {
            let lhs = matcore::partial_trace(&(&x + &y.scale(c)), 2, 3, keep)?;
            let rhs = &matcore::partial_trace(&x, 2, 3, keep)? + &matcore::partial_trace(&y, 2, 3, keep)?.scale(c);
            worst = worst.max(lhs.distance(&rhs));
        }
    }
    Ok(worst)
}

fn inv_clifford(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for n in 2..=7 {
        worst = worst.max(anticommutation_check(&clifford_generators(n)?)?.max_residual);
    }
    Ok(worst)
}

fn inv_unsharp(rng: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let a = random::dichotomic(3, rng);
        let eta = random::uniform(rng);
        let p = unsharp_povm(&a, UnsharpnessParam::new(eta)?);
        let bias = p.bias()?;
        worst = worst.max(bias.distance(&a.op().scale(eta)));
        let total = p.outcomes().iter().fold(HermitianOperator::zeros(3), |acc, (_, e)| &acc + e);
        worst = worst.max(total.distance(&HermitianOperator::identity(3)));
    }
    Ok(worst)
}

fn inv_pair(_: &mut random::SeededRng, tol: &Tolerances) -> crate::Result<f64> {
    let obs = clifford_generators(2)?;
    let r = jointmeas::jm_threshold_with(&obs, &Tolerances { eta: 1e-3, ..*tol })?;
    Ok((r.eta_star - std::f64::consts::FRAC_1_SQRT_2).abs())
}

fn inv_triple(_: &mut random::SeededRng, tol: &Tolerances) -> crate::Result<f64> {
    let r = jointmeas::jm_threshold_with(&paulis(), &Tolerances { eta: 1e-3, ..*tol })?;
    Ok((r.eta_star - (1.0f64 / 3.0).sqrt()).abs())
}

fn inv_closed_form(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let two = qubit_unbiased_threshold(&[[1., 0., 0.], [0., 0., 1.]])?;
    let three = qubit_unbiased_threshold(&[[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]])?;
    Ok((two - 0.5f64.sqrt()).abs().max((three - (1.0f64 / 3.0).sqrt()).abs()))
}

fn inv_witness_opt(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let alice = clifford_generators(n)?;
        let rho = maximally_entangled(alice[0].dim());
        for eta in [0.5, 1.0] {
            let expected = witness::quantum_optimum(n, eta);
            let got = witness::optimize_bob(&rho, &alice, eta)?.value;
            worst = worst.max((got - expected).abs() / expected);
        }
    }
    Ok(worst)
}

fn inv_boundary(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let alice = clifford_generators(n)?;
        let rho = maximally_entangled(alice[0].dim());
        let onset = witness::violation_onset(&rho, &alice, 1e-9)?.unwrap_or(f64::INFINITY);
        worst = worst.max((onset - 1.0 / (n as f64).sqrt()).abs());
    }
    Ok(worst)
}

/// Negative part of the SOS gap over random instances, plus any disagreement between
/// its two routes.
fn inv_sos(rng: &mut random::SeededRng, tol: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..20 {
        let d = if k % 2 == 0 { 2 } else { 4 };
        let n = 2 + k % 2;
        let alice: Vec<_> = (0..n).map(|_| random::dichotomic(d, rng)).collect();
        let bob: Vec<_> = (0..1 << (n - 1)).map(|_| random::dichotomic(d, rng)).collect();
        let rho = random::density(d * d, rng);
        let eta = random::uniform(rng);
        let c = witness::sos_certificate_with(&rho, &alice, eta, &bob, tol)?;
        worst = worst.max(-c.difference_form).max((c.difference_form - c.operator_form).abs());
    }
    Ok(worst)
}

fn inv_steer(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let asm = assemblage::steer(&maximally_entangled(2), &unsharp_povms(&paulis(), UnsharpnessParam::sharp()))?;
    Ok(asm.no_signalling_residual())
}

/// Count of grid points where the LHS and joint-measurability verdicts differ.
fn inv_lhs_jm(_: &mut random::SeededRng, tol: &Tolerances) -> crate::Result<f64> {
    let mut mismatches = 0.0;
    for (obs, grid) in [(clifford_generators(2)?, [0.4, 0.65, 0.75, 0.9]), (paulis(), [0.3, 0.55, 0.6, 0.8])] {
        let rho = maximally_entangled(2);
        for eta in grid {
            let povms = unsharp_povms(&obs, UnsharpnessParam::new(eta)?);
            let jm = jointmeas::jm_feasible_with(&povms, tol)?.status;
            let lhs = assemblage::lhs_feasible_with(&assemblage::steer(&rho, &povms)?, tol)?.status;
            if jm != lhs || jm == FeasibilityStatus::Undecided {
                mismatches += 1.0;
            }
        }
    }
    Ok(mismatches)
}

fn inv_gbit(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let r = gptfrag::gpt_jm_threshold(&gptfrag::gbit(), &gptfrag::gbit_fiducials(), 1e-3)?;
    Ok((r.eta_star - 0.5).abs())
}

fn inv_simplicial(_: &mut random::SeededRng, _: &Tolerances) -> crate::Result<f64> {
    let mut failures = 0.0;
    for d in 2..=3 {
        if !simplicial_all_feasible(d)? {
            failures += 1.0;
        }
    }
    Ok(failures)
}

fn inv_normalization(rng: &mut random::SeededRng, tol: &Tolerances) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..4 {
        let axes: Vec<_> = (0..2 + k % 2).map(|_| random::unit_vector3(rng)).collect();
        let obs = axes.iter().map(|a| bloch_observable(*a)).collect::<crate::Result<Vec<_>>>()?;
        let povms = unsharp_povms(&obs, UnsharpnessParam::new(0.45)?);
        let v = jointmeas::jm_feasible_with(&povms, tol)?;
        let joint: JointPovm = v.certificate.ok_or_else(|| Error::Numeric("no certificate at η = 0.45".into()))?;
        let rho = random::density(4, rng);
        let bob = random::dichotomic(2, rng);
        let total: f64 = witness::sign_pattern_probabilities(&joint, &rho, &bob)?.iter().sum();
        worst = worst.max((total - 1.0).abs());
    }
    Ok(worst)
}
