//! Command implementations behind the `densecode` binary.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densecode::channels::{ChannelConfig, CorrelatedPauliSpec, KrausMap, PauliChannelSpec};
use densecode::holevo::{
    analytic_capacity_quasi, capacity_nonunitary, capacity_unitary, eig23, transferred_info_preprocessed,
};
use densecode::optimize::{crossover_mu, minimize_cptp, minimize_unitary, OptimizerConfig};
use densecode::qmat::{shannon_entropy, CMatrix};
use densecode::states::{max_entangled, werner, DensityOperator};
use densecode::verify::{run_all, VerifyConfig, VerifyReport};
use rayon::prelude::*;
use serde::Serialize;

pub mod format;

pub use format::format_sig;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => exit::USAGE,
            Failure::Io(_) => exit::IO,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<densecode::Error> for Failure {
    fn from(e: densecode::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "densecode", version, about = "Dense coding capacity through correlated Pauli channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Capacity at a single parameter point, printed as JSON.
    Capacity(CapacityArgs),
    /// Capacity over a 1-D or 2-D parameter grid, written as CSV or JSON.
    Sweep(SweepArgs),
    /// Correlation degree at which unitary and reset-pre-processed encodings tie.
    Crossover(CrossoverArgs),
    /// Run the numerical identity suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    QuasiClassical,
    FullyCorrelated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    /// |Φ⁺⟩ for d = 2, the maximally entangled state otherwise.
    Bell,
    Werner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    Unitary,
    Preprocessed,
    OptimizeUnitary,
    OptimizeCptp,
}

impl Encoding {
    pub fn label(self) -> &'static str {
        match self {
            Encoding::Unitary => "unitary",
            Encoding::Preprocessed => "preprocessed",
            Encoding::OptimizeUnitary => "optimize-unitary",
            Encoding::OptimizeCptp => "optimize-cptp",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "quasi-classical")]
    pub channel: ChannelKind,
    /// Channel as a JSON object; overrides --channel, --d, --p and --mu.
    #[arg(long)]
    pub channel_json: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "bell")]
    pub state: StateKind,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value = "unitary")]
    pub encoding: Encoding,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizerArgs {
    /// JSON file with optimizer settings (restarts, max_iters, ftol, seed).
    #[arg(long)]
    pub optimizer_config: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub ftol: Option<f64>,
    /// Kraus rank for optimize-cptp (default d²).
    #[arg(long)]
    pub d_env: Option<usize>,
}

impl OptimizerArgs {
    pub fn resolve(&self) -> Result<OptimizerConfig, Failure> {
        let mut cfg = match &self.optimizer_config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
            }
            None => OptimizerConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(f) = self.ftol {
            cfg.ftol = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub out: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// `name:start:stop:steps` with name one of p, mu, eta.
    #[arg(long)]
    pub axis1: AxisSpec,
    #[arg(long)]
    pub axis2: Option<AxisSpec>,
    /// `name=value` for each parameter not swept.
    #[arg(long = "fix")]
    pub fix: Vec<String>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct CrossoverArgs {
    #[arg(long)]
    pub p_start: f64,
    #[arg(long)]
    pub p_stop: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Also write the JSON array to this file.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 5)]
    pub grid_density: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub corrupt_channel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    P,
    Mu,
    Eta,
}

impl FromStr for Param {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "p" => Ok(Param::P),
            "mu" => Ok(Param::Mu),
            "eta" => Ok(Param::Eta),
            other => Err(format!("unknown parameter {other:?} (expected p, mu or eta)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisSpec {
    pub name: Param,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

impl FromStr for AxisSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, start, stop, steps] = parts.as_slice() else {
            return Err(format!("axis {s:?} is not name:start:stop:steps"));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let axis = AxisSpec {
            name: name.parse()?,
            start: num(start)?,
            stop: num(stop)?,
            steps: steps.parse().map_err(|e| format!("{steps:?}: {e}"))?,
        };
        if axis.steps < 2 {
            return Err(format!("axis {s:?} needs at least 2 steps"));
        }
        if !(axis.start < axis.stop) {
            return Err(format!("axis {s:?} needs start < stop"));
        }
        Ok(axis)
    }
}

/// Resolved grid: the swept axes plus fixed values for the rest.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    pub fixed: Vec<(Param, f64)>,
}

impl SweepSpec {
    pub fn new(axis1: AxisSpec, axis2: Option<AxisSpec>, fix: &[String]) -> Result<Self, Failure> {
        let mut fixed = Vec::new();
        for item in fix {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("--fix {item:?} is not name=value")))?;
            let name: Param = name.parse().map_err(Failure::Usage)?;
            let value: f64 = value
                .parse()
                .map_err(|e| Failure::Usage(format!("--fix {item:?}: {e}")))?;
            fixed.push((name, value));
        }
        let mut names: Vec<Param> = fixed.iter().map(|(n, _)| *n).collect();
        names.push(axis1.name);
        if let Some(a) = &axis2 {
            names.push(a.name);
        }
        for wanted in [Param::P, Param::Mu, Param::Eta] {
            match names.iter().filter(|&&n| n == wanted).count() {
                1 => {}
                0 => return Err(Failure::Usage(format!("parameter {wanted:?} is neither swept nor fixed"))),
                _ => return Err(Failure::Usage(format!("parameter {wanted:?} is given more than once"))),
            }
        }
        Ok(SweepSpec { axis1, axis2, fixed })
    }

    /// Grid points in row-major order (axis1 outer, axis2 inner).
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        let a1 = self.axis1.values();
        match &self.axis2 {
            None => a1.into_iter().map(|x| (x, None)).collect(),
            Some(ax) => {
                let a2 = ax.values();
                a1.iter()
                    .flat_map(|&x| a2.iter().map(move |&y| (x, Some(y))))
                    .collect()
            }
        }
    }

    fn apply(&self, model: &ModelArgs, a1: f64, a2: Option<f64>) -> ModelArgs {
        let mut m = model.clone();
        let mut set = |name: Param, v: f64| match name {
            Param::P => m.p = v,
            Param::Mu => m.mu = v,
            Param::Eta => m.eta = v,
        };
        for &(name, v) in &self.fixed {
            set(name, v);
        }
        set(self.axis1.name, a1);
        if let (Some(ax), Some(v)) = (&self.axis2, a2) {
            set(ax.name, v);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub capacity_bits: f64,
    pub bob_term_bits: f64,
    pub min_entropy_bits: f64,
    pub encoding: Encoding,
    pub analytic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

impl Evaluation {
    pub fn converged(&self) -> bool {
        self.converged.unwrap_or(true)
    }
}

struct Model {
    channel: CorrelatedPauliSpec,
    /// Correlated quasi-classical qubit channel; admits the closed-form spectrum.
    quasi_qubit: bool,
    state: DensityOperator,
    werner_family: bool,
}

fn build_model(m: &ModelArgs) -> Result<Model, Failure> {
    let (channel, quasi_qubit) = match &m.channel_json {
        Some(text) => {
            let cfg: ChannelConfig =
                serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--channel-json: {e}")))?;
            let quasi = matches!(cfg, ChannelConfig::QuasiClassical { d: 2, .. });
            (cfg.build()?, quasi)
        }
        None => match m.channel {
            ChannelKind::QuasiClassical => (CorrelatedPauliSpec::quasi_classical(m.d, m.p, m.mu)?, m.d == 2),
            ChannelKind::FullyCorrelated => (
                CorrelatedPauliSpec::fully_correlated(PauliChannelSpec::quasi_classical(m.d, m.p)?)?,
                m.d == 2,
            ),
        },
    };
    let d = channel.d();
    let (state, werner_family) = match m.state {
        StateKind::Bell if d == 2 => (werner(1.0)?, true),
        StateKind::Bell => (max_entangled(d)?, false),
        StateKind::Werner if d == 2 => (werner(m.eta)?, true),
        StateKind::Werner => {
            return Err(Failure::Usage(format!("Werner states are defined for d = 2, got d = {d}")));
        }
    };
    Ok(Model {
        channel,
        quasi_qubit,
        state,
        werner_family,
    })
}

fn eta_of(m: &ModelArgs) -> f64 {
    match m.state {
        StateKind::Bell => 1.0,
        StateKind::Werner => m.eta,
    }
}

/// Capacity for one parameter point.
pub fn evaluate(m: &ModelArgs) -> Result<Evaluation, Failure> {
    let model = build_model(m)?;
    let d = model.channel.d();
    let mu = model.channel.mu();
    let eta = eta_of(m);
    let cfg = m.optimizer.resolve()?;
    let encoding = m.encoding;

    let from_report = |r: densecode::holevo::CapacityReport, analytic: bool, converged: Option<bool>| Evaluation {
        capacity_bits: r.capacity_bits,
        bob_term_bits: r.bob_term_bits,
        min_entropy_bits: r.min_entropy_bits,
        encoding,
        analytic,
        converged,
    };

    match encoding {
        Encoding::Unitary if model.werner_family && model.quasi_qubit => {
            // Identity is optimal; spectrum in closed form.
            let p = model.channel.marginal().prob(1, 0) * 2.0;
            let min_entropy = shannon_entropy(&eig23(eta, mu, p, 0.0));
            Ok(Evaluation {
                capacity_bits: analytic_capacity_quasi(eta, mu, p),
                bob_term_bits: 1.0,
                min_entropy_bits: min_entropy,
                encoding,
                analytic: true,
                converged: None,
            })
        }
        Encoding::Unitary if model.werner_family && mu == 1.0 => {
            // Identity is optimal for any fully correlated qubit Pauli channel.
            let r = capacity_unitary(&model.channel, &model.state, &CMatrix::identity(2))?;
            Ok(from_report(r, true, None))
        }
        Encoding::Unitary | Encoding::OptimizeUnitary => {
            let best = minimize_unitary(&model.channel, &model.state, &cfg)?;
            let u = best.unitary().expect("unitary search returns a unitary").clone();
            let r = capacity_unitary(&model.channel, &model.state, &u)?;
            Ok(from_report(r, false, Some(best.converged)))
        }
        Encoding::Preprocessed => {
            if d != 2 {
                return Err(Failure::Usage(format!("the reset pre-processing needs d = 2, got d = {d}")));
            }
            if model.quasi_qubit && eta == 1.0 {
                let p = model.channel.marginal().prob(1, 0) * 2.0;
                let c = transferred_info_preprocessed(p);
                return Ok(Evaluation {
                    capacity_bits: c,
                    bob_term_bits: 1.0,
                    min_entropy_bits: 2.0 - c,
                    encoding,
                    analytic: true,
                    converged: None,
                });
            }
            let r = capacity_nonunitary(&model.channel, &model.state, &KrausMap::qubit_reset())?;
            Ok(from_report(r, false, None))
        }
        Encoding::OptimizeCptp => {
            let d_env = m.optimizer.d_env.unwrap_or(d * d);
            let best = minimize_cptp(&model.channel, &model.state, d_env, &cfg)?;
            let r = capacity_nonunitary(&model.channel, &model.state, &best.encoder)?;
            Ok(from_report(r, false, Some(best.converged)))
        }
    }
}

pub fn cmd_capacity(args: &CapacityArgs) -> Result<(String, i32), Failure> {
    let e = evaluate(&args.model)?;
    let code = if e.converged() { exit::OK } else { exit::NOT_CONVERGED };
    let json = serde_json::to_string_pretty(&e).expect("serializable");
    Ok((json, code))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub eval: Evaluation,
}

/// Evaluates every grid point in parallel and returns rows in grid order.
pub fn run_sweep(spec: &SweepSpec, model: &ModelArgs) -> Result<Vec<SweepRow>, Failure> {
    spec.points()
        .par_iter()
        .map(|&(a1, a2)| {
            let eval = evaluate(&spec.apply(model, a1, a2))?;
            Ok(SweepRow {
                axis1: a1,
                axis2: a2,
                eval,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow], two_d: bool) -> String {
    let mut out = String::from(if two_d {
        "axis1,axis2,capacity_bits,encoding\n"
    } else {
        "axis1,capacity_bits,encoding\n"
    });
    for r in rows {
        out.push_str(&format_sig(r.axis1, 12));
        out.push(',');
        if let Some(a2) = r.axis2 {
            out.push_str(&format_sig(a2, 12));
            out.push(',');
        }
        out.push_str(&format_sig(r.eval.capacity_bits, 12));
        out.push(',');
        out.push_str(r.eval.encoding.label());
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    axis1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis2: Option<f64>,
    capacity_bits: f64,
    encoding: &'a str,
}

pub fn sweep_json(rows: &[SweepRow]) -> String {
    let rows: Vec<JsonRow> = rows
        .iter()
        .map(|r| JsonRow {
            axis1: r.axis1,
            axis2: r.axis2,
            capacity_bits: r.eval.capacity_bits,
            encoding: r.eval.encoding.label(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
    s.push('\n');
    s
}

fn write_file(path: &str, contents: &str) -> Result<(), Failure> {
    fs::write(Path::new(path), contents.as_bytes()).map_err(|e| Failure::Io(format!("{path}: {e}")))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32, Failure> {
    let spec = SweepSpec::new(args.axis1.clone(), args.axis2.clone(), &args.fix)?;
    let rows = run_sweep(&spec, &args.model)?;
    let text = match args.format {
        OutputFormat::Csv => sweep_csv(&rows, spec.axis2.is_some()),
        OutputFormat::Json => sweep_json(&rows),
    };
    write_file(&args.out, &text)?;
    Ok(if rows.iter().all(|r| r.eval.converged()) {
        exit::OK
    } else {
        exit::NOT_CONVERGED
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub p: f64,
    pub mu_tilde: Option<f64>,
}

pub fn crossover_rows(p_start: f64, p_stop: f64, steps: usize, tol: f64) -> Result<Vec<CrossoverRow>, Failure> {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be positive".into()));
    }
    if steps > 1 && !(p_start < p_stop) {
        return Err(Failure::Usage("--p-start must be below --p-stop".into()));
    }
    let ps: Vec<f64> = if steps == 1 {
        vec![p_start]
    } else {
        AxisSpec {
            name: Param::P,
            start: p_start,
            stop: p_stop,
            steps,
        }
        .values()
    };
    ps.into_iter()
        .map(|p| {
            let c = crossover_mu(p, tol)?;
            Ok(CrossoverRow { p, mu_tilde: c.mu_tilde })
        })
        .collect()
}

pub fn cmd_crossover(args: &CrossoverArgs) -> Result<String, Failure> {
    let rows = crossover_rows(args.p_start, args.p_stop, args.steps, args.tol)?;
    let mut json = serde_json::to_string_pretty(&rows).expect("serializable");
    json.push('\n');
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    Ok(json)
}

pub fn cmd_verify(args: &VerifyArgs) -> (VerifyReport, i32) {
    let report = run_all(&VerifyConfig {
        grid_density: args.grid_density,
        seed: args.seed,
        corrupt_channel: args.corrupt_channel,
    });
    let code = if report.passed() { exit::OK } else { exit::VERIFY_FAILED };
    (report, code)
}

/// Caps the global thread pool from `DENSECODE_THREADS` when set.
pub fn configure_threads(value: Option<&str>) -> Result<(), Failure> {
    let Some(raw) = value else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("DENSECODE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size thread pool: {e}")))
}
