//! Experiment configuration and runner for the `fluidcc` binary.
//!
//! Configuration comes from a flat `key = value` file (`#` starts a comment)
//! and/or command-line flags; flags win. Every key in
//! [`ExperimentConfig::KEYS`] is accepted in both places.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::dde::{integrate, integrate_shifted, InitialHistory, IntegrateOptions};
use crate::error::Error;
use crate::fixedpoint::{cubic_fixed_point_report, reno_equilibrium, FixedPoint};
use crate::model::{FlowState, SystemParams};
use crate::nhpl::{run_simulation, LossModel, SimOptions};
use crate::protocols::{Algorithm, ShiftedState};
use crate::stability::{basin_delta, expansion_coeffs, qtilde, LyapunovParams, StabilityReport};

/// Bytes per packet used when the capacity is given as a bit rate.
pub const DEFAULT_PACKET_SIZE: f64 = 1000.0;
const FIXED_POINT_TOL: f64 = 1e-12;
/// Rows a trace is thinned to when no sample interval is given.
const DEFAULT_TRACE_ROWS: f64 = 2000.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for bad configuration, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fluid,
    Nhpl,
    Both,
    Stability,
    Convergence,
    FixedPoint,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fluid" => Ok(Mode::Fluid),
            "nhpl" => Ok(Mode::Nhpl),
            "both" | "compare" => Ok(Mode::Both),
            "stability" => Ok(Mode::Stability),
            "convergence" => Ok(Mode::Convergence),
            "fixed-point" | "fixed_point" => Ok(Mode::FixedPoint),
            other => Err(config_err(format!("unknown mode '{other}'"))),
        }
    }
}

/// Initial conditions for every flow.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    AtFixedPoint,
    /// `(w_max, since_loss)` = fixed point + `(dx1, dx2)`.
    OffsetBy { dx1: f64, dx2: f64 },
    /// One state for all flows, or one per flow.
    Explicit(Vec<FlowState>),
}

impl FromStr for InitSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s == "at-fixed-point" {
            return Ok(InitSpec::AtFixedPoint);
        }
        let pair = |text: &str| -> CliResult<(f64, f64)> {
            let mut it = text.split(',').map(str::trim);
            match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => Ok((parse_f64("init", a)?, parse_f64("init", b)?)),
                _ => Err(config_err(format!("init: expected two comma-separated numbers, got '{text}'"))),
            }
        };
        if let Some(rest) = s.strip_prefix("offset-by:") {
            let (dx1, dx2) = pair(rest)?;
            return Ok(InitSpec::OffsetBy { dx1, dx2 });
        }
        if let Some(rest) = s.strip_prefix("explicit:") {
            let states = rest
                .split(';')
                .map(|chunk| {
                    let (w, s) = pair(chunk)?;
                    FlowState::new(w, s).map_err(CliError::from)
                })
                .collect::<CliResult<Vec<_>>>()?;
            return Ok(InitSpec::Explicit(states));
        }
        Err(config_err(format!(
            "init: expected at-fixed-point, offset-by:dx1,dx2 or explicit:w,s[;w,s...], got '{s}'"
        )))
    }
}

pub fn bps_to_pps(bps: f64, packet_size: f64) -> f64 {
    bps / (8.0 * packet_size)
}

pub fn pps_to_bps(pps: f64, packet_size: f64) -> f64 {
    pps * 8.0 * packet_size
}

/// Parses a capacity in packets/s. Plain numbers and a `pps` suffix are
/// packets/s; `bps`, `kbps`, `Mbps` and `Gbps` are converted with
/// `packet_size` bytes per packet.
pub fn parse_capacity(text: &str, packet_size: f64) -> CliResult<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (number, scale) = if let Some(n) = lower.strip_suffix("gbps") {
        (n, Some(1e9))
    } else if let Some(n) = lower.strip_suffix("mbps") {
        (n, Some(1e6))
    } else if let Some(n) = lower.strip_suffix("kbps") {
        (n, Some(1e3))
    } else if let Some(n) = lower.strip_suffix("bps") {
        (n, Some(1.0))
    } else if let Some(n) = lower.strip_suffix("pps") {
        (n, None)
    } else {
        (lower.as_str(), None)
    };
    let value = parse_f64("capacity", number.trim())?;
    let pps = match scale {
        Some(s) => bps_to_pps(value * s, packet_size),
        None => value,
    };
    if !(pps > 0.0) {
        return Err(config_err(format!("capacity must be positive, got '{t}'")));
    }
    Ok(pps)
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    let x: f64 = v.trim().parse().map_err(|_| config_err(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(config_err(format!("{key}: '{v}' is not finite")));
    }
    Ok(x)
}

fn parse_positive(key: &str, v: &str) -> CliResult<f64> {
    let x = parse_f64(key, v)?;
    if !(x > 0.0) {
        return Err(config_err(format!("{key} must be positive, got {x}")));
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Packets per second per flow.
    pub capacity: f64,
    pub packet_size: f64,
    pub delay_tau: f64,
    pub b: f64,
    pub c: f64,
    pub flows: usize,
    pub init: InitSpec,
    pub t_end: f64,
    pub step: Option<f64>,
    pub seed: u64,
    pub mode: Mode,
    /// Fraction of the horizon discarded before averaging.
    pub transient_fraction: f64,
    pub sample_interval: Option<f64>,
    pub loss_model: LossModel,
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "algorithm",
        "capacity",
        "packet_size",
        "delay_tau",
        "b",
        "c",
        "flows",
        "init",
        "t_end",
        "step",
        "seed",
        "mode",
        "transient_fraction",
        "sample_interval",
        "loss_model",
    ];

    /// Reads `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> CliResult<BTreeMap<String, String>> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value, got '{raw}'", n + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(map)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> CliResult<Self> {
        if let Some(k) = pairs.keys().find(|k| !Self::KEYS.contains(&k.as_str())) {
            return Err(config_err(format!("unknown key '{k}'")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let packet_size = get("packet_size").map(|v| parse_positive("packet_size", v)).transpose()?.unwrap_or(DEFAULT_PACKET_SIZE);
        let delay_tau = get("delay_tau").map(|v| parse_positive("delay_tau", v)).transpose()?.unwrap_or(0.001);
        let flows = match get("flows") {
            Some(v) => v.trim().parse::<usize>().map_err(|_| config_err(format!("flows: '{v}' is not a count")))?,
            None => 1,
        };
        let cfg = ExperimentConfig {
            algorithm: get("algorithm").map(Algorithm::from_str).transpose()?.unwrap_or(Algorithm::Cubic),
            capacity: get("capacity").map(|v| parse_capacity(v, packet_size)).transpose()?.unwrap_or(125000.0),
            packet_size,
            delay_tau,
            b: get("b").map(|v| parse_f64("b", v)).transpose()?.unwrap_or(0.2),
            c: get("c").map(|v| parse_f64("c", v)).transpose()?.unwrap_or(0.4),
            flows,
            init: get("init").map(InitSpec::from_str).transpose()?.unwrap_or(InitSpec::AtFixedPoint),
            t_end: get("t_end").map(|v| parse_positive("t_end", v)).transpose()?.unwrap_or(20.0),
            step: get("step").map(|v| parse_positive("step", v)).transpose()?,
            seed: match get("seed") {
                Some(v) => v.trim().parse().map_err(|_| config_err(format!("seed: '{v}' is not an unsigned integer")))?,
                None => 1,
            },
            mode: get("mode").map(Mode::from_str).transpose()?.unwrap_or(Mode::Fluid),
            transient_fraction: get("transient_fraction").map(|v| parse_f64("transient_fraction", v)).transpose()?.unwrap_or(0.5),
            sample_interval: get("sample_interval").map(|v| parse_positive("sample_interval", v)).transpose()?,
            loss_model: get("loss_model").map(LossModel::from_str).transpose()?.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params()?;
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(config_err(format!("transient_fraction must lie in [0, 1), got {}", self.transient_fraction)));
        }
        if let InitSpec::Explicit(states) = &self.init {
            if states.len() != 1 && states.len() != self.flows {
                return Err(config_err(format!("init lists {} states for {} flows", states.len(), self.flows)));
            }
        }
        if matches!(self.mode, Mode::Stability | Mode::Convergence) && self.algorithm != Algorithm::Cubic {
            return Err(config_err("stability and convergence modes need algorithm = cubic"));
        }
        if self.step() > self.delay_tau / 4.0 {
            return Err(config_err(format!("step must not exceed delay_tau / 4 = {}", self.delay_tau / 4.0)));
        }
        Ok(())
    }

    pub fn params(&self) -> CliResult<SystemParams> {
        Ok(SystemParams::new(self.capacity, self.delay_tau, self.b, self.c, self.flows)?)
    }

    /// Integration step; defaults to `tau / 20`.
    pub fn step(&self) -> f64 {
        self.step.unwrap_or(self.delay_tau / 20.0)
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval.unwrap_or(self.t_end / DEFAULT_TRACE_ROWS)
    }

    pub fn fixed_point(&self) -> CliResult<FixedPoint> {
        let params = self.params()?;
        Ok(match self.algorithm {
            Algorithm::Cubic => cubic_fixed_point_report(&params, FIXED_POINT_TOL)?.point,
            Algorithm::Reno => reno_equilibrium(&params)?,
        })
    }

    pub fn initial_states(&self) -> CliResult<Vec<FlowState>> {
        let states = match &self.init {
            InitSpec::AtFixedPoint => {
                let fp = self.fixed_point()?;
                vec![FlowState::new(fp.window, fp.since_loss)?]
            }
            InitSpec::OffsetBy { dx1, dx2 } => {
                let fp = self.fixed_point()?;
                vec![FlowState::new(fp.window + dx1, fp.since_loss + dx2)?]
            }
            InitSpec::Explicit(s) => s.clone(),
        };
        Ok(if states.len() == 1 { vec![states[0]; self.flows] } else { states })
    }

    fn post_transient_start(&self) -> f64 {
        self.transient_fraction * self.t_end
    }
}

#[derive(Parser, Debug)]
#[command(name = "fluidcc", version, about = "Fluid-model and Poisson-loss experiments for Reno and CUBIC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the delayed fluid model.
    Fluid(RunArgs),
    /// Run the Poisson-loss event simulator.
    Nhpl(RunArgs),
    /// Run both and compare post-transient mean windows.
    Compare(RunArgs),
    /// Report the local stability quantities of the CUBIC fixed point.
    Stability(RunArgs),
    /// Track the Lyapunov function and convergence bound along a trajectory.
    Convergence(RunArgs),
    /// Solve for the fixed point.
    FixedPoint(RunArgs),
}

impl Command {
    pub fn mode(&self) -> Mode {
        match self {
            Command::Fluid(_) => Mode::Fluid,
            Command::Nhpl(_) => Mode::Nhpl,
            Command::Compare(_) => Mode::Both,
            Command::Stability(_) => Mode::Stability,
            Command::Convergence(_) => Mode::Convergence,
            Command::FixedPoint(_) => Mode::FixedPoint,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Fluid(a)
            | Command::Nhpl(a)
            | Command::Compare(a)
            | Command::Stability(a)
            | Command::Convergence(a)
            | Command::FixedPoint(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<String>,
    /// reno or cubic.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Packets/s, or a bit rate such as 1Gbps.
    #[arg(long)]
    pub capacity: Option<String>,
    /// Bytes per packet for bit-rate capacities.
    #[arg(long, alias = "packet_size")]
    pub packet_size: Option<String>,
    /// Round-trip delay in seconds.
    #[arg(long, alias = "delay_tau")]
    pub delay_tau: Option<String>,
    /// Multiplicative decrease.
    #[arg(long)]
    pub b: Option<String>,
    /// CUBIC scaling constant.
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub flows: Option<String>,
    /// at-fixed-point, offset-by:dx1,dx2 or explicit:w,s[;w,s...]
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, alias = "t_end")]
    pub t_end: Option<String>,
    #[arg(long)]
    pub step: Option<String>,
    #[arg(long, alias = "transient_fraction")]
    pub transient_fraction: Option<String>,
    #[arg(long, alias = "sample_interval")]
    pub sample_interval: Option<String>,
    /// aggregate or per-flow.
    #[arg(long, alias = "loss_model")]
    pub loss_model: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields = [
            ("seed", &self.seed),
            ("algorithm", &self.algorithm),
            ("capacity", &self.capacity),
            ("packet_size", &self.packet_size),
            ("delay_tau", &self.delay_tau),
            ("b", &self.b),
            ("c", &self.c),
            ("flows", &self.flows),
            ("init", &self.init),
            ("t_end", &self.t_end),
            ("step", &self.step),
            ("transient_fraction", &self.transient_fraction),
            ("sample_interval", &self.sample_interval),
            ("loss_model", &self.loss_model),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    /// Config file values overlaid with flags; `mode` comes from the subcommand.
    pub fn resolve(&self, mode: Mode) -> CliResult<ExperimentConfig> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::parse_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in self.overrides() {
            pairs.insert(k.to_string(), v.clone());
        }
        pairs.remove("mode");
        let mut cfg = ExperimentConfig::from_pairs(&pairs)?;
        cfg.mode = mode;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let args = cli.command.args();
    let cfg = args.resolve(cli.command.mode())?;
    run_experiment(&cfg, &args.out)
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult<()> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io { path: path.clone(), source };
        let file = File::create(&path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs the configured mode and writes CSV files plus `summary.txt` into
/// `out_dir`. Returns the written paths.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    let mut out = Output { dir: out_dir, written: Vec::new() };
    let mut summary = String::new();
    let params = cfg.params()?;
    let _ = writeln!(summary, "mode: {:?}", cfg.mode);
    let _ = writeln!(summary, "algorithm: {}", cfg.algorithm);
    let _ = writeln!(
        summary,
        "capacity_pps: {}\ndelay_tau: {}\nb: {}\nc: {}\nflows: {}",
        cfg.capacity, cfg.delay_tau, cfg.b, cfg.c, cfg.flows
    );

    match cfg.mode {
        Mode::Fluid => {
            let mean = run_fluid(cfg, &params, &mut out)?;
            let _ = writeln!(summary, "fluid_mean_window: {mean}");
        }
        Mode::Nhpl => {
            let (mean, losses) = run_nhpl(cfg, &params, &mut out)?;
            let _ = writeln!(summary, "seed: {}\nloss_events: {losses}\nnhpl_mean_window: {mean}", cfg.seed);
        }
        Mode::Both => {
            let fp = cfg.fixed_point()?;
            let fluid = run_fluid(cfg, &params, &mut out)?;
            let (nhpl, losses) = run_nhpl(cfg, &params, &mut out)?;
            let _ = writeln!(summary, "seed: {}\nloss_events: {losses}", cfg.seed);
            let _ = writeln!(summary, "w_hat: {}", fp.window);
            let _ = writeln!(summary, "fluid_mean_window: {fluid}\nnhpl_mean_window: {nhpl}");
            let _ = writeln!(summary, "fluid_vs_w_hat: {}", fluid / fp.window - 1.0);
            let _ = writeln!(summary, "nhpl_vs_w_hat: {}", nhpl / fp.window - 1.0);
            let _ = writeln!(summary, "nhpl_vs_fluid: {}", nhpl / fluid - 1.0);
        }
        Mode::Stability => write_stability(cfg, &params, &mut out, &mut summary)?,
        Mode::Convergence => write_convergence(cfg, &params, &mut out, &mut summary)?,
        Mode::FixedPoint => write_fixed_point(cfg, &params, &mut out, &mut summary)?,
    }
    out.write("summary.txt", |w| w.write_all(summary.as_bytes()))?;
    Ok(out.written)
}

/// Integrates each distinct initial state; returns the post-transient mean
/// window averaged over flows.
fn run_fluid(cfg: &ExperimentConfig, params: &SystemParams, out: &mut Output<'_>) -> CliResult<f64> {
    let states = cfg.initial_states()?;
    let step = cfg.step();
    let record_every = ((cfg.sample_interval() / step).round() as usize).max(1);
    let opts = IntegrateOptions { t_end: cfg.t_end, step, record_every };
    let from = cfg.post_transient_start();
    let mut cache: Vec<(FlowState, f64)> = Vec::new();
    let mut total = 0.0;
    for (i, s) in states.iter().enumerate() {
        let name = if states.len() == 1 { "fluid.csv".to_string() } else { format!("fluid_flow{i}.csv") };
        let traj = integrate(params, cfg.algorithm.window_fn(), &InitialHistory::Constant(*s), opts)?;
        out.write(&name, |w| traj.write_csv(w))?;
        let mean = match cache.iter().find(|(c, _)| c == s) {
            Some((_, m)) => *m,
            None => traj.mean_window_after(from),
        };
        cache.push((*s, mean));
        total += mean;
    }
    Ok(total / states.len() as f64)
}

fn run_nhpl(cfg: &ExperimentConfig, params: &SystemParams, out: &mut Output<'_>) -> CliResult<(f64, usize)> {
    let states = cfg.initial_states()?;
    let mut opts = SimOptions::new(cfg.t_end, cfg.sample_interval(), cfg.seed);
    opts.loss_model = cfg.loss_model;
    let result = run_simulation(params, cfg.algorithm.window_fn(), &states, &opts)?;
    out.write("events.csv", |w| result.write_events_csv(w))?;
    out.write("trace.csv", |w| result.write_trace_csv(w))?;
    Ok((result.mean_window_after(cfg.post_transient_start()), result.loss_times().len()))
}

fn write_stability(cfg: &ExperimentConfig, params: &SystemParams, out: &mut Output<'_>, summary: &mut String) -> CliResult<()> {
    let fp = cfg.fixed_point()?;
    let lp = LyapunovParams::new(&fp, params)?;
    let coeffs = expansion_coeffs(&fp, params);
    let q = qtilde(&coeffs, &lp, &fp)?;
    let eps = 0.01 * fp.window;
    out.write("qtilde.csv", |w| {
        writeln!(w, "row,c0,c1,c2")?;
        for (i, r) in q.entries.iter().enumerate() {
            writeln!(w, "{i},{},{},{}", r[0], r[1], r[2])?;
        }
        Ok(())
    })?;
    let _ = writeln!(summary, "w_hat: {}\ns_hat: {}\np_hat: {}", fp.window, fp.since_loss, fp.loss_prob);
    let _ = writeln!(
        summary,
        "alpha: {}\nbeta: {}\ngamma: {}\ndelta: {}",
        coeffs.alpha, coeffs.beta, coeffs.gamma, coeffs.delta
    );
    let _ = writeln!(summary, "lambda_min: {}\npositive_definite: {}", q.lambda_min, q.positive_definite_by_minors());
    let _ = writeln!(summary, "d1: {}\nd4: {}\neps0: {}\neps1: {}", lp.d1, lp.d4, lp.eps0, lp.eps1);
    let _ = writeln!(summary, "K: {}\nrazumikhin_p: {}", lp.margin, lp.razumikhin_p);
    let _ = writeln!(summary, "epsilon: {eps}\nbasin_delta: {}", basin_delta(eps, &lp));
    Ok(())
}

fn write_convergence(cfg: &ExperimentConfig, params: &SystemParams, out: &mut Output<'_>, summary: &mut String) -> CliResult<()> {
    let fp = cfg.fixed_point()?;
    let lp = LyapunovParams::new(&fp, params)?;
    let x0 = ShiftedState::from_flow(&cfg.initial_states()?[0], &fp);
    let step = cfg.step();
    let record_every = ((cfg.sample_interval() / step).round() as usize).max(1);
    let traj = integrate_shifted(params, &fp, x0, IntegrateOptions { t_end: cfg.t_end, step, record_every })?;
    let report = StabilityReport::new(&traj, &lp);
    out.write("convergence.csv", |w| report.write_csv(w))?;
    let _ = writeln!(summary, "w_hat: {}\ns_hat: {}", fp.window, fp.since_loss);
    let _ = writeln!(summary, "x0: {} {}\nnorm_x0: {}", x0.x1, x0.x2, x0.norm());
    let _ = writeln!(summary, "basin_delta: {}", basin_delta(0.01 * fp.window, &lp));
    let _ = writeln!(summary, "lambda_min: {}", report.lambda_min);
    let _ = writeln!(summary, "max_norm: {}", report.max_norm());
    let _ = writeln!(summary, "final_norm: {}", report.rows.last().map_or(f64::NAN, |r| r.norm_x));
    let _ = writeln!(summary, "bound_violations: {}", report.bound_violations());
    let _ = writeln!(summary, "v_increases: {}\nmax_v_increase: {}", report.v_increases(), report.max_v_increase());
    let _ = writeln!(summary, "decay_violations: {}", report.decay_violations());
    Ok(())
}

fn write_fixed_point(cfg: &ExperimentConfig, params: &SystemParams, out: &mut Output<'_>, summary: &mut String) -> CliResult<()> {
    let (fp, iterations, unique) = match cfg.algorithm {
        Algorithm::Cubic => {
            let r = cubic_fixed_point_report(params, FIXED_POINT_TOL)?;
            (r.point, r.iterations, r.single_sign_change)
        }
        Algorithm::Reno => (reno_equilibrium(params)?, 0, true),
    };
    let residual = match cfg.algorithm {
        Algorithm::Cubic => fp.residual(params),
        Algorithm::Reno => (fp.window * fp.excess - 2.0).abs() / 2.0,
    };
    out.write("fixed_point.csv", |w| {
        writeln!(w, "algorithm,capacity,delay,b,c,w_hat,s_hat,p_hat,residual,iterations")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            cfg.algorithm, cfg.capacity, cfg.delay_tau, cfg.b, cfg.c, fp.window, fp.since_loss, fp.loss_prob, residual, iterations
        )
    })?;
    let _ = writeln!(summary, "w_hat: {}\ns_hat: {}\np_hat: {}", fp.window, fp.since_loss, fp.loss_prob);
    let _ = writeln!(summary, "residual: {residual}\niterations: {iterations}\nunique_root: {unique}");
    let _ = writeln!(summary, "loss_balance: {}", fp.loss_balance(params));
    Ok(())
}
