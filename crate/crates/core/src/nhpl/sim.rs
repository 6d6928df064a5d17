use std::fmt;
use std::io::{self, Write};

use super::quadrature::adaptive_simpson;
use super::schedule::{LossSchedule, PendingIndication};
use super::{inverse_transform_t, pick_losing_flow, RngStream};
use crate::error::{Error, Result};
use crate::model::{loss_volume, FlowState, SystemParams, WindowFunction};

/// Absolute tolerance for each quadrature call in the loss-time inversion.
const QUAD_TOL: f64 = 1e-12;
/// Default lookahead in units of the delay.
const DEFAULT_HORIZON_DELAYS: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Loss at the congestion point.
    Loss,
    /// The loss reaches its flow and the window is reduced.
    Indication,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Loss => "loss",
            EventKind::Indication => "indication",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    pub flow: usize,
    pub window_before: f64,
    pub window_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub windows: Vec<f64>,
}

impl TraceSample {
    pub fn mean(&self) -> f64 {
        self.windows.iter().sum::<f64>() / self.windows.len() as f64
    }
}

/// How the congestion point turns windows into a loss probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossModel {
    /// One probability `(1 - N C tau / sum W)^+` shared by every flow, so
    /// the total rate is `(sum W - N C tau)^+ / tau`.
    #[default]
    Aggregate,
    /// Each flow clamped against its own share: `sum_f (W_f - C tau)^+ / tau`.
    PerFlow,
}

impl fmt::Display for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossModel::Aggregate => "aggregate",
            LossModel::PerFlow => "per-flow",
        })
    }
}

impl std::str::FromStr for LossModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aggregate" => Ok(LossModel::Aggregate),
            "per-flow" | "per_flow" | "perflow" => Ok(LossModel::PerFlow),
            other => Err(Error::InvalidParams(format!("unknown loss model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    pub sample_interval: f64,
    pub seed: u64,
    /// Lookahead for the loss-time search; `None` uses `1e4 * tau`.
    pub horizon: Option<f64>,
    pub loss_model: LossModel,
}

impl SimOptions {
    pub fn new(t_end: f64, sample_interval: f64, seed: u64) -> Self {
        SimOptions { t_end, sample_interval, seed, horizon: None, loss_model: LossModel::Aggregate }
    }
}

/// Outcome of one call to [`generate_poi_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generated {
    Loss { time: f64, flow: usize, window: f64, regenerations: usize },
    /// No loss within the horizon; try again at `retry_at`.
    Quiet { retry_at: f64, regenerations: usize },
}

impl Generated {
    pub fn regenerations(&self) -> usize {
        match self {
            Generated::Loss { regenerations, .. } | Generated::Quiet { regenerations, .. } => *regenerations,
        }
    }
}

pub struct SimState<'a> {
    pub params: SystemParams,
    window_fn: &'a dyn WindowFunction,
    /// Window just before each flow's most recent loss indication.
    pub w_loss: Vec<f64>,
    pub schedule: LossSchedule,
    pub rng: RngStream,
    pub horizon: f64,
    pub loss_model: LossModel,
    pub events: Vec<Event>,
    t_end: f64,
    sample_interval: f64,
    next_sample: usize,
    trace: Vec<TraceSample>,
}

impl<'a> SimState<'a> {
    /// Flow `f` starts `init[f].since_loss` into an epoch whose loss happened
    /// at window `init[f].w_max`.
    pub fn new(params: &SystemParams, window_fn: &'a dyn WindowFunction, init: &[FlowState], opts: &SimOptions) -> Result<Self> {
        params.validate()?;
        if init.len() != params.flows {
            return Err(Error::InvalidParams(format!(
                "{} initial states given for {} flows",
                init.len(),
                params.flows
            )));
        }
        for s in init {
            FlowState::new(s.w_max, s.since_loss)?;
        }
        if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
            return Err(Error::domain(format!("t_end must be positive, got {}", opts.t_end)));
        }
        if !(opts.sample_interval > 0.0) {
            return Err(Error::domain(format!("sample interval must be positive, got {}", opts.sample_interval)));
        }
        let horizon = opts.horizon.unwrap_or(DEFAULT_HORIZON_DELAYS * params.delay);
        if !(horizon > 0.0) {
            return Err(Error::domain("horizon must be positive"));
        }
        Ok(SimState {
            params: *params,
            window_fn,
            w_loss: init.iter().map(|s| s.w_max).collect(),
            schedule: LossSchedule::new(init.iter().map(|s| -s.since_loss).collect(), 0.0),
            rng: RngStream::new(opts.seed),
            horizon,
            loss_model: opts.loss_model,
            events: Vec::new(),
            t_end: opts.t_end,
            sample_interval: opts.sample_interval,
            next_sample: 0,
            trace: Vec::new(),
        })
    }

    pub fn flows(&self) -> usize {
        self.w_loss.len()
    }

    pub fn window_at(&self, flow: usize, t: f64) -> f64 {
        let state = FlowState {
            w_max: self.w_loss[flow],
            since_loss: (t - self.schedule.last_indication[flow]).max(0.0),
        };
        self.window_fn.window(&state, &self.params)
    }

    pub fn windows_at(&self, t: f64) -> Vec<f64> {
        (0..self.flows()).map(|f| self.window_at(f, t)).collect()
    }

    pub fn aggregate_window(&self, t: f64) -> f64 {
        (0..self.flows()).map(|f| self.window_at(f, t)).sum()
    }

    /// `sum_f W_f p_f / tau` under the configured loss model.
    pub fn loss_rate(&self, t: f64) -> f64 {
        let excess = match self.loss_model {
            LossModel::Aggregate => (self.aggregate_window(t) - self.flows() as f64 * self.params.bdp()).max(0.0),
            LossModel::PerFlow => (0..self.flows()).map(|f| loss_volume(self.window_at(f, t), &self.params)).sum(),
        };
        excess / self.params.delay
    }

    fn record_until(&mut self, until: f64, inclusive: bool) {
        loop {
            let t = self.next_sample as f64 * self.sample_interval;
            let due = if inclusive { t <= until } else { t < until };
            if !due || t > self.t_end {
                break;
            }
            let windows = self.windows_at(t);
            self.trace.push(TraceSample { t, windows });
            self.next_sample += 1;
        }
    }

    fn log(&mut self, event: Event) {
        if event.time <= self.t_end {
            self.events.push(event);
        }
    }

    /// Applies the earliest pending indication: the flow's window at that
    /// time becomes its new `W_loss` and a new epoch starts.
    fn apply_next_indication(&mut self) -> Result<Option<PendingIndication>> {
        let Some(next) = self.schedule.next().copied() else {
            return Ok(None);
        };
        self.record_until(next.time, false);
        let before = self.window_at(next.flow, next.time);
        let reset = self.window_fn.reset(before)?;
        self.schedule.advance();
        self.w_loss[next.flow] = reset.w_max;
        self.schedule.last_indication[next.flow] = next.time - reset.since_loss;
        let after = self.window_at(next.flow, next.time);
        self.log(Event { kind: EventKind::Indication, time: next.time, flow: next.flow, window_before: before, window_after: after });
        Ok(Some(next))
    }
}

/// Earliest `t >= from` at which the aggregate window reaches `N C tau`;
/// infinite if that does not happen within the horizon. Windows are
/// nondecreasing within an epoch, so the aggregate is monotone.
pub fn t_bdp(state: &SimState<'_>, from: f64) -> f64 {
    let target = state.flows() as f64 * state.params.bdp();
    if state.aggregate_window(from) >= target {
        return from;
    }
    let mut lo = from;
    let mut step = state.params.delay;
    let mut hi = from + step;
    while state.aggregate_window(hi) < target {
        if hi - from >= state.horizon {
            return f64::INFINITY;
        }
        lo = hi;
        step *= 2.0;
        hi = (hi + step).min(from + state.horizon);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * hi.abs().max(state.params.delay) || mid <= lo || mid >= hi {
            break;
        }
        if state.aggregate_window(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Absolute time of the next loss after `start` for the uniform `u`, with
/// the current epochs frozen. `None` if there is none within the horizon.
pub fn compute_t(state: &SimState<'_>, start: f64, u: f64) -> Result<Option<f64>> {
    if !start.is_finite() {
        return Ok(None);
    }
    let mut rate = |x: f64| state.loss_rate(start + x);
    let t = inverse_transform_t(|a, b| adaptive_simpson(&mut rate, a, b, QUAD_TOL), u, state.horizon, state.params.delay)?;
    Ok(t.map(|t| start + t))
}

/// Draws the next loss at the congestion point after the loss at `now`.
///
/// While the candidate falls at or after the next pending indication, that
/// indication is applied and the candidate redrawn from the new epoch. The
/// loss is then assigned to a flow and its indication scheduled.
pub fn generate_poi_loss(state: &mut SimState<'_>, now: f64) -> Result<Generated> {
    let mut start = t_bdp(state, now).max(state.schedule.last_loss);
    let u = state.rng.uniform();
    let mut loss = compute_t(state, start, u)?;
    let mut regenerations = 0;
    while let Some(next) = state.schedule.next().copied() {
        if matches!(loss, Some(l) if l < next.time) {
            break;
        }
        state.apply_next_indication()?;
        regenerations += 1;
        let glli = state.schedule.global_last_indication;
        start = t_bdp(state, glli).max(glli);
        let u = state.rng.uniform();
        loss = compute_t(state, start, u)?;
    }
    match loss {
        Some(time) => {
            let windows = state.windows_at(time);
            let flow = pick_losing_flow(&windows, state.rng.uniform())?;
            state.schedule.schedule(time, flow, state.params.delay);
            Ok(Generated::Loss { time, flow, window: windows[flow], regenerations })
        }
        None => {
            let base = if start.is_finite() { start } else { now.max(state.schedule.global_last_indication) };
            Ok(Generated::Quiet { retry_at: base + state.horizon, regenerations })
        }
    }
}

/// Event log and sampled windows of one run.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub events: Vec<Event>,
    pub trace: Vec<TraceSample>,
    pub seed: u64,
    pub params: SystemParams,
    pub algorithm: &'static str,
}

impl SimResult {
    pub const EVENTS_HEADER: &'static str = "event_type,time,flow,window_before,window_after";
    pub const TRACE_HEADER: &'static str = "t,flow,w";

    pub fn loss_times(&self) -> Vec<f64> {
        self.events.iter().filter(|e| e.kind == EventKind::Loss).map(|e| e.time).collect()
    }

    /// Time average over trace samples with `t >= from` of the mean window.
    pub fn mean_window_after(&self, from: f64) -> f64 {
        let tail: Vec<f64> = self.trace.iter().filter(|s| s.t >= from).map(TraceSample::mean).collect();
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn write_events_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::EVENTS_HEADER)?;
        for e in &self.events {
            writeln!(out, "{},{},{},{},{}", e.kind, e.time, e.flow, e.window_before, e.window_after)?;
        }
        Ok(())
    }

    /// One row per flow per sample, then a `flow = -1` row with the mean.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::TRACE_HEADER)?;
        for s in &self.trace {
            for (f, w) in s.windows.iter().enumerate() {
                writeln!(out, "{},{},{}", s.t, f, w)?;
            }
            writeln!(out, "{},-1,{}", s.t, s.mean())?;
        }
        Ok(())
    }
}

pub fn run_simulation(
    params: &SystemParams,
    window_fn: &dyn WindowFunction,
    init: &[FlowState],
    opts: &SimOptions,
) -> Result<SimResult> {
    let mut state = SimState::new(params, window_fn, init, opts)?;
    let t_end = opts.t_end;
    let mut next = generate_poi_loss(&mut state, 0.0)?;
    loop {
        match next {
            Generated::Loss { time, flow, window, .. } if time <= t_end => {
                state.record_until(time, false);
                state.log(Event { kind: EventKind::Loss, time, flow, window_before: window, window_after: window });
                state.schedule.last_loss = time;
                next = generate_poi_loss(&mut state, time)?;
            }
            Generated::Quiet { retry_at, .. } if retry_at <= t_end => {
                state.record_until(retry_at, false);
                next = generate_poi_loss(&mut state, retry_at)?;
            }
            _ => break,
        }
    }
    while state.schedule.next().is_some_and(|n| n.time <= t_end) {
        state.apply_next_indication()?;
    }
    state.record_until(t_end, true);
    Ok(SimResult {
        events: state.events,
        trace: state.trace,
        seed: opts.seed,
        params: *params,
        algorithm: window_fn.name(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nhpl::FrozenWindow;
    use crate::protocols::{Cubic, Reno};

    #[test]
    fn loss_models_agree_for_one_flow() {
        let p = params(1);
        let init = [FlowState::new(130.0, 3.0).unwrap()];
        let mut opts = SimOptions::new(1.0, 0.1, 1);
        let a = SimState::new(&p, &Cubic, &init, &opts).unwrap();
        opts.loss_model = LossModel::PerFlow;
        let b = SimState::new(&p, &Cubic, &init, &opts).unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.1;
            assert_eq!(a.loss_rate(t), b.loss_rate(t));
        }
        assert_eq!("per-flow".parse::<LossModel>().unwrap(), LossModel::PerFlow);
        assert!("x".parse::<LossModel>().is_err());
    }

    #[test]
    fn aggregate_rate_is_zero_below_bdp() {
        // One flow above C tau, the other far below: only the per-flow model
        // produces losses before the aggregate reaches the BDP.
        let p = params(2);
        let init = [FlowState::new(200.0, 0.5).unwrap(), FlowState::new(20.0, 0.0).unwrap()];
        let mut opts = SimOptions::new(1.0, 0.1, 1);
        let agg = SimState::new(&p, &Reno, &init, &opts).unwrap();
        opts.loss_model = LossModel::PerFlow;
        let per = SimState::new(&p, &Reno, &init, &opts).unwrap();
        assert!(agg.aggregate_window(0.0) < 2.0 * p.bdp());
        assert_eq!(agg.loss_rate(0.0), 0.0);
        assert!(per.loss_rate(0.0) > 0.0);
    }

    fn params(flows: usize) -> SystemParams {
        SystemParams::new(12500.0, 0.01, 0.2, 0.4, flows).unwrap()
    }

    #[test]
    fn reno_bdp_crossing_is_linear() {
        // W(t) = W0 + t/tau with W0 = C tau - 1 reaches the BDP one delay later.
        let p = params(1);
        let init = [FlowState::new(2.0 * (p.bdp() - 1.0), 0.0).unwrap()];
        let state = SimState::new(&p, &Reno, &init, &SimOptions::new(1.0, 0.01, 1)).unwrap();
        let t = t_bdp(&state, 0.0);
        assert!((t - p.delay).abs() < 1e-12, "{t}");
        assert_eq!(t_bdp(&state, 0.5), 0.5);
    }

    #[test]
    fn staggered_cubic_bdp_matches_grid_scan() {
        let p = params(3);
        let init = [
            FlowState::new(130.0, 0.5).unwrap(),
            FlowState::new(120.0, 2.0).unwrap(),
            FlowState::new(110.0, 0.0).unwrap(),
        ];
        let state = SimState::new(&p, &Cubic, &init, &SimOptions::new(1.0, 0.01, 1)).unwrap();
        let t = t_bdp(&state, 0.0);
        let target = 3.0 * p.bdp();
        let dt = p.delay / 1000.0;
        let mut k = 0usize;
        while state.aggregate_window(k as f64 * dt) < target {
            k += 1;
        }
        let grid = k as f64 * dt;
        assert!(t <= grid && t > grid - dt, "bisection {t}, grid {grid}");
    }

    #[test]
    fn bdp_never_reached_is_infinite() {
        let p = params(1);
        let fw = FrozenWindow { window: 10.0 };
        let state = SimState::new(&p, &fw, &[FlowState::new(10.0, 0.0).unwrap()], &SimOptions::new(1.0, 0.1, 1)).unwrap();
        assert_eq!(t_bdp(&state, 0.0), f64::INFINITY);
    }

    #[test]
    fn constant_window_reduces_to_constant_rate() {
        let p = params(1);
        let w = 150.0;
        let fw = FrozenWindow { window: w };
        let state = SimState::new(&p, &fw, &[FlowState::new(w, 0.0).unwrap()], &SimOptions::new(1.0, 0.1, 1)).unwrap();
        let lambda = w * (1.0 - p.bdp() / w) / p.delay;
        let u = 0.3;
        let t = compute_t(&state, 2.0, u).unwrap().unwrap();
        assert!((t - 2.0 - (-u.ln() / lambda)).abs() < 1e-12);
    }

    #[test]
    fn identical_flows_scale_the_rate() {
        let one = params(1);
        let four = params(4);
        let s = FlowState::new(130.0, 1.0).unwrap();
        let opts = SimOptions::new(1.0, 0.1, 1);
        let a = SimState::new(&one, &Cubic, &[s], &opts).unwrap();
        let b = SimState::new(&four, &Cubic, &[s; 4], &opts).unwrap();
        let u = 0.42;
        let ta = compute_t(&a, 0.0, u).unwrap().unwrap();
        let tb = compute_t(&b, 0.0, u).unwrap().unwrap();
        // Four flows integrate to -ln u four times faster.
        let u4 = u.powf(0.25);
        let ta4 = compute_t(&a, 0.0, u4).unwrap().unwrap();
        assert!((tb - ta4).abs() < 1e-9, "{tb} vs {ta4}");
        assert!(tb < ta);
    }

    #[test]
    fn reno_epoch_matches_closed_form() {
        // Single Reno flow: W(t) = W_loss/2 + t/tau, rate (W - C tau)^+ / tau.
        let p = params(1);
        let w_loss = 240.0;
        let state =
            SimState::new(&p, &Reno, &[FlowState::new(w_loss, 0.0).unwrap()], &SimOptions::new(1.0, 0.1, 1)).unwrap();
        let tau = p.delay;
        let cross = (p.bdp() - w_loss / 2.0) * tau;
        for u in [0.9, 0.5, 0.1, 1e-3] {
            let target = -f64::ln(u);
            // int_cross^{cross+T} (x / tau) / tau dx = T^2 / (2 tau^2)
            let oracle = cross + (2.0 * target).sqrt() * tau;
            let start = t_bdp(&state, 0.0);
            assert!((start - cross).abs() < 1e-12);
            let t = compute_t(&state, start, u).unwrap().unwrap();
            assert!((t - oracle).abs() < 1e-9, "u {u}: {t} vs {oracle}");
        }
    }

    #[test]
    fn no_loss_below_bdp() {
        let p = params(2);
        let fw = FrozenWindow { window: 100.0 };
        let init = [FlowState::new(100.0, 0.0).unwrap(); 2];
        let r = run_simulation(&p, &fw, &init, &SimOptions::new(2.0, 0.5, 3)).unwrap();
        assert!(r.events.is_empty());
        assert_eq!(r.trace.len(), 5);

        // Windows keep growing when they stay below the BDP.
        let reno_init = [FlowState::new(20.0, 0.0).unwrap(); 2];
        let r = run_simulation(&p, &Reno, &reno_init, &SimOptions::new(0.5, 0.1, 3)).unwrap();
        assert!(r.events.is_empty());
        assert!(r.trace.windows(2).all(|w| w[1].mean() > w[0].mean()));
    }

    #[test]
    fn empty_queue_single_draw() {
        let p = params(1);
        let mut state =
            SimState::new(&p, &Cubic, &[FlowState::new(130.0, 4.0).unwrap()], &SimOptions::new(10.0, 0.1, 5)).unwrap();
        let g = generate_poi_loss(&mut state, 0.0).unwrap();
        assert_eq!(g.regenerations(), 0);
        let Generated::Loss { time, .. } = g else { panic!("{g:?}") };
        assert_eq!(state.schedule.len(), 1);
        assert_eq!(state.schedule.next().unwrap().time, time + p.delay);
    }

    #[test]
    fn candidate_before_pending_is_kept() {
        // A pending indication far in the future never triggers the loop.
        let p = params(1);
        let mut state =
            SimState::new(&p, &Cubic, &[FlowState::new(130.0, 4.0).unwrap()], &SimOptions::new(10.0, 0.1, 5)).unwrap();
        state.schedule.schedule(100.0, 0, p.delay);
        let g = generate_poi_loss(&mut state, 0.0).unwrap();
        assert_eq!(g.regenerations(), 0);
        assert_eq!(state.schedule.len(), 2);
        assert_eq!(state.w_loss[0], 130.0);
    }

    #[test]
    fn candidate_after_pending_regenerates_once() {
        // Indication lands immediately; the regenerated epoch starts from the
        // window at that time.
        let p = params(1);
        let mut state =
            SimState::new(&p, &Cubic, &[FlowState::new(130.0, 4.0).unwrap()], &SimOptions::new(10.0, 0.1, 5)).unwrap();
        let ind = state.schedule.schedule(-p.delay + 1e-9, 0, p.delay);
        let w_at = state.window_at(0, ind.time);
        let g = generate_poi_loss(&mut state, 0.0).unwrap();
        assert_eq!(g.regenerations(), 1);
        assert_eq!(state.w_loss[0], w_at);
        assert_eq!(state.schedule.last_indication[0], ind.time);
        assert_eq!(state.schedule.len(), 1);
    }

    #[test]
    fn run_invariants_and_determinism() {
        let p = params(3);
        let init = [
            FlowState::new(130.0, 3.0).unwrap(),
            FlowState::new(125.0, 1.0).unwrap(),
            FlowState::new(120.0, 0.0).unwrap(),
        ];
        let opts = SimOptions::new(20.0, 0.05, 99);
        let a = run_simulation(&p, &Cubic, &init, &opts).unwrap();
        assert!(a.events.windows(2).all(|w| w[1].time >= w[0].time));
        let losses: Vec<_> = a.events.iter().filter(|e| e.kind == EventKind::Loss).collect();
        let inds: Vec<_> = a.events.iter().filter(|e| e.kind == EventKind::Indication).collect();
        assert!(losses.len() > 3);
        for (l, i) in losses.iter().zip(&inds) {
            assert_eq!(i.time, l.time + p.delay);
            assert_eq!(i.flow, l.flow);
            assert!((i.window_after - (1.0 - p.decrease) * i.window_before).abs() < 1e-9 * i.window_before);
        }
        let b = run_simulation(&p, &Cubic, &init, &opts).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_events_csv(&mut ca).unwrap();
        b.write_events_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        let mut ta = Vec::new();
        a.write_trace_csv(&mut ta).unwrap();
        let text = String::from_utf8(ta).unwrap();
        assert!(text.starts_with("t,flow,w\n0,0,"));
        assert_eq!(text.lines().count(), 1 + 4 * a.trace.len());
        assert_eq!(a.trace.len(), 401);
    }

    #[test]
    fn input_validation() {
        let p = params(2);
        let one = [FlowState::new(100.0, 0.0).unwrap()];
        assert!(SimState::new(&p, &Cubic, &one, &SimOptions::new(1.0, 0.1, 0)).is_err());
        let two = [one[0]; 2];
        assert!(SimState::new(&p, &Cubic, &two, &SimOptions::new(0.0, 0.1, 0)).is_err());
        assert!(SimState::new(&p, &Cubic, &two, &SimOptions::new(1.0, 0.0, 0)).is_err());
    }
}
