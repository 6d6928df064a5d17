//! Fixed-step integration of the delayed fluid system by the method of steps.
//!
//! The step is chosen so that it divides the delay evenly (`h = tau / k`,
//! `k >= 4`). Each step is classical fourth-order Runge-Kutta; delayed values
//! at stage times are read from a [`HistoryBuffer`] by cubic Hermite
//! interpolation, which uses the stored right-hand side as the slope at each
//! sample. Before `t = 0` the initial history function is used directly.
//!
//! The loss-probability clamp makes the right-hand side only piecewise smooth.
//! No event location is done, so the formal order drops locally whenever a
//! trajectory crosses `W = C tau`.

use std::collections::VecDeque;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::fixedpoint::FixedPoint;
use crate::model::{fluid_rhs, loss_probability, FlowState, SystemParams, WindowFunction};
use crate::protocols::{shifted_rhs_unchecked, ShiftedState};

const MIN_STEPS_PER_DELAY: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Sample<const N: usize> {
    t: f64,
    y: [f64; N],
    dy: [f64; N],
}

/// Time-indexed record of past states and their derivatives.
///
/// Samples are strictly increasing in time. Older samples are dropped once
/// they are more than `retain` behind the newest one.
#[derive(Debug, Clone)]
pub struct HistoryBuffer<const N: usize> {
    samples: VecDeque<Sample<N>>,
    retain: f64,
}

impl<const N: usize> HistoryBuffer<N> {
    pub fn new(retain: f64) -> Self {
        HistoryBuffer { samples: VecDeque::new(), retain }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn oldest(&self) -> Option<f64> {
        self.samples.front().map(|s| s.t)
    }

    pub fn newest(&self) -> Option<f64> {
        self.samples.back().map(|s| s.t)
    }

    pub fn push(&mut self, t: f64, y: [f64; N], dy: [f64; N]) -> Result<()> {
        if let Some(last) = self.newest() {
            if !(t > last) {
                return Err(Error::domain(format!("history sample at {t} does not follow {last}")));
            }
        }
        self.samples.push_back(Sample { t, y, dy });
        // Keep the newest sample at or before `t - retain` so queries at
        // exactly that time stay inside the buffer.
        while self.samples.len() > 2 && self.samples[1].t <= t - self.retain {
            self.samples.pop_front();
        }
        Ok(())
    }

    /// Cubic Hermite interpolant at `t`. Exact at sample times.
    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        let (oldest, newest) = match (self.oldest(), self.newest()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::HistoryOutOfRange { t, oldest: f64::NAN, newest: f64::NAN }),
        };
        if !(t >= oldest && t <= newest) {
            return Err(Error::HistoryOutOfRange { t, oldest, newest });
        }
        let idx = self.samples.partition_point(|s| s.t <= t);
        // idx >= 1 because t >= oldest.
        let left = &self.samples[idx - 1];
        if left.t == t || idx == self.samples.len() {
            return Ok(left.y);
        }
        let right = &self.samples[idx];
        Ok(hermite(left, right, t))
    }
}

fn hermite<const N: usize>(a: &Sample<N>, b: &Sample<N>, t: f64) -> [f64; N] {
    let h = b.t - a.t;
    let u = (t - a.t) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    std::array::from_fn(|i| h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i])
}

/// Initial function on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialHistory {
    Constant(FlowState),
    /// Samples `(theta, state)` covering `[-tau, 0]`, interpolated linearly.
    Sampled(Vec<(f64, FlowState)>),
}

impl InitialHistory {
    pub fn validate(&self, delay: f64) -> Result<()> {
        match self {
            InitialHistory::Constant(s) => FlowState::new(s.w_max, s.since_loss).map(|_| ()),
            InitialHistory::Sampled(pts) => {
                if pts.len() < 2 {
                    return Err(Error::domain("sampled history needs at least two points"));
                }
                if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::domain("sampled history times must be strictly increasing"));
                }
                let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
                if first > -delay * (1.0 - 1e-12) || last.abs() > 1e-12 * delay {
                    return Err(Error::domain(format!(
                        "sampled history must span [-{delay}, 0], got [{first}, {last}]"
                    )));
                }
                for (_, s) in pts {
                    FlowState::new(s.w_max, s.since_loss)?;
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, theta: f64) -> FlowState {
        let (y, _) = self.eval(theta);
        FlowState::from_array(y)
    }

    /// Value and slope at `theta <= 0`.
    fn eval(&self, theta: f64) -> ([f64; 2], [f64; 2]) {
        match self {
            InitialHistory::Constant(s) => (s.to_array(), [0.0; 2]),
            InitialHistory::Sampled(pts) => {
                let idx = pts.partition_point(|(t, _)| *t <= theta).clamp(1, pts.len() - 1);
                let (t0, s0) = pts[idx - 1];
                let (t1, s1) = pts[idx];
                let u = ((theta - t0) / (t1 - t0)).clamp(0.0, 1.0);
                let (a, b) = (s0.to_array(), s1.to_array());
                let y = std::array::from_fn(|i| a[i] + u * (b[i] - a[i]));
                let dy = std::array::from_fn(|i| (b[i] - a[i]) / (t1 - t0));
                (y, dy)
            }
        }
    }
}

/// Number of steps per delay for a requested step: the smallest `k` with
/// `tau / k <= step`.
pub fn steps_per_delay(delay: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    let ratio = delay / step;
    let k = if (ratio - ratio.round()).abs() <= 1e-9 * ratio { ratio.round() } else { ratio.ceil() };
    let k = k as usize;
    if k < MIN_STEPS_PER_DELAY {
        return Err(Error::domain(format!(
            "step {step} exceeds delay/{MIN_STEPS_PER_DELAY} = {}",
            delay / MIN_STEPS_PER_DELAY as f64
        )));
    }
    Ok(k)
}

/// Method-of-steps RK4 driver shared by the fluid and shifted systems.
struct DelaySolver<const N: usize> {
    delay: f64,
    h: f64,
}

impl<const N: usize> DelaySolver<N> {
    fn new(delay: f64, step: f64) -> Result<Self> {
        let k = steps_per_delay(delay, step)?;
        Ok(DelaySolver { delay, h: delay / k as f64 })
    }

    /// Runs `n_steps` steps and returns every `record_every`-th state
    /// (including `t = 0`).
    fn run(
        &self,
        n_steps: usize,
        record_every: usize,
        init: impl Fn(f64) -> ([f64; N], [f64; N]),
        mut rhs: impl FnMut(&[f64; N], &[f64; N]) -> [f64; N],
        check: impl Fn(f64, &[f64; N]) -> Result<()>,
    ) -> Result<Vec<(f64, [f64; N])>> {
        let h = self.h;
        let mut history = HistoryBuffer::<N>::new(self.delay + 2.0 * h);
        let delayed = |history: &HistoryBuffer<N>, t: f64| -> Result<[f64; N]> {
            let lag = t - self.delay;
            if lag <= 0.0 {
                Ok(init(lag).0)
            } else {
                history.eval(lag)
            }
        };

        let mut y = init(0.0).0;
        check(0.0, &y)?;
        let mut out = Vec::with_capacity(n_steps / record_every + 2);
        out.push((0.0, y));

        for n in 0..n_steps {
            let t = n as f64 * h;
            let k1 = rhs(&y, &delayed(&history, t)?);
            history.push(t, y, k1)?;
            let mid = t + 0.5 * h;
            let d_mid = delayed(&history, mid)?;
            let y2 = axpy(&y, 0.5 * h, &k1);
            let k2 = rhs(&y2, &d_mid);
            let y3 = axpy(&y, 0.5 * h, &k2);
            let k3 = rhs(&y3, &d_mid);
            let y4 = axpy(&y, h, &k3);
            let k4 = rhs(&y4, &delayed(&history, t + h)?);
            y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));

            let t_next = (n + 1) as f64 * h;
            check(t_next, &y)?;
            if (n + 1) % record_every == 0 {
                out.push((t_next, y));
            }
        }
        Ok(out)
    }

    fn steps_for(&self, t_end: f64) -> Result<usize> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::domain(format!("t_end must be positive, got {t_end}")));
        }
        let ratio = t_end / self.h;
        let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio { ratio.round() } else { ratio.ceil() };
        Ok(n as usize)
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub w_max: f64,
    pub since_loss: f64,
    pub window: f64,
    pub loss_prob: f64,
}

impl TrajectorySample {
    pub fn state(&self) -> FlowState {
        FlowState { w_max: self.w_max, since_loss: self.since_loss }
    }
}

/// Sampled solution of the fluid system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub params: SystemParams,
    pub algorithm: &'static str,
    /// Integration step actually used.
    pub step: f64,
    pub record_every: usize,
    pub init: InitialHistory,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str = "t,w_max,s,w,p";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            writeln!(out, "{},{},{},{},{}", s.t, s.w_max, s.since_loss, s.window, s.loss_prob)?;
        }
        Ok(())
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory always holds t = 0")
    }

    /// Time average of the window over samples with `t >= from`.
    pub fn mean_window_after(&self, from: f64) -> f64 {
        let tail: Vec<f64> = self.samples.iter().filter(|s| s.t >= from).map(|s| s.window).collect();
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub step: f64,
    pub record_every: usize,
}

impl IntegrateOptions {
    pub fn new(t_end: f64, step: f64) -> Self {
        IntegrateOptions { t_end, step, record_every: 1 }
    }
}

/// Integrates the `(w_max, since_loss)` system over `[0, t_end]`.
pub fn integrate(
    params: &SystemParams,
    window_fn: &dyn WindowFunction,
    init: &InitialHistory,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    params.validate()?;
    init.validate(params.delay)?;
    if opts.record_every == 0 {
        return Err(Error::domain("record_every must be at least 1"));
    }
    let solver = DelaySolver::<2>::new(params.delay, opts.step)?;
    let n = solver.steps_for(opts.t_end)?;

    let rhs = |y: &[f64; 2], d: &[f64; 2]| {
        let delayed = FlowState::from_array(*d);
        let w_d = window_fn.window(&delayed, params);
        if !(w_d > 0.0) {
            // An RK stage left the domain; the NaN halts the run at the step check.
            return [f64::NAN; 2];
        }
        let p_d = (1.0 - params.bdp() / w_d).max(0.0);
        fluid_rhs(&FlowState::from_array(*y), w_d, p_d, params, window_fn)
    };
    let check = |t: f64, y: &[f64; 2]| {
        if !(y[0] > 0.0) || !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::IntegrationHalted {
                t,
                reason: format!("state left the valid region (w_max = {}, s = {})", y[0], y[1]),
            });
        }
        Ok(())
    };
    let raw = solver.run(n, opts.record_every, |theta| init.eval(theta), rhs, check)?;

    let samples = raw
        .into_iter()
        .map(|(t, y)| {
            let state = FlowState::from_array(y);
            let window = window_fn.window(&state, params);
            TrajectorySample {
                t,
                w_max: y[0],
                since_loss: y[1],
                window,
                loss_prob: loss_probability(window, params).unwrap_or(0.0),
            }
        })
        .collect();
    Ok(Trajectory {
        samples,
        params: *params,
        algorithm: window_fn.name(),
        step: solver.h,
        record_every: opts.record_every,
        init: init.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedSample {
    pub t: f64,
    pub x: ShiftedState,
}

/// Solution of the CUBIC system in coordinates centred on its fixed point,
/// started from a constant history.
#[derive(Debug, Clone)]
pub struct ShiftedTrajectory {
    pub samples: Vec<ShiftedSample>,
    pub init: ShiftedState,
    pub fixed_point: FixedPoint,
    pub params: SystemParams,
    pub step: f64,
    pub record_every: usize,
}

impl ShiftedTrajectory {
    /// State one delay before sample `i`.
    pub fn delayed(&self, i: usize) -> ShiftedState {
        let t = self.samples[i].t - self.params.delay;
        if t <= 0.0 {
            return self.init;
        }
        let dt = self.step * self.record_every as f64;
        let pos = t / dt;
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        if frac < 1e-9 || j + 1 >= self.samples.len() {
            return self.samples[j].x;
        }
        if frac > 1.0 - 1e-9 {
            return self.samples[j + 1].x;
        }
        let (a, b) = (self.samples[j].x, self.samples[j + 1].x);
        ShiftedState::new(a.x1 + frac * (b.x1 - a.x1), a.x2 + frac * (b.x2 - a.x2))
    }

    /// Samples `x(t - theta)` for `theta` on the stored grid within `[0, tau]`.
    pub fn window_back(&self, i: usize) -> impl Iterator<Item = ShiftedState> + '_ {
        let t = self.samples[i].t;
        let lag = self.params.delay;
        let recent = self.samples[..=i].iter().rev().take_while(move |s| s.t >= t - lag - 1e-12).map(|s| s.x);
        let pre_start = (t - lag < 0.0).then_some(self.init);
        recent.chain(pre_start)
    }
}

/// Integrates the shifted CUBIC system from the constant history `x0`.
pub fn integrate_shifted(
    params: &SystemParams,
    fp: &FixedPoint,
    x0: ShiftedState,
    opts: IntegrateOptions,
) -> Result<ShiftedTrajectory> {
    params.validate()?;
    if opts.record_every == 0 {
        return Err(Error::domain("record_every must be at least 1"));
    }
    let solver = DelaySolver::<2>::new(params.delay, opts.step)?;
    let n = solver.steps_for(opts.t_end)?;
    let rhs = |y: &[f64; 2], d: &[f64; 2]| {
        shifted_rhs_unchecked(&ShiftedState::from_array(*y), &ShiftedState::from_array(*d), fp, params)
    };
    let check = |t: f64, y: &[f64; 2]| {
        if !(y[0] > -fp.window) || !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::IntegrationHalted {
                t,
                reason: format!("shifted state left the valid region (x1 = {}, x2 = {})", y[0], y[1]),
            });
        }
        Ok(())
    };
    let start = x0.to_array();
    let raw = solver.run(n, opts.record_every, |_| (start, [0.0; 2]), rhs, check)?;
    Ok(ShiftedTrajectory {
        samples: raw.into_iter().map(|(t, y)| ShiftedSample { t, x: ShiftedState::from_array(y) }).collect(),
        init: x0,
        fixed_point: *fp,
        params: *params,
        step: solver.h,
        record_every: opts.record_every,
    })
}

/// Result of a step-halving self-convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    /// `log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`; `None` when both
    /// differences vanish (the solution is reproduced exactly).
    pub order: Option<f64>,
    /// Endpoint differences between successive step sizes.
    pub differences: [f64; 2],
}

/// Estimates the observed order from runs at `h`, `h/2` and `h/4`.
pub fn convergence_order_check(
    window_fn: &dyn WindowFunction,
    params: &SystemParams,
    init: &InitialHistory,
    t_end: f64,
    step: f64,
) -> Result<OrderEstimate> {
    let endpoint = |h: f64| -> Result<[f64; 2]> {
        let traj = integrate(params, window_fn, init, IntegrateOptions::new(t_end, h))?;
        let last = traj.last();
        Ok([last.w_max, last.since_loss])
    };
    let k = steps_per_delay(params.delay, step)?;
    let h = params.delay / k as f64;
    let ys = [endpoint(h)?, endpoint(h / 2.0)?, endpoint(h / 4.0)?];
    let diff = |a: &[f64; 2], b: &[f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let differences = [diff(&ys[0], &ys[1]), diff(&ys[1], &ys[2])];
    let order = (differences[1] > 0.0).then(|| (differences[0] / differences[1]).log2());
    Ok(OrderEstimate { order, differences })
}
