//! Steady states of the fluid model.
//!
//! For CUBIC the fixed point solves `W (W - C tau)^3 = tau^3 c / b`. The
//! solver works on the excess `y = W - C tau`, because for short delays `y`
//! is many orders of magnitude smaller than `C tau` and forming `W - C tau`
//! from a rounded `W` would lose most of its digits.

use crate::error::{Error, Result};
use crate::model::SystemParams;

const MAX_GROWTH_STEPS: usize = 60;
const MAX_ITERATIONS: usize = 200;
const UNIQUENESS_PROBES: usize = 256;

/// Steady state `(W_hat, s_hat, p_hat)`. At the fixed point `w_max = W_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    /// `W_hat`, packets.
    pub window: f64,
    /// `s_hat`, seconds.
    pub since_loss: f64,
    /// `p_hat = 1 - C tau / W_hat`.
    pub loss_prob: f64,
    /// `W_hat - C tau`, carried separately to keep full precision.
    pub excess: f64,
}

impl FixedPoint {
    /// `|W (W - C tau)^3 - tau^3 c / b| / (tau^3 c / b)`.
    pub fn residual(&self, params: &SystemParams) -> f64 {
        let target = balance_target(params);
        (self.window * self.excess.powi(3) - target).abs() / target
    }

    /// `s_hat W_hat p_hat / tau`, which equals one at a steady state.
    pub fn loss_balance(&self, params: &SystemParams) -> f64 {
        self.since_loss * self.window * self.loss_prob / params.delay
    }
}

/// Solver output with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolve {
    pub point: FixedPoint,
    pub iterations: usize,
    pub residual: f64,
    /// Whether a scan of the final bracket saw exactly one sign change.
    pub single_sign_change: bool,
}

#[inline]
fn balance_target(params: &SystemParams) -> f64 {
    params.delay.powi(3) * params.scale / params.decrease
}

/// CUBIC fixed point with relative residual below `tol`.
pub fn cubic_fixed_point(params: &SystemParams, tol: f64) -> Result<FixedPoint> {
    cubic_fixed_point_report(params, tol).map(|r| r.point)
}

pub fn cubic_fixed_point_report(params: &SystemParams, tol: f64) -> Result<FixedPointSolve> {
    params.validate()?;
    let bdp = params.bdp();
    let (excess, iterations, single_sign_change) = solve_excess(bdp, balance_target(params), tol)?;
    let window = bdp + excess;
    let point = FixedPoint {
        window,
        since_loss: (window * params.decrease / params.scale).cbrt(),
        loss_prob: excess / window,
        excess,
    };
    Ok(FixedPointSolve { point, iterations, residual: point.residual(params), single_sign_change })
}

/// Root `y > 0` of `(bdp + y) y^3 = target` by Newton steps safeguarded with
/// bisection. Returns `(y, iterations, single_sign_change)`.
pub(crate) fn solve_excess(bdp: f64, target: f64, tol: f64) -> Result<(f64, usize, bool)> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(bdp >= 0.0 && target > 0.0) {
        return Err(Error::domain(format!("need bdp >= 0 and target > 0, got {bdp}, {target}")));
    }
    let g = |y: f64| (bdp + y) * y.powi(3) - target;
    let dg = |y: f64| y * y * (4.0 * y + 3.0 * bdp);

    // g(0) = -target < 0 and g grows without bound, so a bracket exists.
    let mut lo = 0.0;
    let mut step = bdp.max(1.0) * 1e-6;
    let mut hi = step;
    let mut grown = 0;
    while g(hi) < 0.0 {
        if grown == MAX_GROWTH_STEPS {
            return Err(Error::NoConvergence { iterations: grown, lo, hi });
        }
        lo = hi;
        step *= 2.0;
        hi = step;
        grown += 1;
    }
    let single_sign_change = count_sign_changes(&g, lo, hi) == 1;

    let mut y = 0.5 * (lo + hi);
    for it in 1..=MAX_ITERATIONS {
        let gy = g(y);
        if gy.abs() <= tol * target * 1e-2 || gy == 0.0 {
            return Ok((y, it, single_sign_change));
        }
        if gy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - gy / dg(y);
        y = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            let res = g(y).abs() / target;
            if res < tol {
                return Ok((y, it, single_sign_change));
            }
            return Err(Error::NoConvergence { iterations: it, lo, hi });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, lo, hi })
}

fn count_sign_changes(g: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> usize {
    let mut changes = 0;
    let mut prev = g(lo).signum();
    for i in 1..=UNIQUENESS_PROBES {
        let y = lo + (hi - lo) * i as f64 / UNIQUENESS_PROBES as f64;
        let sign = g(y).signum();
        if sign != prev && sign != 0.0 {
            changes += 1;
            prev = sign;
        }
    }
    changes
}

/// Reno steady window `sqrt(2 / p_hat)`.
pub fn reno_fixed_point(p_hat: f64) -> Result<f64> {
    check_probability(p_hat)?;
    Ok((2.0 / p_hat).sqrt())
}

/// Reno equilibrium of the `(w_max, since_loss)` system: `W (W - C tau) = 2`
/// with `w_max = W` and `since_loss = W tau / 2`.
pub fn reno_equilibrium(params: &SystemParams) -> Result<FixedPoint> {
    params.validate()?;
    let bdp = params.bdp();
    let excess = 4.0 / (bdp + (bdp * bdp + 8.0).sqrt());
    let window = bdp + excess;
    Ok(FixedPoint { window, since_loss: window * params.delay / 2.0, loss_prob: excess / window, excess })
}

/// CUBIC steady window as a function of the loss probability,
/// `(tau^3 c / (p_hat^3 b))^(1/4)`.
pub fn cubic_w_of_p(p_hat: f64, params: &SystemParams) -> Result<f64> {
    check_probability(p_hat)?;
    Ok((balance_target(params) / p_hat.powi(3)).powf(0.25))
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("loss probability must lie in (0, 1], got {p}")));
    }
    Ok(())
}
