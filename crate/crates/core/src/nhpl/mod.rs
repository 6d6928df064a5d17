//! Event-driven multi-flow simulation with losses drawn from a
//! non-homogeneous Poisson process.
//!
//! By default the congestion point applies one loss probability
//! `(1 - N C tau / sum W)^+` to all flows (see [`LossModel`]). Each loss is
//! charged to a flow chosen in proportion to its window and reaches that
//! flow one delay later, where it starts a new epoch.

mod quadrature;
mod schedule;
mod sim;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{FlowState, SystemParams, WindowFunction};

pub use quadrature::adaptive_simpson;
pub use schedule::{LossSchedule, PendingIndication};
pub use sim::{
    compute_t, generate_poi_loss, run_simulation, t_bdp, Event, EventKind, Generated, LossModel, SimOptions, SimResult, SimState,
    TraceSample,
};

/// Seeded stream of uniforms on the open interval `(0, 1)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}

/// Index of the flow that takes a loss, sampled with probability
/// proportional to its window.
pub fn pick_losing_flow(windows: &[f64], u: f64) -> Result<usize> {
    if windows.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("windows must be finite and nonnegative"));
    }
    let total: f64 = windows.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("at least one window must be positive"));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("uniform sample must lie in (0, 1), got {u}")));
    }
    let target = u * total;
    let mut cum = 0.0;
    for (i, w) in windows.iter().enumerate() {
        cum += w;
        if cum > target {
            return Ok(i);
        }
    }
    // Rounding in the running sum; fall back to the last positive window.
    Ok(windows.iter().rposition(|w| *w > 0.0).unwrap_or(0))
}

/// Smallest `T` in `[0, horizon]` with `int_0^T rate = -ln u`.
///
/// `increment(a, b)` must return the integral of the rate over `[a, b]`.
/// The search walks doubling segments from `first_step` and then bisects,
/// integrating only the shrinking bracket. `Ok(None)` means the integral
/// stays below `-ln u` up to the horizon.
pub fn inverse_transform_t(
    mut increment: impl FnMut(f64, f64) -> f64,
    u: f64,
    horizon: f64,
    first_step: f64,
) -> Result<Option<f64>> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("uniform sample must lie in (0, 1), got {u}")));
    }
    if !(horizon > 0.0 && first_step > 0.0) {
        return Err(Error::domain("horizon and first step must be positive"));
    }
    let target = -u.ln();
    let mut acc = 0.0;
    let mut a = 0.0;
    let mut len = first_step;
    let (mut lo, mut hi) = loop {
        if a >= horizon {
            return Ok(None);
        }
        let b = (a + len).min(horizon);
        let inc = increment(a, b);
        if acc + inc >= target {
            break (a, b);
        }
        acc += inc;
        a = b;
        len *= 2.0;
    };
    let mut f_lo = acc;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f_lo + increment(lo, mid);
        if f_mid >= target {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(Some(hi))
}

/// Window that never changes: the loss rate is frozen at its initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenWindow {
    pub window: f64,
}

impl WindowFunction for FrozenWindow {
    fn window(&self, _state: &FlowState, _params: &SystemParams) -> f64 {
        self.window
    }

    fn name(&self) -> &'static str {
        "frozen"
    }
}
