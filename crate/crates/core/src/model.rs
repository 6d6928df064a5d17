//! Shared parameter and state types, the loss probability and the generic
//! delayed fluid right-hand side.
//!
//! Units are packets and seconds throughout. Capacity is a per-flow rate in
//! packets per second, so `capacity * delay` is the per-flow bandwidth-delay
//! product in packets.

use crate::error::{Error, Result};

/// Global parameter record shared by every flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Per-flow capacity in packets per second.
    pub capacity: f64,
    /// Round-trip delay in seconds.
    pub delay: f64,
    /// Multiplicative decrease factor, in (0, 1).
    pub decrease: f64,
    /// CUBIC scaling constant, packets per second cubed.
    pub scale: f64,
    pub flows: usize,
}

impl SystemParams {
    pub fn new(capacity: f64, delay: f64, decrease: f64, scale: f64, flows: usize) -> Result<Self> {
        let params = SystemParams { capacity, delay, decrease, scale, flows };
        params.validate()?;
        Ok(params)
    }

    /// Linux defaults for CUBIC: b = 0.2, c = 0.4, one flow.
    pub fn cubic_defaults(capacity: f64, delay: f64) -> Result<Self> {
        Self::new(capacity, delay, 0.2, 0.4, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return fail(format!("capacity must be positive, got {}", self.capacity));
        }
        if !(self.delay.is_finite() && self.delay > 0.0) {
            return fail(format!("delay must be positive, got {}", self.delay));
        }
        if !(self.decrease > 0.0 && self.decrease < 1.0) {
            return fail(format!("decrease factor must lie in (0, 1), got {}", self.decrease));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return fail(format!("scale must be positive, got {}", self.scale));
        }
        if self.flows == 0 {
            return fail("at least one flow is required".into());
        }
        Ok(())
    }

    /// Per-flow bandwidth-delay product `C * tau` in packets.
    #[inline]
    pub fn bdp(&self) -> f64 {
        self.capacity * self.delay
    }
}

/// State of one flow: the window just before the last loss and the time
/// since that loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub w_max: f64,
    pub since_loss: f64,
}

impl FlowState {
    pub fn new(w_max: f64, since_loss: f64) -> Result<Self> {
        if !(w_max.is_finite() && w_max > 0.0) {
            return Err(Error::domain(format!("w_max must be positive, got {w_max}")));
        }
        if !(since_loss.is_finite() && since_loss >= 0.0) {
            return Err(Error::domain(format!("time since loss must be non-negative, got {since_loss}")));
        }
        Ok(FlowState { w_max, since_loss })
    }

    #[inline]
    pub(crate) fn to_array(self) -> [f64; 2] {
        [self.w_max, self.since_loss]
    }

    #[inline]
    pub(crate) fn from_array(v: [f64; 2]) -> Self {
        FlowState { w_max: v[0], since_loss: v[1] }
    }
}

/// A congestion window expressed as a function of `(w_max, since_loss)`.
///
/// Implementations must be deterministic and finite on valid states.
pub trait WindowFunction: Send + Sync {
    fn window(&self, state: &FlowState, params: &SystemParams) -> f64;

    /// `w_max - window`, the amount the window sits below its pre-loss value.
    ///
    /// Override when the difference can be formed without cancellation.
    fn deficit(&self, state: &FlowState, params: &SystemParams) -> f64 {
        state.w_max - self.window(state, params)
    }

    /// State at the start of a new epoch, given the window right before loss.
    fn reset(&self, window_at_loss: f64) -> Result<FlowState> {
        if !(window_at_loss.is_finite() && window_at_loss > 0.0) {
            return Err(Error::domain(format!("window at loss must be positive, got {window_at_loss}")));
        }
        Ok(FlowState { w_max: window_at_loss, since_loss: 0.0 })
    }

    fn name(&self) -> &'static str;
}

/// Loss probability `max(1 - C tau / W, 0)`.
pub fn loss_probability(window: f64, params: &SystemParams) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::domain(format!("window must be positive, got {window}")));
    }
    Ok((1.0 - params.bdp() / window).max(0.0))
}

/// `W * p(W)` without the division, i.e. `max(W - C tau, 0)`.
#[inline]
pub(crate) fn loss_volume(window: f64, params: &SystemParams) -> f64 {
    (window - params.bdp()).max(0.0)
}

/// Right-hand side of the `(w_max, since_loss)` system.
///
/// `delayed_window` and `delayed_p` are the window and loss probability one
/// delay in the past. Returns `[d w_max / dt, d since_loss / dt]`.
pub fn fluid_rhs(
    current: &FlowState,
    delayed_window: f64,
    delayed_p: f64,
    params: &SystemParams,
    window_fn: &dyn WindowFunction,
) -> [f64; 2] {
    debug_assert!(delayed_window > 0.0);
    debug_assert!((0.0..=1.0).contains(&delayed_p));
    let loss_rate = delayed_window * delayed_p / params.delay;
    let deficit = window_fn.deficit(current, params);
    [-deficit * loss_rate, 1.0 - current.since_loss * loss_rate]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{Cubic, Reno};

    fn unit_params() -> SystemParams {
        SystemParams::new(1.0, 1.0, 0.5, 1.0, 1).unwrap()
    }

    #[test]
    fn loss_probability_examples() {
        let p = SystemParams::new(12500.0, 0.01, 0.2, 0.4, 1).unwrap();
        let bdp = p.bdp();
        assert_eq!(loss_probability(bdp, &p).unwrap(), 0.0);
        assert!((loss_probability(2.0 * bdp, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(loss_probability(bdp / 2.0, &p).unwrap(), 0.0);
        assert!(loss_probability(0.0, &p).is_err());
        assert!(loss_probability(-3.0, &p).is_err());
    }

    #[test]
    fn reno_balance_point_is_stationary() {
        // W = 2/2 + 1/1 = 2 = w_max and s * W_tau * p_tau / tau = 1.
        let state = FlowState::new(2.0, 1.0).unwrap();
        let d = fluid_rhs(&state, 2.0, 0.5, &unit_params(), &Reno);
        assert_eq!(d, [0.0, 0.0]);
    }

    #[test]
    fn zero_loss_gives_unit_clock() {
        let params = SystemParams::new(12500.0, 0.01, 0.2, 0.4, 1).unwrap();
        for (w, s) in [(10.0, 0.0), (200.0, 3.5), (1.0, 100.0)] {
            let state = FlowState::new(w, s).unwrap();
            assert_eq!(fluid_rhs(&state, 50.0, 0.0, &params, &Reno), [0.0, 1.0]);
            assert_eq!(fluid_rhs(&state, 50.0, 0.0, &params, &Cubic), [0.0, 1.0]);
        }
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(0.0, 0.01, 0.2, 0.4, 1).is_err());
        assert!(SystemParams::new(1.0, 0.0, 0.2, 0.4, 1).is_err());
        assert!(SystemParams::new(1.0, 0.01, 1.0, 0.4, 1).is_err());
        assert!(SystemParams::new(1.0, 0.01, 0.0, 0.4, 1).is_err());
        assert!(SystemParams::new(1.0, 0.01, 0.2, -1.0, 1).is_err());
        assert!(SystemParams::new(1.0, 0.01, 0.2, 0.4, 0).is_err());
        assert!(FlowState::new(0.0, 1.0).is_err());
        assert!(FlowState::new(1.0, -1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn loss_probability_is_monotone(a in 1e-3f64..1e4, b in 1e-3f64..1e4) {
            let p = SystemParams::new(1000.0, 0.05, 0.2, 0.4, 1).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let plo = loss_probability(lo, &p).unwrap();
            let phi = loss_probability(hi, &p).unwrap();
            proptest::prop_assert!(plo <= phi);
            proptest::prop_assert!((0.0..1.0).contains(&phi));
        }
    }
}
