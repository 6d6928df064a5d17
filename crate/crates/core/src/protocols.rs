//! Reno and CUBIC window functions and the CUBIC system in coordinates
//! centred on its fixed point.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fixedpoint::FixedPoint;
use crate::model::{FlowState, SystemParams, WindowFunction};

/// Reno: halve on loss, then one packet per round trip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Reno;

/// CUBIC: `c (s - cbrt(w_max b / c))^3 + w_max`.
///
/// Only the window curve is modelled; no TCP-friendly region or fast
/// convergence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cubic;

pub fn reno_window(state: &FlowState, params: &SystemParams) -> f64 {
    state.w_max / 2.0 + state.since_loss / params.delay
}

pub fn cubic_window(state: &FlowState, params: &SystemParams) -> f64 {
    params.scale * cubic_offset(state, params).powi(3) + state.w_max
}

/// Time since loss minus the time at which CUBIC returns to `w_max`.
#[inline]
fn cubic_offset(state: &FlowState, params: &SystemParams) -> f64 {
    state.since_loss - (state.w_max * params.decrease / params.scale).cbrt()
}

impl WindowFunction for Reno {
    fn window(&self, state: &FlowState, params: &SystemParams) -> f64 {
        reno_window(state, params)
    }

    fn deficit(&self, state: &FlowState, params: &SystemParams) -> f64 {
        state.w_max / 2.0 - state.since_loss / params.delay
    }

    fn name(&self) -> &'static str {
        "reno"
    }
}

impl WindowFunction for Cubic {
    fn window(&self, state: &FlowState, params: &SystemParams) -> f64 {
        cubic_window(state, params)
    }

    fn deficit(&self, state: &FlowState, params: &SystemParams) -> f64 {
        -params.scale * cubic_offset(state, params).powi(3)
    }

    fn name(&self) -> &'static str {
        "cubic"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Reno,
    Cubic,
}

impl Algorithm {
    pub fn window_fn(self) -> &'static dyn WindowFunction {
        match self {
            Algorithm::Reno => &Reno,
            Algorithm::Cubic => &Cubic,
        }
    }
}

impl WindowFunction for Algorithm {
    fn window(&self, state: &FlowState, params: &SystemParams) -> f64 {
        self.window_fn().window(state, params)
    }

    fn deficit(&self, state: &FlowState, params: &SystemParams) -> f64 {
        self.window_fn().deficit(state, params)
    }

    fn reset(&self, window_at_loss: f64) -> Result<FlowState> {
        self.window_fn().reset(window_at_loss)
    }

    fn name(&self) -> &'static str {
        self.window_fn().name()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reno" => Ok(Algorithm::Reno),
            "cubic" => Ok(Algorithm::Cubic),
            other => Err(Error::domain(format!("unknown algorithm {other:?} (expected reno or cubic)"))),
        }
    }
}

/// Epoch-start state after a loss indication: `w_max` takes the window seen
/// right before the loss and the clock restarts.
pub fn loss_reset(window_at_loss: f64, algorithm: Algorithm) -> Result<FlowState> {
    algorithm.reset(window_at_loss)
}

/// Deviation from the CUBIC fixed point: `x1 = w_max - W_hat`, `x2 = s - s_hat`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShiftedState {
    pub x1: f64,
    pub x2: f64,
}

impl ShiftedState {
    pub const ZERO: ShiftedState = ShiftedState { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        ShiftedState { x1, x2 }
    }

    pub fn from_flow(state: &FlowState, fp: &FixedPoint) -> Self {
        ShiftedState { x1: state.w_max - fp.window, x2: state.since_loss - fp.since_loss }
    }

    pub fn to_flow(&self, fp: &FixedPoint) -> Result<FlowState> {
        FlowState::new(self.x1 + fp.window, self.x2 + fp.since_loss)
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    #[inline]
    pub(crate) fn to_array(self) -> [f64; 2] {
        [self.x1, self.x2]
    }

    #[inline]
    pub(crate) fn from_array(v: [f64; 2]) -> Self {
        ShiftedState { x1: v[0], x2: v[1] }
    }
}

/// `s - cbrt(b (x1 + W_hat) / c)` written around the fixed point.
///
/// Uses `s_hat^3 = b W_hat / c` to avoid subtracting two numbers near `s_hat`.
#[inline]
pub(crate) fn shifted_offset(x: &ShiftedState, fp: &FixedPoint) -> f64 {
    let rel = x.x1 / fp.window;
    x.x2 - fp.since_loss * (rel.ln_1p() / 3.0).exp_m1()
}

/// CUBIC window minus `C tau`, evaluated in shifted coordinates.
#[inline]
pub(crate) fn shifted_window_excess(x: &ShiftedState, fp: &FixedPoint, params: &SystemParams) -> f64 {
    params.scale * shifted_offset(x, fp).powi(3) + x.x1 + fp.excess
}

fn check_shifted(x: &ShiftedState, fp: &FixedPoint, what: &str) -> Result<()> {
    if !(x.x1 > -fp.window) || !x.x2.is_finite() {
        return Err(Error::domain(format!(
            "{what} x1 = {} must exceed -W_hat = {}",
            x.x1, -fp.window
        )));
    }
    Ok(())
}

/// Right-hand side of the CUBIC system in shifted coordinates.
///
/// Returns `[dx1/dt, dx2/dt]`. Algebraically identical to [`crate::model::fluid_rhs`]
/// with the CUBIC window under `w_max = x1 + W_hat`, `s = x2 + s_hat`.
pub fn cubic_shifted_rhs(
    x: &ShiftedState,
    x_delayed: &ShiftedState,
    fp: &FixedPoint,
    params: &SystemParams,
) -> Result<[f64; 2]> {
    check_shifted(x, fp, "current")?;
    check_shifted(x_delayed, fp, "delayed")?;
    Ok(shifted_rhs_unchecked(x, x_delayed, fp, params))
}

#[inline]
pub(crate) fn shifted_rhs_unchecked(
    x: &ShiftedState,
    x_delayed: &ShiftedState,
    fp: &FixedPoint,
    params: &SystemParams,
) -> [f64; 2] {
    // Psi_tau * p~_tau / tau, with Psi p~ = max(Psi - C tau, 0).
    let loss_rate = shifted_window_excess(x_delayed, fp, params).max(0.0) / params.delay;
    let gap = params.scale * shifted_offset(x, fp).powi(3);
    [gap * loss_rate, 1.0 - (x.x2 + fp.since_loss) * loss_rate]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::cubic_fixed_point;
    use crate::model::{fluid_rhs, loss_probability};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn reno_window_examples() {
        let p = SystemParams::new(1.0, 1.0, 0.5, 1.0, 1).unwrap();
        assert_eq!(reno_window(&FlowState::new(2.0, 0.0).unwrap(), &p), 1.0);
        assert_eq!(reno_window(&FlowState::new(2.0, 1.0).unwrap(), &p), 2.0);
        let p = SystemParams::new(1.0, 0.5, 0.5, 1.0, 1).unwrap();
        assert_eq!(reno_window(&FlowState::new(10.0, 2.0).unwrap(), &p), 9.0);
    }

    #[test]
    fn cubic_window_examples() {
        for c in [0.1, 0.4, 3.0] {
            let p = SystemParams::new(1.0, 1.0, 0.2, c, 1).unwrap();
            let w = cubic_window(&FlowState::new(100.0, 0.0).unwrap(), &p);
            assert!(rel_close(w, 80.0, 1e-14), "{w}");
        }
        let p = SystemParams::new(1.0, 1.0, 0.2, 0.4, 1).unwrap();
        let k = (100.0f64 * 0.2 / 0.4).cbrt();
        assert!(rel_close(cubic_window(&FlowState::new(100.0, k).unwrap(), &p), 100.0, 1e-14));
        // b = 1 is outside SystemParams' domain; evaluate the formula directly.
        let p = SystemParams { capacity: 1.0, delay: 1.0, decrease: 1.0, scale: 1.0, flows: 1 };
        assert_eq!(cubic_window(&FlowState { w_max: 1.0, since_loss: 2.0 }, &p), 2.0);
    }

    #[test]
    fn cubic_saddle_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let w_max = rng.gen_range(1.0..1e5);
            let b = rng.gen_range(0.01..0.99);
            let c = rng.gen_range(0.01..10.0);
            let p = SystemParams::new(1.0, 1.0, b, c, 1).unwrap();
            let s = (w_max * b / c).cbrt();
            let w = cubic_window(&FlowState::new(w_max, s).unwrap(), &p);
            assert!(rel_close(w, w_max, 1e-12), "w_max={w_max} b={b} c={c} w={w}");
        }
    }

    #[test]
    fn loss_reset_examples() {
        let reno = loss_reset(10.0, Algorithm::Reno).unwrap();
        let p = SystemParams::new(1.0, 0.1, 0.2, 0.4, 1).unwrap();
        assert_eq!(reno, FlowState { w_max: 10.0, since_loss: 0.0 });
        assert_eq!(Reno.window(&reno, &p), 5.0);
        let cubic = loss_reset(10.0, Algorithm::Cubic).unwrap();
        assert!(rel_close(Cubic.window(&cubic, &p), 8.0, 1e-14));
        assert!(loss_reset(0.0, Algorithm::Reno).is_err());
        assert!(loss_reset(-1.0, Algorithm::Cubic).is_err());
    }

    #[test]
    fn algorithm_parses() {
        assert_eq!("CUBIC".parse::<Algorithm>().unwrap(), Algorithm::Cubic);
        assert_eq!(" reno".parse::<Algorithm>().unwrap(), Algorithm::Reno);
        assert!("bbr".parse::<Algorithm>().is_err());
    }

    fn sample_params() -> SystemParams {
        SystemParams::new(12500.0, 0.01, 0.2, 0.4, 1).unwrap()
    }

    #[test]
    fn shifted_origin_is_stationary() {
        let params = sample_params();
        let fp = cubic_fixed_point(&params, 1e-12).unwrap();
        let d = cubic_shifted_rhs(&ShiftedState::ZERO, &ShiftedState::ZERO, &fp, &params).unwrap();
        assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn shifted_without_loss_gives_unit_clock() {
        let params = sample_params();
        let fp = cubic_fixed_point(&params, 1e-12).unwrap();
        // Delayed window far below C tau, so the delayed loss term is zero.
        let delayed = ShiftedState::new(-60.0, -3.0);
        let x = ShiftedState::new(1.5, -0.7);
        assert_eq!(cubic_shifted_rhs(&x, &delayed, &fp, &params).unwrap(), [0.0, 1.0]);
    }

    #[test]
    fn shifted_domain_error() {
        let params = sample_params();
        let fp = cubic_fixed_point(&params, 1e-12).unwrap();
        let bad = ShiftedState::new(-fp.window, 0.0);
        assert!(cubic_shifted_rhs(&bad, &ShiftedState::ZERO, &fp, &params).is_err());
        assert!(cubic_shifted_rhs(&ShiftedState::ZERO, &bad, &fp, &params).is_err());
    }

    #[test]
    fn shifted_matches_fluid_rhs() {
        let params = sample_params();
        let fp = cubic_fixed_point(&params, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let x = ShiftedState::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let xd = ShiftedState::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            // Away from the saddle (tiny cube term) and the clamp (tiny loss
            // rate), where the two routes round differently.
            if x.x2.abs() < 0.05 || shifted_window_excess(&xd, &fp, &params).abs() < 0.1 {
                continue;
            }
            let shifted = cubic_shifted_rhs(&x, &xd, &fp, &params).unwrap();

            let cur = x.to_flow(&fp).unwrap();
            let del = xd.to_flow(&fp).unwrap();
            let w_del = Cubic.window(&del, &params);
            let p_del = loss_probability(w_del, &params).unwrap();
            let direct = fluid_rhs(&cur, w_del, p_del, &params, &Cubic);

            // Compare against the size of the terms each component is built from.
            let rate = w_del * p_del / params.delay;
            let scale0 = Cubic.deficit(&cur, &params).abs() * rate;
            let scale1 = 1.0f64.max(cur.since_loss * rate);
            assert!((shifted[0] - direct[0]).abs() <= 1e-12 * scale0, "{shifted:?} vs {direct:?}");
            assert!((shifted[1] - direct[1]).abs() <= 1e-12 * scale1, "{shifted:?} vs {direct:?}");
        }
    }

    #[test]
    fn shift_round_trip() {
        let params = sample_params();
        let fp = cubic_fixed_point(&params, 1e-12).unwrap();
        let s = FlowState::new(130.0, 2.5).unwrap();
        let back = ShiftedState::from_flow(&s, &fp).to_flow(&fp).unwrap();
        assert!(rel_close(back.w_max, 130.0, 1e-15) && rel_close(back.since_loss, 2.5, 1e-15));
    }
}
