//! Local stability quantities for the CUBIC fixed point.
//!
//! Works in shifted coordinates `x = (w_max - W^, s - s^)`. The quartic
//! Lyapunov-Razumikhin candidate is `V = d1/2 x1^2 + d4/4 x2^4`; its
//! derivative is bounded by the quadratic form `-z' Q z` in
//! `z = (x1^2, sqrt(2) x1 x2, x2^2)` once higher-order terms are absorbed.
//! The constants that control those terms are not computed here; the
//! exponent fits in [`taylor_fit`] check the expansion numerically instead.

use std::f64::consts::SQRT_2;
use std::io::{self, Write};

use crate::dde::ShiftedTrajectory;
use crate::error::{Error, Result};
use crate::fixedpoint::FixedPoint;
use crate::model::SystemParams;
use crate::protocols::{shifted_rhs_unchecked, ShiftedState};

/// Coefficients of the cubic truncation
/// `x1' ~ -a x1^3 + b x1^2 x2 - g x1 x2^2 + d x2^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ExpansionCoeffs {
    pub fn from_raw(b: f64, c: f64, s_hat: f64) -> Self {
        ExpansionCoeffs {
            alpha: b.powi(3) / (27.0 * c * c * s_hat.powi(7)),
            beta: b * b / (3.0 * c * s_hat.powi(5)),
            gamma: b / s_hat.powi(3),
            delta: c / s_hat,
        }
    }

    pub fn cubic_truncation(&self, x: &ShiftedState) -> f64 {
        let (x1, x2) = (x.x1, x.x2);
        -self.alpha * x1.powi(3) + self.beta * x1 * x1 * x2 - self.gamma * x1 * x2 * x2 + self.delta * x2.powi(3)
    }

    /// `alpha*gamma - beta^2/4`, the leading 2x2 minor up to a factor `d1^2/2`.
    pub fn minor_gap(&self) -> f64 {
        self.alpha * self.gamma - 0.25 * self.beta * self.beta
    }
}

pub fn expansion_coeffs(fp: &FixedPoint, params: &SystemParams) -> ExpansionCoeffs {
    ExpansionCoeffs::from_raw(params.decrease, params.scale, fp.since_loss)
}

/// Closed form of [`ExpansionCoeffs::minor_gap`]:
/// `b^4 / (c^2 s^10) * (1/27 - 1/36)`.
pub fn minor_gap_closed_form(b: f64, c: f64, s_hat: f64) -> f64 {
    b.powi(4) / (c * c * s_hat.powi(10)) * (1.0 / 27.0 - 1.0 / 36.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub d1: f64,
    pub d4: f64,
    pub eps0: f64,
    pub eps1: f64,
    /// Margin `K` in `(0, lambda_min)`.
    pub margin: f64,
    /// Razumikhin constant `p > 1`; unrelated to the loss probability.
    pub razumikhin_p: f64,
    pub t0: f64,
    eps1_limit: f64,
    lambda_min: f64,
}

impl LyapunovParams {
    /// Defaults: `eps1` at half its upper limit, `K = lambda_min / 2`,
    /// `p = 1.01`, `t0 = 0`.
    pub fn new(fp: &FixedPoint, params: &SystemParams) -> Result<Self> {
        let s_hat = fp.since_loss;
        let c = params.scale;
        let tau = params.delay;
        if !(s_hat > 0.0 && s_hat.is_finite()) {
            return Err(Error::InvalidParams(format!("fixed point since_loss must be positive, got {s_hat}")));
        }
        let d1 = s_hat / c;
        let d4 = tau / s_hat;
        let eps1_limit = (s_hat / (6.0 * c)).min(tau / (4.0 * s_hat));
        let mut lp = LyapunovParams {
            d1,
            d4,
            eps0: (s_hat / (2.0 * c)).max(tau / (4.0 * s_hat)),
            eps1: 0.5 * eps1_limit,
            margin: 0.0,
            razumikhin_p: 1.01,
            t0: 0.0,
            eps1_limit,
            lambda_min: f64::NAN,
        };
        let q = qtilde(&expansion_coeffs(fp, params), &lp, fp)?;
        lp.lambda_min = q.lambda_min;
        lp.margin = 0.5 * q.lambda_min;
        Ok(lp)
    }

    pub fn with_eps1(mut self, eps1: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps1 < self.eps1_limit) {
            return Err(Error::InvalidParams(format!("eps1 must lie in (0, {}), got {eps1}", self.eps1_limit)));
        }
        self.eps1 = eps1;
        Ok(self)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < self.lambda_min) {
            return Err(Error::InvalidParams(format!("K must lie in (0, {}), got {margin}", self.lambda_min)));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn with_razumikhin_p(mut self, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("razumikhin_p must exceed 1, got {p}")));
        }
        self.razumikhin_p = p;
        Ok(self)
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn eps1_limit(&self) -> f64 {
        self.eps1_limit
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }
}

/// Symmetric matrix of the quartic form. Block diagonal: a 2x2 block on
/// `(x1^2, sqrt(2) x1 x2)` and the scalar `d4/s` on `x2^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QtildeMatrix {
    pub entries: [[f64; 3]; 3],
    pub lambda_min: f64,
}

impl QtildeMatrix {
    pub fn leading_minors(&self) -> [f64; 3] {
        let m = &self.entries;
        let m1 = m[0][0];
        let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [m1, m2, m2 * m[2][2]]
    }

    pub fn positive_definite_by_minors(&self) -> bool {
        self.leading_minors().iter().all(|v| *v > 0.0)
    }

    /// `z' Q z` with `z = (x1^2, sqrt(2) x1 x2, x2^2)`.
    pub fn quadratic_form(&self, x: &ShiftedState) -> f64 {
        let z = [x.x1 * x.x1, SQRT_2 * x.x1 * x.x2, x.x2 * x.x2];
        let m = &self.entries;
        (0..3).map(|i| (0..3).map(|j| z[i] * m[i][j] * z[j]).sum::<f64>()).sum()
    }
}

/// Smallest eigenvalue of a symmetric 2x2 matrix, computed as
/// `det / lambda_max` to avoid cancellation when it is tiny.
fn sym2_eigmin(a: f64, off: f64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(off);
    let lmax = mean + radius;
    if lmax <= 0.0 {
        return mean - radius;
    }
    (a * d - off * off) / lmax
}

pub fn qtilde(coeffs: &ExpansionCoeffs, lp: &LyapunovParams, fp: &FixedPoint) -> Result<QtildeMatrix> {
    let a = lp.d1 * coeffs.alpha;
    let off = -lp.d1 * coeffs.beta / (2.0 * SQRT_2);
    let d = 0.5 * lp.d1 * coeffs.gamma;
    let e = lp.d4 / fp.since_loss;
    let lambda_min = sym2_eigmin(a, off, d).min(e);
    let q = QtildeMatrix { entries: [[a, off, 0.0], [off, d, 0.0], [0.0, 0.0, e]], lambda_min };
    if !(lambda_min > 0.0) || !q.positive_definite_by_minors() {
        return Err(Error::domain(format!("quartic form is not positive definite (lambda_min = {lambda_min})")));
    }
    Ok(q)
}

pub fn lyapunov_v(x: &ShiftedState, lp: &LyapunovParams) -> f64 {
    0.5 * lp.d1 * x.x1 * x.x1 + 0.25 * lp.d4 * x.x2.powi(4)
}

/// `V'` from the exact right-hand side at a state and its delayed value.
pub fn vdot_at(x: &ShiftedState, x_delayed: &ShiftedState, fp: &FixedPoint, params: &SystemParams, lp: &LyapunovParams) -> f64 {
    let [dx1, dx2] = shifted_rhs_unchecked(x, x_delayed, fp, params);
    lp.d1 * x.x1 * dx1 + lp.d4 * x.x2.powi(3) * dx2
}

pub fn vdot_along(traj: &ShiftedTrajectory, lp: &LyapunovParams) -> Vec<f64> {
    (0..traj.samples.len())
        .map(|i| vdot_at(&traj.samples[i].x, &traj.delayed(i), &traj.fixed_point, &traj.params, lp))
        .collect()
}

/// Sampled Razumikhin condition `V(x(t - theta)) <= p V(x(t))` over the
/// stored samples in the last delay.
pub fn razumikhin_holds(traj: &ShiftedTrajectory, i: usize, lp: &LyapunovParams) -> bool {
    let now = lyapunov_v(&traj.samples[i].x, lp);
    traj.window_back(i).all(|x| lyapunov_v(&x, lp) <= lp.razumikhin_p * now)
}

/// Upper bound on `||x(t)||^4`.
pub fn convergence_bound(t: f64, v0: f64, lp: &LyapunovParams, lambda_min: f64) -> f64 {
    let rate = lp.eps1 * (lambda_min - lp.margin) / (lp.eps0 * lp.eps0);
    1.0 / (rate * (t - lp.t0) + lp.eps1 / v0)
}

/// Radius of initial conditions guaranteed to stay within `epsilon`.
pub fn basin_delta(epsilon: f64, lp: &LyapunovParams) -> f64 {
    epsilon * epsilon * (lp.eps1 / lp.eps0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub norm_x: f64,
    pub v: f64,
    pub vdot: f64,
    pub bound: f64,
    pub razumikhin: bool,
}

/// Per-sample stability diagnostics along a shifted trajectory.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<DiagnosticRow>,
    pub lambda_min: f64,
    pub lyapunov: LyapunovParams,
}

/// Slack allowed when comparing successive values of `V`.
pub const V_SLACK: f64 = 1e-12;

impl StabilityReport {
    pub const CSV_HEADER: &'static str = "t,norm_x,V,Vdot,bound";

    pub fn new(traj: &ShiftedTrajectory, lp: &LyapunovParams) -> Self {
        let lambda_min = lp.lambda_min();
        let v0 = lyapunov_v(&traj.init, lp);
        let vdot = vdot_along(traj, lp);
        let rows = traj
            .samples
            .iter()
            .zip(vdot)
            .enumerate()
            .map(|(i, (s, vdot))| DiagnosticRow {
                t: s.t,
                norm_x: s.x.norm(),
                v: lyapunov_v(&s.x, lp),
                vdot,
                bound: convergence_bound(s.t, v0, lp, lambda_min),
                razumikhin: razumikhin_holds(traj, i, lp),
            })
            .collect();
        StabilityReport { rows, lambda_min, lyapunov: *lp }
    }

    /// Samples where `||x||^4` exceeds the convergence bound.
    pub fn bound_violations(&self) -> usize {
        self.rows.iter().filter(|r| r.norm_x.powi(4) > r.bound).count()
    }

    /// Steps where `V` grows by more than [`V_SLACK`].
    pub fn v_increases(&self) -> usize {
        self.rows.windows(2).filter(|w| w[1].v - w[0].v > V_SLACK).count()
    }

    /// Largest one-step increase of `V`.
    pub fn max_v_increase(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].v - w[0].v).fold(0.0, f64::max)
    }

    /// Samples with the Razumikhin condition active where
    /// `V' > -(lambda_min - K) ||x||^4`.
    pub fn decay_violations(&self) -> usize {
        let rate = self.lambda_min - self.lyapunov.margin;
        self.rows.iter().filter(|r| r.razumikhin && r.vdot > -rate * r.norm_x.powi(4)).count()
    }

    pub fn max_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.norm_x).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.t, r.norm_x, r.v, r.vdot, r.bound)?;
        }
        Ok(())
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}

/// Observed orders of the expansion remainders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorFit {
    /// Slope of `|x1' - cubic truncation|` against `||x||`.
    pub cubic_slope: f64,
    /// Slope of `|x2' - linear part|` against `||(x, x_tau)||`.
    pub linear_slope: f64,
}

/// Fits remainder exponents over `radii` (log-spaced between `r_lo` and
/// `r_hi`), taking the worst case over a fixed fan of directions.
pub fn taylor_fit(fp: &FixedPoint, params: &SystemParams, r_lo: f64, r_hi: f64, radii: usize) -> TaylorFit {
    let coeffs = expansion_coeffs(fp, params);
    let s_hat = fp.since_loss;
    let tau = params.delay;
    const DIRECTIONS: usize = 24;
    let mut cubic = Vec::with_capacity(radii);
    let mut linear = Vec::with_capacity(radii);
    for k in 0..radii {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / (radii - 1) as f64);
        let mut worst_cubic: f64 = 0.0;
        let mut worst_linear: f64 = 0.0;
        for j in 0..DIRECTIONS {
            let a = (j as f64 + 0.5) * std::f64::consts::TAU / DIRECTIONS as f64;
            let x = ShiftedState::new(r * a.cos(), r * a.sin());
            let [dx1, _] = shifted_rhs_unchecked(&x, &x, fp, params);
            worst_cubic = worst_cubic.max((dx1 - coeffs.cubic_truncation(&x)).abs());

            // Current and delayed states vary independently for x2'.
            let b = 0.37 * a + 1.1;
            let scale = r / SQRT_2;
            let xc = ShiftedState::new(scale * a.cos(), scale * a.sin());
            let xd = ShiftedState::new(scale * b.cos(), scale * b.sin());
            let [_, dx2] = shifted_rhs_unchecked(&xc, &xd, fp, params);
            let lin = -xc.x2 / s_hat - s_hat / tau * xd.x1;
            worst_linear = worst_linear.max((dx2 - lin).abs());
        }
        cubic.push((r, worst_cubic));
        linear.push((r, worst_linear));
    }
    TaylorFit { cubic_slope: loglog_slope(&cubic), linear_slope: loglog_slope(&linear) }
}
