//! Independent reference integrators used by the acceptance checks.

/// Direct Reno window equation `W' = 1/tau - (W/2) W_tau p(W_tau) / tau`
/// from a constant history `w0`, RK4 on the grid `h = tau / k`.
/// Returns `W` at every grid point `0, h, ..., n h`.
pub fn reno_direct_window(capacity: f64, tau: f64, w0: f64, k: usize, n: usize) -> Vec<f64> {
    let h = tau / k as f64;
    let bdp = capacity * tau;
    let loss_term = |wd: f64| (wd - bdp).max(0.0) / tau;
    let f = |w: f64, wd: f64| 1.0 / tau - 0.5 * w * loss_term(wd);

    let mut w = vec![w0];
    let mut dw: Vec<f64> = Vec::new();
    // Value and slope at grid index i - k, with the constant history before 0.
    let lagged = |w: &[f64], dw: &[f64], j: isize| -> (f64, f64) {
        if j < 0 {
            (w0, 0.0)
        } else {
            (w[j as usize], dw[j as usize])
        }
    };
    for i in 0..n {
        let j = i as isize - k as isize;
        // Slope at the current grid point is needed for later Hermite lookups.
        let (wd0, _) = lagged(&w, &dw, j);
        dw.push(f(w[i], wd0));
        let (y0, m0) = lagged(&w, &dw, j);
        let (y1, m1) = lagged(&w, &dw, j + 1);
        // Cubic Hermite at the midpoint of the lagged interval.
        let wd_mid = if j < 0 { w0 } else { 0.5 * (y0 + y1) + h / 8.0 * (m0 - m1) };
        let wd_end = if j + 1 < 0 { w0 } else { y1 };
        let wi = w[i];
        let k1 = f(wi, wd0);
        let k2 = f(wi + 0.5 * h * k1, wd_mid);
        let k3 = f(wi + 0.5 * h * k2, wd_mid);
        let k4 = f(wi + h * k3, wd_end);
        w.push(wi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    w
}

/// Two-sided Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pearson chi-square statistic.
pub fn chi_square(observed: &[usize], expected: &[f64]) -> f64 {
    observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum()
}
