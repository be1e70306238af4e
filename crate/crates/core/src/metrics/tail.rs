//! Peaks-over-threshold tail model: generalized Pareto fit to risk-score exceedances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::stats::{mean, percentile, variance};

pub const XI_MIN: f64 = -0.5;
pub const XI_MAX: f64 = 1.0;
pub const MIN_EXCEEDANCES: usize = 50;

const XI_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    /// Threshold percentile used to pick `u`.
    pub percentile: f64,
    pub u: f64,
    pub xi: f64,
    pub beta: f64,
    pub n_exceedances: usize,
}

/// Generalized Pareto log-likelihood of exceedances `y`, `-inf` outside the support.
pub fn gpd_log_likelihood(y: &[f64], xi: f64, beta: f64) -> f64 {
    if !(beta > 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = y.len() as f64;
    if xi.abs() < XI_ZERO {
        return -n * beta.ln() - y.iter().sum::<f64>() / beta;
    }
    let mut acc = 0.0;
    for &v in y {
        let z = 1.0 + xi * v / beta;
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += z.ln();
    }
    -n * beta.ln() - (1.0 + 1.0 / xi) * acc
}

/// Method-of-moments starting point `(xi, beta)`.
pub fn gpd_moments(y: &[f64]) -> (f64, f64) {
    let m = mean(y).unwrap_or(0.0);
    let v = variance(y).unwrap_or(0.0).max(1e-300);
    let ratio = m * m / v;
    (0.5 * (1.0 - ratio), 0.5 * m * (ratio + 1.0))
}

fn profile_beta(y: &[f64], xi: f64, y_max: f64, y_mean: f64) -> (f64, f64) {
    let scale = y_mean.max(1e-12);
    let lo = if xi < 0.0 { (-xi * y_max * (1.0 + 1e-9)).max(scale * 1e-6) } else { scale * 1e-6 };
    let hi = scale * 100.0 * (1.0 + xi.abs());
    let (log_b, ll) = golden_max(|lb| gpd_log_likelihood(y, xi, lb.exp()), lo.ln(), hi.ln(), 1e-10);
    (log_b.exp(), ll)
}

/// Maximum-likelihood `(xi, beta)` for exceedances over a threshold, `xi` in [-0.5, 1].
///
/// The profile likelihood over `xi` is scanned on a 0.05 grid (plus the moment estimate)
/// and refined by golden-section search around the best grid point.
pub fn fit_gpd_exceedances(y: &[f64]) -> Result<(f64, f64)> {
    if y.len() < 2 || y.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Fit("exceedances must be finite, non-negative and at least two".into()));
    }
    let y_max = y.iter().copied().fold(0.0, f64::max);
    let y_mean = mean(y).unwrap();
    if !(y_max > 0.0) {
        return Err(Error::Fit("all exceedances are zero".into()));
    }
    let profile = |xi: f64| profile_beta(y, xi, y_max, y_mean).1;

    let (mom_xi, _) = gpd_moments(y);
    let mut grid: Vec<f64> = (0..=30).map(|k| XI_MIN + 0.05 * k as f64).collect();
    grid.push(mom_xi.clamp(XI_MIN, XI_MAX));
    let best =
        grid.iter().map(|&xi| (xi, profile(xi))).fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let lo = (best.0 - 0.05).max(XI_MIN);
    let hi = (best.0 + 0.05).min(XI_MAX);
    let (xi, _) = golden_max(profile, lo, hi, 1e-7);
    let (beta, _) = profile_beta(y, xi, y_max, y_mean);
    Ok((xi, beta))
}

/// Fit the tail of `values` above their `percentile`-th percentile.
///
/// Fewer than `min_exceedances` values strictly above the threshold disables the tail
/// (an `InsufficientData` error the caller is expected to log and skip).
pub fn fit_gpd_tail(values: &[f64], percentile_p: f64, min_exceedances: usize) -> Result<TailModel> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let u = percentile(&finite, percentile_p)
        .ok_or_else(|| Error::InsufficientData("no finite risk scores for the tail fit".into()))?;
    let exceed: Vec<f64> = finite.iter().filter(|v| **v > u).map(|v| v - u).collect();
    if exceed.len() < min_exceedances {
        return Err(Error::InsufficientData(format!(
            "tail fit needs {min_exceedances} exceedances above u = {u}, found {}",
            exceed.len()
        )));
    }
    let (xi, beta) = fit_gpd_exceedances(&exceed)?;
    Ok(TailModel { percentile: percentile_p, u, xi, beta, n_exceedances: exceed.len() })
}

/// `P(M' > m)` for `m >= u`: `(1 + xi (m - u) / beta)^(-1/xi)`, exponential when `xi = 0`,
/// zero beyond the finite endpoint when `xi < 0`.
pub fn tail_exceedance_prob(m: f64, tail: &TailModel) -> Result<f64> {
    if !(m >= tail.u) {
        return Err(Error::Domain(format!("score {m} is below the tail threshold {}", tail.u)));
    }
    let excess = m - tail.u;
    let p = if tail.xi.abs() < XI_ZERO {
        (-excess / tail.beta).exp()
    } else {
        let z = 1.0 + tail.xi * excess / tail.beta;
        // compare against the endpoint itself so that u - beta/xi maps to exactly zero
        let beyond_endpoint = tail.xi < 0.0 && m >= tail.u - tail.beta / tail.xi;
        if z <= 0.0 || beyond_endpoint {
            0.0
        } else {
            z.powf(-1.0 / tail.xi)
        }
    };
    Ok(p.clamp(0.0, 1.0))
}
