/// Default guard on the ego acceleration magnitude below which the gain is undefined, m/s².
pub const DEFAULT_A_MIN: f64 = 0.1;

/// `a_follower(t - tau) / a_ego(t)`, `None` when `|a_ego| < a_min` or an input is missing.
pub fn stability_gain(a_follower_shifted: f64, a_ego: f64, a_min: f64) -> Option<f64> {
    if !(a_ego.abs() >= a_min) || !a_follower_shifted.is_finite() {
        return None;
    }
    Some(a_follower_shifted / a_ego)
}

/// Linear interpolation of a sampled series at fractional index `pos`.
pub fn interpolate(series: &[f64], pos: f64) -> Option<f64> {
    if !(pos >= 0.0) || pos > (series.len() - 1) as f64 {
        return None;
    }
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    if frac == 0.0 {
        return Some(series[k]).filter(|v| v.is_finite());
    }
    let v = series[k] + frac * (series[k + 1] - series[k]);
    v.is_finite().then_some(v)
}

/// Follower acceleration evaluated `tau` seconds before sample `index`.
pub fn shifted_sample(series: &[f64], index: usize, tau: f64, dt: f64) -> Option<f64> {
    interpolate(series, index as f64 - tau / dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(stability_gain(0.5, 1.0, DEFAULT_A_MIN), Some(0.5));
        assert_eq!(stability_gain(-0.8, -0.8, DEFAULT_A_MIN), Some(1.0));
        assert_eq!(stability_gain(0.5, 0.01, DEFAULT_A_MIN), None);
        assert_eq!(stability_gain(f64::NAN, 1.0, DEFAULT_A_MIN), None);
    }

    #[test]
    fn interpolation_between_samples() {
        let s = [0.0, 1.0, 4.0];
        assert_eq!(interpolate(&s, 0.5), Some(0.5));
        assert_eq!(interpolate(&s, 1.25), Some(1.75));
        assert_eq!(interpolate(&s, 2.0), Some(4.0));
        assert_eq!(interpolate(&s, 2.1), None);
        assert_eq!(interpolate(&s, -0.1), None);
    }
}
