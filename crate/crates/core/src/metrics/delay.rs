//! Follower response delay: raw lag from cross-correlated accelerations, then an
//! additive context model that fills gaps and overrides outlying raw estimates.

use serde::{Deserialize, Serialize};

use super::smoother::{fit_additive, AdditiveConfig, AdditiveModel};
use crate::error::{Error, Result};
use crate::stats::{mad, median, pearson};

pub const MAX_DELAY: f64 = 3.0;
pub const DEFAULT_WINDOW: f64 = 5.0;
pub const MIN_DELAY_OBSERVATIONS: usize = 200;
const OUTLIER_MADS: f64 = 3.0;

/// Lag (in samples) that best aligns the follower's most recent `window` samples with
/// the leader's history. The follower sample at index `k` is compared with the leader
/// sample at `k - lag`. Ties resolve to the smaller lag.
///
/// Returns `None` when the series are too short or either window is (near) constant.
pub fn estimate_delay_samples(leader: &[f64], follower: &[f64], window: usize, max_lag: usize) -> Option<usize> {
    let len = leader.len().min(follower.len());
    if window < 2 || len < window {
        return None;
    }
    let f = &follower[follower.len() - window..];
    let lead_end = leader.len();
    let mut best: Option<(usize, f64)> = None;
    for lag in 0..=max_lag {
        if lead_end < window + lag {
            break;
        }
        let l = &leader[lead_end - window - lag..lead_end - lag];
        let Some(r) = pearson(l, f) else { continue };
        if best.is_none_or(|(_, br)| r > br) {
            best = Some((lag, r));
        }
    }
    best.map(|(lag, _)| lag)
}

/// [`estimate_delay_samples`] in seconds, with the window and maximum lag given in seconds.
pub fn estimate_delay_xcorr(leader: &[f64], follower: &[f64], dt: f64, window: f64) -> Option<f64> {
    let w = (window / dt).round() as usize;
    let max_lag = (MAX_DELAY / dt + 1e-9).floor() as usize;
    estimate_delay_samples(leader, follower, w, max_lag).map(|k| k as f64 * dt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayObservation {
    pub v_leader: f64,
    pub v_follower: f64,
    pub distance: f64,
    pub a_leader: f64,
    pub lane: String,
    pub follower_type: String,
    pub tau_raw: Option<f64>,
}

impl DelayObservation {
    fn continuous(&self) -> [f64; 4] {
        [self.v_leader, self.v_follower, self.distance, self.a_leader]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub model: AdditiveModel,
    /// Unscaled median absolute deviation of raw-minus-predicted residuals.
    pub residual_mad: f64,
}

impl DelayModel {
    pub fn pseudo_r2(&self) -> f64 {
        self.model.pseudo_r2
    }

    pub fn predict(&self, obs: &DelayObservation) -> f64 {
        self.model.predict(&obs.continuous(), &[obs.lane.as_str(), obs.follower_type.as_str()]).clamp(0.0, MAX_DELAY)
    }

    /// Final delay for one observation: the model prediction when the raw estimate is
    /// missing or further than three MADs from it, else the raw estimate.
    pub fn resolve(&self, obs: &DelayObservation) -> (f64, bool) {
        let pred = self.predict(obs);
        match obs.tau_raw {
            Some(raw) if (raw - pred).abs() <= OUTLIER_MADS * self.residual_mad => (raw, false),
            _ => (pred, true),
        }
    }
}

pub fn refine_delay(obs: &[DelayObservation], cfg: &AdditiveConfig) -> Result<DelayModel> {
    let usable: Vec<&DelayObservation> = obs
        .iter()
        .filter(|o| o.tau_raw.is_some_and(f64::is_finite) && o.continuous().iter().all(|v| v.is_finite()))
        .collect();
    if usable.len() < MIN_DELAY_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "delay refinement needs {MIN_DELAY_OBSERVATIONS} raw estimates, got {}",
            usable.len()
        )));
    }
    let continuous: Vec<Vec<f64>> = (0..4).map(|j| usable.iter().map(|o| o.continuous()[j]).collect()).collect();
    let factors =
        vec![usable.iter().map(|o| o.lane.clone()).collect(), usable.iter().map(|o| o.follower_type.clone()).collect()];
    let y: Vec<f64> = usable.iter().map(|o| o.tau_raw.unwrap()).collect();
    let model = fit_additive(
        (&["v_leader", "v_follower", "distance", "a_leader"], &["lane", "follower_type"]),
        &continuous,
        &factors,
        &y,
        cfg,
    )?;
    let mut dm = DelayModel { model, residual_mad: 0.0 };
    let resid: Vec<f64> = usable.iter().map(|o| o.tau_raw.unwrap() - dm.predict(o)).collect();
    dm.residual_mad = mad(&resid).unwrap_or(0.0);
    // a perfectly fitting model would otherwise reject every raw value that differs
    // from it by rounding noise
    dm.residual_mad = dm.residual_mad.max(1e-9 * (1.0 + median(&y).unwrap_or(0.0).abs()));
    Ok(dm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn signal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = 0.0;
        (0..n)
            .map(|_| {
                v = 0.8 * v + rng.random_range(-1.0..1.0);
                v
            })
            .collect()
    }

    fn shifted(leader: &[f64], k: usize) -> Vec<f64> {
        (0..leader.len()).map(|i| if i >= k { leader[i - k] } else { 0.0 }).collect()
    }

    #[test]
    fn exact_shifts_recovered() {
        let leader = signal(200, 3);
        for k in [0usize, 3, 7, 15] {
            let tau = estimate_delay_xcorr(&leader, &shifted(&leader, k), 0.1, DEFAULT_WINDOW).unwrap();
            assert!((tau - k as f64 * 0.1).abs() < 1e-12, "shift {k}: {tau}");
        }
    }

    #[test]
    fn identical_is_zero_and_constant_is_none() {
        let leader = signal(120, 9);
        assert_eq!(estimate_delay_samples(&leader, &leader, 50, 30), Some(0));
        assert_eq!(estimate_delay_samples(&leader, &[1.5; 120], 50, 30), None);
        assert_eq!(estimate_delay_samples(&leader[..10], &leader[..10], 50, 30), None);
    }

    #[test]
    fn noisy_shift_within_one_sample() {
        let leader = signal(200, 11);
        let power = leader.iter().map(|v| v * v).sum::<f64>() / leader.len() as f64;
        let noise = Normal::new(0.0, (power / 10.0).sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [0usize, 3, 7, 15] {
            let f: Vec<f64> = shifted(&leader, k).into_iter().map(|v| v + noise.sample(&mut rng)).collect();
            let got = estimate_delay_samples(&leader, &f, 50, 30).unwrap();
            assert!(got.abs_diff(k) <= 1, "shift {k}: {got}");
        }
    }

    fn synthetic_observations(n: usize, seed: u64) -> Vec<DelayObservation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        (0..n)
            .map(|i| {
                let d = rng.random_range(5.0..40.0);
                let lane = if i % 2 == 0 { "A" } else { "B" };
                let off = if lane == "B" { 0.2 } else { 0.0 };
                DelayObservation {
                    v_leader: rng.random_range(5.0..15.0),
                    v_follower: rng.random_range(5.0..15.0),
                    distance: d,
                    a_leader: rng.random_range(-1.0..1.0),
                    lane: lane.into(),
                    follower_type: "car".into(),
                    tau_raw: Some(0.5 + 0.02 * d + off + noise.sample(&mut rng)),
                }
            })
            .collect()
    }

    #[test]
    fn refinement_recovers_generator() {
        let obs = synthetic_observations(600, 5);
        let m = refine_delay(&obs, &AdditiveConfig::default()).unwrap();
        for d in [6.0, 12.0, 20.0, 30.0, 39.0] {
            for (lane, off) in [("A", 0.0), ("B", 0.2)] {
                let probe = DelayObservation {
                    v_leader: 10.0,
                    v_follower: 10.0,
                    distance: d,
                    a_leader: 0.0,
                    lane: lane.into(),
                    follower_type: "car".into(),
                    tau_raw: None,
                };
                let truth = 0.5 + 0.02 * d + off;
                assert!((m.predict(&probe) - truth).abs() < 0.1, "d={d} lane={lane}");
            }
        }
        assert!(m.pseudo_r2() > 0.5);
    }

    #[test]
    fn constant_delay_and_small_samples() {
        let mut obs = synthetic_observations(250, 6);
        for o in &mut obs {
            o.tau_raw = Some(0.8);
        }
        let m = refine_delay(&obs, &AdditiveConfig::default()).unwrap();
        for o in obs.iter().take(20) {
            assert!((m.predict(o) - 0.8).abs() < 1e-6);
            assert_eq!(m.resolve(o), (0.8, false));
        }
        assert!(matches!(
            refine_delay(&synthetic_observations(50, 1), &AdditiveConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn outliers_and_gaps_replaced() {
        let obs = synthetic_observations(400, 8);
        let m = refine_delay(&obs, &AdditiveConfig::default()).unwrap();
        let mut o = obs[0].clone();
        o.tau_raw = Some(2.9);
        let (tau, replaced) = m.resolve(&o);
        assert!(replaced && (tau - m.predict(&o)).abs() < 1e-12);
        o.tau_raw = None;
        assert!(m.resolve(&o).1);
    }
}
