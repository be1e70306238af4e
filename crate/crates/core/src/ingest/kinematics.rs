use serde::{Deserialize, Serialize};

use super::{gaussian_smooth, AgentTrack, SmoothingConfig};
use crate::error::Result;

/// Which kinematics feed the metrics when the source table carries its own.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KinematicsSource {
    /// Differentiate the (smoothed) positions.
    #[default]
    Derive,
    /// Keep velocity/acceleration columns from the input; jerk is differenced from them.
    Input,
}

/// First derivative on a uniform grid: central differences inside, second-order one-sided
/// differences at the ends (first-order when only two samples exist).
///
/// Exact for polynomials of degree two or less.
pub fn difference(series: &[f64], dt: f64) -> Vec<f64> {
    let n = series.len();
    match n {
        0 => Vec::new(),
        1 => vec![f64::NAN],
        2 => {
            let d = (series[1] - series[0]) / dt;
            vec![d, d]
        }
        _ => {
            let mut out = Vec::with_capacity(n);
            out.push((-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt));
            for i in 1..n - 1 {
                out.push((series[i + 1] - series[i - 1]) / (2.0 * dt));
            }
            out.push((3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / (2.0 * dt));
            out
        }
    }
}

/// Contiguous index ranges of frames on an unbroken time grid.
pub(crate) fn contiguous_runs(track: &AgentTrack) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=track.frames.len() {
        if i == track.frames.len() || track.frames[i].step != track.frames[i - 1].step + 1 {
            if i > start {
                runs.push(start..i);
            }
            start = i;
        }
    }
    runs
}

/// Fill velocity, acceleration and jerk for one agent. Runs shorter than 2/3/4 frames leave
/// velocity/acceleration/jerk as `NaN` respectively.
pub fn derive_kinematics(
    track: &mut AgentTrack,
    smoothing: Option<&SmoothingConfig>,
    source: KinematicsSource,
    dt: f64,
) -> Result<()> {
    if let Some(cfg) = smoothing {
        cfg.validate()?;
    }
    let smooth_pos = smoothing.filter(|c| c.positions);
    let smooth_der = smoothing.filter(|c| c.derivatives);
    let maybe_smooth = |s: Vec<f64>, cfg: Option<&SmoothingConfig>| -> Result<Vec<f64>> {
        match cfg {
            Some(c) => gaussian_smooth(&s, c),
            None => Ok(s),
        }
    };

    for run in contiguous_runs(track) {
        let frames = &mut track.frames[run];
        let n = frames.len();

        let (vx, vy, ax, ay) = match source {
            KinematicsSource::Input if frames.iter().all(|f| f.vx.is_finite() && f.vy.is_finite()) => {
                let vx: Vec<f64> = frames.iter().map(|f| f.vx).collect();
                let vy: Vec<f64> = frames.iter().map(|f| f.vy).collect();
                let (ax, ay) = if frames.iter().all(|f| f.ax.is_finite() && f.ay.is_finite()) {
                    (frames.iter().map(|f| f.ax).collect(), frames.iter().map(|f| f.ay).collect())
                } else {
                    (difference(&vx, dt), difference(&vy, dt))
                };
                (vx, vy, ax, ay)
            }
            _ => {
                let x = maybe_smooth(frames.iter().map(|f| f.x).collect(), smooth_pos)?;
                let y = maybe_smooth(frames.iter().map(|f| f.y).collect(), smooth_pos)?;
                let vx = maybe_smooth(difference(&x, dt), smooth_der)?;
                let vy = maybe_smooth(difference(&y, dt), smooth_der)?;
                let ax = maybe_smooth(difference(&vx, dt), smooth_der)?;
                let ay = maybe_smooth(difference(&vy, dt), smooth_der)?;
                (vx, vy, ax, ay)
            }
        };
        let jx = difference(&ax, dt);
        let jy = difference(&ay, dt);

        for (i, f) in frames.iter_mut().enumerate() {
            let valid = |min_len: usize, v: f64| if n >= min_len { v } else { f64::NAN };
            f.vx = valid(2, vx[i]);
            f.vy = valid(2, vy[i]);
            f.ax = valid(3, ax[i]);
            f.ay = valid(3, ay[i]);
            f.jx = valid(4, jx[i]);
            f.jy = valid(4, jy[i]);
        }
    }
    Ok(())
}
