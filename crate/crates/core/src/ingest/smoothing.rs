use super::SmoothingConfig;
use crate::error::Result;

/// Unnormalized Gaussian weights for offsets `-radius..=radius`, index `radius` is the centre.
pub fn gaussian_kernel(sigma_samples: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    (-r..=r)
        .map(|k| {
            let z = k as f64 / sigma_samples;
            (-0.5 * z * z).exp()
        })
        .collect()
}

/// Truncated Gaussian filter. Near the ends the kernel is renormalized over the samples that
/// exist, so nothing is padded or extrapolated.
pub fn gaussian_smooth(series: &[f64], cfg: &SmoothingConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let kernel = gaussian_kernel(cfg.sigma / cfg.dt, cfg.kernel_radius);
    let r = cfg.kernel_radius as isize;
    let n = series.len() as isize;
    let out = (0..n)
        .map(|i| {
            let lo = (i - r).max(0);
            let hi = (i + r).min(n - 1);
            let (mut acc, mut norm) = (0.0, 0.0);
            for j in lo..=hi {
                let w = kernel[(j - i + r) as usize];
                acc += w * series[j as usize];
                norm += w;
            }
            acc / norm
        })
        .collect();
    Ok(out)
}
