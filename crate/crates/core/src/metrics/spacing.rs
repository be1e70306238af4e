//! Conditional lognormal spacing model `ln S | X ~ Normal(mu(X), sigma(X)^2)`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureEncoder, InteractionFeatures};
use super::network::{Network, NetworkConfig, SIGMA_FLOOR};
use crate::error::{Error, Result};
use crate::stats::{normal_sf, percentile};

/// `E[ln chi^2_1]`, used to turn a regression on log squared residuals into a log-scale.
const LN_CHI2_1_MEAN: f64 = -1.270_362_845_461_478;

pub const MIN_TRAINING_PAIRS: usize = 500;

const CORRECTION_PRIOR: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    #[default]
    Network,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpacingFitConfig {
    pub regressor: RegressorKind,
    pub network: NetworkConfig,
    /// Fraction of pairs held out for calibration and error reporting.
    pub holdout: f64,
    /// Quantile bins of predicted `mu` for the scale correction.
    pub correction_bins: usize,
    pub seed: u64,
}

impl Default for SpacingFitConfig {
    fn default() -> Self {
        Self {
            regressor: RegressorKind::Network,
            network: NetworkConfig::default(),
            holdout: 0.2,
            correction_bins: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Regressor {
    /// Weights over `[1, features...]` for `mu` and for `ln sigma`.
    Linear {
        mu: Vec<f64>,
        log_sigma: Vec<f64>,
    },
    Network(Network),
}

/// Multiplicative scale correction per quantile bin of predicted `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCorrection {
    /// Inner bin edges, ascending; `edges.len() + 1 == multipliers.len()`.
    pub edges: Vec<f64>,
    pub multipliers: Vec<f64>,
}

impl ScaleCorrection {
    pub fn identity() -> Self {
        Self { edges: Vec::new(), multipliers: vec![1.0] }
    }

    pub fn factor(&self, mu: f64) -> f64 {
        let bin = self.edges.iter().take_while(|e| mu >= **e).count();
        self.multipliers[bin]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingModel {
    pub encoder: FeatureEncoder,
    pub regressor: Regressor,
    pub correction: ScaleCorrection,
    /// Mean absolute error of the median spacing on the held-out pairs, m.
    pub holdout_mae: f64,
    pub n_train: usize,
    pub n_holdout: usize,
}

impl SpacingModel {
    /// Location and (corrected) scale of `ln S` given `x`.
    pub fn params(&self, x: &InteractionFeatures) -> (f64, f64) {
        let (mu, sigma) = self.raw_params(&self.encoder.encode(x));
        (mu, sigma * self.correction.factor(mu))
    }

    fn raw_params(&self, z: &[f64]) -> (f64, f64) {
        match &self.regressor {
            Regressor::Linear { mu, log_sigma } => {
                let dot = |w: &[f64]| w[0] + w[1..].iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
                (dot(mu), dot(log_sigma).exp().max(SIGMA_FLOOR))
            }
            Regressor::Network(net) => net.predict(z),
        }
    }

    /// `P(S > s | x)` under the fitted lognormal.
    pub fn survival(&self, s: f64, x: &InteractionFeatures) -> f64 {
        let (mu, sigma) = self.params(x);
        if s <= 0.0 {
            return 1.0;
        }
        normal_sf((s.ln() - mu) / sigma)
    }
}

fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    let mut gram = design.transpose() * design;
    for i in 1..gram.nrows() {
        gram[(i, i)] += ridge;
    }
    let rhs = design.transpose() * y;
    gram.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::Fit("singular normal equations in spacing regression".into()))
}

fn fit_linear(z: &[Vec<f64>], log_s: &[f64]) -> Result<Regressor> {
    let n = z.len();
    let p = z[0].len() + 1;
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { z[i][j - 1] });
    let y = DVector::from_column_slice(log_s);
    let w_mu = least_squares(&design, &y, 1e-8)?;
    let resid = &y - &design * &w_mu;
    let log_r2 = DVector::from_iterator(n, resid.iter().map(|r| (r * r).max(1e-300).ln()));
    let mut w_ls = least_squares(&design, &log_r2, 1e-8)?;
    w_ls.iter_mut().for_each(|w| *w *= 0.5);
    w_ls[0] -= 0.5 * LN_CHI2_1_MEAN;
    Ok(Regressor::Linear { mu: w_mu.iter().copied().collect(), log_sigma: w_ls.iter().copied().collect() })
}

/// Fit the conditional spacing distribution on `(features, observed spacing)` pairs.
///
/// The regressor is trained on a seeded 80% split. Standardized residuals on the held-out
/// 20% set the per-bin scale multipliers and the reported mean absolute error.
pub fn fit_spacing_model(pairs: &[(InteractionFeatures, f64)], cfg: &SpacingFitConfig) -> Result<SpacingModel> {
    if pairs.len() < MIN_TRAINING_PAIRS {
        return Err(Error::InsufficientData(format!(
            "spacing model needs at least {MIN_TRAINING_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(x, s)| !(*s > 0.0) || !s.is_finite() || !x.is_finite()) {
        return Err(Error::Fit("spacings must be positive and features finite".into()));
    }
    let first = pairs[0].1;
    if pairs.iter().all(|(_, s)| (s - first).abs() <= 1e-12 * first) {
        return Err(Error::Fit("degenerate spacing data: all spacings equal".into()));
    }

    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_hold = ((pairs.len() as f64) * cfg.holdout.clamp(0.05, 0.5)).round() as usize;
    let (hold, train) = idx.split_at(n_hold);

    let encoder = FeatureEncoder::fit(train.iter().map(|&i| &pairs[i].0));
    let z_train: Vec<Vec<f64>> = train.iter().map(|&i| encoder.encode(&pairs[i].0)).collect();
    let y_train: Vec<f64> = train.iter().map(|&i| pairs[i].1.ln()).collect();
    let regressor = match cfg.regressor {
        RegressorKind::Linear => fit_linear(&z_train, &y_train)?,
        RegressorKind::Network => Regressor::Network(Network::train(&z_train, &y_train, &cfg.network, cfg.seed)),
    };
    let mut model = SpacingModel {
        encoder,
        regressor,
        correction: ScaleCorrection::identity(),
        holdout_mae: f64::NAN,
        n_train: train.len(),
        n_holdout: hold.len(),
    };

    let held: Vec<(f64, f64, f64)> = hold
        .iter()
        .map(|&i| {
            let (mu, sigma) = model.raw_params(&model.encoder.encode(&pairs[i].0));
            (mu, sigma, pairs[i].1)
        })
        .collect();
    model.correction = scale_correction(&held, cfg.correction_bins);
    model.holdout_mae = held.iter().map(|(mu, _, s)| (mu.exp() - s).abs()).sum::<f64>() / held.len() as f64;
    Ok(model)
}

fn scale_correction(held: &[(f64, f64, f64)], bins: usize) -> ScaleCorrection {
    let bins = bins.max(1);
    let mus: Vec<f64> = held.iter().map(|h| h.0).collect();
    let edges: Vec<f64> = (1..bins).filter_map(|b| percentile(&mus, 100.0 * b as f64 / bins as f64)).collect();
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for &(mu, sigma, s) in held {
        let bin = edges.iter().take_while(|e| mu >= **e).count();
        let z = (s.ln() - mu) / sigma;
        sums[bin] += z * z;
        counts[bin] += 1;
    }
    // each bin is shrunk toward the pooled mean square with CORRECTION_PRIOR pseudo-samples
    let pooled = sums.iter().sum::<f64>() / counts.iter().sum::<usize>().max(1) as f64;
    let multipliers = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c >= 10 {
                ((s + CORRECTION_PRIOR * pooled) / (c as f64 + CORRECTION_PRIOR)).sqrt()
            } else {
                pooled.sqrt()
            }
        })
        .collect();
    ScaleCorrection { edges, multipliers }
}
