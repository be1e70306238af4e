use serde::{Deserialize, Serialize};

use super::{Axis, FrontierModel, HeadroomMode, HeadroomReport, HullResult, Overshoot, ParetoResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSummary {
    pub dependent_axis: Axis,
    pub length_scales: [f64; 2],
    pub signal_var: f64,
    pub noise_var: f64,
    pub prior_mean: f64,
    pub log_marginal_likelihood: f64,
    pub n_train: usize,
    /// Root-mean-square residual of the posterior mean at the training inputs.
    pub train_rmse: f64,
    pub overshoot: Overshoot,
}

impl FrontierSummary {
    pub fn from_model(m: &FrontierModel) -> Self {
        let sse: f64 = m.train_x.iter().zip(&m.train_y).map(|(x, y)| (m.predict(*x).0 - y).powi(2)).sum();
        Self {
            dependent_axis: m.dependent_axis,
            length_scales: m.kernel.length_scales,
            signal_var: m.kernel.signal_var,
            noise_var: m.kernel.noise_var,
            prior_mean: m.mean,
            log_marginal_likelihood: m.log_marginal_likelihood,
            n_train: m.train_y.len(),
            train_rmse: (sse / m.train_y.len() as f64).sqrt(),
            overshoot: m.overshoot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadroomSummary {
    pub mode: HeadroomMode,
    pub medians: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSummary {
    pub degenerate: bool,
    pub n_facets: usize,
    pub n_upper: usize,
}

/// Table-style statistics of one frontier run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub n_pareto: usize,
    pub fraction: f64,
    pub mean_pareto: [f64; 3],
    pub mean_dominated: Option<[f64; 3]>,
    pub headroom: Option<HeadroomSummary>,
    pub frontier: Option<FrontierSummary>,
    pub hull: Option<HullSummary>,
    pub notices: Vec<String>,
}

pub fn pareto_report(
    result: &ParetoResult,
    model: Option<&FrontierModel>,
    headroom: Option<&HeadroomReport>,
    hull: Option<&HullResult>,
    notices: Vec<String>,
) -> RunSummary {
    RunSummary {
        n: result.n,
        n_pareto: result.indices.len(),
        fraction: result.fraction,
        mean_pareto: result.mean_pareto,
        mean_dominated: result.mean_dominated,
        headroom: headroom.map(|h| HeadroomSummary { mode: h.mode, medians: h.medians }),
        frontier: model.map(FrontierSummary::from_model),
        hull: hull.map(|h| HullSummary { degenerate: h.degenerate, n_facets: h.facets.len(), n_upper: h.upper.len() }),
        notices,
    }
}
