use serde::{Deserialize, Serialize};

use crate::ingest::AgentType;
use crate::interaction::LaneContext;

/// Context of one ego–agent interaction used to condition the spacing distribution.
///
/// `s_ij` is the observed spacing being scored; it is carried along but is not an input of
/// the spacing regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionFeatures {
    pub s_ij: f64,
    pub rho_ij: f64,
    pub rel_speed: f64,
    pub ego_speed: f64,
    pub agent_type: AgentType,
    pub lane_context: LaneContext,
    pub dataset_context: String,
}

impl InteractionFeatures {
    pub fn is_finite(&self) -> bool {
        self.s_ij.is_finite() && self.rho_ij.is_finite() && self.rel_speed.is_finite() && self.ego_speed.is_finite()
    }
}

const NUMERIC: usize = 4;

/// Standardized numeric block followed by one-hot agent type, lane context and dataset
/// context. Unknown dataset contexts encode as all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub contexts: Vec<String>,
}

fn numeric(x: &InteractionFeatures) -> [f64; NUMERIC] {
    let r = x.rho_ij.to_radians();
    [r.cos(), r.sin(), x.rel_speed, x.ego_speed]
}

impl FeatureEncoder {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a InteractionFeatures>) -> Self {
        let mut sum = [0.0; NUMERIC];
        let mut sq = [0.0; NUMERIC];
        let mut n = 0usize;
        let mut contexts = std::collections::BTreeSet::new();
        for x in rows {
            let v = numeric(x);
            for k in 0..NUMERIC {
                sum[k] += v[k];
                sq[k] += v[k] * v[k];
            }
            n += 1;
            contexts.insert(x.dataset_context.clone());
        }
        let nf = n.max(1) as f64;
        let means: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let stds = (0..NUMERIC)
            .map(|k| {
                let var = (sq[k] / nf - means[k] * means[k]).max(0.0);
                if var.sqrt() > 1e-9 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, stds, contexts: contexts.into_iter().collect() }
    }

    pub fn dim(&self) -> usize {
        NUMERIC + AgentType::ALL.len() + LaneContext::ALL.len() + self.contexts.len()
    }

    pub fn encode(&self, x: &InteractionFeatures) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for (k, v) in numeric(x).iter().enumerate() {
            out.push((v - self.means[k]) / self.stds[k]);
        }
        out.extend(AgentType::ALL.iter().map(|t| if *t == x.agent_type { 1.0 } else { 0.0 }));
        out.extend(LaneContext::ALL.iter().map(|l| if *l == x.lane_context { 1.0 } else { 0.0 }));
        out.extend(self.contexts.iter().map(|c| if *c == x.dataset_context { 1.0 } else { 0.0 }));
        out
    }
}
