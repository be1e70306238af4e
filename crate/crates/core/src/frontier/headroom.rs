use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FrontierModel;
use crate::stats;

/// What an observation is projected onto.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadroomMode {
    /// Nearest point of the fitted lattice surface.
    #[default]
    Surface,
    /// Nearest raw Pareto-optimal observation.
    Set,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadroomReport {
    pub mode: HeadroomMode,
    /// Per observation, per objective (S, E, I); every entry is `>= 0`.
    pub values: Vec<[f64; 3]>,
    pub medians: [f64; 3],
}

fn nearest<'a>(x: &[f64; 3], targets: &'a [[f64; 3]]) -> &'a [f64; 3] {
    let d2 = |p: &[f64; 3]| (0..3).map(|k| (p[k] - x[k]).powi(2)).sum::<f64>();
    // first minimum wins, so ties resolve by target order
    let mut best = &targets[0];
    let mut best_d = d2(best);
    for p in &targets[1..] {
        let d = d2(p);
        if d < best_d {
            best = p;
            best_d = d;
        }
    }
    best
}

/// Per-objective shortfall of `x` relative to its Euclidean-nearest target point.
///
/// # Panics
/// If `targets` is empty.
pub fn headroom_to(x: &[f64; 3], targets: &[[f64; 3]]) -> [f64; 3] {
    let p = nearest(x, targets);
    [0, 1, 2].map(|k| (p[k] - x[k]).max(0.0))
}

/// Headroom against the fitted surface (unclipped lattice predictions).
pub fn headroom(x: &[f64; 3], model: &FrontierModel) -> [f64; 3] {
    headroom_to(x, &model.surface_points())
}

/// Headroom of every point; `targets` are surface points or the Pareto set depending on
/// `mode`. Returns `None` when there is nothing to project onto.
pub fn headroom_report(points: &[[f64; 3]], targets: &[[f64; 3]], mode: HeadroomMode) -> Option<HeadroomReport> {
    if targets.is_empty() || points.is_empty() {
        return None;
    }
    let values: Vec<[f64; 3]> = points.par_iter().map(|x| headroom_to(x, targets)).collect();
    let medians = [0, 1, 2].map(|k| stats::median(&values.iter().map(|v| v[k]).collect::<Vec<_>>()).unwrap_or(0.0));
    Some(HeadroomReport { mode, values, medians })
}
