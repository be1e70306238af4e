use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `a` is at least as good as `b` everywhere and strictly better somewhere (maximization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    pub n: usize,
    /// Ascending row indices of the non-dominated points.
    pub indices: Vec<usize>,
    pub is_pareto: Vec<bool>,
    pub fraction: f64,
    pub mean_pareto: [f64; 3],
    /// `None` when every point is non-dominated.
    pub mean_dominated: Option<[f64; 3]>,
}

fn mean_of<'a>(pts: impl Iterator<Item = &'a [f64; 3]>) -> Option<[f64; 3]> {
    let mut acc = [0.0; 3];
    let mut n = 0usize;
    for p in pts {
        for k in 0..3 {
            acc[k] += p[k];
        }
        n += 1;
    }
    (n > 0).then(|| acc.map(|a| a / n as f64))
}

/// Exact non-dominated subset by a pairwise scan, parallel over rows. Equal points never
/// dominate each other, so duplicates of a non-dominated point are all kept.
pub fn pareto_set(points: &[[f64; 3]]) -> ParetoResult {
    let is_pareto: Vec<bool> = points.par_iter().map(|p| !points.iter().any(|q| dominates(q, p))).collect();
    let indices: Vec<usize> = (0..points.len()).filter(|&i| is_pareto[i]).collect();
    let n = points.len();
    ParetoResult {
        n,
        fraction: if n == 0 { 0.0 } else { indices.len() as f64 / n as f64 },
        mean_pareto: mean_of(indices.iter().map(|&i| &points[i])).unwrap_or([f64::NAN; 3]),
        mean_dominated: mean_of(points.iter().zip(&is_pareto).filter(|(_, p)| !**p).map(|(x, _)| x)),
        indices,
        is_pareto,
    }
}
