use std::collections::BTreeMap;

use rayon::prelude::*;

use super::ObjectiveVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImputeReport {
    /// Number of (row, objective) cells filled.
    pub n_imputed: usize,
    pub warnings: Vec<String>,
}

/// Inverse-distance weighted mean over the `k` nearest `(distance, value)` pairs (already
/// sorted). Exact matches are copied (averaged when there are several).
fn weighted(neighbors: &[(f64, f64)]) -> f64 {
    let exact: Vec<f64> = neighbors.iter().filter(|(d, _)| *d == 0.0).map(|(_, v)| *v).collect();
    if !exact.is_empty() {
        return exact.iter().sum::<f64>() / exact.len() as f64;
    }
    let (num, den) = neighbors.iter().fold((0.0, 0.0), |(n, d), (dist, v)| (n + v / dist, d + 1.0 / dist));
    num / den
}

fn fill(target: &ObjectiveVector, complete: &[[f64; 3]], k: usize, means: &[f64; 3]) -> [Option<f64>; 3] {
    let avail: Vec<usize> = (0..3).filter(|&d| target.scores[d].is_some()).collect();
    if avail.is_empty() {
        return means.map(Some);
    }
    let mut dists: Vec<(f64, usize)> = complete
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let d2: f64 = avail.iter().map(|&d| (c[d] - target.scores[d].unwrap()).powi(2)).sum();
            (d2.sqrt(), j)
        })
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.truncate(k);
    let mut out = target.scores;
    for (d, slot) in out.iter_mut().enumerate() {
        if slot.is_none() {
            let nb: Vec<(f64, f64)> = dists.iter().map(|&(dist, j)| (dist, complete[j][d])).collect();
            *slot = Some(weighted(&nb));
        }
    }
    out
}

/// Fill missing objectives from the `k` nearest complete vectors of the same group, with
/// distance measured over the objectives the row does have. A row with no objectives at
/// all receives the group means.
///
/// Groups with fewer than `k` complete vectors use all of them (with a warning); a group
/// that needs imputation but has no complete vector is an error.
pub fn knn_impute(vectors: &mut [ObjectiveVector], k: usize) -> Result<ImputeReport> {
    let mut report = ImputeReport::default();
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, v) in vectors.iter().enumerate() {
        groups.entry(v.group.clone()).or_default().push(i);
    }
    for (group, idx) in groups {
        let complete: Vec<[f64; 3]> = idx.iter().filter_map(|&i| vectors[i].complete()).collect();
        let todo: Vec<usize> = idx.iter().copied().filter(|&i| !vectors[i].is_complete()).collect();
        if todo.is_empty() {
            continue;
        }
        if complete.is_empty() {
            return Err(Error::InsufficientData(format!(
                "group `{group}` has {} rows to impute but no complete objective vector",
                todo.len()
            )));
        }
        let k_eff = if complete.len() < k {
            report.warnings.push(format!(
                "group `{group}`: only {} complete vectors, imputing with k = {} instead of {k}",
                complete.len(),
                complete.len()
            ));
            complete.len()
        } else {
            k
        };
        let n = complete.len() as f64;
        let means = [0, 1, 2].map(|d| complete.iter().map(|c| c[d]).sum::<f64>() / n);
        let filled: Vec<[Option<f64>; 3]> =
            todo.par_iter().map(|&i| fill(&vectors[i], &complete, k_eff, &means)).collect();
        for (&i, values) in todo.iter().zip(filled) {
            let v = &mut vectors[i];
            for d in 0..3 {
                if v.scores[d].is_none() {
                    v.imputed[d] = true;
                    report.n_imputed += 1;
                }
            }
            v.scores = values;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec3(group: &str, s: [Option<f64>; 3]) -> ObjectiveVector {
        ObjectiveVector { ego_id: "a".into(), group: group.into(), t: 0.0, step: 0, scores: s, imputed: [false; 3] }
    }

    #[test]
    fn inverse_distance_example() {
        // neighbours at distance 1 (value 1.0) and 3 (value 0.0)
        let mut v = vec![
            vec3("g", [Some(0.5), Some(0.5), Some(1.0)]),
            vec3("g", [Some(0.5), Some(0.5 + 4.0), Some(0.0)]),
            vec3("g", [Some(0.5), Some(1.5), None]),
        ];
        knn_impute(&mut v, 2).unwrap();
        assert!((v[2].scores[2].unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(v[2].imputed, [false, false, true]);
    }

    #[test]
    fn constant_neighbours_and_exact_match() {
        let mut v: Vec<ObjectiveVector> =
            (0..6).map(|k| vec3("g", [Some(0.1 * k as f64), Some(0.2), Some(0.6)])).collect();
        v.push(vec3("g", [Some(0.33), None, None]));
        v.push(vec3("g", [Some(0.3), Some(0.2), None]));
        let r = knn_impute(&mut v, 5).unwrap();
        assert_eq!(r.n_imputed, 3);
        assert!((v[6].scores[2].unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(v[7].scores[2], Some(0.6));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn small_and_empty_groups() {
        let mut v = vec![vec3("g", [Some(0.2), Some(0.4), Some(0.6)]), vec3("g", [None, None, None])];
        let r = knn_impute(&mut v, 5).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(v[1].scores, [Some(0.2), Some(0.4), Some(0.6)]);
        let mut w = vec![vec3("g", [Some(0.2), None, None]), vec3("h", [Some(0.2), Some(0.1), Some(0.1)])];
        assert!(matches!(knn_impute(&mut w, 5), Err(Error::InsufficientData(_))));
    }

    proptest! {
        #[test]
        fn imputed_values_lie_within_neighbour_range(
            pts in proptest::collection::vec((0f64..1.0, 0f64..1.0, 0f64..1.0), 6..40),
            q in (0f64..1.0, 0f64..1.0),
        ) {
            let mut v: Vec<ObjectiveVector> = pts.iter().map(|p| vec3("g", [Some(p.0), Some(p.1), Some(p.2)])).collect();
            v.push(vec3("g", [Some(q.0), Some(q.1), None]));
            knn_impute(&mut v, 5).unwrap();
            let got = v.last().unwrap().scores[2].unwrap();
            let lo = pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(got >= lo - 1e-12 && got <= hi + 1e-12);
        }
    }
}
