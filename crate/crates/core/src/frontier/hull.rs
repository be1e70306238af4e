//! Incremental 3D convex hull and its upper envelope along the dependent axis.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Axis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Indices into the input points, counter-clockwise seen from outside.
    pub vertices: [usize; 3],
    /// Outward unit normal.
    pub normal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullResult {
    /// Fewer than four points, or all of them (nearly) coplanar.
    pub degenerate: bool,
    pub facets: Vec<Facet>,
    /// Indices into `facets` whose normal points up the dependent axis; empty when degenerate.
    pub upper: Vec<usize>,
}

type P = [f64; 3];

fn sub(a: &P, b: &P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &P, b: &P) -> P {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &P, b: &P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &P) -> f64 {
    dot(a, a).sqrt()
}

fn unit_normal(pts: &[P], f: [usize; 3]) -> P {
    let n = cross(&sub(&pts[f[1]], &pts[f[0]]), &sub(&pts[f[2]], &pts[f[0]]));
    let l = norm(&n);
    if l == 0.0 {
        return [0.0; 3];
    }
    n.map(|c| c / l)
}

fn signed_dist(pts: &[P], f: [usize; 3], n: &P, p: &P) -> f64 {
    dot(n, &sub(p, &pts[f[0]]))
}

/// Four affinely independent seed points, or `None` for a degenerate cloud.
fn seed(pts: &[P], eps: f64) -> Option<[usize; 4]> {
    let a = 0;
    let b = (0..pts.len()).max_by(|&i, &j| norm(&sub(&pts[i], &pts[a])).total_cmp(&norm(&sub(&pts[j], &pts[a]))))?;
    if norm(&sub(&pts[b], &pts[a])) <= eps {
        return None;
    }
    let ab = sub(&pts[b], &pts[a]);
    let area = |i: usize| norm(&cross(&ab, &sub(&pts[i], &pts[a]))) / norm(&ab);
    let c = (0..pts.len()).max_by(|&i, &j| area(i).total_cmp(&area(j)))?;
    if area(c) <= eps {
        return None;
    }
    let n = unit_normal(pts, [a, b, c]);
    let height = |i: usize| signed_dist(pts, [a, b, c], &n, &pts[i]).abs();
    let d = (0..pts.len()).max_by(|&i, &j| height(i).total_cmp(&height(j)))?;
    if height(d) <= eps {
        return None;
    }
    Some([a, b, c, d])
}

/// Convex hull of `points` by incremental insertion. The upper envelope is the facets whose
/// outward normal has a positive component along `axis`.
pub fn convex_hull_frontier(points: &[[f64; 3]], axis: Axis) -> HullResult {
    let degenerate = HullResult { degenerate: true, facets: Vec::new(), upper: Vec::new() };
    if points.len() < 4 {
        return degenerate;
    }
    let lo = [0, 1, 2].map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1, 2].map(|k| points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max));
    let eps = 1e-10 * norm(&sub(&hi, &lo)).max(f64::MIN_POSITIVE);
    let Some([a, b, c, d]) = seed(points, eps) else {
        return degenerate;
    };

    let centroid = [0, 1, 2].map(|k| (points[a][k] + points[b][k] + points[c][k] + points[d][k]) / 4.0);
    let orient = |f: [usize; 3]| -> [usize; 3] {
        let n = unit_normal(points, f);
        if signed_dist(points, f, &n, &centroid) > 0.0 {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };
    let mut faces: Vec<([usize; 3], P)> = [[a, b, c], [a, b, d], [a, c, d], [b, c, d]]
        .into_iter()
        .map(|f| {
            let f = orient(f);
            (f, unit_normal(points, f))
        })
        .collect();

    for (i, p) in points.iter().enumerate() {
        if [a, b, c, d].contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|(f, n)| signed_dist(points, *f, n, p) > eps).collect();
        if !visible.iter().any(|v| *v) {
            continue;
        }
        let edges: HashSet<(usize, usize)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| **v)
            .flat_map(|((f, _), _)| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .collect();
        // horizon edges, in face order so the result is deterministic
        let horizon: Vec<(usize, usize)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| **v)
            .flat_map(|((f, _), _)| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .filter(|(u, w)| !edges.contains(&(*w, *u)))
            .collect();
        let mut keep = visible.iter();
        faces.retain(|_| !*keep.next().unwrap());
        for (u, w) in horizon {
            let f = [u, w, i];
            faces.push((f, unit_normal(points, f)));
        }
    }

    let facets: Vec<Facet> = faces.into_iter().map(|(vertices, normal)| Facet { vertices, normal }).collect();
    let k = axis.index();
    let upper = (0..facets.len()).filter(|&j| facets[j].normal[k] > 1e-12).collect();
    HullResult { degenerate: false, facets, upper }
}
