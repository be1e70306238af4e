//! Gaussian-process frontier surface: one objective regressed on the other two with an
//! anisotropic squared-exponential kernel plus white noise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three objectives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    S,
    E,
    #[default]
    I,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::S => 0,
            Axis::E => 1,
            Axis::I => 2,
        }
    }

    pub fn name(self) -> &'static str {
        ["S", "E", "I"][self.index()]
    }

    /// The two remaining axes, in (S, E, I) order.
    pub fn inputs(self) -> [usize; 2] {
        match self {
            Axis::S => [1, 2],
            Axis::E => [0, 2],
            Axis::I => [0, 1],
        }
    }
}

/// Search box for the kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelBounds {
    pub length_scale: (f64, f64),
    pub signal_var: (f64, f64),
    pub noise_var: (f64, f64),
}

impl Default for KernelBounds {
    fn default() -> Self {
        Self { length_scale: (0.03, 3.0), signal_var: (1e-4, 4.0), noise_var: (1e-8, 0.05) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontierConfig {
    pub dependent_axis: Axis,
    /// Lattice points per input axis.
    pub lattice: usize,
    pub bounds: KernelBounds,
    pub min_points: usize,
    /// Larger training sets are thinned by a fixed stride.
    pub max_training_points: usize,
    /// Grid values per length-scale axis in the coarse search.
    pub grid_size: usize,
    /// Best coarse-grid points refined by pattern search.
    pub refine_starts: usize,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            dependent_axis: Axis::I,
            lattice: 50,
            bounds: KernelBounds::default(),
            min_points: 5,
            max_training_points: 600,
            grid_size: 7,
            refine_starts: 3,
        }
    }
}

impl FrontierConfig {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        for (name, (lo, hi)) in
            [("length_scale", b.length_scale), ("signal_var", b.signal_var), ("noise_var", b.noise_var)]
        {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::Config(format!("kernel bound {name} = ({lo}, {hi}) must be positive and ordered")));
            }
        }
        if self.lattice < 2 || self.min_points < 1 || self.grid_size < 2 || self.max_training_points < self.min_points {
            return Err(Error::Config("frontier lattice/grid sizes too small".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub length_scales: [f64; 2],
    pub signal_var: f64,
    pub noise_var: f64,
}

impl Kernel {
    pub fn cov(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let r2 = ((a[0] - b[0]) / self.length_scales[0]).powi(2) + ((a[1] - b[1]) / self.length_scales[1]).powi(2);
        self.signal_var * (-0.5 * r2).exp()
    }

    fn from_log(p: [f64; 4]) -> Self {
        Self { length_scales: [p[0].exp(), p[1].exp()], signal_var: p[2].exp(), noise_var: p[3].exp() }
    }
}

/// Predictions on a regular grid over `[0, 1]^2`, first input axis varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub n: usize,
    pub inputs: Vec<[f64; 2]>,
    pub mean: Vec<f64>,
    /// Standard deviation of the latent surface (noise excluded).
    pub std: Vec<f64>,
}

/// Lattice predictions above the feasible bound of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overshoot {
    /// Largest `prediction - 1`, 0 when nothing exceeds.
    pub max: f64,
    /// Mean `prediction - 1` over the exceeding lattice points, 0 when none.
    pub mean: f64,
    pub fraction: f64,
    /// Lattice points per axis the statistics were computed on.
    pub resolution: usize,
}

impl Overshoot {
    pub fn from_predictions(pred: &[f64], resolution: usize) -> Self {
        let over: Vec<f64> = pred.iter().filter(|p| **p > 1.0).map(|p| p - 1.0).collect();
        let max = over.iter().copied().fold(0.0, f64::max);
        let mean = if over.is_empty() { 0.0 } else { over.iter().sum::<f64>() / over.len() as f64 };
        Self { max, mean, fraction: over.len() as f64 / pred.len().max(1) as f64, resolution }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierModel {
    pub dependent_axis: Axis,
    pub kernel: Kernel,
    /// Constant prior mean (the training-target mean).
    pub mean: f64,
    pub log_marginal_likelihood: f64,
    pub train_x: Vec<[f64; 2]>,
    pub train_y: Vec<f64>,
    alpha: DVector<f64>,
    chol: DMatrix<f64>,
    pub lattice: Lattice,
    pub overshoot: Overshoot,
}

const JITTER: f64 = 1e-10;

struct Factor {
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    lml: f64,
}

fn factor(x: &[[f64; 2]], y: &DVector<f64>, k: &Kernel) -> Option<Factor> {
    let n = x.len();
    let mut gram = DMatrix::from_fn(n, n, |i, j| k.cov(x[i], x[j]));
    for i in 0..n {
        gram[(i, i)] += k.noise_var + JITTER;
    }
    let chol = gram.cholesky()?;
    let alpha = chol.solve(y);
    let l = chol.unpack();
    let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
    let lml = -0.5 * y.dot(&alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    lml.is_finite().then_some(Factor { chol: l, alpha, lml })
}

fn geom(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi == lo {
        return vec![lo.ln()];
    }
    (0..n).map(|k| lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).collect()
}

/// Log-marginal-likelihood maximization: coarse grid in log space, then a compass search
/// from the best few grid points.
fn optimize(x: &[[f64; 2]], y: &DVector<f64>, cfg: &FrontierConfig) -> ([f64; 4], f64) {
    let b = &cfg.bounds;
    let ls = geom(b.length_scale.0, b.length_scale.1, cfg.grid_size);
    let sv = geom(b.signal_var.0, b.signal_var.1, 5);
    let nv = geom(b.noise_var.0, b.noise_var.1, 6);
    let lo = [b.length_scale.0.ln(), b.length_scale.0.ln(), b.signal_var.0.ln(), b.noise_var.0.ln()];
    let hi = [b.length_scale.1.ln(), b.length_scale.1.ln(), b.signal_var.1.ln(), b.noise_var.1.ln()];
    let eval = |p: [f64; 4]| factor(x, y, &Kernel::from_log(p)).map(|f| f.lml).unwrap_or(f64::NEG_INFINITY);

    let mut grid = Vec::with_capacity(ls.len() * ls.len() * sv.len() * nv.len());
    for &a in &ls {
        for &c in &ls {
            for &s in &sv {
                for &n in &nv {
                    grid.push([a, c, s, n]);
                }
            }
        }
    }
    let mut scored: Vec<([f64; 4], f64)> = grid.par_iter().map(|&p| (p, eval(p))).collect();
    // stable: ties keep grid order
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));

    let step0 = [
        (hi[0] - lo[0]) / (cfg.grid_size - 1).max(1) as f64,
        (hi[1] - lo[1]) / (cfg.grid_size - 1).max(1) as f64,
        (hi[2] - lo[2]) / 4.0,
        (hi[3] - lo[3]) / 5.0,
    ];
    let mut best = scored[0];
    for &(start, val) in scored.iter().take(cfg.refine_starts.max(1)) {
        let (mut p, mut f) = (start, val);
        let mut step = step0.map(|s| 0.5 * s.max(1e-3));
        for _ in 0..400 {
            if step.iter().all(|s| *s < 1e-3) {
                break;
            }
            let mut improved = false;
            for d in 0..4 {
                for dir in [1.0, -1.0] {
                    let mut q = p;
                    q[d] = (q[d] + dir * step[d]).clamp(lo[d], hi[d]);
                    if q[d] == p[d] {
                        continue;
                    }
                    let fq = eval(q);
                    if fq > f {
                        p = q;
                        f = fq;
                        improved = true;
                    }
                }
            }
            if !improved {
                step = step.map(|s| 0.5 * s);
            }
        }
        if f > best.1 {
            best = (p, f);
        }
    }
    best
}

impl FrontierModel {
    /// Posterior mean and latent standard deviation at `x`.
    pub fn predict(&self, x: [f64; 2]) -> (f64, f64) {
        let kx = DVector::from_iterator(self.train_x.len(), self.train_x.iter().map(|t| self.kernel.cov(*t, x)));
        let mean = self.mean + kx.dot(&self.alpha);
        let v = self.chol.solve_lower_triangular(&kx).unwrap_or_else(|| DVector::zeros(kx.len()));
        let var = (self.kernel.signal_var - v.norm_squared()).max(0.0);
        (mean, var.sqrt())
    }

    /// Lattice points lifted to 3D objective space using the predicted dependent value.
    pub fn surface_points(&self) -> Vec<[f64; 3]> {
        let [a, b] = self.dependent_axis.inputs();
        let d = self.dependent_axis.index();
        self.lattice
            .inputs
            .iter()
            .zip(&self.lattice.mean)
            .map(|(x, m)| {
                let mut p = [0.0; 3];
                p[a] = x[0];
                p[b] = x[1];
                p[d] = *m;
                p
            })
            .collect()
    }

    /// Side of one lattice cell.
    pub fn lattice_spacing(&self) -> f64 {
        1.0 / (self.lattice.n - 1) as f64
    }
}

/// Fit the frontier surface through `points` (typically the Pareto-optimal set).
pub fn fit_frontier(points: &[[f64; 3]], cfg: &FrontierConfig) -> Result<FrontierModel> {
    cfg.validate()?;
    if points.len() < cfg.min_points {
        return Err(Error::InsufficientData(format!(
            "frontier fit needs at least {} points, got {}",
            cfg.min_points,
            points.len()
        )));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Fit("frontier points must be finite".into()));
    }
    let stride = points.len().div_ceil(cfg.max_training_points);
    if stride > 1 {
        log::warn!("frontier: thinning {} training points by stride {stride}", points.len());
    }
    let [a, b] = cfg.dependent_axis.inputs();
    let d = cfg.dependent_axis.index();
    let train: Vec<&[f64; 3]> = points.iter().step_by(stride).collect();
    let train_x: Vec<[f64; 2]> = train.iter().map(|p| [p[a], p[b]]).collect();
    let train_y: Vec<f64> = train.iter().map(|p| p[d]).collect();
    for k in 0..2 {
        let lo = train_x.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
        let hi = train_x.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::Fit(format!("frontier input axis {} has no spread", ["S", "E", "I"][[a, b][k]])));
        }
    }
    let mean = train_y.iter().sum::<f64>() / train_y.len() as f64;
    let y = DVector::from_iterator(train_y.len(), train_y.iter().map(|v| v - mean));

    let (p, _) = optimize(&train_x, &y, cfg);
    let kernel = Kernel::from_log(p);
    let f = factor(&train_x, &y, &kernel).ok_or_else(|| Error::Fit("kernel matrix not positive definite".into()))?;
    let mut model = FrontierModel {
        dependent_axis: cfg.dependent_axis,
        kernel,
        mean,
        log_marginal_likelihood: f.lml,
        train_x,
        train_y,
        alpha: f.alpha,
        chol: f.chol,
        lattice: Lattice { n: cfg.lattice, inputs: Vec::new(), mean: Vec::new(), std: Vec::new() },
        overshoot: Overshoot { max: 0.0, mean: 0.0, fraction: 0.0, resolution: cfg.lattice },
    };
    let n = cfg.lattice;
    let inputs: Vec<[f64; 2]> =
        (0..n * n).map(|k| [(k / n) as f64 / (n - 1) as f64, (k % n) as f64 / (n - 1) as f64]).collect();
    let preds: Vec<(f64, f64)> = inputs.par_iter().map(|x| model.predict(*x)).collect();
    model.lattice.mean = preds.iter().map(|p| p.0).collect();
    model.lattice.std = preds.iter().map(|p| p.1).collect();
    model.lattice.inputs = inputs;
    if model.lattice.mean.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite frontier prediction".into()));
    }
    model.overshoot = Overshoot::from_predictions(&model.lattice.mean, n);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn surface(s: f64, e: f64) -> f64 {
        1.0 - 0.5 * s * s - 0.5 * e * e
    }

    fn sample(n: usize, noise: f64, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = Normal::new(0.0, noise).unwrap();
        (0..n)
            .map(|_| {
                let (s, e) = (rng.random::<f64>(), rng.random::<f64>());
                [s, e, surface(s, e) + eps.sample(&mut rng)]
            })
            .collect()
    }

    #[test]
    fn recovers_known_surface() {
        let pts = sample(60, 0.01, 1);
        let m = fit_frontier(&pts, &FrontierConfig::default()).unwrap();
        let mse =
            m.lattice.inputs.iter().zip(&m.lattice.mean).map(|(x, p)| (p - surface(x[0], x[1])).powi(2)).sum::<f64>()
                / m.lattice.mean.len() as f64;
        assert!(mse.sqrt() < 0.05, "rmse {}", mse.sqrt());
        let tol = 3.0 * m.kernel.noise_var.sqrt();
        for (x, y) in m.train_x.iter().zip(&m.train_y) {
            assert!((m.predict(*x).0 - y).abs() <= tol, "{x:?}");
        }
    }

    #[test]
    fn constant_targets_give_flat_surface() {
        let pts: Vec<[f64; 3]> = sample(20, 0.01, 2).into_iter().map(|p| [p[0], p[1], 0.7]).collect();
        let m = fit_frontier(&pts, &FrontierConfig::default()).unwrap();
        assert!(m.lattice.mean.iter().all(|v| (v - 0.7).abs() < 1e-6));
        assert_eq!(m.overshoot.fraction, 0.0);
    }

    #[test]
    fn refuses_small_sets_and_flat_inputs() {
        let pts = sample(4, 0.01, 3);
        assert!(matches!(fit_frontier(&pts, &FrontierConfig::default()), Err(Error::InsufficientData(_))));
        let flat: Vec<[f64; 3]> = sample(10, 0.01, 3).into_iter().map(|p| [0.5, p[1], p[2]]).collect();
        assert!(matches!(fit_frontier(&flat, &FrontierConfig::default()), Err(Error::Fit(_))));
    }

    #[test]
    fn variance_is_smallest_at_training_inputs() {
        let pts: Vec<[f64; 3]> = sample(30, 0.01, 4).into_iter().map(|p| [0.3 * p[0], 0.3 * p[1], p[2]]).collect();
        let m = fit_frontier(&pts, &FrontierConfig::default()).unwrap();
        let far = m.predict([1.0, 1.0]).1;
        for x in &m.train_x {
            assert!(m.predict(*x).1 <= far);
        }
    }

    #[test]
    fn overshoot_statistics() {
        let o = Overshoot::from_predictions(&[0.5, 1.02, 1.04, 0.9], 2);
        assert!((o.max - 0.04).abs() < 1e-12 && (o.mean - 0.03).abs() < 1e-12 && o.fraction == 0.5);
    }
}
