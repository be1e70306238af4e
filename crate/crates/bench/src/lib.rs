//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` points uniform in the unit cube.
pub fn uniform_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

/// `n` points on the concave surface `I = 1 - (S^2 + E^2) / 2` with small noise.
pub fn concave_surface(n: usize, noise: f64, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (s, e): (f64, f64) = (rng.random(), rng.random());
            let i = 1.0 - 0.5 * s * s - 0.5 * e * e + noise * rng.random_range(-1.0..1.0);
            [s, e, i]
        })
        .collect()
}
