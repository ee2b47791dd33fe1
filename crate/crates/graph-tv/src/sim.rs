//! Synthetic test-signal generators.

use crate::delaunay::Point;
use crate::rng::SplitMix64;

/// Smooth two-dimensional test surface: a broad positive bump at the
/// centre and two sharp negative dips at (0.25, 0.25) and (0.75, 0.75).
pub fn bump_surface(x1: f64, x2: f64) -> f64 {
    let broad = (-100.0 * ((x1 - 0.5).powi(2) + (x2 - 0.5).powi(2))).exp();
    let dip1 = (-1000.0 * ((x1 - 0.25).powi(2) + (x2 - 0.25).powi(2))).exp();
    let dip2 = (-1000.0 * ((x1 - 0.75).powi(2) + (x2 - 0.75).powi(2))).exp();
    broad - dip1 - dip2
}

#[derive(Clone, Debug)]
pub struct ScatterSample {
    pub points: Vec<Point>,
    /// Noisy observations.
    pub values: Vec<f64>,
    /// Noise-free surface values at the same points.
    pub truth: Vec<f64>,
}

/// Uniform covariates on the unit square with Gaussian noise on the bump
/// surface; deterministic for a fixed seed.
pub fn generate_scatter(n: usize, noise_sd: f64, seed: u64) -> ScatterSample {
    let mut rng = SplitMix64::new(seed);
    let mut points = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for _ in 0..n {
        let p = Point::new(rng.next_f64(), rng.next_f64());
        let t = bump_surface(p.x, p.y);
        points.push(p);
        truth.push(t);
        values.push(t + noise_sd * rng.next_gaussian());
    }
    ScatterSample {
        points,
        values,
        truth,
    }
}

/// Piecewise-constant test image on the unit square: a bright rectangle
/// and a mid-gray disk on a dark background, plus Gaussian noise.
pub fn generate_blocks_image(side: usize, noise_sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let (x, y) = (
                (c as f64 + 0.5) / side as f64,
                (r as f64 + 0.5) / side as f64,
            );
            let mut v = 0.15;
            if (0.15..0.45).contains(&x) && (0.2..0.8).contains(&y) {
                v = 0.85;
            }
            if (x - 0.7).powi(2) + (y - 0.5).powi(2) < 0.04 {
                v = 0.5;
            }
            out.push(v + noise_sd * rng.next_gaussian());
        }
    }
    out
}

/// Flat signal with evenly spaced spikes, plus Gaussian noise.
pub fn generate_spike_signal(
    n: usize,
    num_spikes: usize,
    height: f64,
    width: usize,
    noise_sd: f64,
    seed: u64,
) -> (Vec<f64>, Vec<bool>) {
    let mut rng = SplitMix64::new(seed);
    let mut y = vec![0.0; n];
    let mut on_spike = vec![false; n];
    for s in 0..num_spikes {
        let center = (s + 1) * n / (num_spikes + 1);
        for i in center.saturating_sub(width / 2)..(center + width.div_ceil(2)).min(n) {
            y[i] = height;
            on_spike[i] = true;
        }
    }
    for v in y.iter_mut() {
        *v += noise_sd * rng.next_gaussian();
    }
    (y, on_spike)
}
