//! Brute-force references for the damping density.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{function_m, slice_density, solve_trig_roots, DampingDensity, SliceParams};
use crate::quad::tanh_sinh_split;
use crate::room::{AxisDamping, ShoeboxRoom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SphereSampler {
    /// Deterministic equal-area Fibonacci lattice.
    Fibonacci,
    /// Uniform directions from a seeded generator.
    UniformRandom { seed: u64 },
}

/// Histogram of decay rates over the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Weight per bin; sums to `1/V`.
    pub masses: Vec<f64>,
    pub samples: usize,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bin mass divided by bin width, an estimate of `H`.
    pub fn density(&self) -> Vec<f64> {
        self.masses
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

fn fibonacci_direction(i: usize, n: usize) -> (f64, f64) {
    let golden = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    (golden * i as f64, z.clamp(-1.0, 1.0).acos())
}

/// Histogram of `M(theta, phi)` over `n_dirs` directions, each carrying
/// weight `(1/(4 pi V)) (4 pi / n_dirs)`, with `n_bins` bins over the density
/// support.
pub fn sphere_histogram(room: &ShoeboxRoom, n_bins: usize, sampler: SphereSampler, n_dirs: usize) -> Histogram {
    let k = room.axis_damping();
    let (lo, hi) = DampingDensity::from_room(room).support();
    let width = (hi - lo) / n_bins as f64;
    let edges = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
    let weight = 1.0 / (room.volume() * n_dirs as f64);

    let mut counts = vec![0u64; n_bins];
    let mut add = |m: f64| {
        let idx = (((m - lo) / width).floor().max(0.0) as usize).min(n_bins - 1);
        counts[idx] += 1;
    };
    match sampler {
        SphereSampler::Fibonacci => {
            for i in 0..n_dirs {
                let (theta, phi) = fibonacci_direction(i, n_dirs);
                add(function_m(theta, phi, &k));
            }
        }
        SphereSampler::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n_dirs {
                let z: f64 = rng.gen_range(-1.0..=1.0);
                let theta: f64 = rng.gen_range(0.0..2.0 * PI);
                add(function_m(theta, z.acos(), &k));
            }
        }
    }
    Histogram {
        edges,
        masses: counts.iter().map(|&c| c as f64 * weight).collect(),
        samples: n_dirs,
    }
}

/// Slice density from its defining integral over azimuth, with the Dirac
/// delta replaced by a unit-area Gaussian of width `epsilon`.
pub fn dirac_sequence_slice(room: &ShoeboxRoom, phi: f64, sigmas: &[f64], epsilon: f64) -> Vec<f64> {
    let k = room.axis_damping();
    let params = SliceParams::new(phi, &k);
    // resolve the Gaussian along theta even where dM/dtheta is largest
    let steps = ((FRAC_PI_2 * params.radius() / epsilon) * 40.0).max(20_000.0) as usize;
    let h = FRAC_PI_2 / steps as f64;
    let rates: Vec<f64> = (0..steps).map(|i| function_m((i as f64 + 0.5) * h, phi, &k)).collect();
    let norm = 1.0 / (epsilon * (2.0 * PI).sqrt());
    let scale = 8.0 / (4.0 * PI * room.volume());
    sigmas
        .iter()
        .map(|&s| {
            let sum: f64 = rates
                .iter()
                .map(|&m| {
                    let z = (s - m) / epsilon;
                    if z.abs() > 12.0 {
                        0.0
                    } else {
                        (-0.5 * z * z).exp()
                    }
                })
                .sum();
            scale * norm * sum * h
        })
        .collect()
}

/// Mean of `H` over each histogram bin, with quadrature split at the special
/// points inside the bin.
pub fn bin_averages(density: &DampingDensity, edges: &[f64]) -> Vec<f64> {
    let special = density.breakpoints();
    edges
        .windows(2)
        .map(|w| {
            let mut breaks = vec![w[0]];
            breaks.extend(special.iter().copied().filter(|s| *s > w[0] && *s < w[1]));
            breaks.push(w[1]);
            tanh_sinh_split(|s| density.eval(s), &breaks, 1e-10) / (w[1] - w[0])
        })
        .collect()
}

/// Whether any special point lies in the closed bin `[lo, hi]`.
pub fn bin_has_special_point(density: &DampingDensity, lo: f64, hi: f64) -> bool {
    density.special_points().iter().any(|s| *s >= lo && *s <= hi)
}

/// `H(sigma)` as the polar integral of [`slice_density`] weighted by
/// `sin(phi)`, split where a slice edge (`x = -r`, `x = alpha`, `x = beta`)
/// crosses `sigma`.
pub fn slice_quadrature(k: &AxisDamping, volume: f64, sigma: f64, rel_tol: f64) -> f64 {
    let mut breaks = vec![0.0, FRAC_PI_2];
    for a in [-k.kx.hypot(k.ky), k.kx, k.ky] {
        breaks.extend(solve_trig_roots(a, k.kz, sigma).into_iter().filter(|p| *p > 0.0 && *p < FRAC_PI_2));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    tanh_sinh_split(|phi| slice_density(sigma, phi, k, volume) * phi.sin(), &breaks, rel_tol)
}
