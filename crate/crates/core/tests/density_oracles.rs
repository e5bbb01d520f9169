use std::f64::consts::FRAC_PI_3;

use shoebox::oracle::{
    bin_averages, bin_has_special_point, dirac_sequence_slice, slice_quadrature, sphere_histogram, SphereSampler,
};
use shoebox::quad::tanh_sinh_split;
use shoebox::{DampingDensity, ShoeboxRoom};

fn non_special_grid(d: &DampingDensity, n: usize) -> Vec<f64> {
    let (lo, hi) = d.support();
    let span = hi - lo;
    (0..n)
        .map(|i| lo + span * (i as f64 + 0.5) / n as f64)
        .filter(|s| d.special_points().iter().all(|p| (s - p).abs() > 1e-6 * span))
        .collect()
}

#[test]
fn slices_integrate_to_omni_density() {
    let d = DampingDensity::from_room(&ShoeboxRoom::example());
    let grid = non_special_grid(&d, 100);
    assert_eq!(grid.len(), 100);
    let mut worst: f64 = 0.0;
    for s in grid {
        let closed = d.eval(s);
        let quad = slice_quadrature(&d.axis_damping(), d.volume(), s, 1e-12);
        worst = worst.max((quad - closed).abs() / closed);
    }
    assert!(worst < 1e-6, "worst relative error {worst}");
}

#[test]
fn normalization_across_rooms() {
    let rooms = [
        ShoeboxRoom::example(),
        ShoeboxRoom::from_db([3.0, 3.0, 3.0], [-1.0; 6], 343.0).unwrap(),
        ShoeboxRoom::from_db([4.0, 4.0, 4.0], [-1.0; 6], 343.0).unwrap(),
        ShoeboxRoom::from_db([3.0, 5.0, 4.0], [-1.0; 6], 343.0).unwrap(),
        ShoeboxRoom::from_db([2.0, 2.0, 10.0], [-1.0; 6], 343.0).unwrap(),
    ];
    for room in rooms {
        let d = DampingDensity::from_room(&room);
        let total = tanh_sinh_split(|s| d.eval(s), &d.breakpoints(), 1e-11);
        assert!((total * room.volume() - 1.0).abs() < 1e-4, "{:?}: {}", room.dims(), total * room.volume());
    }
}

#[test]
fn axis_permutations_leave_density_unchanged() {
    let room = ShoeboxRoom::example();
    let reference = DampingDensity::from_room(&room);
    let grid = non_special_grid(&reference, 50);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in perms {
        let d = DampingDensity::from_room(&room.permuted(perm).unwrap());
        for &s in &grid {
            let (a, b) = (reference.eval(s), d.eval(s));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{perm:?} at {s}: {a} vs {b}");
        }
    }
}

#[test]
fn fibonacci_histogram_matches_bin_averages() {
    let room = ShoeboxRoom::example();
    let d = DampingDensity::from_room(&room);
    let hist = sphere_histogram(&room, 100, SphereSampler::Fibonacci, 1_000_000);
    let averages = bin_averages(&d, &hist.edges);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (h, a)) in hist.density().iter().zip(&averages).enumerate() {
        if bin_has_special_point(&d, hist.edges[i], hist.edges[i + 1]) {
            continue;
        }
        num += (h - a).abs();
        den += a.abs();
    }
    assert!(num / den < 0.02, "relative L1 {}", num / den);
}

#[test]
fn random_histogram_bin_at_minus_point_two() {
    let room = ShoeboxRoom::example();
    let d = DampingDensity::from_room(&room);
    let hist = sphere_histogram(&room, 100, SphereSampler::UniformRandom { seed: 11 }, 2_000_000);
    let i = hist.edges.windows(2).position(|w| w[0] <= -0.2 && -0.2 < w[1]).unwrap();
    let averages = bin_averages(&d, &hist.edges[i..i + 2]);
    let rel = (hist.density()[i] - averages[0]).abs() / averages[0];
    assert!(rel < 0.02, "{rel}");
}

#[test]
fn dirac_sequence_converges_to_slice_density() {
    let room = ShoeboxRoom::example();
    let k = room.axis_damping();
    let v = room.volume();
    let p = shoebox::density::SliceParams::new(FRAC_PI_3, &k);
    let (lo, hi) = p.support();
    // interior points away from the edge singularity and the steps
    let sigmas: Vec<f64> = [0.3, 0.45, 0.6]
        .iter()
        .map(|f| lo + f * (hi - lo))
        .filter(|s| (s - p.gamma - p.alpha).abs() > 0.01 && (s - p.gamma - p.beta).abs() > 0.01)
        .collect();
    assert!(!sigmas.is_empty());
    let coarse = dirac_sequence_slice(&room, FRAC_PI_3, &sigmas, 2e-3);
    let fine = dirac_sequence_slice(&room, FRAC_PI_3, &sigmas, 1e-3);
    for (i, &s) in sigmas.iter().enumerate() {
        let exact = shoebox::density::slice_density(s, FRAC_PI_3, &k, v);
        let e_coarse = (coarse[i] - exact).abs();
        let e_fine = (fine[i] - exact).abs();
        assert!(e_fine / exact < 1e-3, "{s}: {} vs {exact}", fine[i]);
        // the smoothing error is second order in epsilon
        assert!(e_fine < 0.5 * e_coarse || e_fine / exact < 1e-6, "{s}: {e_coarse} -> {e_fine}");
    }
}
