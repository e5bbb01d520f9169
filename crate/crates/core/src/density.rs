//! Damping density of a shoebox room.
//!
//! Every direction on the sphere decays with a single rate `M(theta, phi)`.
//! Collecting these rates over a horizontal slice gives the slice density
//! [`slice_density`]; integrating the slices over the polar angle gives the
//! omnidirectional density evaluated in closed form by
//! [`DampingDensity::eval`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::room::{AxisDamping, ShoeboxRoom};

/// Tolerance for pulling rounded arcsin/arccos arguments back into `[-1, 1]`.
const CLAMP_TOL: f64 = 1e-12;

/// Decay rate (1/m) of the image sources seen in direction `(theta, phi)`.
pub fn function_m(theta: f64, phi: f64, k: &AxisDamping) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    k.kx * (ct * sp).abs() + k.ky * (st * sp).abs() + k.kz * cp.abs()
}

/// Slice quantities for a fixed polar angle in the first octant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi_offset: f64,
}

impl SliceParams {
    pub fn new(phi: f64, k: &AxisDamping) -> Self {
        let (sp, cp) = phi.sin_cos();
        Self {
            alpha: k.kx * sp,
            beta: k.ky * sp,
            gamma: k.kz * cp,
            phi_offset: (-k.ky / k.kx).atan(),
        }
    }

    /// `sqrt(alpha^2 + beta^2)`.
    pub fn radius(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// Rate along the slice at azimuth `theta`, in the phase form
    /// `-r cos(theta + offset) + gamma`.
    pub fn rate(&self, theta: f64) -> f64 {
        -self.radius() * (theta + self.phi_offset).cos() + self.gamma
    }

    /// Closed interval of `sigma` where the slice density is nonzero.
    pub fn support(&self) -> (f64, f64) {
        (self.gamma - self.radius(), self.gamma + self.alpha.max(self.beta))
    }
}

/// Density of decay rates over the horizontal slice at polar angle `phi`,
/// which must lie in `[0, pi/2]`.
///
/// Returns `+inf` exactly at the lower support edge where the density has an
/// integrable inverse-square-root singularity.
pub fn slice_density(sigma: f64, phi: f64, k: &AxisDamping, volume: f64) -> f64 {
    let p = SliceParams::new(phi, k);
    let r = p.radius();
    let x = sigma - p.gamma;
    let inside = |upper: f64| (-r..=upper).contains(&x) as u8 as f64;
    let mu = inside(p.beta) + inside(p.alpha);
    if mu == 0.0 {
        return 0.0;
    }
    let d = r * r - x * x;
    if d <= 0.0 {
        return f64::INFINITY;
    }
    8.0 / (4.0 * PI * volume) * mu / d.sqrt()
}

/// Roots of `a sin(x) + b cos(x) - c = 0`, in ascending order.
///
/// Uses `a sin x + b cos x = sgn(b) sqrt(a^2 + b^2) cos(x + atan(-a/b))`, so
/// the roots are `+-acos(c / (sgn(b) R)) - atan(-a/b)`. A tangent solution is
/// reported once; no real root gives an empty vector. `b = 0` falls back to
/// the pure sine form `asin(c/a)` and `pi - asin(c/a)`.
pub fn solve_trig_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let r = a.hypot(b);
    if r == 0.0 {
        return Vec::new();
    }
    if b == 0.0 {
        let s = c / a;
        if s.abs() > 1.0 + CLAMP_TOL {
            return Vec::new();
        }
        let x = s.clamp(-1.0, 1.0).asin();
        return if (x - FRAC_PI_2).abs() < f64::EPSILON || (x + FRAC_PI_2).abs() < f64::EPSILON {
            vec![x]
        } else {
            let mut roots = vec![x, PI - x];
            roots.sort_by(f64::total_cmp);
            roots
        };
    }
    let arg = c / (b.signum() * r);
    if arg.abs() > 1.0 + CLAMP_TOL {
        return Vec::new();
    }
    let spread = arg.clamp(-1.0, 1.0).acos();
    let shift = (-a / b).atan();
    if spread == 0.0 {
        vec![-shift]
    } else {
        vec![-spread - shift, spread - shift]
    }
}

/// Closed-form omnidirectional damping density of a room.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampingDensity {
    k: AxisDamping,
    volume: f64,
    support: (f64, f64),
    special: Vec<f64>,
}

impl DampingDensity {
    pub fn new(k: AxisDamping, volume: f64) -> Result<Self> {
        AxisDamping::new(k.kx, k.ky, k.kz)?;
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::domain("volume", format!("{volume} m^3 must be positive")));
        }
        let special = special_points(&k);
        let support = (-k.norm(), k.kx.max(k.ky).max(k.kz));
        Ok(Self {
            k,
            volume,
            support,
            special,
        })
    }

    pub fn from_room(room: &ShoeboxRoom) -> Self {
        Self::new(room.axis_damping(), room.volume()).expect("valid room gives a valid density")
    }

    pub fn axis_damping(&self) -> AxisDamping {
        self.k
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `(sigma_min, sigma_max)`, both negative.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Points of non-differentiability, ascending, duplicates removed.
    pub fn special_points(&self) -> &[f64] {
        &self.special
    }

    /// `H(sigma)`.
    ///
    /// The density is `8/(4 pi V) (2 H0 - H1 - H2)` where each `H_i` is the
    /// integral of `du / sqrt(A u^2 + B u + C)` (`u = cos phi`) over the polar
    /// range in which the rate condition of term `i` holds. That range lies
    /// between the two roots of `a_i sin phi + Kz cos phi = sigma`, clipped to
    /// the octant. The antiderivative is evaluated with its arcsin argument
    /// clamped, which also confines it to where the quadratic is positive.
    pub fn eval(&self, sigma: f64) -> f64 {
        let (lo, hi) = self.support;
        if !(sigma > lo && sigma < hi) {
            return 0.0;
        }
        let AxisDamping { kx, ky, kz } = self.k;
        let kxy2 = kx * kx + ky * ky;
        let a = -(kxy2 + kz * kz);
        let b = 2.0 * sigma * kz;
        let c = kxy2 - sigma * sigma;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return 0.0;
        }
        let delta = disc.sqrt();
        let sqrt_neg_a = (-a).sqrt();
        // `exact` marks limits that are zeros of the quadratic, where the
        // argument is +-1 and rounding would cost half the digits of asin
        let antiderivative = |u: f64, exact: bool| {
            let arg = (2.0 * a * u + b) / delta;
            let arg = if exact { arg.signum() } else { arg.clamp(-1.0, 1.0) };
            -arg.asin() / sqrt_neg_a
        };

        let term = |ai: f64, on_quadratic: bool| -> f64 {
            let roots = solve_trig_roots(ai, kz, sigma);
            if roots.len() < 2 {
                return 0.0;
            }
            let from = roots[0].max(0.0);
            let to = roots[1].min(FRAC_PI_2);
            if from >= to {
                return 0.0;
            }
            antiderivative(from.cos(), on_quadratic && roots[0] > 0.0)
                - antiderivative(to.cos(), on_quadratic && roots[1] < FRAC_PI_2)
        };

        let h0 = term(-kxy2.sqrt(), true);
        let h1 = term(kx, false);
        let h2 = term(ky, false);
        let value = 8.0 / (4.0 * PI * self.volume) * (2.0 * h0 - h1 - h2);
        value.max(0.0)
    }

    /// Evaluates `H` on a grid.
    pub fn eval_many(&self, sigmas: &[f64]) -> Vec<f64> {
        sigmas.iter().map(|&s| self.eval(s)).collect()
    }

    /// `sigma_min`, the special points and `sigma_max`, for splitting
    /// quadrature at kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.special.clone();
        pts.push(self.support.0);
        pts.push(self.support.1);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        pts
    }
}

/// The seven rates at which `H` is not differentiable, sorted ascending.
/// Values that coincide (equal `K` components) are collapsed.
pub fn special_points(k: &AxisDamping) -> Vec<f64> {
    let AxisDamping { kx, ky, kz } = *k;
    let mut pts = vec![
        kx,
        ky,
        kz,
        -kx.hypot(ky),
        -kx.hypot(kz),
        -ky.hypot(kz),
        -k.norm(),
    ];
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    pts
}

/// `3 ln 10`, the natural-log size of a 60 dB energy drop.
pub const LN_60DB: f64 = 6.907_755_278_982_137;

/// Density over reverberation time: `H(sigma(T)) |d sigma / dT|` with
/// `sigma(T) = -3 ln 10 / (T c)`. Non-positive grid values give 0.
pub fn rt_density(density: &DampingDensity, c: f64, t60: &[f64]) -> Vec<f64> {
    t60.iter()
        .map(|&t| {
            if t <= 0.0 {
                return 0.0;
            }
            let sigma = -LN_60DB / (t * c);
            density.eval(sigma) * LN_60DB / (t * t * c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh_split;
    use proptest::prelude::*;

    fn example() -> DampingDensity {
        DampingDensity::from_room(&ShoeboxRoom::example())
    }

    #[test]
    fn m_examples() {
        let k = ShoeboxRoom::example().axis_damping();
        assert_eq!(function_m(0.7, 0.0, &k), k.kz);
        assert!((function_m(0.0, FRAC_PI_2, &k) - k.kx).abs() < 1e-15);
        let diag = function_m(PI / 4.0, FRAC_PI_2, &k);
        assert!((diag - (k.kx + k.ky) / 2f64.sqrt()).abs() < 1e-15);
        assert!((diag + 0.1221).abs() < 5e-4);
    }

    #[test]
    fn slice_params_at_equator() {
        let k = ShoeboxRoom::example().axis_damping();
        let p = SliceParams::new(FRAC_PI_2, &k);
        assert!((p.alpha + 0.057).abs() < 1e-3);
        assert!((p.beta + 0.115).abs() < 1e-3);
        assert!(p.gamma.abs() < 1e-16);
        assert!((-p.radius() + 0.129).abs() < 1e-3);
        assert!(p.phi_offset <= 0.0);
    }

    #[test]
    fn slice_rate_matches_m() {
        let k = ShoeboxRoom::example().axis_damping();
        for phi in [0.1, 0.8, 1.4] {
            let p = SliceParams::new(phi, &k);
            for theta in [0.0, 0.3, 1.0, FRAC_PI_2] {
                assert!((p.rate(theta) - function_m(theta, phi, &k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn slice_density_step_at_beta() {
        let k = ShoeboxRoom::example().axis_damping();
        let p = SliceParams::new(FRAC_PI_2, &k);
        let below = slice_density(p.beta - 1e-6, FRAC_PI_2, &k, 60.0);
        let above = slice_density(p.beta + 1e-6, FRAC_PI_2, &k, 60.0);
        // two indicator terms below the step, one above
        assert!((below / above - 2.0).abs() < 1e-3);
        assert_eq!(slice_density(p.alpha + 1e-9, FRAC_PI_2, &k, 60.0), 0.0);
        assert_eq!(slice_density(-p.radius() - 1e-9, FRAC_PI_2, &k, 60.0), 0.0);
        let edge = SliceParams::new(0.0, &k);
        assert!(slice_density(edge.gamma, 0.0, &k, 60.0).is_infinite());
        assert!(slice_density(-p.radius() + 1e-12, FRAC_PI_2, &k, 60.0) > 1e3);
    }

    #[test]
    fn trig_roots_examples() {
        let r = solve_trig_roots(0.0, -1.0, 0.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + FRAC_PI_2).abs() < 1e-15 && (r[1] - FRAC_PI_2).abs() < 1e-15);

        let r = solve_trig_roots(-1.0, -1.0, -2f64.sqrt());
        assert_eq!(r.len(), 1);
        assert!((r[0] - PI / 4.0).abs() < 1e-7);

        assert!(solve_trig_roots(1.0, 1.0, 2.0).is_empty());

        let r = solve_trig_roots(2.0, 0.0, 1.0);
        assert!((r[0] - PI / 6.0).abs() < 1e-15 && (r[1] - 5.0 * PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn trig_roots_reproduce_polar_limits() {
        let k = ShoeboxRoom::example().axis_damping();
        let sigma = -0.2;
        for a in [-k.kx.hypot(k.ky), k.kx, k.ky] {
            let roots = solve_trig_roots(a, k.kz, sigma);
            let r = a.hypot(k.kz);
            let spread = (-sigma / r).acos();
            let centre = (a / k.kz).atan();
            assert!((roots[0] - (centre - spread)).abs() < 1e-14);
            assert!((roots[1] - (centre + spread)).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn trig_roots_are_roots(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -7.0f64..7.0) {
            for x in solve_trig_roots(a, b, c) {
                let scale = a.abs() + b.abs() + c.abs();
                prop_assert!((a * x.sin() + b * x.cos() - c).abs() < 1e-9 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn support_and_zero_outside() {
        let d = example();
        let (lo, hi) = d.support();
        assert!((lo + 0.297).abs() < 1.5e-3 && (hi + 0.057).abs() < 1.5e-3);
        assert_eq!(d.eval(-0.5), 0.0);
        assert_eq!(d.eval(-0.01), 0.0);
        assert!(d.eval(-0.2) > 0.0);
    }

    #[test]
    fn special_points_example() {
        let expected = [-0.297, -0.292, -0.274, -0.268, -0.128, -0.115, -0.057];
        let pts = example().special_points().to_vec();
        assert_eq!(pts.len(), 7);
        for (p, e) in pts.iter().zip(expected) {
            assert!((p - e).abs() < 1.5e-3, "{p} vs {e}");
        }
    }

    #[test]
    fn special_points_cube() {
        let k = AxisDamping::new(-0.2, -0.2, -0.2).unwrap();
        let pts = special_points(&k);
        assert_eq!(pts.len(), 3);
        assert!((pts[0] + 0.2 * 3f64.sqrt()).abs() < 1e-15);
        assert!((pts[1] + 0.2 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(pts[2], -0.2);
    }

    #[test]
    fn special_points_pythagorean() {
        let k = AxisDamping::new(-3.0, -4.0, -1e-9).unwrap();
        let pts = special_points(&k);
        assert!(pts.iter().any(|p| (p + 5.0).abs() < 1e-12));
        assert!(pts.iter().any(|p| (p + 3.0).abs() < 1e-9));
        assert!(pts.iter().any(|p| (p + 4.0).abs() < 1e-9));
    }

    #[test]
    fn normalization_example_room() {
        let d = example();
        let total = tanh_sinh_split(|s| d.eval(s), &d.breakpoints(), 1e-10);
        assert!((total * d.volume() - 1.0).abs() < 1e-6, "{}", total * d.volume());
    }

    #[test]
    fn cube_density_is_finite_between_coincident_points() {
        let room = ShoeboxRoom::from_db([3.0; 3], [-1.0; 6], 343.0).unwrap();
        let d = DampingDensity::from_room(&room);
        let (lo, hi) = d.support();
        for i in 1..200 {
            let s = lo + (hi - lo) * i as f64 / 200.0;
            assert!(d.eval(s).is_finite());
        }
    }

    #[test]
    fn rt_density_maps_support() {
        let d = example();
        let c = 343.0;
        let (lo, hi) = d.support();
        let t_short = -LN_60DB / (lo * c);
        let t_long = -LN_60DB / (hi * c);
        let v = rt_density(&d, c, &[t_short * 0.99, t_short * 1.01, t_long * 0.99, t_long * 1.01]);
        assert_eq!(v[0], 0.0);
        assert!(v[1] > 0.0 && v[2] > 0.0);
        assert_eq!(v[3], 0.0);

        let total = tanh_sinh_split(
            |t| rt_density(&d, c, &[t])[0],
            &d.breakpoints().iter().map(|s| -LN_60DB / (s * c)).collect::<Vec<_>>(),
            1e-10,
        );
        assert!((total * d.volume() - 1.0).abs() < 1e-6, "{}", total * d.volume());
    }

    #[test]
    fn rate_of_one_second() {
        let c = 343.0;
        let sigma = -LN_60DB / c;
        let d = DampingDensity::new(AxisDamping::new(-0.01, -0.02, -0.03).unwrap(), 1.0).unwrap();
        // T60 = 1 s lands on sigma * c = -6.9078
        assert!((sigma * c + 6.9078).abs() < 1e-4);
        assert!(rt_density(&d, c, &[1.0])[0] >= 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn density_nonnegative(sigma in -0.35f64..-0.0) {
            prop_assert!(example().eval(sigma) >= 0.0);
        }
    }
}
