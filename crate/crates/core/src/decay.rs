//! Power responses, energy decay curves and reverberation times.

use serde::Serialize;

use crate::density::{DampingDensity, LN_60DB};
use crate::error::{Error, Result};
use crate::room::ShoeboxRoom;

pub const DEFAULT_SIGMA_SAMPLES: usize = 200;

/// Evaluation range of T20 as `(upper, lower)` dB.
pub const T20_RANGE: (f64, f64) = (-5.0, -25.0);
/// Evaluation range of T60.
pub const T60_RANGE: (f64, f64) = (-5.0, -65.0);

/// Uniform time axis `t0 + k dt`, `k < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::domain("time grid", "grid is empty"));
        }
        if !(dt.is_finite() && dt > 0.0) || !t0.is_finite() {
            return Err(Error::domain("time grid", format!("spacing {dt} s must be positive")));
        }
        Ok(Self { t0, dt, len })
    }

    /// `[0, duration)` sampled at `fs`.
    pub fn from_rate(fs: f64, duration: f64) -> Result<Self> {
        Self::new(0.0, 1.0 / fs, (duration * fs).ceil() as usize)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.time(k))
    }

    /// Time just past the last sample.
    pub fn end(&self) -> f64 {
        self.t0 + self.len as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    PowerResponse,
    Edc,
}

/// Sampled energy curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    values: Vec<f64>,
    dt: f64,
    t0: f64,
    kind: CurveKind,
}

impl DecayCurve {
    pub fn new(values: Vec<f64>, dt: f64, t0: f64, kind: CurveKind) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain("dt", format!("{dt} s must be positive")));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain("curve", format!("value {v} is not a finite nonnegative energy")));
        }
        if kind == CurveKind::Edc && values.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(Error::domain("curve", "energy decay curve must be non-increasing"));
        }
        Ok(Self { values, dt, t0, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Level in dB relative to the first sample.
    pub fn normalized_db(&self) -> Vec<f64> {
        let reference = self.values.first().copied().unwrap_or(0.0);
        self.values.iter().map(|&v| 10.0 * (v / reference).log10()).collect()
    }

    /// Level in dB relative to `reference`.
    pub fn db_re(&self, reference: f64) -> Vec<f64> {
        self.values.iter().map(|&v| 10.0 * (v / reference).log10()).collect()
    }
}

/// Discrete Laplace representation `p(rho) = sum_i w_i exp(sigma_i rho)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceSum {
    sigmas: Vec<f64>,
    weights: Vec<f64>,
}

impl LaplaceSum {
    pub fn new(sigmas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() || sigmas.len() != weights.len() {
            return Err(Error::domain("laplace sum", "needs equally many nonzero rates and weights"));
        }
        if sigmas.iter().any(|&s| !(s < 0.0)) {
            return Err(Error::domain("laplace sum", "decay rates must be negative"));
        }
        Ok(Self { sigmas, weights })
    }

    /// Samples `H` at the centres of `n_sigma` equal cells spanning the
    /// support, each weighted by its cell width.
    pub fn from_density(density: &DampingDensity, n_sigma: usize) -> Result<Self> {
        if n_sigma < 2 {
            return Err(Error::domain("n_sigma", format!("{n_sigma} rate samples, need at least 2")));
        }
        let (lo, hi) = density.support();
        let step = (hi - lo) / n_sigma as f64;
        let sigmas: Vec<f64> = (0..n_sigma).map(|i| lo + (i as f64 + 0.5) * step).collect();
        let weights = sigmas.iter().map(|&s| density.eval(s) * step).collect();
        Self::new(sigmas, weights)
    }

    /// A single exponential of initial energy `weight`.
    pub fn point_mass(sigma: f64, weight: f64) -> Result<Self> {
        Self::new(vec![sigma], vec![weight])
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `p(rho)` at propagation distance `rho` in metres.
    pub fn power_at(&self, rho: f64) -> f64 {
        self.sigmas
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * (s * rho).exp())
            .sum()
    }

    /// `integral_t^inf p(c tau) d tau`, exactly.
    pub fn edc_at(&self, t: f64, c: f64) -> f64 {
        self.sigmas
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * (s * c * t).exp() / (-s * c))
            .sum()
    }

    pub fn power_response(&self, grid: &TimeGrid, c: f64) -> DecayCurve {
        let values = grid.times().map(|t| self.power_at(c * t).max(0.0)).collect();
        DecayCurve::new(values, grid.dt, grid.t0, CurveKind::PowerResponse)
            .expect("sum of nonnegative exponentials")
    }

    /// Energy decay curve from the exact integral of every exponential.
    pub fn edc(&self, grid: &TimeGrid, c: f64) -> DecayCurve {
        let mut values: Vec<f64> = grid.times().map(|t| self.edc_at(t, c).max(0.0)).collect();
        for k in 1..values.len() {
            values[k] = values[k].min(values[k - 1]);
        }
        DecayCurve::new(values, grid.dt, grid.t0, CurveKind::Edc).expect("monotone by construction")
    }

    /// Energy decay curve of the response truncated at `t_end`: the energy
    /// arriving after `t_end` is removed, as it would be from a finite
    /// simulated response.
    pub fn truncated_edc(&self, grid: &TimeGrid, c: f64, t_end: f64) -> DecayCurve {
        let tail = self.edc_at(t_end, c);
        let mut values: Vec<f64> = grid
            .times()
            .map(|t| if t >= t_end { 0.0 } else { (self.edc_at(t, c) - tail).max(0.0) })
            .collect();
        for k in 1..values.len() {
            values[k] = values[k].min(values[k - 1]);
        }
        DecayCurve::new(values, grid.dt, grid.t0, CurveKind::Edc).expect("monotone by construction")
    }
}

/// Power response of the damping density on `grid`, from `n_sigma` rate
/// samples.
pub fn power_response(density: &DampingDensity, grid: &TimeGrid, c: f64, n_sigma: usize) -> Result<DecayCurve> {
    Ok(LaplaceSum::from_density(density, n_sigma)?.power_response(grid, c))
}

/// Schroeder backward integration: `EDC(t_k) = sum_{j >= k} p(t_j) dt + tail`,
/// where `tail` is the energy after the last sample.
pub fn backward_integrate(curve: &DecayCurve, tail: f64) -> DecayCurve {
    let mut values = vec![0.0; curve.len()];
    let mut acc = tail.max(0.0);
    for (out, &p) in values.iter_mut().zip(curve.values()).rev() {
        acc += p * curve.dt();
        *out = acc;
    }
    DecayCurve::new(values, curve.dt(), curve.t0(), CurveKind::Edc).expect("partial sums of nonnegative values")
}

/// Reverberation time from a line fit of the normalized decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RtEstimate {
    /// Seconds to decay by 60 dB along the fitted line.
    pub t: f64,
    pub fit_range_db: (f64, f64),
    /// RMS distance of the fitted samples from the line, dB.
    pub fit_residual: f64,
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the normalized EDC between `upper_db` and `lower_db` and extrapolates
/// to 60 dB.
pub fn rt_from_edc(edc: &DecayCurve, upper_db: f64, lower_db: f64) -> Result<RtEstimate> {
    if !(upper_db > lower_db) {
        return Err(Error::domain("fit range", format!("upper {upper_db} dB must exceed lower {lower_db} dB")));
    }
    let db = edc.normalized_db();
    let reached = db.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    if !(reached <= lower_db) {
        return Err(Error::InsufficientRange {
            reached_db: reached,
            required_db: lower_db,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = db
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= upper_db && v >= lower_db)
        .map(|(k, &v)| (edc.time(k), v))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientRange {
            reached_db: reached,
            required_db: lower_db,
        });
    }
    let (slope, intercept) = line_fit(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (slope * x + intercept - y).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(RtEstimate {
        t: -60.0 / slope,
        fit_range_db: (upper_db, lower_db),
        fit_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicFormula {
    Sabine,
    Eyring,
    Fitzroy,
}

impl ClassicFormula {
    pub const ALL: [ClassicFormula; 3] = [ClassicFormula::Sabine, ClassicFormula::Eyring, ClassicFormula::Fitzroy];

    pub fn name(&self) -> &'static str {
        match self {
            ClassicFormula::Sabine => "sabine",
            ClassicFormula::Eyring => "eyring",
            ClassicFormula::Fitzroy => "fitzroy",
        }
    }
}

/// Sabine's constant in s/m.
pub const SABINE_CONSTANT: f64 = 0.161;

/// Reverberation time from one of the diffuse-field formulas, with
/// absorption `1 - beta^2` per wall.
pub fn classic_rt(room: &ShoeboxRoom, formula: ClassicFormula) -> Result<f64> {
    let v = room.volume();
    let s = room.surface_area();
    let areas = room.wall_areas();
    let alpha = room.absorption();
    let absorption_area: f64 = areas.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    match formula {
        ClassicFormula::Sabine => Ok(SABINE_CONSTANT * v / absorption_area),
        ClassicFormula::Eyring => {
            let mean = absorption_area / s;
            if mean >= 1.0 {
                return Err(Error::domain("absorption", format!("mean absorption {mean} must be below 1")));
            }
            Ok(SABINE_CONSTANT * v / (-s * (1.0 - mean).ln()))
        }
        ClassicFormula::Fitzroy => {
            let [lx, ly, lz] = room.dims();
            let mut sum = 0.0;
            for (axis, area) in [(0, ly * lz), (1, lx * lz), (2, lx * ly)] {
                let mean = 0.5 * (alpha[2 * axis] + alpha[2 * axis + 1]);
                if mean >= 1.0 {
                    return Err(Error::domain("absorption", format!("mean absorption {mean} must be below 1")));
                }
                sum += -2.0 * area / (1.0 - mean).ln();
            }
            Ok(SABINE_CONSTANT * v / (s * s) * sum)
        }
    }
}

/// `T60 = -3 ln 10 / (sigma c)`.
pub fn sigma_to_t60(sigma: f64, c: f64) -> Result<f64> {
    if !(sigma < 0.0) {
        return Err(Error::domain("sigma", format!("{sigma} 1/m must be negative")));
    }
    Ok(-LN_60DB / (sigma * c))
}

/// Time for an energy envelope `exp(sigma c t)` to fall by `db` decibels.
pub fn energy_decay_time(sigma: f64, c: f64, db: f64) -> f64 {
    db / (10.0 * std::f64::consts::LOG10_E * -sigma * c)
}

pub fn t60_to_sigma(t60: f64, c: f64) -> Result<f64> {
    if !(t60 > 0.0) {
        return Err(Error::domain("T60", format!("{t60} s must be positive")));
    }
    Ok(-LN_60DB / (t60 * c))
}

/// Analysis grid from 0 to 1.5 times the Eyring estimate at 1 ms spacing.
pub fn default_analysis_grid(room: &ShoeboxRoom) -> TimeGrid {
    let eyring = classic_rt(room, ClassicFormula::Eyring).expect("valid room");
    TimeGrid::new(0.0, 1e-3, (1.5 * eyring / 1e-3).ceil().max(2.0) as usize).expect("nonempty grid")
}

/// T20 and T60 of the analytic energy decay of `room`.
pub fn analytic_rts(room: &ShoeboxRoom, n_sigma: usize) -> Result<(RtEstimate, RtEstimate)> {
    let density = DampingDensity::from_room(room);
    let laplace = LaplaceSum::from_density(&density, n_sigma)?;
    let (_, slowest) = density.support();
    let c = room.speed_of_sound();
    let t_end = energy_decay_time(slowest, c, 80.0);
    let dt = t_end / 4000.0;
    let grid = TimeGrid::new(0.0, dt, 4001)?;
    let edc = laplace.edc(&grid, c);
    Ok((
        rt_from_edc(&edc, T20_RANGE.0, T20_RANGE.1)?,
        rt_from_edc(&edc, T60_RANGE.0, T60_RANGE.1)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_edc(t60: f64, dt: f64, len: usize) -> DecayCurve {
        let values = (0..len).map(|k| 10f64.powf(-6.0 * k as f64 * dt / t60)).collect();
        DecayCurve::new(values, dt, 0.0, CurveKind::Edc).unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = TimeGrid::from_rate(1000.0, 0.0105).unwrap();
        assert_eq!(g.len, 11);
        assert!(TimeGrid::new(0.0, 1e-3, 0).is_err());
    }

    #[test]
    fn power_response_starts_at_inverse_volume() {
        let room = ShoeboxRoom::example();
        let d = DampingDensity::from_room(&room);
        let grid = TimeGrid::new(0.0, 1e-3, 10).unwrap();
        let p = power_response(&d, &grid, 343.0, 200).unwrap();
        assert!((p.values()[0] * 60.0 - 1.0).abs() < 2e-3, "{}", p.values()[0] * 60.0);
        assert!(power_response(&d, &grid, 343.0, 1).is_err());
    }

    #[test]
    fn point_mass_is_single_exponential() {
        let l = LaplaceSum::point_mass(-0.1, 0.5).unwrap();
        for rho in [0.0, 3.0, 40.0] {
            assert!((l.power_at(rho) - 0.5 * (-0.1 * rho).exp()).abs() < 1e-16);
        }
        assert!(LaplaceSum::point_mass(0.0, 1.0).is_err());
    }

    #[test]
    fn constant_power_integrates_linearly() {
        let p = DecayCurve::new(vec![2.0; 100], 0.01, 0.0, CurveKind::PowerResponse).unwrap();
        let edc = backward_integrate(&p, 0.0);
        for (k, v) in edc.values().iter().enumerate() {
            let t = k as f64 * 0.01;
            assert!((v - 2.0 * (1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_backward_integration_with_tail() {
        let (sigma, c) = (-0.05, 343.0);
        let laplace = LaplaceSum::point_mass(sigma, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 1e-5, 20000).unwrap();
        let p = laplace.power_response(&grid, c);
        let edc = backward_integrate(&p, laplace.edc_at(grid.end(), c));
        let exact = laplace.edc(&grid, c);
        for k in (0..grid.len).step_by(997) {
            let t = grid.time(k);
            let closed = (sigma * c * t).exp() / (-sigma * c);
            assert!((exact.values()[k] / closed - 1.0).abs() < 1e-12);
            // rectangle rule error is O(sigma c dt)
            assert!((edc.values()[k] / closed - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn truncated_edc_reaches_zero_at_end() {
        let laplace = LaplaceSum::point_mass(-0.05, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 1e-3, 100).unwrap();
        let edc = laplace.truncated_edc(&grid, 343.0, 0.05);
        assert_eq!(edc.values()[50], 0.0);
        assert!(edc.values()[49] > 0.0);
    }

    #[test]
    fn edc_rejects_increase() {
        assert!(DecayCurve::new(vec![1.0, 2.0], 1.0, 0.0, CurveKind::Edc).is_err());
        assert!(DecayCurve::new(vec![1.0, -2.0], 1.0, 0.0, CurveKind::PowerResponse).is_err());
    }

    #[test]
    fn exact_exponential_rt() {
        let edc = exp_edc(1.0, 1e-3, 3000);
        for (up, lo) in [T20_RANGE, T60_RANGE, (-10.0, -40.0)] {
            let rt = rt_from_edc(&edc, up, lo).unwrap();
            assert!((rt.t - 1.0).abs() < 1e-9, "{}", rt.t);
            assert!(rt.fit_residual < 1e-9);
        }
    }

    #[test]
    fn insufficient_range() {
        let edc = exp_edc(1.0, 1e-3, 300);
        assert!(matches!(
            rt_from_edc(&edc, -5.0, -25.0),
            Err(Error::InsufficientRange { .. })
        ));
        assert!(rt_from_edc(&edc, -25.0, -5.0).is_err());
    }

    #[test]
    fn double_slope() {
        // 0.5 s slope down to -30 dB, then a 2 s slope
        let dt = 1e-3;
        let knee = 0.25;
        let values = (0..4000)
            .map(|k| {
                let t = k as f64 * dt;
                let db = if t <= knee { -120.0 * t } else { -30.0 - 30.0 * (t - knee) };
                10f64.powf(db / 10.0)
            })
            .collect();
        let edc = DecayCurve::new(values, dt, 0.0, CurveKind::Edc).unwrap();
        let t20 = rt_from_edc(&edc, T20_RANGE.0, T20_RANGE.1).unwrap().t;
        let t60 = rt_from_edc(&edc, T60_RANGE.0, T60_RANGE.1).unwrap().t;
        assert!((t20 - 0.5).abs() < 1e-6);
        assert!(t60 > 0.5 && t60 < 2.0);
    }

    #[test]
    fn example_room_t20_below_t60() {
        let (t20, t60) = analytic_rts(&ShoeboxRoom::example(), 200).unwrap();
        assert!(t20.t < t60.t, "{} {}", t20.t, t60.t);
    }

    #[test]
    fn sabine_example_room_hand_evaluation() {
        let room = ShoeboxRoom::example();
        let alpha = room.absorption();
        let expected_alpha = [0.206, 0.206, 0.500, 0.370, 0.370, 0.684];
        for (a, e) in alpha.iter().zip(expected_alpha) {
            assert!((a - e).abs() < 2e-3);
        }
        let areas = [15.0, 15.0, 12.0, 12.0, 20.0, 20.0];
        let a: f64 = alpha.iter().zip(areas).map(|(a, s)| a * s).sum();
        let t = classic_rt(&room, ClassicFormula::Sabine).unwrap();
        assert!((t - 0.161 * 60.0 / a).abs() < 1e-15);
    }

    #[test]
    fn eyring_approaches_sabine_for_small_absorption() {
        let beta = (1.0f64 - 1e-4).sqrt();
        let room = ShoeboxRoom::new([4.0, 5.0, 3.0], [beta; 6], 343.0).unwrap();
        let ratio = classic_rt(&room, ClassicFormula::Eyring).unwrap() / classic_rt(&room, ClassicFormula::Sabine).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3);
        let fitz = classic_rt(&room, ClassicFormula::Fitzroy).unwrap();
        assert!((fitz / classic_rt(&room, ClassicFormula::Eyring).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sigma_t60_round_trip() {
        let c = 343.0;
        assert!((sigma_to_t60(-LN_60DB / c, c).unwrap() - 1.0).abs() < 1e-15);
        for t in [0.05, 0.8, 3.7, 40.0] {
            let back = sigma_to_t60(t60_to_sigma(t, c).unwrap(), c).unwrap();
            assert!((back / t - 1.0).abs() < 1e-12);
        }
        assert!(sigma_to_t60(0.0, c).is_err());
        assert!(t60_to_sigma(-1.0, c).is_err());
    }

    #[test]
    fn shortest_rate_matches_rt_density_endpoint() {
        let room = ShoeboxRoom::example();
        let d = DampingDensity::from_room(&room);
        let t = sigma_to_t60(d.support().0, 343.0).unwrap();
        assert!((t - LN_60DB / (d.axis_damping().norm() * 343.0)).abs() < 1e-15);
        assert!((t - 0.0676).abs() < 1e-3);
    }

    #[test]
    fn analytic_pipeline_is_deterministic() {
        let room = ShoeboxRoom::example();
        let a = analytic_rts(&room, 200).unwrap();
        let b = analytic_rts(&room, 200).unwrap();
        assert_eq!(a.0.t.to_bits(), b.0.t.to_bits());
        assert_eq!(a.1.t.to_bits(), b.1.t.to_bits());
    }
}
