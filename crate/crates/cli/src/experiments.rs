//! Studies shared by the subcommands and the acceptance suite.

use std::f64::consts::PI;

use serde::Serialize;
use shoebox::decay::{
    analytic_rts, classic_rt, line_fit, rt_from_edc, sigma_to_t60, t60_to_sigma, ClassicFormula, CurveKind,
    T20_RANGE,
};
use shoebox::density::{rt_density, special_points};
use shoebox::ism::{
    averaged_energy, edc_of_energies, ism_energy, ism_power_response, random_trials, IsmConfig,
    DEFAULT_POWER_WINDOW,
};
use shoebox::oracle::{
    bin_averages, bin_has_special_point, slice_quadrature, sphere_histogram, Histogram, SphereSampler,
};
use shoebox::quad::tanh_sinh_split;
use shoebox::room::{BandCoefficients, BandSpec, RoomConfig};
use shoebox::synthesis::{
    banded_hybrid_rir, resolve_bands, stochastic_rir, substream_seed, OctaveFilter, RtMapping,
    SynthesisConfig,
};
use shoebox::{BandedRoom, DampingDensity, DecayCurve, ImpulseResponse, LaplaceSum, Result, ShoeboxRoom, TimeGrid};

use crate::row;
use crate::table::Table;

/// Reflection coefficients (dB) at the first step of the coefficient sweep.
pub const SWEEP_BASE_DB: [f64; 6] = [-0.161, -0.180, -0.025, -0.181, -0.125, -0.018];
/// Multipliers applied to [`SWEEP_BASE_DB`], one per sweep step.
pub const SWEEP_FACTORS: [u32; 11] = [1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21];
pub const SWEEP_DIMS: [f64; 3] = [4.0, 5.0, 3.0];
/// Random source/receiver draws averaged per sweep step.
pub const SWEEP_TRIALS: usize = 3;
/// Each sweep step simulates until the analytic EDC has fallen this far.
pub const SWEEP_DROP_DB: f64 = 35.0;
/// Longest simulated span of any sweep step, seconds.
pub const SWEEP_MAX_SPAN: f64 = 10.0;

/// Start of the late part in EDC comparisons, seconds.
pub const TRANSITION_TIME: f64 = 0.05;
/// EDC comparisons stop where the analytic curve falls below this level.
pub const COMPARISON_FLOOR_DB: f64 = -60.0;

pub const LOSSLESS_DB: f64 = -0.0001;
pub const LOSSLESS_SPAN: f64 = 1.5;

pub const OCTAVE_CENTERS: [f64; 6] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0];
pub const OCTAVE_TARGETS: [f64; 6] = [2.0, 1.6, 1.4, 1.2, 1.0, 0.8];

/// Rooms with -1 dB walls compared for their decay shapes.
pub const SHAPE_ROOMS: [[f64; 3]; 4] = [[3.0, 3.0, 3.0], [4.0, 4.0, 4.0], [3.0, 5.0, 4.0], [2.0, 2.0, 10.0]];
pub const SHAPE_BETA_DB: f64 = -1.0;

/// Published special points of the example room, rounded to 3 decimals.
pub const EXAMPLE_SPECIAL_POINTS: [f64; 7] = [-0.297, -0.292, -0.274, -0.268, -0.128, -0.115, -0.057];

pub fn laplace(room: &ShoeboxRoom, n_sigma: usize) -> Result<LaplaceSum> {
    LaplaceSum::from_density(&DampingDensity::from_room(room), n_sigma)
}

fn db(x: f64) -> f64 {
    10.0 * x.max(1e-300).log10()
}

/// Time for the analytic EDC to fall `drop_db` below its start, capped at
/// `cap` seconds.
pub fn decay_span(lap: &LaplaceSum, c: f64, drop_db: f64, cap: f64) -> f64 {
    let target = lap.edc_at(0.0, c) * 10f64.powf(-drop_db / 10.0);
    if lap.edc_at(cap, c) > target {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if lap.edc_at(mid, c) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Energy-averaged image-source EDC next to the analytic EDC over the same
/// span.
#[derive(Debug, Clone)]
pub struct EdcComparison {
    pub ism: DecayCurve,
    pub analytic: DecayCurve,
    pub transition: f64,
    /// Largest gap between the curves, each in dB re its value at the
    /// transition, from the transition down to [`COMPARISON_FLOOR_DB`].
    pub max_deviation_db: f64,
    pub trials: Vec<IsmConfig>,
}

impl EdcComparison {
    fn index(&self, t: f64) -> usize {
        ((t / self.ism.dt()).round() as usize).min(self.ism.len() - 1)
    }

    /// `(t, ism_db, analytic_db)` rows in dB re the transition, every `hop`
    /// samples.
    pub fn table(&self, hop: usize) -> Table {
        let k0 = self.index(self.transition);
        let (i0, a0) = (self.ism.values()[k0], self.analytic.values()[k0]);
        let mut t = Table::new(&["t_s", "ism_db", "analytic_db"]);
        for k in (0..self.ism.len()).step_by(hop.max(1)) {
            t.push(row![self.ism.time(k), db(self.ism.values()[k] / i0), db(self.analytic.values()[k] / a0)]);
        }
        t
    }
}

pub fn compare_edcs(
    room: &ShoeboxRoom,
    fs: f64,
    duration: f64,
    seed: u64,
    trials: usize,
    n_sigma: usize,
) -> Result<EdcComparison> {
    let c = room.speed_of_sound();
    let trials = random_trials(room, seed, trials, fs, duration);
    let energy = averaged_energy(room, &trials)?;
    let ism = edc_of_energies(&energy, fs);
    let grid = TimeGrid::new(0.0, 1.0 / fs, energy.len())?;
    let analytic = laplace(room, n_sigma)?.truncated_edc(&grid, c, energy.len() as f64 / fs);

    let k0 = ((TRANSITION_TIME * fs).round() as usize).min(energy.len() - 1);
    let (i0, a0) = (ism.values()[k0], analytic.values()[k0]);
    let mut worst: f64 = 0.0;
    for k in k0..energy.len() {
        let a = db(analytic.values()[k] / a0);
        if a < COMPARISON_FLOOR_DB {
            break;
        }
        worst = worst.max((db(ism.values()[k] / i0) - a).abs());
    }
    Ok(EdcComparison {
        ism,
        analytic,
        transition: TRANSITION_TIME,
        max_deviation_db: worst,
        trials,
    })
}

/// One step of the reflection-coefficient sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub factor: u32,
    pub mean_beta_db: f64,
    pub span: f64,
    pub t20_ism: f64,
    pub t20_analytic: f64,
    /// `(analytic - ism) / ism`.
    pub rel_error: f64,
}

/// T20 from the energy-averaged image-source EDC against T20 from the
/// analytic EDC truncated at the same span, over the eleven sweep steps.
pub fn coefficient_sweep(c: f64, fs: f64, seed: u64, n_sigma: usize) -> Result<Vec<SweepRow>> {
    SWEEP_FACTORS
        .iter()
        .enumerate()
        .map(|(i, &factor)| {
            let beta_db = SWEEP_BASE_DB.map(|b| b * factor as f64);
            let room = ShoeboxRoom::from_db(SWEEP_DIMS, beta_db, c)?;
            let lap = laplace(&room, n_sigma)?;
            let span = decay_span(&lap, c, SWEEP_DROP_DB, SWEEP_MAX_SPAN);
            let trials = random_trials(&room, substream_seed(seed, i as u64), SWEEP_TRIALS, fs, span);
            let energy = averaged_energy(&room, &trials)?;
            let ism = edc_of_energies(&energy, fs);
            let grid = TimeGrid::new(0.0, 1.0 / fs, energy.len())?;
            let analytic = lap.truncated_edc(&grid, c, energy.len() as f64 / fs);
            let t20_ism = rt_from_edc(&ism, T20_RANGE.0, T20_RANGE.1)?.t;
            let t20_analytic = rt_from_edc(&analytic, T20_RANGE.0, T20_RANGE.1)?.t;
            Ok(SweepRow {
                factor,
                mean_beta_db: beta_db.iter().sum::<f64>() / 6.0,
                span,
                t20_ism,
                t20_analytic,
                rel_error: (t20_analytic - t20_ism) / t20_ism,
            })
        })
        .collect()
}

/// Median and maximum absolute relative error of a sweep.
pub fn sweep_errors(rows: &[SweepRow]) -> (f64, f64) {
    let mut errs: Vec<f64> = rows.iter().map(|r| r.rel_error.abs()).collect();
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    let median = if n % 2 == 1 {
        errs[n / 2]
    } else {
        0.5 * (errs[n / 2 - 1] + errs[n / 2])
    };
    (median, errs[n - 1])
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["factor", "mean_beta_db", "span_s", "t20_ism_s", "t20_analytic_s", "rel_error"]);
    for r in rows {
        t.push(row![r.factor, r.mean_beta_db, r.span, r.t20_ism, r.t20_analytic, r.rel_error]);
    }
    t
}

/// Largest distance, in dB, between the analytic EDC and its least-squares
/// line, fitted from the start down to `floor_db`.
pub fn single_slope_deviation(room: &ShoeboxRoom, n_sigma: usize, floor_db: f64) -> Result<f64> {
    let c = room.speed_of_sound();
    let lap = laplace(room, n_sigma)?;
    let span = decay_span(&lap, c, -floor_db + 2.0, 120.0);
    let n = 4000;
    let grid = TimeGrid::new(0.0, span / n as f64, n + 1)?;
    let levels = lap.edc(&grid, c).normalized_db();
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .enumerate()
        .take_while(|(_, v)| **v >= floor_db)
        .map(|(k, v)| (grid.time(k), *v))
        .unzip();
    let (slope, intercept) = line_fit(&xs, &ys);
    Ok(xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (slope * x + intercept - y).abs())
        .fold(0.0, f64::max))
}

/// Everything shown for the near-lossless room.
#[derive(Debug, Clone)]
pub struct LosslessStudy {
    pub table: Table,
    /// Spread (max - min) of the analytic power response in dB.
    pub analytic_variation_db: f64,
    /// Spread of the 21 ms level of the stochastic response in dB.
    pub stochastic_spread_db: f64,
    /// Spread of the 21 ms level of the energy-domain image response in dB.
    pub ism_spread_db: f64,
}

fn spread_db(levels: &[f64]) -> f64 {
    let max = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = levels.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn lossless_study(dims: [f64; 3], c: f64, fs: f64, seed: u64, n_sigma: usize, with_ism: bool) -> Result<LosslessStudy> {
    let room = ShoeboxRoom::from_db(dims, [LOSSLESS_DB; 6], c)?;
    let lap = laplace(&room, n_sigma)?;
    let cfg = SynthesisConfig::new(fs, LOSSLESS_SPAN, seed);
    let h = stochastic_rir(&room, &cfg)?;
    let len = h.len();
    let grid = TimeGrid::new(0.0, 1.0 / fs, len)?;
    let power = lap.power_response(&grid, c);
    let stochastic_level = ism_power_response(&h, DEFAULT_POWER_WINDOW)?;
    let stochastic_edc = edc_of_energies(&h.samples().iter().map(|s| s * s).collect::<Vec<_>>(), fs);
    let analytic_edc = lap.truncated_edc(&grid, c, len as f64 / fs);

    let (ism_level, ism_edc) = if with_ism {
        let trial = random_trials(&room, substream_seed(seed, 1), 1, fs, LOSSLESS_SPAN)[0];
        let e = ism_energy(&room, &trial)?;
        let as_pressure = ImpulseResponse::new(e.iter().map(|v| v.sqrt()).collect(), fs)?;
        (
            Some(ism_power_response(&as_pressure, DEFAULT_POWER_WINDOW)?),
            Some(edc_of_energies(&e, fs)),
        )
    } else {
        (None, None)
    };

    // levels only where the averaging window is complete
    let half = (0.5 * DEFAULT_POWER_WINDOW * fs).ceil() as usize;
    let full = half..len.saturating_sub(half);
    let analytic_variation_db = spread_db(&power.values().iter().map(|&p| db(p)).collect::<Vec<_>>());
    let stochastic_spread_db = spread_db(&stochastic_level.values()[full.clone()].iter().map(|&p| db(p)).collect::<Vec<_>>());
    let ism_spread_db = ism_level
        .as_ref()
        .map(|l| spread_db(&l.values()[full.clone()].iter().map(|&p| db(p)).collect::<Vec<_>>()))
        .unwrap_or(f64::NAN);

    let per_sample = c / (4.0 * PI * fs);
    let mut table = Table::new(&[
        "t_s",
        "analytic_level_db",
        "stochastic_level_db",
        "ism_level_db",
        "analytic_edc_db",
        "stochastic_edc_db",
        "ism_edc_db",
    ]);
    let hop = ((1e-3 * fs).round() as usize).max(1);
    let norm = |curve: &DecayCurve, k: usize| db(curve.values()[k] / curve.values()[0]);
    for k in (0..len).step_by(hop) {
        table.push(row![
            k as f64 / fs,
            db(power.values()[k] * per_sample),
            db(stochastic_level.values()[k]),
            ism_level.as_ref().map(|l| db(l.values()[k])).unwrap_or(f64::NAN),
            norm(&analytic_edc, k),
            norm(&stochastic_edc, k),
            ism_edc.as_ref().map(|e| norm(e, k)).unwrap_or(f64::NAN),
        ]);
    }
    Ok(LosslessStudy {
        table,
        analytic_variation_db,
        stochastic_spread_db,
        ism_spread_db,
    })
}

/// Relative L1 distance between a Fibonacci histogram and the bin-averaged
/// closed form, skipping bins that contain a special point.
pub fn histogram_l1(room: &ShoeboxRoom, n_bins: usize, n_dirs: usize) -> (f64, Histogram, Vec<f64>) {
    let d = DampingDensity::from_room(room);
    let hist = sphere_histogram(room, n_bins, SphereSampler::Fibonacci, n_dirs);
    let averages = bin_averages(&d, &hist.edges);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (h, a)) in hist.density().iter().zip(&averages).enumerate() {
        if !bin_has_special_point(&d, hist.edges[i], hist.edges[i + 1]) {
            num += (h - a).abs();
            den += a.abs();
        }
    }
    (num / den, hist, averages)
}

/// `|V * integral of H - 1|`.
pub fn normalization_error(room: &ShoeboxRoom) -> f64 {
    let d = DampingDensity::from_room(room);
    (tanh_sinh_split(|s| d.eval(s), &d.breakpoints(), 1e-11) * room.volume() - 1.0).abs()
}

/// `n` midpoints of the support, skipping any within `1e-6` of the support
/// width from a special point.
pub fn non_special_sigmas(d: &DampingDensity, n: usize) -> Vec<f64> {
    let (lo, hi) = d.support();
    let span = hi - lo;
    (0..n)
        .map(|i| lo + span * (i as f64 + 0.5) / n as f64)
        .filter(|s| d.special_points().iter().all(|p| (s - p).abs() > 1e-6 * span))
        .collect()
}

/// Largest relative gap between the polar quadrature of the slices and the
/// closed form at `n` rates.
pub fn slice_consistency(room: &ShoeboxRoom, n: usize) -> f64 {
    let d = DampingDensity::from_room(room);
    non_special_sigmas(&d, n)
        .into_iter()
        .map(|s| {
            let exact = d.eval(s);
            (slice_quadrature(&d.axis_damping(), d.volume(), s, 1e-12) - exact).abs() / exact
        })
        .fold(0.0, f64::max)
}

/// Largest relative change of `H` over all six axis permutations at `n`
/// rates.
pub fn permutation_spread(room: &ShoeboxRoom, n: usize) -> Result<f64> {
    let reference = DampingDensity::from_room(room);
    let sigmas = non_special_sigmas(&reference, n);
    let mut worst: f64 = 0.0;
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let d = DampingDensity::from_room(&room.permuted(perm)?);
        for &s in &sigmas {
            let (a, b) = (reference.eval(s), d.eval(s));
            worst = worst.max((a - b).abs() / a.max(b));
        }
    }
    Ok(worst)
}

/// Largest relative error of the rate to T60 round trip over a range of rates.
pub fn round_trip_error(c: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let sigma = -1e-4 * 1.07f64.powi(i);
        let back = t60_to_sigma(sigma_to_t60(sigma, c)?, c)?;
        worst = worst.max(((back - sigma) / sigma).abs());
    }
    Ok(worst)
}

/// Outcome of one validation check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn below(suite: &'static str, name: &str, value: f64, limit: f64) -> Self {
        Self {
            suite,
            name: name.to_string(),
            value,
            limit,
            pass: value < limit,
        }
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["suite", "check", "value", "limit", "pass"]);
    for c in checks {
        t.push(row![c.suite, c.name.as_str(), c.value, c.limit, c.pass]);
    }
    t
}

fn is_example_room(room: &ShoeboxRoom) -> bool {
    let example = ShoeboxRoom::example();
    room.dims() == example.dims() && room.beta() == example.beta()
}

/// Closed form against its references for one room.
pub fn oracle_checks(room: &ShoeboxRoom) -> Result<Vec<Check>> {
    let s = "oracle";
    let mut checks = vec![
        Check::below(s, "histogram_relative_l1", histogram_l1(room, 100, 1_000_000).0, 0.02),
        Check::below(s, "normalization_relative_error", normalization_error(room), 1e-4),
        Check::below(s, "slice_quadrature_relative_error", slice_consistency(room, 100), 1e-6),
        Check::below(s, "permutation_relative_spread", permutation_spread(room, 50)?, 1e-9),
        Check::below(s, "rt_round_trip_relative_error", round_trip_error(room.speed_of_sound())?, 1e-12),
    ];
    if is_example_room(room) {
        let pts = special_points(&room.axis_damping());
        let worst = if pts.len() == EXAMPLE_SPECIAL_POINTS.len() {
            pts.iter().zip(EXAMPLE_SPECIAL_POINTS).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        checks.push(Check::below(s, "special_points_abs_error", worst, 1.5e-3));
    }
    Ok(checks)
}

/// Image-source agreement: EDC of the given room and the coefficient sweep.
pub fn ism_checks(room: &ShoeboxRoom, fs: f64, seed: u64, n_sigma: usize) -> Result<Vec<Check>> {
    let s = "ism";
    let cmp = compare_edcs(room, fs, 1.0, substream_seed(seed, 100), SWEEP_TRIALS, n_sigma)?;
    let rows = coefficient_sweep(room.speed_of_sound(), fs, seed, n_sigma)?;
    let (median, max) = sweep_errors(&rows);
    Ok(vec![
        Check::below(s, "edc_max_deviation_db", cmp.max_deviation_db, 1.5),
        Check::below(s, "sweep_median_abs_rel_error", median, 0.015),
        Check::below(s, "sweep_max_abs_rel_error", max, 0.04),
    ])
}

/// Classic and analytic reverberation times of one room.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RtSummary {
    pub sabine: f64,
    pub eyring: f64,
    pub fitzroy: f64,
    pub t20: f64,
    pub t60: f64,
}

pub fn rt_summary(room: &ShoeboxRoom, n_sigma: usize) -> Result<RtSummary> {
    let (t20, t60) = analytic_rts(room, n_sigma)?;
    Ok(RtSummary {
        sabine: classic_rt(room, ClassicFormula::Sabine)?,
        eyring: classic_rt(room, ClassicFormula::Eyring)?,
        fitzroy: classic_rt(room, ClassicFormula::Fitzroy)?,
        t20: t20.t,
        t60: t60.t,
    })
}

/// Reverberation times while the first dimension runs over `lengths`.
pub fn length_sweep(room: &ShoeboxRoom, lengths: &[f64], n_sigma: usize) -> Result<Table> {
    let [_, ly, lz] = room.dims();
    let mut t = Table::new(&["length_m", "sabine_s", "eyring_s", "fitzroy_s", "t20_s", "t60_s"]);
    for &l in lengths {
        let r = rt_summary(&room.with_dims([l, ly, lz])?, n_sigma)?;
        t.push(row![l, r.sabine, r.eyring, r.fitzroy, r.t20, r.t60]);
    }
    Ok(t)
}

/// `H` on `n` evenly spaced rates strictly inside the support.
pub fn density_table(d: &DampingDensity, n: usize) -> Table {
    let (lo, hi) = d.support();
    let mut t = Table::new(&["sigma_per_m", "density"]);
    for i in 0..n {
        let s = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        t.push(row![s, d.eval(s)]);
    }
    t
}

pub fn special_points_table(d: &DampingDensity) -> Table {
    let mut t = Table::new(&["index", "sigma_per_m"]);
    for (i, s) in special_points(&d.axis_damping()).iter().enumerate() {
        t.push(row![i, *s]);
    }
    t
}

/// RT density on `n` reverberation times spanning the support, plus the
/// reverberation-time markers.
pub fn rt_density_tables(room: &ShoeboxRoom, n: usize, n_sigma: usize) -> Result<(Table, Table)> {
    let d = DampingDensity::from_room(room);
    let c = room.speed_of_sound();
    let (lo, hi) = d.support();
    let (t_lo, t_hi) = (sigma_to_t60(lo, c)?, sigma_to_t60(hi, c)?);
    let times: Vec<f64> = (0..n).map(|i| t_lo + (t_hi - t_lo) * (i as f64 + 0.5) / n as f64).collect();
    let mut density = Table::new(&["t60_s", "rt_density"]);
    for (t, v) in times.iter().zip(rt_density(&d, c, &times)) {
        density.push(row![*t, v]);
    }
    let r = rt_summary(room, n_sigma)?;
    let mut markers = Table::new(&["method", "t_s"]);
    for (name, value) in [
        ("sabine", r.sabine),
        ("eyring", r.eyring),
        ("fitzroy", r.fitzroy),
        ("t20", r.t20),
        ("t60", r.t60),
    ] {
        markers.push(row![name, value]);
    }
    Ok((density, markers))
}

/// Densities and normalized EDCs of the [`SHAPE_ROOMS`].
pub fn shape_tables(c: f64, n_sigma: usize) -> Result<(Table, Table, Vec<(String, f64)>)> {
    let mut densities = Table::new(&["room", "sigma_per_m", "density"]);
    let mut edcs = Table::new(&["room", "t_s", "edc_db"]);
    let mut deviations = Vec::new();
    for dims in SHAPE_ROOMS {
        let name = format!("{}x{}x{}", dims[0], dims[1], dims[2]);
        let room = ShoeboxRoom::from_db(dims, [SHAPE_BETA_DB; 6], c)?;
        let d = DampingDensity::from_room(&room);
        for r in density_table(&d, 400).rows() {
            let mut full = row![name.as_str()];
            full.extend(r.iter().cloned());
            densities.push(full);
        }
        let lap = laplace(&room, n_sigma)?;
        let span = decay_span(&lap, c, 80.0, 120.0);
        let grid = TimeGrid::new(0.0, span / 2000.0, 2001)?;
        let edc = lap.edc(&grid, c);
        for (k, v) in edc.normalized_db().iter().enumerate() {
            edcs.push(row![name.as_str(), grid.time(k), *v]);
        }
        deviations.push((name, single_slope_deviation(&room, n_sigma, -60.0)?));
    }
    Ok((densities, edcs, deviations))
}

/// Fibonacci histogram and closed form per bin.
pub fn histogram_table(room: &ShoeboxRoom, n_bins: usize, n_dirs: usize) -> (Table, f64) {
    let d = DampingDensity::from_room(room);
    let (l1, hist, averages) = histogram_l1(room, n_bins, n_dirs);
    let mut t = Table::new(&[
        "bin_lo",
        "bin_hi",
        "histogram_density",
        "closed_form_bin_mean",
        "closed_form_center",
        "has_special_point",
    ]);
    for (i, (h, a)) in hist.density().iter().zip(&averages).enumerate() {
        let (lo, hi) = (hist.edges[i], hist.edges[i + 1]);
        t.push(row![lo, hi, *h, *a, d.eval(0.5 * (lo + hi)), bin_has_special_point(&d, lo, hi)]);
    }
    (t, l1)
}

/// Bands from a room document, or the default octave targets when it has
/// none. Target reverberation times map to coefficients through
/// [`RtMapping::AnalyticT20`].
pub fn resolve_banded(cfg: &RoomConfig) -> Result<BandedRoom> {
    let mut cfg = cfg.clone();
    if cfg.bands.is_empty() {
        cfg.bands = OCTAVE_CENTERS
            .iter()
            .zip(OCTAVE_TARGETS)
            .map(|(&fc, t)| BandSpec {
                fc,
                coefficients: BandCoefficients::TargetT60(t),
            })
            .collect();
    }
    resolve_bands(&cfg, RtMapping::AnalyticT20)
}

/// T20 of `h` in each band after octave filtering.
pub fn band_t20s(h: &ImpulseResponse, centers: &[f64]) -> Result<Vec<f64>> {
    centers
        .iter()
        .map(|&fc| {
            let band = OctaveFilter::new(fc, h.fs())?.process(h.samples());
            let edc = edc_of_energies(&band.iter().map(|s| s * s).collect::<Vec<_>>(), h.fs());
            Ok(rt_from_edc(&edc, T20_RANGE.0, T20_RANGE.1)?.t)
        })
        .collect()
}

/// Normalized EDC of every octave band of `h`, every `hop` samples.
pub fn band_edc_table(h: &ImpulseResponse, centers: &[f64], hop: usize) -> Result<Table> {
    let mut t = Table::new(&["band_hz", "t_s", "edc_db"]);
    for &fc in centers {
        let band = OctaveFilter::new(fc, h.fs())?.process(h.samples());
        let edc = edc_of_energies(&band.iter().map(|s| s * s).collect::<Vec<_>>(), h.fs());
        for (k, v) in edc.normalized_db().iter().enumerate().step_by(hop.max(1)) {
            t.push(row![fc, k as f64 / h.fs(), *v]);
        }
    }
    Ok(t)
}

/// Banded image-source and stochastic responses for the time-frequency
/// comparison.
pub fn banded_pair(
    banded: &BandedRoom,
    ism: &IsmConfig,
    fs: f64,
    duration: f64,
    seed: u64,
) -> Result<(ImpulseResponse, ImpulseResponse)> {
    let mut cfg = SynthesisConfig::new(fs, duration, seed);
    cfg.transition_time = duration;
    let image = banded_hybrid_rir(banded, ism, &cfg)?;
    cfg.transition_time = 0.0;
    let noise = banded_hybrid_rir(banded, ism, &cfg)?;
    Ok((image, noise))
}

/// Stochastic EDC in dB re its start.
pub fn stochastic_edc(room: &ShoeboxRoom, fs: f64, duration: f64, seed: u64, n_sigma: usize) -> Result<DecayCurve> {
    let mut cfg = SynthesisConfig::new(fs, duration, seed);
    cfg.n_sigma = n_sigma;
    let h = stochastic_rir(room, &cfg)?;
    let e: Vec<f64> = h.samples().iter().map(|s| s * s).collect();
    let curve = edc_of_energies(&e, fs);
    debug_assert_eq!(curve.kind(), CurveKind::Edc);
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_of_single_exponential() {
        // energy falls 10 dB per second
        let sigma = -(10f64.ln()) / 343.0;
        let lap = LaplaceSum::point_mass(sigma, 1.0).unwrap();
        assert!((decay_span(&lap, 343.0, 35.0, 100.0) - 3.5).abs() < 1e-9);
        assert_eq!(decay_span(&lap, 343.0, 35.0, 2.0), 2.0);
    }

    #[test]
    fn sweep_statistics() {
        let row = |e: f64| SweepRow {
            factor: 1,
            mean_beta_db: 0.0,
            span: 1.0,
            t20_ism: 1.0,
            t20_analytic: 1.0 + e,
            rel_error: e,
        };
        let (median, max) = sweep_errors(&[row(0.01), row(-0.03), row(0.02)]);
        assert_eq!((median, max), (0.02, 0.03));
        let (median, _) = sweep_errors(&[row(0.01), row(-0.03)]);
        assert!((median - 0.02).abs() < 1e-15);
    }

    #[test]
    fn straight_decay_has_no_slope_deviation() {
        let cube = ShoeboxRoom::from_db([3.0, 3.0, 3.0], [-1.0; 6], 343.0).unwrap();
        let corridor = ShoeboxRoom::from_db([2.0, 2.0, 10.0], [-1.0; 6], 343.0).unwrap();
        let a = single_slope_deviation(&cube, 200, -60.0).unwrap();
        let b = single_slope_deviation(&corridor, 200, -60.0).unwrap();
        assert!(b > 1.0 && b > 4.0 * a, "{a} {b}");
    }
}
