//! Subcommand bodies. Each one fills an [`Artifacts`] set and leaves writing
//! to the caller.

use clap::{Args, ValueEnum};
use serde::Serialize;
use shoebox::ism::{edc_of_energies, ism_energy, random_trials};
use shoebox::room::RoomConfig;
use shoebox::synthesis::{band_levels, hybrid_rir, substream_seed, SynthesisConfig, LEVEL_WINDOW};
use shoebox::{DampingDensity, IsmConfig, TimeGrid};

use crate::artifacts::Artifacts;
use crate::experiments as ex;
use crate::failure::{Failure, Outcome};
use crate::row;
use crate::settings::Settings;
use crate::table::Table;

/// Seed substreams, so each random draw can be reproduced on its own.
const POSITION_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn sample_hop(fs: f64, seconds: f64) -> usize {
    ((seconds * fs).round() as usize).max(1)
}

fn room_config(s: &Settings) -> RoomConfig {
    RoomConfig {
        room: s.room,
        bands: s.bands.clone(),
        source: s.source,
        receiver: s.receiver,
        fs: Some(s.fs),
    }
}

/// Positions from the document, or `n` seeded random draws.
fn trials(s: &Settings, n: usize, duration: f64, art: &mut Artifacts, what: &str) -> Outcome<Vec<IsmConfig>> {
    match (s.source, s.receiver) {
        (Some(src), Some(rcv)) => Ok(vec![IsmConfig::from_corner(&s.room, src, rcv, s.fs, duration)]),
        _ => {
            let seed = substream_seed(s.require_seed(what)?, POSITION_STREAM);
            art.seed("ism_positions", seed);
            Ok(random_trials(&s.room, seed, n, s.fs, duration))
        }
    }
}

fn positive(name: &str, v: f64) -> Outcome<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Failure::config(format!("--{name} {v} must be positive")))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    /// Also write the reverberation-time density with classic markers.
    #[arg(long = "rt-density")]
    pub rt_density: bool,
    /// Number of rates at which the density is tabulated.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

pub fn density(s: &Settings, a: &DensityArgs, art: &mut Artifacts) -> Outcome<()> {
    if a.points == 0 {
        return Err(Failure::config("--points must be at least 1"));
    }
    let d = DampingDensity::from_room(&s.room);
    art.table("density.csv", &ex::density_table(&d, a.points))?;
    art.table("special_points.csv", &ex::special_points_table(&d))?;
    if a.rt_density {
        let (density, markers) = ex::rt_density_tables(&s.room, a.points, s.sigma_samples)?;
        art.table("rt_density.csv", &density)?;
        art.table("rt_markers.csv", &markers)?;
    }
    art.note("support_per_m", d.support());
    art.note("special_points_per_m", d.special_points());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdcMethod {
    Analytic,
    Ism,
    Stochastic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EdcArgs {
    #[arg(long, value_enum, default_value_t = EdcMethod::Analytic)]
    pub method: EdcMethod,
    /// Simulated span in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Random source/receiver draws averaged by the image-source method.
    #[arg(long, default_value_t = ex::SWEEP_TRIALS)]
    pub trials: usize,
    /// Write every n-th sample.
    #[arg(long, default_value_t = 1)]
    pub hop: usize,
}

pub fn edc(s: &Settings, a: &EdcArgs, art: &mut Artifacts) -> Outcome<()> {
    positive("duration", a.duration)?;
    if a.trials == 0 || a.hop == 0 {
        return Err(Failure::config("--trials and --hop must be at least 1"));
    }
    let c = s.room.speed_of_sound();
    let grid = TimeGrid::from_rate(s.fs, a.duration)?;
    let lap = ex::laplace(&s.room, s.sigma_samples)?;
    let analytic = lap.truncated_edc(&grid, c, grid.end());
    let power = lap.power_response(&grid, c);
    match a.method {
        EdcMethod::Analytic => {
            let mut t = Table::new(&["t_s", "power_response", "edc", "edc_db"]);
            let levels = analytic.normalized_db();
            for k in (0..grid.len).step_by(a.hop) {
                t.push(row![grid.time(k), power.values()[k], analytic.values()[k], levels[k]]);
            }
            art.table("edc.csv", &t)?;
        }
        EdcMethod::Ism => {
            let configs = trials(s, a.trials, a.duration, art, "edc --method ism")?;
            if let Some(w) = configs[0].truncation_warning(&s.room) {
                art.note("warning", w);
            }
            let energies = configs
                .iter()
                .map(|cfg| ism_energy(&s.room, cfg))
                .collect::<shoebox::Result<Vec<_>>>()?;
            let mut mean = vec![0.0; energies[0].len()];
            for e in &energies {
                for (m, v) in mean.iter_mut().zip(e) {
                    *m += v / energies.len() as f64;
                }
            }
            let ism = edc_of_energies(&mean, s.fs);
            let n = ism.len().min(analytic.len());
            let k0 = ((ex::TRANSITION_TIME * s.fs).round() as usize).min(n - 1);
            let (i0, a0) = (ism.values()[k0], analytic.values()[k0]);
            let db = |x: f64| 10.0 * x.max(1e-300).log10();
            let mut t = Table::new(&["t_s", "ism_edc_db", "analytic_edc_db"]);
            let mut worst: f64 = 0.0;
            for k in 0..n {
                let (i, an) = (db(ism.values()[k] / i0), db(analytic.values()[k] / a0));
                if k >= k0 && an >= ex::COMPARISON_FLOOR_DB {
                    worst = worst.max((i - an).abs());
                }
                if k % a.hop == 0 {
                    t.push(row![k as f64 / s.fs, i, an]);
                }
            }
            art.table("edc.csv", &t)?;
            art.note("trials", configs.len());
            art.note("late_max_deviation_db", worst);
            art.note("late_start_s", ex::TRANSITION_TIME);
            art.note("late_floor_db", ex::COMPARISON_FLOOR_DB);
        }
        EdcMethod::Stochastic => {
            let seed = substream_seed(s.require_seed("edc --method stochastic")?, NOISE_STREAM);
            art.seed("noise", seed);
            let curve = ex::stochastic_edc(&s.room, s.fs, a.duration, seed, s.sigma_samples)?;
            let mut t = Table::new(&["t_s", "stochastic_edc_db", "analytic_edc_db"]);
            let (sl, al) = (curve.normalized_db(), analytic.normalized_db());
            for k in (0..curve.len().min(al.len())).step_by(a.hop) {
                t.push(row![k as f64 / s.fs, sl[k], al[k]]);
            }
            art.table("edc.csv", &t)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RtArgs {
    /// Sweep the first room dimension over `A:B` or `A:B:STEP` metres.
    #[arg(long = "sweep-length", value_name = "A:B[:STEP]")]
    pub sweep_length: Option<String>,
    /// Run the built-in reflection-coefficient sweep against the
    /// image-source method.
    #[arg(long = "sweep-coefficients")]
    pub sweep_coefficients: bool,
}

pub fn parse_range(text: &str) -> Outcome<Vec<f64>> {
    let parts = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::config(format!("--sweep-length {text}: {e}")))?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1.0),
        [a, b, step] => (a, b, step),
        _ => return Err(Failure::config(format!("--sweep-length {text}: expected A:B or A:B:STEP"))),
    };
    if !(a > 0.0 && b >= a && step > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Failure::config(format!("--sweep-length {text}: need 0 < A <= B and STEP > 0")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

pub fn rt(s: &Settings, a: &RtArgs, art: &mut Artifacts) -> Outcome<()> {
    let lengths = a.sweep_length.as_deref().map(parse_range).transpose()?;
    let seed = if a.sweep_coefficients {
        Some(s.require_seed("rt --sweep-coefficients")?)
    } else {
        None
    };
    let summary = ex::rt_summary(&s.room, s.sigma_samples)?;
    let mut t = Table::new(&["method", "t_s"]);
    for (name, v) in [
        ("sabine", summary.sabine),
        ("eyring", summary.eyring),
        ("fitzroy", summary.fitzroy),
        ("t20", summary.t20),
        ("t60", summary.t60),
    ] {
        t.push(row![name, v]);
    }
    art.table("rt.csv", &t)?;
    art.note("rt_s", summary);
    if let Some(lengths) = lengths {
        art.table("rt_length_sweep.csv", &ex::length_sweep(&s.room, &lengths, s.sigma_samples)?)?;
    }
    if let Some(seed) = seed {
        art.seed("sweep", seed);
        let rows = ex::coefficient_sweep(s.room.speed_of_sound(), s.fs, seed, s.sigma_samples)?;
        let (median, max) = ex::sweep_errors(&rows);
        art.table("rt_coefficient_sweep.csv", &ex::sweep_table(&rows))?;
        art.note("sweep_median_abs_rel_error", median);
        art.note("sweep_max_abs_rel_error", max);
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Frequency-dependent synthesis, using the document's bands or the
    /// default octave targets.
    #[arg(long)]
    pub bands: bool,
    /// Hand-over from image sources to noise, in milliseconds. Zero gives
    /// the pure stochastic response.
    #[arg(long = "transition-ms", default_value_t = 50.0)]
    pub transition_ms: f64,
    /// Response length in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
}

pub fn synth(s: &Settings, a: &SynthArgs, art: &mut Artifacts) -> Outcome<()> {
    positive("duration", a.duration)?;
    if !(a.transition_ms.is_finite() && a.transition_ms >= 0.0) {
        return Err(Failure::config(format!("--transition-ms {} must be non-negative", a.transition_ms)));
    }
    let seed = s.require_seed("synth")?;
    let noise_seed = substream_seed(seed, NOISE_STREAM);
    art.seed("noise", noise_seed);
    let mut cfg = SynthesisConfig::new(s.fs, a.duration, noise_seed);
    cfg.transition_time = a.transition_ms * 1e-3;
    cfg.n_sigma = s.sigma_samples;
    let ism = if cfg.transition_time > 0.0 {
        trials(s, 1, a.duration, art, "synth")?[0]
    } else {
        // unused by the pure stochastic response
        IsmConfig::new([0.0; 3], [1.0, 0.0, 0.0], s.fs, a.duration)
    };
    let hop = sample_hop(s.fs, 1e-3);
    if a.bands {
        let banded = ex::resolve_banded(&room_config(s))?;
        let h = shoebox::synthesis::banded_hybrid_rir(&banded, &ism, &cfg)?;
        let centers: Vec<f64> = banded.bands().iter().map(|b| b.fc).collect();
        art.wav("rir.wav", &h)?;
        art.table("band_edc.csv", &ex::band_edc_table(&h, &centers, hop)?)?;
        let mut bands = Table::new(&["band_hz", "beta_0", "beta_1", "beta_2", "beta_3", "beta_4", "beta_5", "t20_s"]);
        for (b, t20) in banded.bands().iter().zip(ex::band_t20s(&h, &centers)?) {
            let mut r = row![b.fc];
            r.extend(b.beta.iter().map(|&v| v.into()));
            r.push(t20.into());
            bands.push(r);
        }
        art.table("bands.csv", &bands)?;
    } else {
        let h = hybrid_rir(&s.room, &ism, &cfg)?;
        let e: Vec<f64> = h.samples().iter().map(|v| v * v).collect();
        let edc = edc_of_energies(&e, s.fs).normalized_db();
        let mut t = Table::new(&["t_s", "edc_db"]);
        for k in (0..edc.len()).step_by(hop) {
            t.push(row![k as f64 / s.fs, edc[k]]);
        }
        art.wav("rir.wav", &h)?;
        art.table("edc.csv", &t)?;
    }
    art.note("level_window_s", LEVEL_WINDOW);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracle,
    Ism,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

/// Runs the checks; a breach is reported after the report has been recorded.
pub fn validate(s: &Settings, a: &ValidateArgs, art: &mut Artifacts) -> Outcome<Vec<ex::Check>> {
    let seed = match a.suite {
        Suite::Oracle => None,
        _ => Some(s.require_seed("validate --suite ism")?),
    };
    let mut checks = Vec::new();
    if a.suite != Suite::Ism {
        checks.extend(ex::oracle_checks(&s.room)?);
    }
    if let Some(seed) = seed {
        art.seed("ism", seed);
        checks.extend(ex::ism_checks(&s.room, s.fs, seed, s.sigma_samples)?);
    }
    art.table("report.csv", &ex::checks_table(&checks))?;
    art.note("checks", checks.len());
    art.note("failed", checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect::<Vec<_>>());
    Ok(checks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Rtsweep,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub which: Figure,
}

pub fn experiment(s: &Settings, a: &ExperimentArgs, art: &mut Artifacts) -> Outcome<()> {
    let c = s.room.speed_of_sound();
    let ms = sample_hop(s.fs, 1e-3);
    match a.which {
        Figure::Fig3 => {
            let (t, l1) = ex::histogram_table(&s.room, 100, 1_000_000);
            art.table("fig3_histogram.csv", &t)?;
            art.table("fig3_density.csv", &ex::density_table(&DampingDensity::from_room(&s.room), 2000))?;
            art.note("histogram_relative_l1", l1);
        }
        Figure::Fig4 => {
            let seed = substream_seed(s.require_seed("experiment fig4")?, POSITION_STREAM);
            art.seed("ism_positions", seed);
            let cmp = ex::compare_edcs(&s.room, s.fs, 1.0, seed, ex::SWEEP_TRIALS, s.sigma_samples)?;
            art.table("fig4_edc.csv", &cmp.table(ms))?;
            let grid = TimeGrid::from_rate(s.fs, 1.0)?;
            let power = ex::laplace(&s.room, s.sigma_samples)?.power_response(&grid, c);
            let mut p = Table::new(&["t_s", "power_response"]);
            for k in (0..grid.len).step_by(ms) {
                p.push(row![grid.time(k), power.values()[k]]);
            }
            art.table("fig4_power.csv", &p)?;
            art.note("edc_max_deviation_db", cmp.max_deviation_db);
        }
        Figure::Fig5 => {
            let seed = s.require_seed("experiment fig5")?;
            art.seed("lossless", substream_seed(seed, NOISE_STREAM));
            let study = ex::lossless_study(s.room.dims(), c, s.fs, substream_seed(seed, NOISE_STREAM), s.sigma_samples, true)?;
            art.table("fig5_lossless.csv", &study.table)?;
            art.note("analytic_variation_db", study.analytic_variation_db);
            art.note("stochastic_spread_db", study.stochastic_spread_db);
            art.note("ism_spread_db", study.ism_spread_db);
            art.seed("sweep", seed);
            let rows = ex::coefficient_sweep(c, s.fs, seed, s.sigma_samples)?;
            art.table("fig5_sweep.csv", &ex::sweep_table(&rows))?;
            let (median, max) = ex::sweep_errors(&rows);
            art.note("sweep_median_abs_rel_error", median);
            art.note("sweep_max_abs_rel_error", max);
        }
        Figure::Fig6 => {
            let (density, markers) = ex::rt_density_tables(&s.room, 2000, s.sigma_samples)?;
            art.table("fig6_rt_density.csv", &density)?;
            art.table("fig6_markers.csv", &markers)?;
        }
        Figure::Fig7 => {
            let (densities, edcs, deviations) = ex::shape_tables(c, s.sigma_samples)?;
            art.table("fig7_density.csv", &densities)?;
            art.table("fig7_edc.csv", &edcs)?;
            let mut t = Table::new(&["room", "single_slope_deviation_db"]);
            for (name, dev) in &deviations {
                t.push(row![name.as_str(), *dev]);
            }
            art.table("fig7_single_slope.csv", &t)?;
        }
        Figure::Fig8 => {
            let lengths: Vec<f64> = (1..=30).map(f64::from).collect();
            let corridor = s.room.with_dims([1.0, 5.0, 3.0])?;
            art.table("fig8_length_sweep.csv", &ex::length_sweep(&corridor, &lengths, s.sigma_samples)?)?;
        }
        Figure::Fig9 => {
            let seed = s.require_seed("experiment fig9")?;
            let noise_seed = substream_seed(seed, NOISE_STREAM);
            art.seed("noise", noise_seed);
            let ism = trials(s, 1, 1.0, art, "experiment fig9")?[0];
            let banded = ex::resolve_banded(&room_config(s))?;
            let duration = 1.5;
            let ism = IsmConfig { duration, ..ism };
            let (image, noise) = ex::banded_pair(&banded, &ism, s.fs, duration, noise_seed)?;
            let centers: Vec<f64> = banded.bands().iter().map(|b| b.fc).collect();
            let li = band_levels(&image, &centers, 0.01, 0.005)?;
            let ln = band_levels(&noise, &centers, 0.01, 0.005)?;
            let mut t = Table::new(&["t_s", "band_hz", "ism_level_db", "stochastic_level_db"]);
            for ((ti, fc, a), (_, _, b)) in li.into_iter().zip(ln) {
                t.push(row![ti, fc, a, b]);
            }
            art.table("fig9_band_levels.csv", &t)?;
            art.wav("fig9_ism.wav", &image)?;
            art.wav("fig9_stochastic.wav", &noise)?;
        }
        Figure::Rtsweep => {
            let seed = s.require_seed("experiment rtsweep")?;
            art.seed("sweep", seed);
            let rows = ex::coefficient_sweep(c, s.fs, seed, s.sigma_samples)?;
            let (median, max) = ex::sweep_errors(&rows);
            art.table("rtsweep.csv", &ex::sweep_table(&rows))?;
            art.note("median_abs_rel_error", median);
            art.note("max_abs_rel_error", max);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_range("2:3:0.5").unwrap(), vec![2.0, 2.5, 3.0]);
        for bad in ["3:1", "0:2", "1", "a:2", "1:2:0", "1:2:3:4"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
