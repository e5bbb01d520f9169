//! Stochastic late reverberation from the damping density.
//!
//! The power response `p(rho)` is energy per metre of propagation path,
//! normalized like the image-source lattice: a shell of image sources of
//! thickness `d rho` carries `p(rho) d rho / (4 pi)`. One sample spans
//! `c / fs` metres, so shaped noise uses per-sample variance
//! `p(c t) c / (4 pi fs)`, which puts it on the same absolute level as
//! [`crate::ism::ism_rir`].

mod filter;

pub use filter::OctaveFilter;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::decay::{analytic_rts, classic_rt, ClassicFormula, LaplaceSum, SABINE_CONSTANT};
use crate::density::DampingDensity;
use crate::error::{Error, Result};
use crate::ism::{ism_rir, ImpulseResponse, IsmConfig};
use crate::room::{Band, BandCoefficients, BandedRoom, RoomConfig, ShoeboxRoom, BETA_EPS};

pub const DEFAULT_CROSSFADE: f64 = 0.005;

/// Span before the transition over which hybrid levels are matched, seconds.
pub const LEVEL_WINDOW: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisConfig {
    pub fs: f64,
    pub duration: f64,
    pub seed: u64,
    /// Start of the stochastic part in hybrid responses, seconds.
    pub transition_time: f64,
    pub crossfade: f64,
    pub n_sigma: usize,
}

impl SynthesisConfig {
    pub fn new(fs: f64, duration: f64, seed: u64) -> Self {
        Self {
            fs,
            duration,
            seed,
            transition_time: 0.0,
            crossfade: DEFAULT_CROSSFADE,
            n_sigma: crate::decay::DEFAULT_SIGMA_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::domain("fs", format!("{} Hz must be positive", self.fs)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::domain("duration", format!("{} s must be positive", self.duration)));
        }
        if !(self.transition_time >= 0.0) {
            return Err(Error::domain("transition_time", "must be nonnegative"));
        }
        if !(self.crossfade >= 0.0) {
            return Err(Error::domain("crossfade", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.duration * self.fs).ceil() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Unit-variance Gaussian noise from ChaCha8 seeded with `seed`.
pub fn gaussian_noise(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Seed of an independent substream, e.g. one per band or trial.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix(seed ^ splitmix(index.wrapping_add(1)))
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample standard deviation of the shaped noise.
pub fn envelope(laplace: &LaplaceSum, len: usize, fs: f64, c: f64) -> Vec<f64> {
    let per_sample = c / (4.0 * PI * fs);
    (0..len)
        .into_par_iter()
        .map(|n| (laplace.power_at(c * n as f64 / fs).max(0.0) * per_sample).sqrt())
        .collect()
}

/// Expected per-sample energy `p(c t) c / (4 pi fs)` of the stochastic
/// response at sample `n`.
pub fn expected_energy(laplace: &LaplaceSum, n: usize, fs: f64, c: f64) -> f64 {
    laplace.power_at(c * n as f64 / fs) * c / (4.0 * PI * fs)
}

fn shape(noise: &[f64], env: &[f64]) -> Vec<f64> {
    noise.iter().zip(env).map(|(u, e)| u * e).collect()
}

/// Gaussian noise shaped by the square root of the power response.
pub fn stochastic_rir(room: &ShoeboxRoom, cfg: &SynthesisConfig) -> Result<ImpulseResponse> {
    cfg.validate()?;
    let laplace = LaplaceSum::from_density(&DampingDensity::from_room(room), cfg.n_sigma)?;
    let env = envelope(&laplace, cfg.len(), cfg.fs, room.speed_of_sound());
    ImpulseResponse::new(shape(&gaussian_noise(cfg.seed, cfg.len()), &env), cfg.fs)
}

/// Band signals before summation: one shared noise realization, shaped by
/// each band's envelope and passed through that band's octave filter.
pub fn banded_components(banded: &BandedRoom, cfg: &SynthesisConfig) -> Result<Vec<ImpulseResponse>> {
    cfg.validate()?;
    let filters = banded
        .bands()
        .iter()
        .map(|b| OctaveFilter::new(b.fc, cfg.fs))
        .collect::<Result<Vec<_>>>()?;
    let noise = gaussian_noise(cfg.seed, cfg.len());
    let c = banded.geometry().speed_of_sound();
    (0..banded.bands().len())
        .into_par_iter()
        .map(|i| {
            let room = banded.band_room(i);
            let laplace = LaplaceSum::from_density(&DampingDensity::from_room(&room), cfg.n_sigma)?;
            let env = envelope(&laplace, cfg.len(), cfg.fs, c);
            ImpulseResponse::new(filters[i].process(&shape(&noise, &env)), cfg.fs)
        })
        .collect()
}

/// Sum of the octave-band components.
pub fn banded_rir(banded: &BandedRoom, cfg: &SynthesisConfig) -> Result<ImpulseResponse> {
    let parts = banded_components(banded, cfg)?;
    let mut out = vec![0.0; cfg.len()];
    for part in &parts {
        for (o, s) in out.iter_mut().zip(part.samples()) {
            *o += s;
        }
    }
    ImpulseResponse::new(out, cfg.fs)
}

/// How a target reverberation time becomes reflection coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RtMapping {
    /// Invert Sabine's formula.
    Sabine,
    /// Invert Eyring's formula.
    Eyring,
    /// Choose the uniform coefficient whose analytic T20 equals the target.
    AnalyticT20,
}

/// Six equal reflection coefficients for a target reverberation time.
pub fn rt_to_band_coefficients(target_t60: f64, geometry: &ShoeboxRoom, mapping: RtMapping) -> Result<[f64; 6]> {
    if !(target_t60.is_finite() && target_t60 > 0.0) {
        return Err(Error::domain("target T60", format!("{target_t60} s must be positive")));
    }
    let v = geometry.volume();
    let s = geometry.surface_area();
    let ln_beta = match mapping {
        RtMapping::Sabine => {
            let alpha = SABINE_CONSTANT * v / (s * target_t60);
            if alpha >= 1.0 {
                return Err(Error::domain("target T60", format!("{target_t60} s needs absorption {alpha} >= 1")));
            }
            0.5 * (1.0 - alpha).ln()
        }
        // 1 - alpha = exp(-0.161 V / (S T)) and beta = sqrt(1 - alpha)
        RtMapping::Eyring => -0.5 * SABINE_CONSTANT * v / (s * target_t60),
        RtMapping::AnalyticT20 => {
            // all rates scale with ln(beta) for uniform walls, so T20 scales
            // with 1 / ln(beta)
            let seed_ln = -0.5 * SABINE_CONSTANT * v / (s * target_t60);
            let seed_beta = seed_ln.exp().clamp(BETA_EPS * 2.0, 1.0 - BETA_EPS * 2.0);
            let probe = geometry.with_beta([seed_beta; 6])?;
            let (t20, _) = analytic_rts(&probe, crate::decay::DEFAULT_SIGMA_SAMPLES)?;
            seed_beta.ln() * t20.t / target_t60
        }
    };
    let beta = ln_beta.exp();
    if beta <= BETA_EPS {
        return Err(Error::domain("target T60", format!("{target_t60} s is too short for this room")));
    }
    Ok([beta.min(1.0 - 2.0 * BETA_EPS); 6])
}

/// Resolves every band of a room document to reflection coefficients.
pub fn resolve_bands(cfg: &RoomConfig, mapping: RtMapping) -> Result<BandedRoom> {
    let bands = cfg
        .bands
        .iter()
        .map(|spec| {
            let beta = match spec.coefficients {
                BandCoefficients::Reflection(b) => b,
                BandCoefficients::TargetT60(t) => rt_to_band_coefficients(t, &cfg.room, mapping)?,
            };
            Ok(Band { fc: spec.fc, beta })
        })
        .collect::<Result<Vec<_>>>()?;
    BandedRoom::new(cfg.room, bands)
}

/// Image-source early part followed by the shaped-noise tail.
///
/// Around `transition_time` the two parts are mixed with power-complementary
/// gains over `crossfade` seconds. A transition at or before zero gives the
/// stochastic response, one at or past the end gives the image-source
/// response.
///
/// Coincident image pulses add coherently and wall hits come in whole
/// numbers, so the sampled image-source energy sits a few dB above the
/// continuous power response. The tail is therefore rescaled so its expected
/// energy over the [`LEVEL_WINDOW`] before the transition equals the
/// image-source energy there.
pub fn hybrid_rir(room: &ShoeboxRoom, ism_cfg: &IsmConfig, synth_cfg: &SynthesisConfig) -> Result<ImpulseResponse> {
    synth_cfg.validate()?;
    if ism_cfg.fs != synth_cfg.fs {
        return Err(Error::domain(
            "fs",
            format!("image-source rate {} Hz differs from synthesis rate {} Hz", ism_cfg.fs, synth_cfg.fs),
        ));
    }
    let len = synth_cfg.len();
    let t_tr = synth_cfg.transition_time;
    if t_tr <= 0.0 {
        return stochastic_rir(room, synth_cfg);
    }
    let ism_cfg = IsmConfig {
        duration: synth_cfg.duration,
        ..*ism_cfg
    };
    let early = ism_rir(room, &ism_cfg)?;
    if t_tr >= synth_cfg.duration {
        return Ok(early);
    }
    let laplace = LaplaceSum::from_density(&DampingDensity::from_room(room), synth_cfg.n_sigma)?;
    let env = envelope(&laplace, len, synth_cfg.fs, room.speed_of_sound());
    let n_tr = ((t_tr * synth_cfg.fs).round() as usize).min(len);
    let n_ref = n_tr.saturating_sub(((LEVEL_WINDOW * synth_cfg.fs).round() as usize).max(1));
    let ism_energy: f64 = early.samples()[n_ref..n_tr].iter().map(|s| s * s).sum();
    let model_energy: f64 = env[n_ref..n_tr].iter().map(|e| e * e).sum();
    let gain = if ism_energy > 0.0 && model_energy > 0.0 {
        (ism_energy / model_energy).sqrt()
    } else {
        1.0
    };
    let late: Vec<f64> = shape(&gaussian_noise(synth_cfg.seed, len), &env).iter().map(|s| gain * s).collect();
    let half = 0.5 * synth_cfg.crossfade;
    let out = (0..len)
        .map(|n| {
            let t = n as f64 / synth_cfg.fs;
            let x = if half == 0.0 {
                if t < t_tr {
                    0.0
                } else {
                    1.0
                }
            } else {
                ((t - (t_tr - half)) / (2.0 * half)).clamp(0.0, 1.0)
            };
            (1.0 - x).sqrt() * early.samples()[n] + x.sqrt() * late[n]
        })
        .collect();
    ImpulseResponse::new(out, synth_cfg.fs)
}

/// Frequency-dependent hybrid response: each band's [`hybrid_rir`], with
/// that band's coefficients and the shared noise seed, passed through its
/// octave filter and summed. With a zero transition time this equals
/// [`banded_rir`].
pub fn banded_hybrid_rir(banded: &BandedRoom, ism_cfg: &IsmConfig, synth_cfg: &SynthesisConfig) -> Result<ImpulseResponse> {
    let filters = banded
        .bands()
        .iter()
        .map(|b| OctaveFilter::new(b.fc, synth_cfg.fs))
        .collect::<Result<Vec<_>>>()?;
    let parts = (0..banded.bands().len())
        .map(|i| Ok(filters[i].process(hybrid_rir(&banded.band_room(i), ism_cfg, synth_cfg)?.samples())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; synth_cfg.len()];
    for part in &parts {
        for (o, s) in out.iter_mut().zip(part) {
            *o += s;
        }
    }
    ImpulseResponse::new(out, synth_cfg.fs)
}

/// Octave-band short-time levels: `(time_s, band_hz, level_db)` rows every
/// `hop` seconds, from a `window`-second moving average of the band energy.
pub fn band_levels(h: &ImpulseResponse, centers: &[f64], window: f64, hop: f64) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::new();
    let step = ((hop * h.fs()).round() as usize).max(1);
    for &fc in centers {
        let band = ImpulseResponse::new(OctaveFilter::new(fc, h.fs())?.process(h.samples()), h.fs())?;
        let p = crate::ism::ism_power_response(&band, window)?;
        for (k, v) in p.values().iter().enumerate().step_by(step) {
            rows.push((k as f64 / h.fs(), fc, 10.0 * v.max(1e-300).log10()));
        }
    }
    Ok(rows)
}

/// Eyring reverberation time for a uniform coefficient, used by tests and
/// reports to compare mappings.
pub fn eyring_for(geometry: &ShoeboxRoom, beta: f64) -> Result<f64> {
    classic_rt(&geometry.with_beta([beta; 6])?, ClassicFormula::Eyring)
}
