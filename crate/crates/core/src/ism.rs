//! Image-source simulation of a shoebox room.
//!
//! Positions in [`IsmConfig`] are room-centred: the room spans
//! `[-L/2, L/2]` on every axis.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::decay::{CurveKind, DecayCurve};
use crate::error::{Error, Result};
use crate::room::ShoeboxRoom;

/// Window of the short-time energy average, seconds.
pub const DEFAULT_POWER_WINDOW: f64 = 0.021;

/// Number of image-lattice slabs summed into separate buffers. Fixed so the
/// floating-point reduction order never depends on the thread pool.
const PARTITIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsmConfig {
    pub source: [f64; 3],
    pub receiver: [f64; 3],
    /// Lattice bound `N`; `None` picks one covering `duration`.
    pub max_order: Option<u32>,
    pub fs: f64,
    pub duration: f64,
}

impl IsmConfig {
    pub fn new(source: [f64; 3], receiver: [f64; 3], fs: f64, duration: f64) -> Self {
        Self {
            source,
            receiver,
            max_order: None,
            fs,
            duration,
        }
    }

    /// Converts corner-based positions (room spanning `[0, L]`) to the
    /// centred frame.
    pub fn from_corner(room: &ShoeboxRoom, source: [f64; 3], receiver: [f64; 3], fs: f64, duration: f64) -> Self {
        let dims = room.dims();
        let centre = |p: [f64; 3]| [p[0] - dims[0] / 2.0, p[1] - dims[1] / 2.0, p[2] - dims[2] / 2.0];
        Self::new(centre(source), centre(receiver), fs, duration)
    }

    pub fn validate(&self, room: &ShoeboxRoom) -> Result<()> {
        let dims = room.dims();
        for (name, p) in [("source", self.source), ("receiver", self.receiver)] {
            for axis in 0..3 {
                if !(p[axis].abs() < dims[axis] / 2.0) {
                    return Err(Error::domain(name, format!("{p:?} lies outside the room")));
                }
            }
        }
        if self.source == self.receiver {
            return Err(Error::domain("receiver", "source and receiver coincide"));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::domain("fs", format!("{} Hz must be positive", self.fs)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::domain("duration", format!("{} s must be positive", self.duration)));
        }
        Ok(())
    }

    /// Lattice bound actually used.
    pub fn order(&self, room: &ShoeboxRoom) -> u32 {
        self.max_order.unwrap_or_else(|| auto_order(room, self.duration))
    }

    /// Warning text when a user-set order cannot cover the requested span.
    pub fn truncation_warning(&self, room: &ShoeboxRoom) -> Option<String> {
        let n = self.max_order?;
        let min_l = room.dims().iter().copied().fold(f64::INFINITY, f64::min);
        let reach = n as f64 * min_l;
        let needed = self.duration * room.speed_of_sound();
        (reach < needed).then(|| {
            format!("image order {n} reaches {reach:.1} m but {needed:.1} m are requested; the tail is truncated")
        })
    }
}

/// `ceil(duration c / (2 min L)) + 1`.
pub fn auto_order(room: &ShoeboxRoom, duration: f64) -> u32 {
    let min_l = room.dims().iter().copied().fold(f64::INFINITY, f64::min);
    (duration * room.speed_of_sound() / (2.0 * min_l)).ceil() as u32 + 1
}

/// Sampled pressure response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpulseResponse {
    samples: Vec<f64>,
    fs: f64,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::domain("fs", format!("{fs} Hz must be positive")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("samples", "impulse response contains non-finite values"));
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    fn wav_spec(&self) -> hound::WavSpec {
        hound::WavSpec {
            channels: 1,
            sample_rate: self.fs.round() as u32,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        }
    }

    /// Mono 32-bit float WAV.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = hound::WavWriter::create(path, self.wav_spec())?;
        for &s in &self.samples {
            writer.write_sample(s as f32)?;
        }
        writer.finalize()?;
        Ok(())
    }

    /// The bytes [`ImpulseResponse::write_wav`] would write.
    pub fn wav_bytes(&self) -> Result<Vec<u8>> {
        let mut cursor = std::io::Cursor::new(Vec::new());
        let mut writer = hound::WavWriter::new(&mut cursor, self.wav_spec())?;
        for &s in &self.samples {
            writer.write_sample(s as f32)?;
        }
        writer.finalize()?;
        Ok(cursor.into_inner())
    }

    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = hound::WavReader::open(path)?;
        let fs = reader.spec().sample_rate as f64;
        let samples = reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(samples, fs)
    }
}

/// One image coordinate along an axis with its reflection gain.
#[derive(Debug, Clone, Copy)]
struct AxisImage {
    offset: f64,
    gain: f64,
}

/// Images along one axis: corner-frame coordinate `(1 - 2q) s + 2 m L`
/// relative to the receiver, with gain `b0^|m - q| b1^|m|`.
fn axis_images(length: f64, source: f64, receiver: f64, b0: f64, b1: f64, order: i64, reach: f64) -> Vec<AxisImage> {
    let s = source + length / 2.0;
    let r = receiver + length / 2.0;
    let mut images = Vec::with_capacity(4 * order as usize + 2);
    for m in -order..=order {
        for q in 0..=1i64 {
            let offset = (1 - 2 * q) as f64 * s + 2.0 * m as f64 * length - r;
            if offset.abs() > reach {
                continue;
            }
            let gain = b0.powi((m - q).abs() as i32) * b1.powi(m.abs() as i32);
            images.push(AxisImage { offset, gain });
        }
    }
    images
}

/// Image-source impulse response. Each image adds `gain / (4 pi d)` at the
/// sample nearest to `d / c`.
pub fn ism_rir(room: &ShoeboxRoom, cfg: &IsmConfig) -> Result<ImpulseResponse> {
    let samples = accumulate(room, cfg, |g, d| g / (4.0 * PI * d))?;
    ImpulseResponse::new(samples, cfg.fs)
}

/// Energy-domain image-source response: each image adds its energy
/// `(gain / (4 pi d))^2` at the sample nearest to `d / c`.
///
/// Unlike squaring [`ism_rir`], pulses that share a sample do not interfere,
/// so this is the phase-averaged energy the power response describes.
pub fn ism_energy(room: &ShoeboxRoom, cfg: &IsmConfig) -> Result<Vec<f64>> {
    accumulate(room, cfg, |g, d| {
        let a = g / (4.0 * PI * d);
        a * a
    })
}

fn accumulate<F: Fn(f64, f64) -> f64 + Sync>(room: &ShoeboxRoom, cfg: &IsmConfig, contribution: F) -> Result<Vec<f64>> {
    cfg.validate(room)?;
    let len = (cfg.duration * cfg.fs).ceil() as usize;
    let c = room.speed_of_sound();
    // farthest distance that still rounds to a sample inside the buffer
    let reach = (len as f64 - 0.5) / cfg.fs * c;
    let order = cfg.order(room) as i64;
    let dims = room.dims();
    let beta = room.beta();

    let axes: Vec<Vec<AxisImage>> = (0..3)
        .map(|a| {
            let mut images = axis_images(dims[a], cfg.source[a], cfg.receiver[a], beta[2 * a], beta[2 * a + 1], order, reach);
            images.sort_by(|p, q| p.offset.abs().total_cmp(&q.offset.abs()));
            images
        })
        .collect();
    let (xs, ys, zs) = (&axes[0], &axes[1], &axes[2]);
    let reach2 = reach * reach;
    let scale = cfg.fs / c;

    let chunk = xs.len().div_ceil(PARTITIONS).max(1);
    let partials: Vec<Vec<f64>> = xs
        .par_chunks(chunk)
        .map(|slab| {
            let mut buf = vec![0.0; len];
            for x in slab {
                let dx2 = x.offset * x.offset;
                for y in ys {
                    let dxy2 = dx2 + y.offset * y.offset;
                    if dxy2 > reach2 {
                        break;
                    }
                    let gxy = x.gain * y.gain;
                    for z in zs {
                        let d2 = dxy2 + z.offset * z.offset;
                        if d2 > reach2 {
                            break;
                        }
                        let d = d2.sqrt();
                        let n = (d * scale).round() as usize;
                        if n < len {
                            buf[n] += contribution(gxy * z.gain, d);
                        }
                    }
                }
            }
            buf
        })
        .collect();

    let mut samples = vec![0.0; len];
    for part in &partials {
        for (s, p) in samples.iter_mut().zip(part) {
            *s += p;
        }
    }
    Ok(samples)
}

/// Short-time energy: `h^2` averaged over a centred window of `window`
/// seconds. Near the ends the average runs over the samples available.
pub fn ism_power_response(h: &ImpulseResponse, window: f64) -> Result<DecayCurve> {
    if !(window > 0.0) {
        return Err(Error::domain("window", format!("{window} s must be positive")));
    }
    let n = h.len();
    let w = ((window * h.fs()).round() as usize).max(1);
    let before = w / 2;
    let after = w - 1 - before;
    let mut prefix = vec![0.0; n + 1];
    for (k, s) in h.samples().iter().enumerate() {
        prefix[k + 1] = prefix[k] + s * s;
    }
    let values = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(before);
            let hi = (k + after + 1).min(n);
            ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).max(0.0)
        })
        .collect();
    DecayCurve::new(values, 1.0 / h.fs(), 0.0, CurveKind::PowerResponse)
}

/// Reverse cumulative sum of `h^2` (per-sample energies, no `dt` factor).
pub fn ism_edc(h: &ImpulseResponse) -> DecayCurve {
    edc_of_energies(&h.samples().iter().map(|s| s * s).collect::<Vec<_>>(), h.fs())
}

/// Reverse cumulative sum of per-sample energies.
pub fn edc_of_energies(energy: &[f64], fs: f64) -> DecayCurve {
    let mut values = vec![0.0; energy.len()];
    let mut acc = 0.0;
    for (out, e) in values.iter_mut().zip(energy).rev() {
        acc += e;
        *out = acc;
    }
    DecayCurve::new(values, 1.0 / fs, 0.0, CurveKind::Edc).expect("partial sums of squares")
}

/// Source and receiver drawn uniformly inside the room (centred frame), at
/// least `min_distance` apart.
pub fn random_positions<R: Rng>(room: &ShoeboxRoom, rng: &mut R, min_distance: f64) -> ([f64; 3], [f64; 3]) {
    let dims = room.dims();
    let draw = |rng: &mut R| dims.map(|l| (rng.gen::<f64>() - 0.5) * l);
    loop {
        let s = draw(rng);
        let r = draw(rng);
        let d2: f64 = (0..3).map(|a| (s[a] - r[a]).powi(2)).sum();
        if d2.sqrt() >= min_distance {
            return (s, r);
        }
    }
}

/// `n` source/receiver draws from a ChaCha8 stream seeded with `seed`, at
/// least one metre apart.
pub fn random_trials(room: &ShoeboxRoom, seed: u64, n: usize, fs: f64, duration: f64) -> Vec<IsmConfig> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (s, r) = random_positions(room, &mut rng, 1.0);
            IsmConfig::new(s, r, fs, duration)
        })
        .collect()
}

/// Energy-domain responses ([`ism_energy`]) averaged over independent
/// source/receiver draws.
pub fn averaged_energy(room: &ShoeboxRoom, trials: &[IsmConfig]) -> Result<Vec<f64>> {
    let mut mean: Vec<f64> = Vec::new();
    for cfg in trials {
        let e = ism_energy(room, cfg)?;
        if mean.is_empty() {
            mean = vec![0.0; e.len()];
        }
        if e.len() != mean.len() {
            return Err(Error::domain("trials", "all trials must share fs and duration"));
        }
        for (m, s) in mean.iter_mut().zip(&e) {
            *m += s;
        }
    }
    let n = trials.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}
