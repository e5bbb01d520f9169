//! Octave-band Butterworth band-pass filters as cascaded biquads.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Order of the low-pass prototype; the band-pass has twice this order.
const PROTOTYPE_ORDER: usize = 3;

/// Second-order section `(1 - z^-2) g / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    gain: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        self.gain * (1.0 - zi * zi) / (1.0 + self.a1 * zi + self.a2 * zi * zi)
    }
}

/// Sixth-order octave band-pass with -3 dB edges at `fc / sqrt 2` and
/// `fc sqrt 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OctaveFilter {
    fc: f64,
    fs: f64,
    sections: Vec<Biquad>,
}

impl OctaveFilter {
    pub fn new(fc: f64, fs: f64) -> Result<Self> {
        let (lo, hi) = (fc / SQRT_2, fc * SQRT_2);
        if !(fc > 0.0 && hi < fs / 2.0) {
            return Err(Error::domain(
                "band",
                format!("octave at {fc} Hz does not fit below Nyquist ({} Hz)", fs / 2.0),
            ));
        }
        // prewarped analog edges
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w1, w2) = (warp(lo), warp(hi));
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;

        let mut poles = Vec::with_capacity(2 * PROTOTYPE_ORDER);
        for k in 0..PROTOTYPE_ORDER {
            let angle = PI * (2 * k + PROTOTYPE_ORDER + 1) as f64 / (2 * PROTOTYPE_ORDER) as f64;
            let p = Complex64::from_polar(1.0, angle);
            // s^2 - p bw s + w0^2 = 0
            let pb = p * bw;
            let root = (pb * pb - 4.0 * w0 * w0).sqrt();
            for s in [(pb + root) / 2.0, (pb - root) / 2.0] {
                poles.push((2.0 * fs + s) / (2.0 * fs - s));
            }
        }
        let mut upper: Vec<Complex64> = poles.into_iter().filter(|z| z.im > 0.0).collect();
        upper.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        if upper.len() != PROTOTYPE_ORDER {
            return Err(Error::domain("band", format!("octave at {fc} Hz is too narrow to realise")));
        }

        let centre = Complex64::from_polar(1.0, 2.0 * (w0 / (2.0 * fs)).atan());
        let sections = upper
            .into_iter()
            .map(|z| {
                let mut section = Biquad {
                    gain: 1.0,
                    a1: -2.0 * z.re,
                    a2: z.norm_sqr(),
                };
                section.gain = 1.0 / section.response(centre).norm();
                section
            })
            .collect();
        Ok(Self { fc, fs, sections })
    }

    pub fn center(&self) -> f64 {
        self.fc
    }

    /// Magnitude response at `f` Hz.
    pub fn magnitude(&self, f: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * f / self.fs);
        self.sections.iter().map(|s| s.response(z)).product::<Complex64>().norm()
    }

    /// Causal filtering, transposed direct form II per section.
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let mut signal = input.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for x in signal.iter_mut() {
                let xin = *x * s.gain;
                let y = xin + z1;
                z1 = -s.a1 * y + z2;
                z2 = -xin - s.a2 * y;
                *x = y;
            }
        }
        signal
    }
}
