//! Room geometry, wall reflection coefficients and the per-axis damping
//! coefficients derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;

/// Reflection coefficients must lie in `(BETA_EPS, 1 - BETA_EPS)`.
pub const BETA_EPS: f64 = 1e-12;

/// Wall labels in coefficient order.
pub const WALL_NAMES: [&str; 6] = ["x0", "x1", "y0", "y1", "z0", "z1"];

/// Converts a reflection gain in dB to a linear magnitude.
pub fn db_to_linear(db: f64) -> Result<f64> {
    if !db.is_finite() || db > 0.0 {
        return Err(Error::domain(
            "reflection gain",
            format!("{db} dB is not a finite non-positive value"),
        ));
    }
    Ok(10f64.powf(db / 20.0))
}

pub fn linear_to_db(beta: f64) -> f64 {
    20.0 * beta.log10()
}

/// A rectangular room with one reflection coefficient per wall.
///
/// Walls are ordered `x0, x1, y0, y1, z0, z1`; `x0` is the wall at the lower
/// x coordinate. Coefficients are linear pressure magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShoeboxRoom {
    dims: [f64; 3],
    beta: [f64; 6],
    c: f64,
}

impl ShoeboxRoom {
    pub fn new(dims: [f64; 3], beta: [f64; 6], c: f64) -> Result<Self> {
        for (axis, &l) in ["Lx", "Ly", "Lz"].iter().zip(&dims) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::domain(*axis, format!("dimension {l} m must be positive")));
            }
        }
        let mut beta = beta;
        for (name, b) in WALL_NAMES.iter().zip(beta.iter_mut()) {
            *b = b.abs();
            if !(b.is_finite() && *b > BETA_EPS && *b < 1.0 - BETA_EPS) {
                return Err(Error::domain(
                    format!("beta_{name}"),
                    format!("reflection coefficient {b} must lie strictly inside (0, 1)"),
                ));
            }
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain("c", format!("speed of sound {c} m/s must be positive")));
        }
        Ok(Self { dims, beta, c })
    }

    pub fn from_db(dims: [f64; 3], beta_db: [f64; 6], c: f64) -> Result<Self> {
        let mut beta = [0.0; 6];
        for (b, &db) in beta.iter_mut().zip(&beta_db) {
            *b = db_to_linear(db)?;
        }
        Self::new(dims, beta, c)
    }

    /// The running example: 4 x 5 x 3 m with walls at -1, -1, -3, -2, -2, -5 dB.
    pub fn example() -> Self {
        Self::from_db([4.0, 5.0, 3.0], [-1.0, -1.0, -3.0, -2.0, -2.0, -5.0], DEFAULT_SPEED_OF_SOUND)
            .expect("example room is valid")
    }

    pub fn dims(&self) -> [f64; 3] {
        self.dims
    }

    pub fn beta(&self) -> [f64; 6] {
        self.beta
    }

    pub fn beta_db(&self) -> [f64; 6] {
        self.beta.map(linear_to_db)
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.c
    }

    pub fn with_speed_of_sound(self, c: f64) -> Result<Self> {
        Self::new(self.dims, self.beta, c)
    }

    pub fn with_beta(self, beta: [f64; 6]) -> Result<Self> {
        Self::new(self.dims, beta, self.c)
    }

    pub fn with_dims(self, dims: [f64; 3]) -> Result<Self> {
        Self::new(dims, self.beta, self.c)
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    /// Wall areas in coefficient order.
    pub fn wall_areas(&self) -> [f64; 6] {
        let [lx, ly, lz] = self.dims;
        [ly * lz, ly * lz, lx * lz, lx * lz, lx * ly, lx * ly]
    }

    pub fn surface_area(&self) -> f64 {
        self.wall_areas().iter().sum()
    }

    /// Energy absorption coefficients `1 - beta^2`.
    pub fn absorption(&self) -> [f64; 6] {
        self.beta.map(|b| 1.0 - b * b)
    }

    /// Reorders the axes: axis `i` of the result is axis `perm[i]` of `self`,
    /// carrying its coefficient pair along.
    pub fn permuted(&self, perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return Err(Error::domain("axis permutation", format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let dims = perm.map(|p| self.dims[p]);
        let mut beta = [0.0; 6];
        for (i, &p) in perm.iter().enumerate() {
            beta[2 * i] = self.beta[2 * p];
            beta[2 * i + 1] = self.beta[2 * p + 1];
        }
        Self::new(dims, beta, self.c)
    }

    pub fn axis_damping(&self) -> AxisDamping {
        compute_axis_damping(self)
    }
}

/// Per-axis damping coefficients in 1/m. Every component is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisDamping {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
}

impl AxisDamping {
    pub fn new(kx: f64, ky: f64, kz: f64) -> Result<Self> {
        for (name, k) in [("Kx", kx), ("Ky", ky), ("Kz", kz)] {
            if !(k.is_finite() && k < 0.0) {
                return Err(Error::domain(name, format!("damping coefficient {k} must be negative")));
            }
        }
        Ok(Self { kx, ky, kz })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.kx, self.ky, self.kz]
    }

    /// Euclidean norm of `(Kx, Ky, Kz)`.
    pub fn norm(&self) -> f64 {
        (self.kx * self.kx + self.ky * self.ky + self.kz * self.kz).sqrt()
    }
}

/// `K = ln(beta_0 * beta_1) / L` for each axis.
pub fn compute_axis_damping(room: &ShoeboxRoom) -> AxisDamping {
    let [lx, ly, lz] = room.dims;
    let b = room.beta;
    AxisDamping {
        kx: (b[0] * b[1]).ln() / lx,
        ky: (b[2] * b[3]).ln() / ly,
        kz: (b[4] * b[5]).ln() / lz,
    }
}

/// One octave band of a frequency-dependent room.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub fc: f64,
    pub beta: [f64; 6],
}

/// Room geometry with reflection coefficients given per frequency band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandedRoom {
    room: ShoeboxRoom,
    bands: Vec<Band>,
}

impl BandedRoom {
    pub fn new(room: ShoeboxRoom, bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::domain("bands", "at least one band is required"));
        }
        for pair in bands.windows(2) {
            if pair[1].fc <= pair[0].fc {
                return Err(Error::domain(
                    "bands",
                    format!("center frequencies must increase ({} Hz then {} Hz)", pair[0].fc, pair[1].fc),
                ));
            }
        }
        for band in &bands {
            if !(band.fc.is_finite() && band.fc > 0.0) {
                return Err(Error::domain("bands", format!("center frequency {} Hz", band.fc)));
            }
            room.with_beta(band.beta)?;
        }
        Ok(Self { room, bands })
    }

    pub fn geometry(&self) -> &ShoeboxRoom {
        &self.room
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// The room as seen by one band.
    pub fn band_room(&self, index: usize) -> ShoeboxRoom {
        self.room
            .with_beta(self.bands[index].beta)
            .expect("band coefficients validated on construction")
    }
}

/// How the reflection coefficients of one band are specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BandCoefficients {
    Reflection([f64; 6]),
    /// Target reverberation time in seconds, mapped to coefficients later.
    TargetT60(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSpec {
    pub fc: f64,
    pub coefficients: BandCoefficients,
}

/// Everything a room JSON document can carry.
///
/// Source and receiver are stored in corner-based coordinates, the way they
/// appear in the document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomConfig {
    pub room: ShoeboxRoom,
    pub bands: Vec<BandSpec>,
    pub source: Option<[f64; 3]>,
    pub receiver: Option<[f64; 3]>,
    pub fs: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    fc: f64,
    beta: Option<Vec<f64>>,
    beta_db: Option<Vec<f64>>,
    t60: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoom {
    #[serde(rename = "L")]
    dims: Vec<f64>,
    beta: Option<Vec<f64>>,
    beta_db: Option<Vec<f64>>,
    c: Option<f64>,
    #[serde(default)]
    bands: Vec<RawBand>,
    source: Option<Vec<f64>>,
    receiver: Option<Vec<f64>>,
    fs: Option<f64>,
}

fn six(values: &[f64], what: &str) -> Result<[f64; 6]> {
    values
        .try_into()
        .map_err(|_| Error::Config(format!("{what} needs 6 values, got {}", values.len())))
}

fn three(values: &[f64], what: &str) -> Result<[f64; 3]> {
    values
        .try_into()
        .map_err(|_| Error::Config(format!("{what} needs 3 values, got {}", values.len())))
}

fn coefficients(beta: Option<Vec<f64>>, beta_db: Option<Vec<f64>>, what: &str) -> Result<Option<[f64; 6]>> {
    match (beta, beta_db) {
        (Some(_), Some(_)) => Err(Error::Config(format!("{what}: give either \"beta\" or \"beta_db\", not both"))),
        (Some(b), None) => Ok(Some(six(&b, &format!("{what} beta"))?)),
        (None, Some(db)) => {
            let db = six(&db, &format!("{what} beta_db"))?;
            let mut lin = [0.0; 6];
            for (l, d) in lin.iter_mut().zip(db) {
                *l = db_to_linear(d)?;
            }
            Ok(Some(lin))
        }
        (None, None) => Ok(None),
    }
}

impl RoomConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawRoom = serde_json::from_str(text)?;
        let dims = three(&raw.dims, "L")?;
        let beta = coefficients(raw.beta, raw.beta_db, "room")?
            .ok_or_else(|| Error::Config("room needs exactly one of \"beta\" or \"beta_db\"".into()))?;
        let room = ShoeboxRoom::new(dims, beta, raw.c.unwrap_or(DEFAULT_SPEED_OF_SOUND))?;

        let mut bands = Vec::with_capacity(raw.bands.len());
        for (i, band) in raw.bands.into_iter().enumerate() {
            let what = format!("band {i}");
            let coeffs = coefficients(band.beta, band.beta_db, &what)?;
            let coefficients = match (coeffs, band.t60) {
                (Some(b), None) => {
                    room.with_beta(b)?;
                    BandCoefficients::Reflection(b)
                }
                (None, Some(t)) if t.is_finite() && t > 0.0 => BandCoefficients::TargetT60(t),
                (None, Some(t)) => return Err(Error::Config(format!("{what}: t60 {t} must be positive"))),
                _ => {
                    return Err(Error::Config(format!(
                        "{what}: needs exactly one of \"beta\", \"beta_db\" or \"t60\""
                    )))
                }
            };
            bands.push(BandSpec { fc: band.fc, coefficients });
        }
        for pair in bands.windows(2) {
            if pair[1].fc <= pair[0].fc {
                return Err(Error::Config("band center frequencies must increase".into()));
            }
        }

        let position = |p: Option<Vec<f64>>, what: &str| -> Result<Option<[f64; 3]>> {
            p.map(|v| three(&v, what)).transpose()
        };
        if let Some(fs) = raw.fs {
            if !(fs.is_finite() && fs > 0.0) {
                return Err(Error::Config(format!("fs {fs} must be positive")));
            }
        }
        Ok(Self {
            room,
            bands,
            source: position(raw.source, "source")?,
            receiver: position(raw.receiver, "receiver")?,
            fs: raw.fs,
        })
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
