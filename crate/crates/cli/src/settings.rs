//! Global flags resolved against the room document.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use shoebox::decay::DEFAULT_SIGMA_SAMPLES;
use shoebox::room::{BandSpec, RoomConfig};
use shoebox::{IsmConfig, ShoeboxRoom};

use crate::failure::{Failure, Outcome};

pub const DEFAULT_FS: f64 = 48_000.0;

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Room JSON document; the 4 x 5 x 3 m example room when omitted.
    #[arg(long, global = true, value_name = "JSON")]
    pub room: Option<PathBuf>,
    /// Seed for every random draw. Required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sampling rate in Hz, overriding the document.
    #[arg(long, global = true, value_name = "HZ")]
    pub fs: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Number of decay-rate samples for power responses.
    #[arg(long = "sigma-samples", global = true, value_name = "N", default_value_t = DEFAULT_SIGMA_SAMPLES)]
    pub sigma_samples: usize,
    /// Speed of sound in m/s, overriding the document.
    #[arg(long, global = true, value_name = "M/S")]
    pub c: Option<f64>,
}

/// Fully resolved run configuration, echoed into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub room_file: Option<String>,
    pub room: ShoeboxRoom,
    pub bands: Vec<BandSpec>,
    /// Corner-frame positions from the document, if any.
    pub source: Option<[f64; 3]>,
    pub receiver: Option<[f64; 3]>,
    pub fs: f64,
    pub sigma_samples: usize,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Outcome<Self> {
        let doc = match &args.room {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
                RoomConfig::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
            }
            None => RoomConfig {
                room: ShoeboxRoom::example(),
                bands: Vec::new(),
                source: None,
                receiver: None,
                fs: None,
            },
        };
        let mut room = doc.room;
        if let Some(c) = args.c {
            room = room.with_speed_of_sound(c)?;
        }
        let fs = args.fs.or(doc.fs).unwrap_or(DEFAULT_FS);
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Failure::config(format!("--fs {fs} must be positive")));
        }
        if args.sigma_samples < 2 {
            return Err(Failure::config("--sigma-samples needs at least 2"));
        }
        let settings = Self {
            room_file: args.room.as_ref().map(|p| p.display().to_string()),
            room,
            bands: doc.bands,
            source: doc.source,
            receiver: doc.receiver,
            fs,
            sigma_samples: args.sigma_samples,
            seed: args.seed,
            out: args.out.clone(),
        };
        if let (Some(s), Some(r)) = (settings.source, settings.receiver) {
            IsmConfig::from_corner(&settings.room, s, r, fs, 1.0).validate(&settings.room)?;
        } else if settings.source.is_some() != settings.receiver.is_some() {
            return Err(Failure::config("give both \"source\" and \"receiver\" or neither"));
        }
        Ok(settings)
    }

    pub fn require_seed(&self, what: &str) -> Outcome<u64> {
        self.seed
            .ok_or_else(|| Failure::config(format!("{what} is stochastic and needs --seed")))
    }
}
