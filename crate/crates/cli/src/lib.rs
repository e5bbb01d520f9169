//! Command-line surface of the shoebox engine.
//!
//! Every subcommand resolves its configuration first, computes everything in
//! memory, and only then writes its files together with `manifest.json`.

pub mod artifacts;
pub mod commands;
pub mod experiments;
pub mod failure;
pub mod settings;
pub mod table;

use clap::{Parser, Subcommand};
use serde_json::json;

use artifacts::{Artifacts, RunManifest};
use commands::{DensityArgs, EdcArgs, ExperimentArgs, RtArgs, SynthArgs, ValidateArgs};
use failure::{Failure, Outcome};
use settings::{GlobalArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "shoebox", version, about = "Damping densities, decay curves and impulse responses of shoebox rooms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the damping density and its special points.
    Density(DensityArgs),
    /// Energy decay curve from the closed form, image sources or noise.
    Edc(EdcArgs),
    /// Classic and analytic reverberation times, with optional sweeps.
    Rt(RtArgs),
    /// Synthesize an impulse response as a WAV file.
    Synth(SynthArgs),
    /// Check the engine against its references.
    Validate(ValidateArgs),
    /// Regenerate the data behind one figure.
    Experiment(ExperimentArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::Edc(_) => "edc",
            Command::Rt(_) => "rt",
            Command::Synth(_) => "synth",
            Command::Validate(_) => "validate",
            Command::Experiment(_) => "experiment",
        }
    }
}

/// Runs one command and writes its outputs.
pub fn run(cli: &Cli) -> Outcome<RunManifest> {
    let settings = Settings::resolve(&cli.global)?;
    let mut art = Artifacts::new();
    let (args, breach) = match &cli.command {
        Command::Density(a) => (commands::density(&settings, a, &mut art).map(|_| json!(a))?, None),
        Command::Edc(a) => (commands::edc(&settings, a, &mut art).map(|_| json!(a))?, None),
        Command::Rt(a) => (commands::rt(&settings, a, &mut art).map(|_| json!(a))?, None),
        Command::Synth(a) => (commands::synth(&settings, a, &mut art).map(|_| json!(a))?, None),
        Command::Validate(a) => {
            let checks = commands::validate(&settings, a, &mut art)?;
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{} = {:e} (limit {:e})", c.name, c.value, c.limit))
                .collect();
            (json!(a), (!failed.is_empty()).then(|| failed.join(", ")))
        }
        Command::Experiment(a) => (commands::experiment(&settings, a, &mut art).map(|_| json!(a))?, None),
    };
    let config = json!({ "settings": settings, "args": args });
    let manifest = art.commit(&settings.out, cli.command.name(), config, settings.seed)?;
    match breach {
        Some(msg) => Err(Failure::Validation(msg)),
        None => Ok(manifest),
    }
}
