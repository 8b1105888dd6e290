//! The bundled fault ride-through model as a runner process.

use std::io;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

use doe_core::sut::{describe, serve, SutConfig};

#[derive(Debug, Parser)]
#[command(
    name = "example-sut",
    version,
    about = "Example system under test speaking the runner protocol on stdin/stdout"
)]
struct Args {
    /// JSON file overriding model parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print factor and metric declarations and exit.
    #[arg(long)]
    describe: bool,
    /// Measurement noise sd (overrides the config file).
    #[arg(long)]
    noise: Option<f64>,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    if args.describe {
        println!("{}", describe());
        return Ok(());
    }
    let mut config = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<SutConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SutConfig::default(),
    };
    if let Some(n) = args.noise {
        config.noise_sd = n;
    }
    config.validate().context("invalid model configuration")?;
    serve(io::stdin().lock(), io::stdout().lock(), &config)?;
    Ok(())
}
