use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gslab::scenario::{run_scenario, ScenarioConfig, ScenarioName};
use gslab::Error;

/// Runs named condensate experiments and writes CSV tables.
#[derive(Debug, Parser)]
#[command(name = "gslab", version)]
struct Cli {
    /// Flat `key = value` config file; absent means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario to run; overrides the config. All scenarios run when neither sets one.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::parse(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(name) = &cli.scenario {
        config.scenario = Some(name.parse::<ScenarioName>()?);
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match load(&cli).and_then(|c| run_scenario(&c)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gslab: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
