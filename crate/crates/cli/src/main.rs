use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stratwave_cli::{dispatch, parse_config, CliError};

#[derive(Parser)]
#[command(name = "stratwave", version, about = "Steady stratified periodic water waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    config: PathBuf,
    /// Output directory; overrides the `output` key.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Laminar flow, its stagnation depths and a depth profile.
    Laminar(Common),
    /// Roots of the dispersion relation.
    Dispersion(Common),
    /// Newton solve of the height equation from the laminar state.
    SolveHeight(Common),
    /// Continue the bifurcating branch and store every step.
    Continue(Common),
    /// Small-amplitude wave in the stream-function formulation.
    SolveStream(Common),
    /// Stagnation points of the bifurcating laminar flow.
    Stagnation(Common),
    /// Moving-plane sweeps on the last stored branch step.
    SymmetryCheck(Common),
    /// Maximum-principle validation of the laminar linearization.
    ValidateMp(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::Laminar(c) => ("laminar", c),
            Command::Dispersion(c) => ("dispersion", c),
            Command::SolveHeight(c) => ("solve-height", c),
            Command::Continue(c) => ("continue", c),
            Command::SolveStream(c) => ("solve-stream", c),
            Command::Stagnation(c) => ("stagnation", c),
            Command::SymmetryCheck(c) => ("symmetry-check", c),
            Command::ValidateMp(c) => ("validate-mp", c),
        }
    }
}

fn run(name: &str, common: Common) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Usage(format!("{}: {e}", common.config.display())))?;
    let mut cfg = parse_config(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", common.config.display())))?;
    if let Some(out) = common.output {
        cfg.output = out;
    }
    dispatch(name, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.split();
    match run(name, common) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stratwave {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
