use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use presym_cli::commands::{run, Command};
use presym_cli::{CliError, Report, RunConfig};

/// Experiments on presymplectic models of spinning charged particles.
#[derive(Parser)]
#[command(name = "presym", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Rank, closedness and Maxwell checks at seeded random points (exit 1 on failure).
    Audit(Common),
    /// Kernel flow against the BMT flow over a field-strength scan (exit 3 if the slope misses 2).
    Bmt(Common),
    /// Energy and angular-momentum drift along the kernel flow (exit 2 on excess drift).
    Conserve(Common),
    /// Spin-orbit coefficient of both presets (exit 3 on a bad or ill-conditioned fit).
    Spinorbit(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: output.directory or ./presym-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.experiment.seed = seed;
    }
    if let Some(format) = common.format {
        config.output.format = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
        .into();
    }
    config.revalidate()?;
    Ok(config)
}

fn print(report: &Report) {
    println!("{}: {}", report.command, if report.passed { "PASS" } else { "FAIL" });
    for (name, value) in &report.summary {
        let text = match value {
            presym_cli::Cell::Num(v) => format!("{v:.6e}"),
            presym_cli::Cell::Text(s) => s.clone(),
        };
        println!("  {name:<32} {text}");
    }
}

fn execute(command: Command, common: &Common) -> Result<i32, CliError> {
    let config = load(common)?;
    let report = run(command, &config)?;
    let dir = match (&common.out, &config.output.directory) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => match &config.base_dir {
            Some(base) => base.join(dir),
            None => PathBuf::from(dir),
        },
        (None, None) => PathBuf::from("presym-out"),
    };
    let paths = report.write(&dir, &config.output.format)?;
    print(&report);
    for path in paths {
        println!("  wrote {}", path.display());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::Audit(c) => (Command::Audit, c),
        Sub::Bmt(c) => (Command::Bmt, c),
        Sub::Conserve(c) => (Command::Conserve, c),
        Sub::Spinorbit(c) => (Command::Spinorbit, c),
    };
    match execute(command, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("presym {}: {err}", command.name());
            if let Some(advice) = err.advice() {
                eprintln!("  hint: {advice}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
