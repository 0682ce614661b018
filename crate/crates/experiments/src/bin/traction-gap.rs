use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use traction_experiments::{check_loads, emit_report, parse_scenario, run_scenario, DemoKind, Format, Report, Scenario};

#[derive(Parser)]
#[command(name = "traction-gap", version, about = "Gap functional experiments for pure traction elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long, global = true, default_value = "json,csv,svg", value_delimiter = ',')]
    formats: Vec<Format>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the scenario described by a config file.
    Run { config: PathBuf },
    /// Runs a demo with its default scenario.
    Demo { name: String },
    /// Reports equilibrium and compatibility of a scenario's load.
    CheckLoads { config: PathBuf },
}

const EXIT_ASSERTION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn load(path: &PathBuf) -> Result<Scenario, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn summarize(r: &Report) {
    for (k, v) in &r.verdicts {
        println!("{k}: {v}");
    }
    for f in r.failures() {
        eprintln!(
            "FAILED {} (h = {:?}): value {:e}, tolerance {:?}",
            f.metric, f.h, f.value, f.tolerance
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = match &cli.command {
        Command::Run { config } | Command::CheckLoads { config } => match load(config) {
            Ok(s) => s,
            Err(code) => return code,
        },
        Command::Demo { name } => match name.parse::<DemoKind>() {
            Ok(kind) => Scenario::preset(kind),
            Err(msg) => {
                eprintln!("{msg}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
    };
    let mut scenario = scenario;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let result = match cli.command {
        Command::CheckLoads { .. } => check_loads(&scenario),
        _ => run_scenario(&scenario),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    summarize(&report);
    match emit_report(&report, &cli.formats, &cli.out) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
