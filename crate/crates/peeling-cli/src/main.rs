mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use peeling::chains::Algorithm;
use peeling::limits::ConstantsTable;
use peeling::verify::{run_suite, Suite};
use peeling::ModelId;

/// Exit codes.
const USAGE: u8 = 2;
const BUDGET: u8 = 3;
const INTEGRITY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "peeling",
    version,
    about = "Peeling explorations of random planar maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scaling constants of a model, exact and in floating point.
    Constants(ConstantsArgs),
    /// Run replicas of a peeling exploration and write traces plus a summary.
    Simulate(simulate::SimulateArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value = "type2")]
    model: ModelId,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Wall-clock budget in seconds; criteria not started in time are skipped.
    #[arg(long)]
    budget: Option<f64>,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

fn constants(args: &ConstantsArgs) -> Result<u8> {
    let table = ConstantsTable::new(args.model)?;
    let entries = table.entries();
    match args.format {
        TextFormat::Json => {
            let doc = serde_json::json!({ "schema": 1, "model": args.model, "constants": entries });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        TextFormat::Text => {
            println!("constants for {}", args.model);
            let pad =
                |s: &str, width: usize| format!("{s}{}", " ".repeat(width - s.chars().count()));
            let exact_width = entries
                .iter()
                .map(|e| e.exact.chars().count())
                .max()
                .unwrap_or(0);
            let roots: Vec<String> = entries
                .iter()
                .map(|e| e.root.as_ref().map_or(String::new(), |r| format!(" = {r}")))
                .collect();
            let root_width = roots.iter().map(|r| r.chars().count()).max().unwrap_or(0);
            for (e, root) in entries.iter().zip(&roots) {
                println!(
                    "{:<3} = {}{} = {:.15}",
                    e.name,
                    pad(&e.exact, exact_width),
                    pad(root, root_width),
                    e.value
                );
            }
        }
    }
    Ok(0)
}

fn verify(args: &VerifyArgs) -> Result<u8> {
    let budget = match args.budget {
        Some(b) if !(b.is_finite() && b >= 0.0) => anyhow::bail!(peeling::Error::Argument(
            format!("budget must be >= 0, got {b}")
        )),
        b => b.map(Duration::from_secs_f64),
    };
    let text = args.format == TextFormat::Text;
    let report = run_suite(args.suite, args.seed, budget, |o| {
        if text {
            println!("{o}");
        }
    });
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &args.out {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if text {
        let passed = report.outcomes.iter().filter(|o| o.passed).count();
        println!("{passed} of {} criteria passed", report.outcomes.len());
        if !report.skipped.is_empty() {
            println!("budget exhausted; skipped {:?}", report.skipped);
        }
    } else {
        print!("{json}");
    }
    Ok(if report.integrity_failure() {
        INTEGRITY
    } else if report.budget_exceeded {
        BUDGET
    } else if report.all_passed() {
        0
    } else {
        1
    })
}

/// Maps library errors onto the documented exit codes.
fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<peeling::Error>() {
        Some(peeling::Error::Argument(_) | peeling::Error::Domain(_)) => USAGE,
        Some(peeling::Error::Resource(_)) => BUDGET,
        Some(peeling::Error::Integrity(_)) => INTEGRITY,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Constants(args) => constants(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error_code(&err))
        }
    }
}

/// Accepted `--algo` values, for help text.
fn algorithms() -> String {
    [
        Algorithm::Pv,
        Algorithm::Layers,
        Algorithm::Dual,
        Algorithm::Fpp,
        Algorithm::Boltzmann,
        Algorithm::Sphere,
        Algorithm::MapLayers,
    ]
    .map(|a| a.as_str())
    .join(", ")
}
