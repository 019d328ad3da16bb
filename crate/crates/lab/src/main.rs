use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greenlab_cli::config::ExperimentConfig;
use greenlab_cli::converge::{convergence_study, parse_sizes, ObservedOrder};
use greenlab_cli::error::{LabError, EXIT_PASS, EXIT_TOLERANCE};
use greenlab_cli::output::{unix_now, write_json, write_report, RunManifest};
use greenlab_cli::scenarios::{run_scenario, Scenario, COMMON_KEYS};

#[derive(Parser)]
#[command(name = "lab", version, about = "Boundary-control experiments on the discrete Dirac system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a config file.
    Run { config: PathBuf },
    /// Run a scenario over several grid sizes and fit the convergence order.
    Converge {
        scenario: String,
        /// Comma-separated ascending grid sizes.
        #[arg(long, default_value = "64,128,256")]
        sizes: String,
        config: PathBuf,
    },
    /// Print the scenario catalog.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn run(config: PathBuf) -> Result<i32, LabError> {
    let started = unix_now();
    let cfg = ExperimentConfig::load(&config)?;
    let report = run_scenario(&cfg)?;
    let root = cfg.output_root();
    let files = write_report(&root, &report)?;
    let mut manifest = RunManifest::new("run", &cfg, started);
    manifest.record(&report, &files);
    manifest.write(&root)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for m in &report.metrics {
        let status = if m.passed { "ok  " } else { "FAIL" };
        println!("{status} {:<28} {:>12.4e}  ({:?} {:e})", m.name, m.value, m.comparison, m.tolerance);
    }
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    println!("{verdict} {} -> {}", report.scenario, root.display());
    Ok(if report.passed { EXIT_PASS } else { EXIT_TOLERANCE })
}

fn converge(scenario: &str, sizes: &str, config: PathBuf) -> Result<i32, LabError> {
    let started = unix_now();
    let scenario = Scenario::parse(scenario)
        .ok_or_else(|| LabError::Usage(format!("unknown scenario '{scenario}'; run `lab list` for the catalog")))?;
    let sizes = parse_sizes(sizes)?;
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.scenario = scenario.name().to_string();
    cfg.validate()?;
    let report = convergence_study(scenario, &sizes, &cfg)?;
    let root = cfg.output_root();
    let path = root.join(format!("{}.convergence.json", scenario.name()));
    write_json(&path, &report)?;
    let manifest = RunManifest::new("converge", &cfg, started);
    manifest.write(&root)?;

    for (n, e) in report.sizes.iter().zip(&report.errors) {
        println!("N = {n:>5}  {} = {e:.4e}", report.metric);
    }
    match &report.observed {
        ObservedOrder::Exact => println!("order: exact (errors below rounding floor)"),
        ObservedOrder::Fitted { order, pairwise } => {
            println!("order: {order:.3} (pairwise {pairwise:.3?}), expected {} +- {}", report.expected_order, report.band)
        }
        ObservedOrder::NonConvergent { pairwise } => println!("order: non-convergent (pairwise {pairwise:.3?})"),
    }
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    println!("{verdict} {} convergence -> {}", scenario.name(), path.display());
    Ok(if report.passed { EXIT_PASS } else { EXIT_TOLERANCE })
}

fn list(json: bool) -> Result<i32, LabError> {
    let catalog = Scenario::catalog();
    let mut text = String::new();
    if json {
        text = serde_json::to_string_pretty(&catalog).expect("catalog serializes");
        text.push('\n');
    } else {
        for entry in catalog {
            let keys: Vec<&str> = COMMON_KEYS.iter().chain(entry.keys).copied().collect();
            text += &format!(
                "{}\n    checks: {}\n    primary metric: {}\n    keys: {}\n",
                entry.name,
                entry.claim,
                entry.primary_metric,
                keys.join(", ")
            );
        }
    }
    // a closed pipe (`lab list | head`) is not an error
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(config),
        Command::Converge { scenario, sizes, config } => converge(&scenario, &sizes, config),
        Command::List { json } => list(json),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
