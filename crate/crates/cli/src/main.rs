use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gedanken::{emit_report, parse_config, run, Error, Scenario};

/// Run a which-way gedanken experiment and write its report.
#[derive(Debug, Parser)]
#[command(name = "gedanken", version)]
struct Cli {
    /// microscope | single-slit | double-slit | von-neumann | landau-peierls
    scenario: String,

    /// TOML configuration; omitted sections keep the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override one configuration value, e.g. `--set kernel.s=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let scenario: Scenario = cli.scenario.parse()?;
    let mut cfg = parse_config(scenario, cli.config.as_deref(), &cli.set)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let report = run(&cfg)?;
    for path in emit_report(&report, &cfg.output_dir)? {
        log::info!("wrote {}", path.display());
    }
    println!(
        "{}: done in {:.2} s, output in {}",
        scenario,
        report.duration_s,
        cfg.output_dir.display()
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
