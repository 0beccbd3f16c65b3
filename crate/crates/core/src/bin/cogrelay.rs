use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cogrelay::config::ExperimentConfig;
use cogrelay::selfcheck::run_selfcheck;
use cogrelay::sweep::{run_sweep, RunOptions};

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Outage capacity and symbol-error sweeps for underlay cognitive two-way
/// relay networks, closed form and Monte Carlo side by side.
#[derive(Debug, Parser)]
#[command(name = "cogrelay", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Sweep section to run; optional when the file has exactly one.
    #[arg(long, value_name = "NAME")]
    sweep: Option<String>,

    /// Monte Carlo trials per grid point, overriding the sweep.
    #[arg(long, value_name = "N")]
    trials: Option<u64>,

    /// Monte Carlo seed, overriding the sweep.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Skip the Monte Carlo columns.
    #[arg(long, conflicts_with = "mc_only")]
    analytic_only: bool,

    /// Skip the closed-form columns.
    #[arg(long)]
    mc_only: bool,

    /// Compare every closed form with its quadrature oracle and exit.
    #[arg(long)]
    selfcheck: bool,

    /// Relative error injected into the closed forms during --selfcheck.
    #[arg(long, hide = true, default_value_t = 0.0, requires = "selfcheck")]
    perturb: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("cogrelay: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let config = cli
        .config
        .as_deref()
        .map(ExperimentConfig::from_path)
        .transpose()
        .map_err(|e| e.to_string())?;

    if cli.selfcheck {
        let report = run_selfcheck(config.as_ref(), cli.perturb);
        println!("{report}");
        return Ok(if report.all_passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_CHECK_FAILURE)
        });
    }

    let config = config.ok_or("--config is required unless --selfcheck is given")?;
    let mut plan = config.sweep_plan(cli.sweep.as_deref()).map_err(|e| e.to_string())?;
    if let Some(t) = cli.trials {
        plan.trials = t;
    }
    if let Some(s) = cli.seed {
        plan.seed = s;
    }
    let options = RunOptions {
        analytic: !cli.mc_only,
        monte_carlo: !cli.analytic_only,
    };
    let csv = run_sweep(&config, &plan, options).map_err(|e| e.to_string())?;
    match &cli.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| format!("cannot write output: {e}"))?,
    }
    Ok(ExitCode::SUCCESS)
}
