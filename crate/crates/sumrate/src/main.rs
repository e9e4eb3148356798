//! Command-line experiment driver.
//!
//! Subcommands map one-to-one onto the harness operations: `sweep` (mean
//! rate vs pseudo-SNR), `converge` (mean rate vs iteration), `density`
//! (distribution of final rates), and `single` (one run with a full
//! per-iteration trace). Without `--config`, a built-in two-cell reference
//! scenario with four relays is used.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sumrate::algorithms::RunOptions;
use sumrate::harness::{
    apply_psnr, run_algorithm, run_convergence, run_density, run_sweep, trace_csv, write_file,
    Algorithm, SweepSpec,
};
use sumrate::scenario::{load_config_path, Mode, ScenarioConfig};
use sumrate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sumrate",
    version,
    about = "Multi-cell downlink filter design: sum-rate maximization and baselines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mean sum rate per channel use over a pseudo-SNR grid.
    Sweep(CommonArgs),
    /// Mean sum rate per iteration at one pseudo-SNR value.
    Converge(CommonArgs),
    /// Distribution (samples + histogram) of final sum rates at one
    /// pseudo-SNR value.
    Density(CommonArgs),
    /// One run of one algorithm with a full per-iteration trace.
    Single(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario description (TOML); defaults to the built-in reference
    /// scenario: 2 cells x 3 mobiles, 4 relays, 3/2/2 antennas, two-hop.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every channel snapshot and initialization derives
    /// from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Channel snapshots per pseudo-SNR value.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Pseudo-SNR grid in dB, comma separated. Defaults: 0,5,...,30 for
    /// sweep; 30 for converge/density/single. For single with --config,
    /// omitting this keeps the powers from the config file.
    #[arg(long = "psnr-db", value_delimiter = ',', num_args = 1..)]
    psnr_db: Option<Vec<f64>>,
    /// Fraction of the total power budget assigned to the base stations
    /// (two-hop mode).
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Algorithms to run, comma separated subset of: maxsr,summse,ia.
    /// Defaults to all three (single: maxsr).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    algos: Option<Vec<String>>,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Per-iteration objective stagnation threshold.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Iteration cap per run.
    #[arg(long = "max-iters", default_value_t = 500)]
    max_iters: usize,
}

/// The scenario behind the shipped experiments: two cells serving three
/// mobiles each through four amplify-and-forward relays. Power budgets are
/// placeholders — every subcommand overwrites them from the pseudo-SNR.
fn reference_config() -> ScenarioConfig {
    ScenarioConfig {
        cells: 2,
        users_per_cell: 3,
        relays: 4,
        bs_antennas: 3,
        relay_antennas: 2,
        ms_antennas: 2,
        symbol_power: 1.0,
        bs_budget: 1.0,
        relay_budget: 1.0,
        noise_var: 1.0,
        mode: Mode::TwoHop,
    }
}

fn load_base_config(args: &CommonArgs) -> Result<ScenarioConfig> {
    match &args.config {
        Some(path) => load_config_path(path),
        None => Ok(reference_config()),
    }
}

fn parse_algos(args: &CommonArgs) -> Result<Vec<Algorithm>> {
    match &args.algos {
        Some(list) => list.iter().map(|s| Algorithm::parse(s)).collect(),
        None => Ok(Algorithm::ALL.to_vec()),
    }
}

fn build_spec(args: &CommonArgs, default_psnr: Vec<f64>) -> Result<SweepSpec> {
    Ok(SweepSpec {
        cfg: load_base_config(args)?,
        psnr_db: args.psnr_db.clone().unwrap_or(default_psnr),
        trials: args.trials,
        algorithms: parse_algos(args)?,
        power_split: args.rho,
        seed: args.seed,
        epsilon: args.epsilon,
        max_iters: args.max_iters,
    })
}

fn cmd_sweep(args: &CommonArgs) -> Result<()> {
    let spec = build_spec(args, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])?;
    let data = run_sweep(&spec)?;
    for (name, contents) in
        [("sweep_detail.csv", &data.detail_csv), ("sweep_aggregate.csv", &data.aggregate_csv)]
    {
        let path = write_file(&args.out, name, contents)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_converge(args: &CommonArgs) -> Result<()> {
    let spec = build_spec(args, vec![30.0])?;
    let csv = run_convergence(&spec)?;
    let path = write_file(&args.out, "convergence.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_density(args: &CommonArgs) -> Result<()> {
    let spec = build_spec(args, vec![30.0])?;
    let data = run_density(&spec)?;
    for (name, contents) in [
        ("density_rates.csv", &data.rates_csv),
        ("density_histogram.csv", &data.histogram_csv),
    ] {
        let path = write_file(&args.out, name, contents)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_single(args: &CommonArgs) -> Result<()> {
    let base = load_base_config(args)?;
    let algo = match &args.algos {
        None => Algorithm::MaxSumRate,
        Some(list) if list.len() == 1 => Algorithm::parse(&list[0])?,
        Some(_) => {
            return Err(Error::Config(
                "single runs exactly one algorithm; pass --algos with one label".into(),
            ))
        }
    };
    let cfg = match (&args.config, &args.psnr_db) {
        (_, Some(list)) => {
            if list.len() != 1 {
                return Err(Error::Config(
                    "single needs exactly one --psnr-db value".into(),
                ));
            }
            apply_psnr(&base, list[0], args.rho)?
        }
        // A config file carries its own resolved power budgets.
        (Some(_), None) => base,
        (None, None) => apply_psnr(&base, 30.0, args.rho)?,
    };
    let ch = sumrate::scenario::draw_channels(&cfg, args.seed)?;
    let opts = RunOptions {
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        init_seed: args.seed,
        record_trace: true,
    };
    let run = run_algorithm(algo, &ch, &cfg, &opts)?;
    let rate = run.final_rate(&ch, &cfg)?;
    let path = write_file(&args.out, "single_trace.csv", &trace_csv(&run))?;
    println!("wrote {}", path.display());
    println!(
        "algorithm={} iterations={} converged={} sum_rate_per_slot={}",
        algo.label(),
        run.iterations_used,
        run.converged,
        rate
    );
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Converge(args) => cmd_converge(args),
        Cmd::Density(args) => cmd_density(args),
        Cmd::Single(args) => cmd_single(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
