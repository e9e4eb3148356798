//! Monte-Carlo experiment driver: pseudo-SNR sweeps, convergence traces,
//! and sum-rate density estimation, all emitted as CSV.
//!
//! The pseudo-SNR of a scenario is `(P_B + P_R)/σ²`; [`apply_psnr`] turns a
//! dB value plus a power split `ρ` into concrete budgets. A sweep runs every
//! requested algorithm on `trials` independent channel snapshots per
//! pseudo-SNR value.
//!
//! # Fairness and reproducibility
//!
//! Trial `i` derives a channel seed and a filter-initialization seed from
//! the master seed; both are independent of the pseudo-SNR value and of the
//! algorithm, so every algorithm at every pseudo-SNR sees the identical
//! channel snapshot and identical starting point for a given trial index.
//! The channel seed is emitted in the detail CSV's `seed` column, which
//! makes the sharing checkable from the output alone.
//!
//! Trials are dispatched to a worker pool, then gathered and sorted by
//! `(psnr_db, trial, algorithm)` before any byte is written: the same spec
//! and seed produce byte-identical CSVs at any parallelism level.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::algorithms::{
    maximize_sum_rate, minimize_leakage, minimize_sum_mse, RunOptions, RunResult,
};
use crate::error::{Error, Result};
use crate::scenario::{draw_channels, rng, ChannelSet, ScenarioConfig};

/// The three filter-design algorithms, in their canonical output order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Alternating surrogate maximization of the sum rate.
    MaxSumRate,
    /// Sum-MSE minimization baseline.
    SumMse,
    /// Interference-leakage minimization baseline.
    LeakageMin,
}

impl Algorithm {
    /// All algorithms in canonical order.
    pub const ALL: [Algorithm; 3] =
        [Algorithm::MaxSumRate, Algorithm::SumMse, Algorithm::LeakageMin];

    /// Stable CSV/CLI label.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::MaxSumRate => "maxsr",
            Algorithm::SumMse => "summse",
            Algorithm::LeakageMin => "ia",
        }
    }

    /// Parses a CSV/CLI label.
    pub fn parse(label: &str) -> Result<Algorithm> {
        match label.trim() {
            "maxsr" => Ok(Algorithm::MaxSumRate),
            "summse" => Ok(Algorithm::SumMse),
            "ia" => Ok(Algorithm::LeakageMin),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected maxsr, summse, or ia)"
            ))),
        }
    }
}

/// One Monte-Carlo experiment description.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Scenario shape; its power budgets are overwritten per pseudo-SNR.
    pub cfg: ScenarioConfig,
    /// Pseudo-SNR grid in dB.
    pub psnr_db: Vec<f64>,
    /// Independent channel snapshots per pseudo-SNR value.
    pub trials: usize,
    /// Algorithms to run on every snapshot.
    pub algorithms: Vec<Algorithm>,
    /// Fraction ρ of the total power assigned to the base stations
    /// (two-hop mode; ignored in single-hop mode).
    pub power_split: f64,
    /// Master seed; all per-trial seeds derive from it.
    pub seed: u64,
    /// Stagnation threshold handed to every run.
    pub epsilon: f64,
    /// Iteration cap handed to every run.
    pub max_iters: usize,
}

impl SweepSpec {
    /// Spot-checks the experiment description (scenario shape checks happen
    /// inside the runs themselves).
    pub fn validate(&self) -> Result<()> {
        if self.psnr_db.is_empty() {
            return Err(Error::Config("psnr_db list must not be empty".into()));
        }
        if self.psnr_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("psnr_db values must be finite".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithms list must not be empty".into()));
        }
        let mut seen = self.algorithms.to_vec();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::Config("algorithms list contains duplicates".into()));
        }
        if !(self.power_split > 0.0 && self.power_split < 1.0) {
            return Err(Error::Config("power split must lie strictly between 0 and 1".into()));
        }
        if !(self.epsilon > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("epsilon must be positive and max_iters at least 1".into()));
        }
        Ok(())
    }

    fn options(&self, init_seed: u64, record_trace: bool) -> RunOptions {
        RunOptions { epsilon: self.epsilon, max_iters: self.max_iters, init_seed, record_trace }
    }
}

/// Budgets from a pseudo-SNR: `total = 10^(psnr_db/10)·σ²`, split
/// `P_B = ρ·total`, `P_R = (1−ρ)·total` in two-hop mode; single-hop assigns
/// the whole total to the base stations.
pub fn apply_psnr(cfg: &ScenarioConfig, psnr_db: f64, rho: f64) -> Result<ScenarioConfig> {
    cfg.with_psnr(psnr_db, rho)
}

/// Runs one algorithm on one snapshot.
pub fn run_algorithm(
    algo: Algorithm,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    match algo {
        Algorithm::MaxSumRate => maximize_sum_rate(ch, cfg, opts),
        Algorithm::SumMse => minimize_sum_mse(ch, cfg, opts),
        Algorithm::LeakageMin => minimize_leakage(ch, cfg, opts),
    }
}

/// Exact header of the per-trial sweep CSV.
pub const DETAIL_HEADER: &str =
    "psnr_db,algorithm,trial,seed,sum_rate_per_slot,iterations,converged";
/// Exact header of the aggregated sweep CSV.
pub const AGGREGATE_HEADER: &str = "psnr_db,algorithm,mean_rate,std_rate,n";
/// Exact header of the convergence-trace CSV.
pub const CONVERGENCE_HEADER: &str = "algorithm,iteration,mean_rate";
/// Exact header of the per-trial density CSV.
pub const DENSITY_RATES_HEADER: &str = "algorithm,trial,sum_rate_per_slot";
/// Exact header of the density histogram CSV.
pub const DENSITY_HISTOGRAM_HEADER: &str = "algorithm,bin_low,bin_high,count";
/// Exact header of the single-run trace CSV.
pub const TRACE_HEADER: &str = "iteration,objective,sum_rate_per_slot,bs_power,relay_power";

/// Histogram bin width of [`run_density`], in bits per channel use.
pub const DENSITY_BIN_WIDTH: f64 = 0.25;

/// Iteration horizon of the convergence dataset.
pub const CONVERGENCE_ITERATIONS: usize = 50;

#[derive(Clone, Debug)]
struct DetailRow {
    psnr_db: f64,
    algorithm: Algorithm,
    trial: usize,
    seed: u64,
    rate: f64,
    iterations: usize,
    converged: bool,
}

/// Sweep output: the per-trial rows and the per-(psnr, algorithm) summary.
#[derive(Clone, Debug)]
pub struct SweepData {
    /// CSV with [`DETAIL_HEADER`].
    pub detail_csv: String,
    /// CSV with [`AGGREGATE_HEADER`].
    pub aggregate_csv: String,
}

/// Density output: raw final rates and their histogram.
#[derive(Clone, Debug)]
pub struct DensityData {
    /// CSV with [`DENSITY_RATES_HEADER`].
    pub rates_csv: String,
    /// CSV with [`DENSITY_HISTOGRAM_HEADER`].
    pub histogram_csv: String,
}

fn trial_seeds(master: u64, trial: usize) -> (u64, u64) {
    let channel = rng::subkey(master, &[rng::KIND_TRIAL_CHANNELS, trial as u64]);
    let init = rng::subkey(master, &[rng::KIND_TRIAL_INIT, trial as u64]);
    (channel, init)
}

fn checked_rate(run: &RunResult, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
    let rate = run.final_rate(ch, cfg)?;
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::Domain(format!("run produced an invalid sum rate {rate}")));
    }
    Ok(rate)
}

/// Runs the full (pseudo-SNR × trial × algorithm) grid and renders both
/// sweep CSVs. Deterministic in `(spec, seed)` at any parallelism level.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepData> {
    spec.validate()?;
    spec.cfg.validate()?;
    let jobs: Vec<(f64, usize)> = spec
        .psnr_db
        .iter()
        .flat_map(|&psnr| (0..spec.trials).map(move |trial| (psnr, trial)))
        .collect();
    let per_job: Vec<Result<Vec<DetailRow>>> = jobs
        .par_iter()
        .map(|&(psnr, trial)| {
            let cfg = apply_psnr(&spec.cfg, psnr, spec.power_split)?;
            let (channel_seed, init_seed) = trial_seeds(spec.seed, trial);
            let ch = draw_channels(&cfg, channel_seed)?;
            let opts = spec.options(init_seed, false);
            let mut rows = Vec::with_capacity(spec.algorithms.len());
            for &algo in &spec.algorithms {
                let run = run_algorithm(algo, &ch, &cfg, &opts)?;
                rows.push(DetailRow {
                    psnr_db: psnr,
                    algorithm: algo,
                    trial,
                    seed: channel_seed,
                    rate: checked_rate(&run, &ch, &cfg)?,
                    iterations: run.iterations_used,
                    converged: run.converged,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::with_capacity(jobs.len() * spec.algorithms.len());
    for job in per_job {
        rows.extend(job?);
    }
    rows.sort_by(|a, b| {
        a.psnr_db
            .total_cmp(&b.psnr_db)
            .then(a.trial.cmp(&b.trial))
            .then(a.algorithm.cmp(&b.algorithm))
    });

    let mut detail = String::from(DETAIL_HEADER);
    detail.push('\n');
    for r in &rows {
        writeln!(
            detail,
            "{},{},{},{},{},{},{}",
            r.psnr_db,
            r.algorithm.label(),
            r.trial,
            r.seed,
            r.rate,
            r.iterations,
            r.converged
        )
        .expect("string writes cannot fail");
    }

    let mut psnr_values = spec.psnr_db.clone();
    psnr_values.sort_by(f64::total_cmp);
    psnr_values.dedup();
    let mut algos: Vec<Algorithm> = spec.algorithms.clone();
    algos.sort();
    let mut aggregate = String::from(AGGREGATE_HEADER);
    aggregate.push('\n');
    for &psnr in &psnr_values {
        for &algo in &algos {
            let rates: Vec<f64> = rows
                .iter()
                .filter(|r| r.psnr_db == psnr && r.algorithm == algo)
                .map(|r| r.rate)
                .collect();
            let n = rates.len();
            let mean = rates.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            writeln!(aggregate, "{},{},{},{},{}", psnr, algo.label(), mean, std, n)
                .expect("string writes cannot fail");
        }
    }
    Ok(SweepData { detail_csv: detail, aggregate_csv: aggregate })
}

/// Runs every trial with per-iteration recording at one fixed pseudo-SNR
/// and renders the per-iteration mean-rate curves (iterations 1 through
/// [`CONVERGENCE_ITERATIONS`]). Runs that stagnate early are padded with
/// their final value — the iterate no longer moves, so neither does its
/// rate.
pub fn run_convergence(spec: &SweepSpec) -> Result<String> {
    spec.validate()?;
    spec.cfg.validate()?;
    if spec.psnr_db.len() != 1 {
        return Err(Error::Config(
            "convergence traces need exactly one pseudo-SNR value".into(),
        ));
    }
    let psnr = spec.psnr_db[0];
    let cfg = apply_psnr(&spec.cfg, psnr, spec.power_split)?;
    let horizon = CONVERGENCE_ITERATIONS;
    let per_trial: Vec<Result<Vec<Vec<f64>>>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let (channel_seed, init_seed) = trial_seeds(spec.seed, trial);
            let ch = draw_channels(&cfg, channel_seed)?;
            let mut opts = spec.options(init_seed, true);
            opts.max_iters = opts.max_iters.max(horizon);
            let mut curves = Vec::with_capacity(spec.algorithms.len());
            for &algo in &spec.algorithms {
                let run = run_algorithm(algo, &ch, &cfg, &opts)?;
                checked_rate(&run, &ch, &cfg)?;
                // trace[i] is the snapshot after iteration i (0 = start).
                let last = run.trace.len() - 1;
                let curve: Vec<f64> = (1..=horizon)
                    .map(|i| run.trace[i.min(last)].sum_rate_per_slot)
                    .collect();
                curves.push(curve);
            }
            Ok(curves)
        })
        .collect();

    let mut sums = vec![vec![0.0f64; horizon]; spec.algorithms.len()];
    for trial in per_trial {
        let curves = trial?;
        for (algo_idx, curve) in curves.iter().enumerate() {
            for (i, rate) in curve.iter().enumerate() {
                sums[algo_idx][i] += rate;
            }
        }
    }

    // Emit in canonical algorithm order regardless of the spec's order.
    let mut order: Vec<usize> = (0..spec.algorithms.len()).collect();
    order.sort_by_key(|&i| spec.algorithms[i]);
    let mut csv = String::from(CONVERGENCE_HEADER);
    csv.push('\n');
    for &idx in &order {
        let label = spec.algorithms[idx].label();
        for i in 0..horizon {
            let mean = sums[idx][i] / spec.trials as f64;
            writeln!(csv, "{},{},{}", label, i + 1, mean).expect("string writes cannot fail");
        }
    }
    Ok(csv)
}

/// Runs every trial at one fixed pseudo-SNR and renders the final-rate
/// samples plus their histogram (bin width [`DENSITY_BIN_WIDTH`] bits).
pub fn run_density(spec: &SweepSpec) -> Result<DensityData> {
    spec.validate()?;
    spec.cfg.validate()?;
    if spec.psnr_db.len() != 1 {
        return Err(Error::Config(
            "density estimation needs exactly one pseudo-SNR value".into(),
        ));
    }
    let cfg = apply_psnr(&spec.cfg, spec.psnr_db[0], spec.power_split)?;
    let per_trial: Vec<Result<Vec<f64>>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let (channel_seed, init_seed) = trial_seeds(spec.seed, trial);
            let ch = draw_channels(&cfg, channel_seed)?;
            let opts = spec.options(init_seed, false);
            spec.algorithms
                .iter()
                .map(|&algo| {
                    let run = run_algorithm(algo, &ch, &cfg, &opts)?;
                    checked_rate(&run, &ch, &cfg)
                })
                .collect()
        })
        .collect();
    let mut rates: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.trials); spec.algorithms.len()];
    for trial in per_trial {
        for (algo_idx, rate) in trial?.into_iter().enumerate() {
            rates[algo_idx].push(rate);
        }
    }

    let mut order: Vec<usize> = (0..spec.algorithms.len()).collect();
    order.sort_by_key(|&i| spec.algorithms[i]);

    let mut rates_csv = String::from(DENSITY_RATES_HEADER);
    rates_csv.push('\n');
    for &idx in &order {
        let label = spec.algorithms[idx].label();
        for (trial, rate) in rates[idx].iter().enumerate() {
            writeln!(rates_csv, "{},{},{}", label, trial, rate)
                .expect("string writes cannot fail");
        }
    }

    let mut histogram_csv = String::from(DENSITY_HISTOGRAM_HEADER);
    histogram_csv.push('\n');
    for &idx in &order {
        let label = spec.algorithms[idx].label();
        let bins: Vec<i64> =
            rates[idx].iter().map(|r| (r / DENSITY_BIN_WIDTH).floor() as i64).collect();
        let lo = *bins.iter().min().expect("at least one trial");
        let hi = *bins.iter().max().expect("at least one trial");
        for bin in lo..=hi {
            let count = bins.iter().filter(|&&b| b == bin).count();
            writeln!(
                histogram_csv,
                "{},{},{},{}",
                label,
                bin as f64 * DENSITY_BIN_WIDTH,
                (bin + 1) as f64 * DENSITY_BIN_WIDTH,
                count
            )
            .expect("string writes cannot fail");
        }
    }
    Ok(DensityData { rates_csv, histogram_csv })
}

/// Renders one run's per-iteration trace (requires `record_trace`).
pub fn trace_csv(run: &RunResult) -> String {
    let mut csv = String::from(TRACE_HEADER);
    csv.push('\n');
    for rec in &run.trace {
        writeln!(
            csv,
            "{},{},{},{},{}",
            rec.iteration, rec.objective, rec.sum_rate_per_slot, rec.bs_power, rec.relay_power
        )
        .expect("string writes cannot fail");
    }
    csv
}

/// Writes `contents` to `dir/name`, creating the directory if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path.clone(), e))?;
    Ok(path)
}
