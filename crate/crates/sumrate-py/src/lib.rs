//! Python bindings for the `sumrate` library.
//!
//! The module exposes the minimal surface needed to script experiments from
//! Python: build a [`Scenario`] from the same TOML text the CLI accepts,
//! optionally re-derive its power budgets from a pseudo-SNR point, and run
//! any of the three filter-design algorithms on a freshly drawn channel
//! snapshot. Results come back as a [`RunSummary`] with the final rate, the
//! iteration count, and (optionally) the per-iteration trace.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sumrate::algorithms::RunOptions;
use sumrate::harness::{run_algorithm, Algorithm};
use sumrate::scenario::{draw_channels, load_config, ScenarioConfig};

fn py_err(e: sumrate::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated scenario: cell layout, antenna counts, powers, and mode.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    /// Parses the same TOML document the command-line tool accepts
    /// (keys `K`, `M`, `R`, `N_B`, `N_R`, `N_M`, `P_d`, `sigma2`, `mode`,
    /// and either explicit `P_B`/`P_R` or `psnr_db`/`rho`).
    #[new]
    fn new(toml_text: &str) -> PyResult<Self> {
        Ok(Scenario { cfg: load_config(toml_text).map_err(py_err)? })
    }

    /// Returns a copy whose power budgets split the total power implied by
    /// the pseudo-SNR `psnr_db` as `rho` to the base stations and `1 - rho`
    /// to the relays (single-hop scenarios put everything at the BSs).
    fn with_psnr(&self, psnr_db: f64, rho: f64) -> PyResult<Self> {
        Ok(Scenario { cfg: self.cfg.with_psnr(psnr_db, rho).map_err(py_err)? })
    }

    /// Number of cells (one base station each).
    #[getter]
    fn cells(&self) -> usize {
        self.cfg.cells
    }

    /// Mobile stations served per cell.
    #[getter]
    fn users_per_cell(&self) -> usize {
        self.cfg.users_per_cell
    }

    /// Total number of mobile stations.
    #[getter]
    fn num_users(&self) -> usize {
        self.cfg.num_users()
    }

    /// Number of amplify-and-forward relays (0 in single-hop mode).
    #[getter]
    fn relays(&self) -> usize {
        self.cfg.relays
    }

    /// `"two-hop"` or `"single-hop"`.
    #[getter]
    fn mode(&self) -> &'static str {
        self.cfg.mode.label()
    }

    /// Base-station sum power budget.
    #[getter]
    fn bs_budget(&self) -> f64 {
        self.cfg.bs_budget
    }

    /// Relay sum power budget.
    #[getter]
    fn relay_budget(&self) -> f64 {
        self.cfg.relay_budget
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(cells={}, users_per_cell={}, relays={}, mode='{}')",
            self.cfg.cells,
            self.cfg.users_per_cell,
            self.cfg.relays,
            self.cfg.mode.label()
        )
    }
}

/// Outcome of one algorithm run on one channel snapshot.
#[pyclass(frozen)]
struct RunSummary {
    #[pyo3(get)]
    algorithm: String,
    #[pyo3(get)]
    sum_rate_per_slot: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    /// `(iteration, objective, sum_rate_per_slot, bs_power, relay_power)`
    /// per recorded iterate; empty unless `record_trace` was set.
    #[pyo3(get)]
    trace: Vec<(usize, f64, f64, f64, f64)>,
}

#[pymethods]
impl RunSummary {
    fn __repr__(&self) -> String {
        format!(
            "RunSummary(algorithm='{}', sum_rate_per_slot={:.6}, iterations={}, converged={})",
            self.algorithm, self.sum_rate_per_slot, self.iterations, self.converged
        )
    }
}

/// Draws a channel snapshot from `channel_seed` and runs one algorithm.
///
/// `algorithm` is one of `"maxsr"` (alternating sum-rate maximization),
/// `"summse"` (sum-MSE minimization), or `"ia"` (interference-leakage
/// minimization). The starting filters are drawn from `init_seed`, so a
/// `(channel_seed, init_seed)` pair fully determines the result.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm = "maxsr", channel_seed = 0, init_seed = 0,
                    epsilon = 1e-4, max_iters = 500, record_trace = false))]
#[allow(clippy::too_many_arguments)]
fn run(
    scenario: &Scenario,
    algorithm: &str,
    channel_seed: u64,
    init_seed: u64,
    epsilon: f64,
    max_iters: usize,
    record_trace: bool,
) -> PyResult<RunSummary> {
    let algo = Algorithm::parse(algorithm).map_err(py_err)?;
    let ch = draw_channels(&scenario.cfg, channel_seed).map_err(py_err)?;
    let opts = RunOptions { epsilon, max_iters, init_seed, record_trace };
    let run = run_algorithm(algo, &ch, &scenario.cfg, &opts).map_err(py_err)?;
    let rate = run.final_rate(&ch, &scenario.cfg).map_err(py_err)?;
    Ok(RunSummary {
        algorithm: algo.label().to_string(),
        sum_rate_per_slot: rate,
        iterations: run.iterations_used,
        converged: run.converged,
        trace: run
            .trace
            .iter()
            .map(|t| (t.iteration, t.objective, t.sum_rate_per_slot, t.bs_power, t.relay_power))
            .collect(),
    })
}

/// Filter-design algorithms for interference-limited cellular downlinks.
#[pymodule]
fn sumrate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<RunSummary>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
