//! The three alternating filter-design algorithms.
//!
//! All three share the same random feasible initialization and the same
//! run/trace plumbing; they differ in the per-iteration block updates and in
//! the scalar objective whose stagnation stops the loop:
//!
//! * [`maximize_sum_rate`] — alternating maximization of the concave
//!   surrogate `b` (whose value at the re-tuned auxiliaries equals the sum
//!   rate up to a constant): receive filters by the closed form, transmit
//!   filters and relay matrices by exact convex QCQP solves, then the
//!   per-mobile targets `w` and, at those new targets, the scalings `t`.
//! * [`minimize_sum_mse`] — the same block machinery with the auxiliaries
//!   frozen at `w ≡ 1`, `t ≡ 1`, descending the sum of scaled MSEs.
//! * [`minimize_leakage`] — interference-alignment style: every block is
//!   set to the least-eigenvector direction of the interference it sees or
//!   causes, at full power, ignoring the useful-signal quality.
//!
//! Objectives are evaluated once per iteration *after* all block updates;
//! a run stops when the absolute change falls to `epsilon` or when
//! `max_iters` is reached.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{
    bs_power, effective_links, relay_power, sum_rate_per_slot, SystemState,
};
use crate::scenario::{rng, serving_bs, ChannelSet, Mode, ScenarioConfig};
use crate::subsolvers::{
    assemble_g_problem, assemble_v_problem, mmse_receivers, qcqp_solve, relay_coupling,
    relay_power_form, unstack_g, unstack_v,
};
use crate::surrogate::{b_objective, g_value, t_opt, w_opt, AuxState};
use crate::{C64, CMatrix, CVector};

/// Constraint-gap tolerance handed to every inner QCQP solve.
const QCQP_TOL: f64 = 1e-8;

/// Knobs shared by all three algorithms.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Stop once the objective changes by at most this much per iteration.
    pub epsilon: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Seed for the random feasible starting point.
    pub init_seed: u64,
    /// Record a [`TraceRecord`] per iteration (including the start).
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { epsilon: 1e-4, max_iters: 500, init_seed: 0, record_trace: false }
    }
}

impl RunOptions {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config("epsilon must be a positive finite number".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Snapshot taken after one full iteration (iteration 0 is the start).
#[derive(Clone, Copy, Debug)]
pub struct TraceRecord {
    /// 0 for the initial state, then 1, 2, … per completed iteration.
    pub iteration: usize,
    /// The algorithm's own objective (surrogate bound, sum MSE, or leakage).
    pub objective: f64,
    /// Sum rate per channel use at this iterate.
    pub sum_rate_per_slot: f64,
    /// Base-station sum power at this iterate.
    pub bs_power: f64,
    /// Relay sum power at this iterate (0 in single-hop mode).
    pub relay_power: f64,
}

/// Outcome of one algorithm run.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// Filters at the last iterate.
    pub final_state: SystemState,
    /// Auxiliary scalars at the last iterate (all ones for the baselines).
    pub final_aux: AuxState,
    /// Per-iteration snapshots; empty unless `record_trace` was set.
    pub trace: Vec<TraceRecord>,
    /// Completed iterations.
    pub iterations_used: usize,
    /// Whether the stagnation test fired before the iteration cap.
    pub converged: bool,
}

impl RunResult {
    /// Sum rate per channel use of the final iterate.
    pub fn final_rate(&self, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
        sum_rate_per_slot(&self.final_state, ch, cfg)
    }
}

/// Draws a random starting point that meets both power budgets exactly:
/// unit-norm receive filters, Gaussian transmit filters rescaled to the
/// base-station budget, and (two-hop) Gaussian relay matrices rescaled to
/// the relay budget. Deterministic in `(seed, shapes)`.
pub fn random_feasible_state(
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<SystemState> {
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    let mut state = SystemState::zeros(cfg);
    for (m, u) in state.u.iter_mut().enumerate() {
        let mut r = rng::stream(seed, &[rng::KIND_INIT_RX, m as u64]);
        let raw = rng::complex_gaussian_matrix(cfg.ms_antennas, 1, &mut r);
        let vec = CVector::from_column_slice(raw.as_slice());
        *u = vec.scale(1.0 / vec.norm());
    }
    for (k, v) in state.v.iter_mut().enumerate() {
        let mut r = rng::stream(seed, &[rng::KIND_INIT_TX, k as u64]);
        *v = rng::complex_gaussian_matrix(cfg.bs_antennas, cfg.users_per_cell, &mut r);
    }
    let scale_v = (cfg.bs_budget / bs_power(&state.v, cfg)).sqrt();
    for v in state.v.iter_mut() {
        *v = v.scale(scale_v);
    }
    if cfg.mode == Mode::TwoHop {
        for (r_idx, g) in state.g.iter_mut().enumerate() {
            let mut r = rng::stream(seed, &[rng::KIND_INIT_RELAY, r_idx as u64]);
            *g = rng::complex_gaussian_matrix(cfg.relay_antennas, cfg.relay_antennas, &mut r);
        }
        // Both relay-power terms are quadratic in G, so one scalar rescale
        // lands exactly on the budget.
        let scale_g = (cfg.relay_budget / relay_power(&state.v, &state.g, ch, cfg)).sqrt();
        for g in state.g.iter_mut() {
            *g = g.scale(scale_g);
        }
    }
    Ok(state)
}

fn push_trace(
    trace: &mut Vec<TraceRecord>,
    opts: &RunOptions,
    iteration: usize,
    objective: f64,
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<()> {
    if opts.record_trace {
        trace.push(TraceRecord {
            iteration,
            objective,
            sum_rate_per_slot: sum_rate_per_slot(state, ch, cfg)?,
            bs_power: bs_power(&state.v, cfg),
            relay_power: relay_power(&state.v, &state.g, ch, cfg),
        });
    }
    Ok(())
}

/// Alternating maximization of the surrogate lower bound `b`.
///
/// Per iteration: closed-form receive filters (using last iteration's
/// targets), exact transmit-filter QCQP, exact relay QCQP (two-hop), then
/// the targets `w ← w_opt` and the scalings `t ← 1/g` evaluated at the new
/// targets, so each iteration ends on the joint `(w, t)` optimum and the
/// recorded objective is monotone. Each `(receive filter, target)` pair is
/// kept gauge-normalized to `|w| = 1`, which is observably a no-op but
/// keeps every intermediate finite even for mobiles the transmit filters
/// are nulling out. A mobile whose received signal image vanishes keeps
/// its previous target instead of failing the run. Stops when
/// `|Δb| ≤ epsilon`.
pub fn maximize_sum_rate(
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    opts.validate()?;
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    let mut state = random_feasible_state(ch, cfg, opts.init_seed)?;
    let mut aux = AuxState::ones(cfg.num_users());
    let mut trace = Vec::new();
    let mut objective = b_objective(&state, &aux, ch, cfg)?;
    push_trace(&mut trace, opts, 0, objective, &state, ch, cfg)?;
    let mut converged = false;
    let mut iterations_used = opts.max_iters;
    for i in 1..=opts.max_iters {
        state.u = mmse_receivers(&state, &aux, ch, cfg)?;
        let sol = qcqp_solve(&assemble_v_problem(&state, &aux, ch, cfg)?, QCQP_TOL)?;
        state.v = unstack_v(&sol.x, cfg);
        if cfg.mode == Mode::TwoHop {
            let sol = qcqp_solve(&assemble_g_problem(&state, &aux, ch, cfg)?, QCQP_TOL)?;
            state.g = unstack_g(&sol.x, cfg);
        }
        // The auxiliaries are re-tuned as a matched pair: first the target
        // w (which depends only on the filters), then the scaling t at that
        // new target. This pair is the exact joint maximizer of b over
        // (w, t) — t alone would maximize b for any fixed w, and among the
        // per-target optima the peak value Σ log₂ η(w) − KM/ln2 is largest
        // at w_opt — so every objective evaluation sits at
        // Σ log₂(1 + SINR) − KM/ln2 and the b-trace never decreases.
        // Re-tuning t against the outgoing target instead would leave a
        // mismatched pair whose b value can collapse arbitrarily far.
        //
        // Each pair (u_m, w_m) then gets gauge-normalized to |w_m| = 1:
        // jointly rescaling the receive filter and its target by the same
        // positive real leaves η, b, both QCQP assemblies, the closed-form
        // receive filters, the SINRs, and the powers exactly invariant, but
        // without it |w| grows without bound for a mobile whose signal is
        // being nulled (w_opt ~ noise/(P_d·u*q) as u*q → 0), eventually
        // overflowing g and underflowing t.
        for m in 0..cfg.num_users() {
            match w_opt(m, &state, ch, cfg) {
                Ok(w) => {
                    let s = w.norm();
                    aux.w[m] = w / s;
                    state.u[m].unscale_mut(s);
                }
                Err(Error::DegenerateLink { .. }) => {}
                Err(e) => return Err(e),
            }
            aux.t[m] = t_opt(m, &state, ch, cfg, aux.w[m])?;
        }
        let next = b_objective(&state, &aux, ch, cfg)?;
        push_trace(&mut trace, opts, i, next, &state, ch, cfg)?;
        let delta = (next - objective).abs();
        objective = next;
        if delta <= opts.epsilon {
            converged = true;
            iterations_used = i;
            break;
        }
    }
    Ok(RunResult { final_state: state, final_aux: aux, trace, iterations_used, converged })
}

fn sum_mse(state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
    let one = C64::new(1.0, 0.0);
    let mut total = 0.0;
    for m in 0..cfg.num_users() {
        total += g_value(m, state, ch, cfg, one)?;
    }
    Ok(total)
}

/// Alternating minimization of the sum of per-mobile MSEs — the same block
/// machinery as [`maximize_sum_rate`] with the auxiliaries frozen at
/// `w ≡ 1`, `t ≡ 1`. Stops when the sum MSE stagnates.
pub fn minimize_sum_mse(
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    opts.validate()?;
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    let mut state = random_feasible_state(ch, cfg, opts.init_seed)?;
    let aux = AuxState::ones(cfg.num_users());
    let mut trace = Vec::new();
    let mut objective = sum_mse(&state, ch, cfg)?;
    push_trace(&mut trace, opts, 0, objective, &state, ch, cfg)?;
    let mut converged = false;
    let mut iterations_used = opts.max_iters;
    for i in 1..=opts.max_iters {
        state.u = mmse_receivers(&state, &aux, ch, cfg)?;
        let sol = qcqp_solve(&assemble_v_problem(&state, &aux, ch, cfg)?, QCQP_TOL)?;
        state.v = unstack_v(&sol.x, cfg);
        if cfg.mode == Mode::TwoHop {
            let sol = qcqp_solve(&assemble_g_problem(&state, &aux, ch, cfg)?, QCQP_TOL)?;
            state.g = unstack_g(&sol.x, cfg);
        }
        let next = sum_mse(&state, ch, cfg)?;
        push_trace(&mut trace, opts, i, next, &state, ch, cfg)?;
        let delta = (next - objective).abs();
        objective = next;
        if delta <= opts.epsilon {
            converged = true;
            iterations_used = i;
            break;
        }
    }
    Ok(RunResult { final_state: state, final_aux: aux, trace, iterations_used, converged })
}

/// Unit-norm eigenvector of a Hermitian matrix for its smallest eigenvalue.
fn least_eigenvector(m: CMatrix) -> CVector {
    let eig = SymmetricEigen::new(m);
    let mut idx = 0;
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    eig.eigenvectors.column(idx).clone_owned()
}

/// Covariance of the interference arriving at mobile `m` (no noise terms):
/// `P_d·Σ_{(l,j) ≠ own} f f*` with `f = T^(l)·v^(l,j)`.
fn interference_covariance(
    m: usize,
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> CMatrix {
    let links = effective_links(m, state, ch, cfg);
    let k = serving_bs(m, cfg);
    let own = m % cfg.users_per_cell;
    let mut q = CMatrix::zeros(cfg.ms_antennas, cfg.ms_antennas);
    for (l, t) in links.bs.iter().enumerate() {
        for j in 0..cfg.users_per_cell {
            if l == k && j == own {
                continue;
            }
            let f = t * state.v[l].column(j);
            q += (&f * f.adjoint()).scale(cfg.symbol_power);
        }
    }
    q
}

fn total_leakage(state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> f64 {
    (0..cfg.num_users())
        .map(|m| {
            let q = interference_covariance(m, state, ch, cfg);
            state.u[m].dotc(&(&q * &state.u[m])).re
        })
        .sum()
}

/// Total leakage as a quadratic in the stacked transmit filters
/// ([`stack_v`] layout). Stream `(l,j)` enters the leakage only through its
/// own column, so the form is block-diagonal: block `(l,j)` collects
/// `P_d·a_m^(l) a_m^(l)*` over every mobile that hears that stream as
/// interference.
fn leakage_v_form(state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> CMatrix {
    let nb = cfg.bs_antennas;
    let n = cfg.cells * cfg.users_per_cell * nb;
    let mut a = CMatrix::zeros(n, n);
    for m in 0..cfg.num_users() {
        let links = effective_links(m, state, ch, cfg);
        let k = serving_bs(m, cfg);
        let own = m % cfg.users_per_cell;
        for (l, t) in links.bs.iter().enumerate() {
            let am = t.adjoint() * &state.u[m];
            let outer = (&am * am.adjoint()).scale(cfg.symbol_power);
            for j in 0..cfg.users_per_cell {
                if l == k && j == own {
                    continue;
                }
                let offset = (l * cfg.users_per_cell + j) * nb;
                let mut block = a.view_mut((offset, offset), (nb, nb));
                block += &outer;
            }
        }
    }
    a
}

/// Total leakage as a quadratic in the stacked relay matrices.
fn leakage_g_form(state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> CMatrix {
    let n = cfg.relays * cfg.relay_antennas * cfg.relay_antennas;
    let mut a = CMatrix::zeros(n, n);
    for m in 0..cfg.num_users() {
        let coupling = relay_coupling(m, state, ch, cfg);
        let k = serving_bs(m, cfg);
        let own = m % cfg.users_per_cell;
        for l in 0..cfg.cells {
            for j in 0..cfg.users_per_cell {
                if l == k && j == own {
                    continue;
                }
                let e = &coupling.e[l][j];
                a += (e * e.adjoint()).scale(cfg.symbol_power);
            }
        }
    }
    a
}

/// Interference-alignment style leakage minimization.
///
/// Per iteration, every block moves to the direction seeing (receive
/// filters) or causing (transmit filters, relay matrices) the least
/// interference, at full transmit/relay power:
///
/// * `u^(m)` — least eigenvector of the interference covariance;
/// * stacked `V` — least generalized eigenvector of the leakage quadratic
///   against the transmit-power quadratic, rescaled to the base-station
///   budget (the exact leakage minimizer on the full-power shell);
/// * stacked `G` (two-hop) — least generalized eigenvector of the leakage
///   quadratic against the relay-power quadratic, rescaled to the relay
///   budget.
///
/// Stops when the total leakage stagnates. The useful signal never enters
/// the updates, so rates are whatever the aligned solution happens to give.
///
/// In relayed scenarios this is a harsh baseline: because every same-cell
/// stream reaches a mobile through the *same* compound relay operator,
/// zero-leakage states exist in which that operator is driven to rank one —
/// all forwarded streams (the mobile's own included) align into a single
/// line and the receive filter lands orthogonal to it. The alternation
/// reliably finds such states, so leakage descends to numerical zero while
/// the achieved rates also collapse toward zero. This is a structural
/// property of signal-agnostic leakage descent with shared relays, not a
/// numerical artifact; the run still satisfies its own correctness
/// criterion (monotone leakage descent at full power).
pub fn minimize_leakage(
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    opts.validate()?;
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    let mut state = random_feasible_state(ch, cfg, opts.init_seed)?;
    let aux = AuxState::ones(cfg.num_users());
    let mut trace = Vec::new();
    let mut objective = total_leakage(&state, ch, cfg);
    push_trace(&mut trace, opts, 0, objective, &state, ch, cfg)?;
    let mut converged = false;
    let mut iterations_used = opts.max_iters;
    for i in 1..=opts.max_iters {
        for m in 0..cfg.num_users() {
            state.u[m] = least_eigenvector(interference_covariance(m, &state, ch, cfg));
        }
        // The transmit-power quadratic is P_d·I in the stacked filters, so
        // the generalized eigen step reduces to the plain least eigenvector
        // scaled onto the full-power shell ‖x‖² = P_B/P_d.
        let x = least_eigenvector(leakage_v_form(&state, ch, cfg))
            .scale((cfg.bs_budget / cfg.symbol_power).sqrt());
        state.v = unstack_v(&x, cfg);
        if cfg.mode == Mode::TwoHop {
            let p_g = relay_power_form(&state.v, ch, cfg);
            let l_g = leakage_g_form(&state, ch, cfg);
            // Generalized least eigenvector of (L_G, P_G) via the Cholesky
            // factor P_G = LL*: eigen-decompose L⁻¹·L_G·L⁻* and map back.
            let chol = Cholesky::new(p_g).ok_or_else(|| {
                Error::Solver("relay power form is not positive definite".into())
            })?;
            let l = chol.l();
            let s = l
                .solve_lower_triangular(&l_g)
                .ok_or_else(|| Error::Solver("relay power factor is singular".into()))?;
            let whitened = l
                .solve_lower_triangular(&s.adjoint())
                .ok_or_else(|| Error::Solver("relay power factor is singular".into()))?;
            let symmetrized = (&whitened + whitened.adjoint()).scale(0.5);
            let y = least_eigenvector(symmetrized);
            let x = l
                .adjoint()
                .solve_upper_triangular(&y)
                .ok_or_else(|| Error::Solver("relay power factor is singular".into()))?;
            // y is unit-norm, so x already has unit relay power; rescale to
            // the full budget.
            state.g = unstack_g(&x.scale(cfg.relay_budget.sqrt()), cfg);
        }
        let next = total_leakage(&state, ch, cfg);
        push_trace(&mut trace, opts, i, next, &state, ch, cfg)?;
        let delta = (next - objective).abs();
        objective = next;
        if delta <= opts.epsilon {
            converged = true;
            iterations_used = i;
            break;
        }
    }
    Ok(RunResult { final_state: state, final_aux: aux, trace, iterations_used, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::draw_channels;

    fn small_two_hop() -> ScenarioConfig {
        ScenarioConfig {
            cells: 2,
            users_per_cell: 2,
            relays: 2,
            bs_antennas: 2,
            relay_antennas: 2,
            ms_antennas: 2,
            symbol_power: 1.0,
            bs_budget: 100.0,
            relay_budget: 100.0,
            noise_var: 1.0,
            mode: Mode::TwoHop,
        }
    }

    fn scalar_single_hop(budget: f64) -> (ScenarioConfig, ChannelSet) {
        let cfg = ScenarioConfig {
            cells: 1,
            users_per_cell: 1,
            relays: 0,
            bs_antennas: 1,
            relay_antennas: 0,
            ms_antennas: 1,
            symbol_power: 1.0,
            bs_budget: budget,
            relay_budget: 0.0,
            noise_var: 1.0,
            mode: Mode::SingleHop,
        };
        let ch = ChannelSet::from_matrices(
            &cfg,
            vec![],
            vec![],
            vec![vec![CMatrix::identity(1, 1)]],
        )
        .unwrap();
        (cfg, ch)
    }

    #[test]
    fn initial_state_meets_budgets_exactly() {
        let cfg = small_two_hop();
        let ch = draw_channels(&cfg, 7).unwrap();
        let state = random_feasible_state(&ch, &cfg, 11).unwrap();
        let bs = bs_power(&state.v, &cfg);
        assert!((bs - cfg.bs_budget).abs() <= 1e-12 * cfg.bs_budget);
        let relay = relay_power(&state.v, &state.g, &ch, &cfg);
        assert!((relay - cfg.relay_budget).abs() <= 1e-12 * cfg.relay_budget);
        for u in &state.u {
            assert!((u.norm() - 1.0).abs() <= 1e-12);
        }
        // Deterministic in the seed, different across seeds.
        let again = random_feasible_state(&ch, &cfg, 11).unwrap();
        assert_eq!(state.v, again.v);
        assert_eq!(state.g, again.g);
        assert_eq!(state.u, again.u);
        let other = random_feasible_state(&ch, &cfg, 12).unwrap();
        assert_ne!(state.v, other.v);
    }

    #[test]
    fn all_three_algorithms_reach_scalar_capacity() {
        // Interference-free link: the rate must hit log2(1 + P_B/σ²).
        let (cfg, ch) = scalar_single_hop(15.0);
        let capacity = 16.0f64.log2();
        let opts = RunOptions { epsilon: 1e-10, max_iters: 60, ..RunOptions::default() };
        for run in [
            maximize_sum_rate(&ch, &cfg, &opts).unwrap(),
            minimize_sum_mse(&ch, &cfg, &opts).unwrap(),
            minimize_leakage(&ch, &cfg, &opts).unwrap(),
        ] {
            let rate = run.final_rate(&ch, &cfg).unwrap();
            assert!((rate - capacity).abs() <= 1e-3, "rate {rate} vs capacity {capacity}");
        }
    }

    #[test]
    fn surrogate_objective_is_monotone_and_feasible() {
        let cfg = small_two_hop();
        let ch = draw_channels(&cfg, 21).unwrap();
        let opts = RunOptions {
            epsilon: 1e-12,
            max_iters: 25,
            init_seed: 3,
            record_trace: true,
        };
        let run = maximize_sum_rate(&ch, &cfg, &opts).unwrap();
        assert_eq!(run.trace.len(), run.iterations_used + 1);
        for pair in run.trace.windows(2) {
            assert!(
                pair[1].objective >= pair[0].objective - 1e-8,
                "objective dropped: {} -> {}",
                pair[0].objective,
                pair[1].objective
            );
        }
        for rec in &run.trace {
            assert!(rec.bs_power <= cfg.bs_budget * (1.0 + 1e-6));
            assert!(rec.relay_power <= cfg.relay_budget * (1.0 + 1e-6));
        }
        // The surrogate chases the rate: the final rate beats the initial.
        let first = run.trace.first().unwrap().sum_rate_per_slot;
        let last = run.trace.last().unwrap().sum_rate_per_slot;
        assert!(last > first);
    }

    #[test]
    fn sum_mse_objective_is_nonincreasing() {
        let cfg = small_two_hop();
        let ch = draw_channels(&cfg, 22).unwrap();
        let opts = RunOptions {
            epsilon: 1e-12,
            max_iters: 25,
            init_seed: 4,
            record_trace: true,
        };
        let run = minimize_sum_mse(&ch, &cfg, &opts).unwrap();
        for pair in run.trace.windows(2) {
            assert!(
                pair[1].objective <= pair[0].objective + 1e-9,
                "sum MSE rose: {} -> {}",
                pair[0].objective,
                pair[1].objective
            );
        }
    }

    #[test]
    fn leakage_run_reports_and_respects_budgets() {
        let cfg = small_two_hop();
        let ch = draw_channels(&cfg, 23).unwrap();
        let opts = RunOptions {
            epsilon: 1e-10,
            max_iters: 40,
            init_seed: 5,
            record_trace: true,
        };
        let run = minimize_leakage(&ch, &cfg, &opts).unwrap();
        for rec in &run.trace {
            assert!(rec.objective >= -1e-12, "leakage must stay nonnegative");
            assert!(rec.bs_power <= cfg.bs_budget * (1.0 + 1e-6));
            assert!(rec.relay_power <= cfg.relay_budget * (1.0 + 1e-6));
        }
        let first = run.trace.first().unwrap().objective;
        let last = run.trace.last().unwrap().objective;
        assert!(last <= first, "leakage should end below its start: {first} -> {last}");
        // Full power is actually used by the aligned solution.
        let bs = bs_power(&run.final_state.v, &cfg);
        assert!((bs - cfg.bs_budget).abs() <= 1e-9 * cfg.bs_budget);
        let relay = relay_power(&run.final_state.v, &run.final_state.g, &ch, &cfg);
        assert!((relay - cfg.relay_budget).abs() <= 1e-9 * cfg.relay_budget);
    }

    #[test]
    fn runs_are_deterministic_in_their_seeds() {
        let cfg = small_two_hop();
        let ch = draw_channels(&cfg, 24).unwrap();
        let opts = RunOptions {
            epsilon: 1e-6,
            max_iters: 15,
            init_seed: 9,
            record_trace: true,
        };
        let a = maximize_sum_rate(&ch, &cfg, &opts).unwrap();
        let b = maximize_sum_rate(&ch, &cfg, &opts).unwrap();
        assert_eq!(a.iterations_used, b.iterations_used);
        assert_eq!(a.trace.len(), b.trace.len());
        for (x, y) in a.trace.iter().zip(&b.trace) {
            assert_eq!(x.objective.to_bits(), y.objective.to_bits());
            assert_eq!(x.sum_rate_per_slot.to_bits(), y.sum_rate_per_slot.to_bits());
        }
        let c = maximize_sum_rate(
            &ch,
            &cfg,
            &RunOptions { init_seed: 10, ..opts },
        )
        .unwrap();
        let rate_a = a.final_rate(&ch, &cfg).unwrap();
        let rate_c = c.final_rate(&ch, &cfg).unwrap();
        assert_ne!(rate_a.to_bits(), rate_c.to_bits());
    }

    #[test]
    fn rejects_bad_options() {
        let (cfg, ch) = scalar_single_hop(10.0);
        let bad = RunOptions { epsilon: 0.0, ..RunOptions::default() };
        assert!(matches!(
            maximize_sum_rate(&ch, &cfg, &bad).unwrap_err(),
            Error::Config(_)
        ));
        let bad = RunOptions { max_iters: 0, ..RunOptions::default() };
        assert!(matches!(
            minimize_sum_mse(&ch, &cfg, &bad).unwrap_err(),
            Error::Config(_)
        ));
    }
}

