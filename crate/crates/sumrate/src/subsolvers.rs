//! Exact convex subproblem solvers for the alternating algorithms.
//!
//! Three building blocks:
//!
//! * [`mmse_receivers`] — the closed-form minimizer of each mobile's scaled
//!   MSE `g` over its receive filter,
//! * [`assemble_v_problem`] / [`assemble_g_problem`] — expansion of the
//!   block objective `Σ_m (t^(m)/ln 2)·g^(m)` into a standard convex
//!   quadratic over the stacked transmit-filter (resp. relay-matrix)
//!   entries, together with the active power constraints,
//! * [`qcqp_solve`] — a Lagrangian-dual solver for the resulting convex
//!   QCQPs with one or two pure-quadratic constraints.
//!
//! # Stacking convention
//!
//! The active variable block is flattened into one complex vector `x` as
//! **column-major entries within each matrix, matrices ordered by their
//! index** (base station `k` or relay `r`). [`stack_v`]/[`unstack_v`] and
//! [`stack_g`]/[`unstack_g`] are the canonical converters; every quadratic
//! form produced here uses the same order.
//!
//! # Dual method
//!
//! A convex problem `min x*Ax − 2Re(b*x) + c` s.t. `x*A_i x ≤ budget_i`
//! (with `A_i ⪰ 0`, `budget_i > 0`, so `x = 0` is strictly feasible) is
//! solved through its dual: the stationary point of the Lagrangian is
//! `x(μ) = (A + Σ μ_i A_i)⁻¹ b`, and each constraint value along `x(μ)` is
//! monotone non-increasing in its multiplier. With one constraint a
//! bisection on `μ ≥ 0` finds the complementary-slack point; with two, a
//! coordinate ascent bisects each multiplier in turn (the 2-D dual is
//! concave, so the sweeps converge).

use std::ops::AddAssign;

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::model::{effective_links, stats_from_links, SystemState};
use crate::scenario::{serving_bs, ChannelSet, Mode, ScenarioConfig};
use crate::surrogate::AuxState;
use crate::{C64, CMatrix, CVector};

/// Hermitian quadratic `x*Ax − 2·Re(b*x) + c` over a complex vector `x`.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    /// Hermitian positive-semidefinite matrix (sum of outer products by
    /// construction).
    pub a: CMatrix,
    /// Linear term; the form's gradient vanishes where `Ax = b`.
    pub b: CVector,
    /// Real constant.
    pub c: f64,
}

impl QuadraticForm {
    /// Pure quadratic `x*Ax` (no linear term, no constant) — the shape of
    /// every power constraint.
    pub fn pure(a: CMatrix) -> QuadraticForm {
        let n = a.nrows();
        QuadraticForm { a, b: CVector::zeros(n), c: 0.0 }
    }

    /// Number of complex variables.
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Evaluates the form (real-valued since `A` is Hermitian).
    pub fn eval(&self, x: &CVector) -> f64 {
        let ax = &self.a * x;
        x.dotc(&ax).re - 2.0 * self.b.dotc(x).re + self.c
    }
}

/// Convex QCQP: a quadratic objective under 1–2 pure-quadratic budget
/// constraints `x*A_i x ≤ budget_i` with `budget_i > 0`.
#[derive(Clone, Debug)]
pub struct QcqpProblem {
    /// Objective to minimize.
    pub objective: QuadraticForm,
    /// `(form, budget)` pairs; each form must be pure ([`QuadraticForm::pure`]).
    pub constraints: Vec<(QuadraticForm, f64)>,
}

/// Minimizer returned by [`qcqp_solve`], with the dual multipliers for KKT
/// diagnostics.
#[derive(Clone, Debug)]
pub struct QcqpSolution {
    /// The optimal stacked variable block.
    pub x: CVector,
    /// One multiplier per constraint (0 where inactive).
    pub multipliers: Vec<f64>,
}

/// Closed-form update of every receive filter:
/// `u^(m) = (P_d·qq* + Z)⁻¹ · P_d·w̄^(m)·q` — the minimizer of `g^(m)` over
/// `u^(m)`. A zero scaling `w^(m) = 0` yields `u^(m) = 0`.
pub fn mmse_receivers(
    state: &SystemState,
    aux: &AuxState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<Vec<CVector>> {
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    state.check_dims(cfg)?;
    aux.check_dims(cfg)?;
    let mut receivers = Vec::with_capacity(cfg.num_users());
    for m in 0..cfg.num_users() {
        let links = effective_links(m, state, ch, cfg);
        let stats = stats_from_links(m, &links, state, cfg);
        let a = (&stats.q * stats.q.adjoint()).scale(cfg.symbol_power) + &stats.z;
        let rhs = &stats.q * (aux.w[m].conj() * cfg.symbol_power);
        let chol = Cholesky::new(a).ok_or_else(|| {
            Error::Solver(format!("receive-filter system for mobile {m} is not positive definite"))
        })?;
        receivers.push(chol.solve(&rhs));
    }
    Ok(receivers)
}

/// Flattens transmit filters into the canonical stacked vector.
pub fn stack_v(v: &[CMatrix]) -> CVector {
    let data: Vec<C64> = v.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
    CVector::from_vec(data)
}

/// Inverse of [`stack_v`] for the shapes in `cfg`.
pub fn unstack_v(x: &CVector, cfg: &ScenarioConfig) -> Vec<CMatrix> {
    let per = cfg.bs_antennas * cfg.users_per_cell;
    (0..cfg.cells)
        .map(|k| {
            CMatrix::from_column_slice(
                cfg.bs_antennas,
                cfg.users_per_cell,
                &x.as_slice()[k * per..(k + 1) * per],
            )
        })
        .collect()
}

/// Flattens relay matrices into the canonical stacked vector.
pub fn stack_g(g: &[CMatrix]) -> CVector {
    let data: Vec<C64> = g.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
    CVector::from_vec(data)
}

/// Inverse of [`stack_g`] for the shapes in `cfg`.
pub fn unstack_g(x: &CVector, cfg: &ScenarioConfig) -> Vec<CMatrix> {
    let per = cfg.relay_antennas * cfg.relay_antennas;
    (0..cfg.relays)
        .map(|r| {
            CMatrix::from_column_slice(
                cfg.relay_antennas,
                cfg.relay_antennas,
                &x.as_slice()[r * per..(r + 1) * per],
            )
        })
        .collect()
}

/// Expands `Σ_m (t^(m)/ln 2)·g^(m)` as a quadratic in the stacked transmit
/// filters (receive filters, relay matrices, and scalings fixed).
///
/// Constraints: the base-station sum power `P_d·‖x‖² ≤ P_B`, plus — in
/// two-hop mode — the relay sum power, which for fixed relay matrices is a
/// convex quadratic in the transmit filters with the forwarded-noise term
/// `σ²·Σ_r ‖G^(r)‖²_F` folded into the budget.
pub fn assemble_v_problem(
    state: &SystemState,
    aux: &AuxState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<QcqpProblem> {
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    state.check_dims(cfg)?;
    aux.check_dims(cfg)?;
    let ln2 = std::f64::consts::LN_2;
    let nb = cfg.bs_antennas;
    let per_bs = nb * cfg.users_per_cell;
    let n = cfg.cells * per_bs;
    let p_d = cfg.symbol_power;

    // Per-base-station objective blocks Σ_m (t_m·P_d/ln2)·a_m^(l) a_m^(l)*
    // with a_m^(l) = T_m^(l)* u_m: the same block serves every column slot
    // of station l, because every transmitted column reaches mobile m
    // through the same effective matrix.
    let mut blocks = vec![CMatrix::zeros(nb, nb); cfg.cells];
    let mut b = CVector::zeros(n);
    let mut constant = 0.0;
    for m in 0..cfg.num_users() {
        let links = effective_links(m, state, ch, cfg);
        let u = &state.u[m];
        let t_over = aux.t[m] / ln2;
        let coef = t_over * p_d;
        let k = serving_bs(m, cfg);
        let own = m % cfg.users_per_cell;
        for (l, block) in blocks.iter_mut().enumerate() {
            let a_ml = links.bs[l].adjoint() * u;
            block.add_assign((&a_ml * a_ml.adjoint()).scale(coef));
            if l == k {
                // Linear term lands on the mobile's own column slot.
                let contrib = &a_ml * (aux.w[m] * coef);
                let off = k * per_bs + own * nb;
                for i in 0..nb {
                    b[off + i] += contrib[i];
                }
            }
        }
        // x-independent part of g: P_d|w|² plus forwarded-relay-noise and
        // receiver-noise quadratics in u.
        let mut noise = cfg.noise_var * u.norm_squared();
        for relay in &links.relay {
            noise += cfg.noise_var * (relay.adjoint() * u).norm_squared();
        }
        constant += t_over * (p_d * aux.w[m].norm_sqr() + noise);
    }
    let mut a = CMatrix::zeros(n, n);
    for l in 0..cfg.cells {
        for j in 0..cfg.users_per_cell {
            let off = l * per_bs + j * nb;
            for row in 0..nb {
                for col in 0..nb {
                    a[(off + row, off + col)] = blocks[l][(row, col)];
                }
            }
        }
    }
    let objective = QuadraticForm { a, b, c: constant };

    // Constraint 1: base-station sum power P_d·‖x‖².
    let mut constraints = vec![(
        QuadraticForm::pure(CMatrix::identity(n, n).scale(p_d)),
        cfg.bs_budget,
    )];

    // Constraint 2 (two-hop): relay sum power as a quadratic in x. The
    // per-slot block is P_d·Σ_r (G^(r) H_RB^(r,l))*(G^(r) H_RB^(r,l)),
    // identical for all columns of station l.
    if cfg.mode == Mode::TwoHop {
        let mut relay_blocks = vec![CMatrix::zeros(nb, nb); cfg.cells];
        let mut forwarded_noise = 0.0;
        for (r, g) in state.g.iter().enumerate() {
            for (l, block) in relay_blocks.iter_mut().enumerate() {
                let gh = g * ch.bs_to_relay(r, l);
                block.add_assign((gh.adjoint() * gh).scale(p_d));
            }
            forwarded_noise += cfg.noise_var * g.norm_squared();
        }
        let mut a2 = CMatrix::zeros(n, n);
        for l in 0..cfg.cells {
            for j in 0..cfg.users_per_cell {
                let off = l * per_bs + j * nb;
                for row in 0..nb {
                    for col in 0..nb {
                        a2[(off + row, off + col)] = relay_blocks[l][(row, col)];
                    }
                }
            }
        }
        // The forwarded-noise power does not depend on x; it shrinks the
        // budget. A non-positive remainder (relays spending the whole budget
        // on noise) is clamped to keep the problem well-posed; the solver
        // then returns a near-zero transmit block.
        let budget = (cfg.relay_budget - forwarded_noise).max(1e-12 * cfg.relay_budget);
        constraints.push((QuadraticForm::pure(a2), budget));
    }

    Ok(QcqpProblem { objective, constraints })
}

/// Per-mobile coupling data for quadratics in the stacked relay matrices.
pub(crate) struct RelayCoupling {
    /// `e[l][j]` — coefficient vectors such that the received symbol image
    /// `u*·T^(l)·v^(l,j)` equals `e[l][j]* · x` for stacked relay entries `x`.
    pub e: Vec<Vec<CVector>>,
    /// `p[r] = H_MR^(m,r)*·u` — second-hop adjoint images of the receiver.
    pub p: Vec<CVector>,
}

/// Builds [`RelayCoupling`] for mobile `m` from the current filters.
///
/// Column β of `p·c*` is `p·conj(c_β)`, so the stacked coefficient block of
/// relay `r` is `vec(p^(r)·c^(r,l,j)*)` with `c^(r,l,j) = H_RB^(r,l)·v^(l,j)`.
pub(crate) fn relay_coupling(
    m: usize,
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> RelayCoupling {
    let nr = cfg.relay_antennas;
    let per_relay = nr * nr;
    let n = cfg.relays * per_relay;
    let u = &state.u[m];
    let p: Vec<CVector> =
        (0..cfg.relays).map(|r| ch.relay_to_ms(m, r).adjoint() * u).collect();
    let e = (0..cfg.cells)
        .map(|l| {
            (0..cfg.users_per_cell)
                .map(|j| {
                    let mut e = CVector::zeros(n);
                    for (r, p_r) in p.iter().enumerate() {
                        let c_rlj = ch.bs_to_relay(r, l) * state.v[l].column(j);
                        for beta in 0..nr {
                            let scale = c_rlj[beta].conj();
                            let off = r * per_relay + beta * nr;
                            for alpha in 0..nr {
                                e[off + alpha] = p_r[alpha] * scale;
                            }
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    RelayCoupling { e, p }
}

/// Relay sum power as a pure quadratic over the stacked relay matrices:
/// block-diagonal `P_d·(conj(D^(r)) ⊗ I) + σ²·I` per relay, with
/// `D^(r) = Σ_k H_RB^(r,k) V^(k) V^(k)* H_RB^(r,k)*`.
pub(crate) fn relay_power_form(
    v: &[CMatrix],
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> CMatrix {
    let nr = cfg.relay_antennas;
    let per_relay = nr * nr;
    let n = cfg.relays * per_relay;
    let mut a_pow = CMatrix::zeros(n, n);
    for r in 0..cfg.relays {
        let mut d = CMatrix::zeros(nr, nr);
        for (k, vk) in v.iter().enumerate() {
            let hv = ch.bs_to_relay(r, k) * vk;
            d += (&hv * hv.adjoint()).scale(cfg.symbol_power);
        }
        let block = d.conjugate().kronecker(&CMatrix::identity(nr, nr))
            + CMatrix::identity(per_relay, per_relay).scale(cfg.noise_var);
        let off = r * per_relay;
        for row in 0..per_relay {
            for col in 0..per_relay {
                a_pow[(off + row, off + col)] = block[(row, col)];
            }
        }
    }
    a_pow
}

/// Expands `Σ_m (t^(m)/ln 2)·g^(m)` as a quadratic in the stacked relay
/// matrices (receive/transmit filters and scalings fixed). Two-hop only.
///
/// The single constraint is the relay sum power
/// `P_d·Σ_r tr(G D^(r) G*) + σ²·Σ_r tr(G G*) ≤ P_R`, whose stacked form is
/// block-diagonal `P_d·(conj(D^(r)) ⊗ I) + σ²·I` per relay.
pub fn assemble_g_problem(
    state: &SystemState,
    aux: &AuxState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<QcqpProblem> {
    cfg.validate()?;
    if cfg.mode != Mode::TwoHop {
        return Err(Error::UnsupportedMode(
            "the relay subproblem exists only in two-hop mode".into(),
        ));
    }
    ch.check_compatible(cfg)?;
    state.check_dims(cfg)?;
    aux.check_dims(cfg)?;
    let ln2 = std::f64::consts::LN_2;
    let nr = cfg.relay_antennas;
    let per_relay = nr * nr;
    let n = cfg.relays * per_relay;
    let p_d = cfg.symbol_power;

    let mut a = CMatrix::zeros(n, n);
    let mut b = CVector::zeros(n);
    let mut constant = 0.0;
    for m in 0..cfg.num_users() {
        let u = &state.u[m];
        let t_over = aux.t[m] / ln2;
        let coef = t_over * p_d;
        let k = serving_bs(m, cfg);
        let own = m % cfg.users_per_cell;
        let coupling = relay_coupling(m, state, ch, cfg);
        for l in 0..cfg.cells {
            for j in 0..cfg.users_per_cell {
                let e = &coupling.e[l][j];
                a.add_assign((e * e.adjoint()).scale(coef));
                if l == k && j == own {
                    for i in 0..n {
                        b[i] += e[i] * (aux.w[m] * coef);
                    }
                }
            }
        }
        // Forwarded relay noise: σ²·Σ_r ‖G^(r)*·p^(r)‖² is block-diagonal
        // I ⊗ p p* in the stacked coordinates.
        for (r, p_r) in coupling.p.iter().enumerate() {
            let pp = (p_r * p_r.adjoint()).scale(t_over * cfg.noise_var);
            for beta in 0..nr {
                let off = r * per_relay + beta * nr;
                for row in 0..nr {
                    for col in 0..nr {
                        a[(off + row, off + col)] += pp[(row, col)];
                    }
                }
            }
        }
        constant += t_over * (p_d * aux.w[m].norm_sqr() + cfg.noise_var * u.norm_squared());
    }
    let objective = QuadraticForm { a, b, c: constant };
    let a_pow = relay_power_form(&state.v, ch, cfg);
    Ok(QcqpProblem {
        objective,
        constraints: vec![(QuadraticForm::pure(a_pow), cfg.relay_budget)],
    })
}

/// Per-iteration state of the dual solver.
struct DualSolver<'a> {
    p: &'a QcqpProblem,
    /// Relative constraint-gap target for the bisections.
    tol: f64,
}

impl DualSolver<'_> {
    /// Solves `(A + Σ μ_i A_i)·x = b` with a tiny relative ridge so that a
    /// merely positive-semidefinite system still factors. The ridge is
    /// orders of magnitude below every verification tolerance.
    fn stationary_point(&self, mu: &[f64]) -> Result<CVector> {
        let n = self.p.objective.dim();
        let mut m = self.p.objective.a.clone();
        for (i, (form, _)) in self.p.constraints.iter().enumerate() {
            if mu[i] != 0.0 {
                m += form.a.scale(mu[i]);
            }
        }
        let diag_scale =
            m.diagonal().iter().map(|d| d.re.abs()).sum::<f64>() / n as f64;
        let mut ridge = 1e-14 * diag_scale.max(f64::MIN_POSITIVE);
        for _ in 0..4 {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += C64::new(ridge, 0.0);
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(chol.solve(&self.p.objective.b));
            }
            ridge = (ridge * 1e4).max(1e-300);
        }
        Err(Error::Solver(
            "shifted system failed to factor; objective matrix is not PSD".into(),
        ))
    }

    fn constraint_value(&self, x: &CVector, i: usize) -> f64 {
        self.p.constraints[i].0.eval(x)
    }

    /// Adjusts `mu[i]` (others fixed) so constraint `i` holds: either it is
    /// already satisfied at `mu[i] = 0`, or `mu[i]` is bisected until the
    /// constraint value meets its budget within the gap tolerance. The gap
    /// target tightens as `min(tol, 5e-7/μ)` so that the complementary
    /// slackness product `μ·gap` stays bounded for large multipliers.
    fn activate(&self, i: usize, mu: &mut Vec<f64>) -> Result<CVector> {
        let budget = self.p.constraints[i].1;
        mu[i] = 0.0;
        let x0 = self.stationary_point(mu)?;
        if self.constraint_value(&x0, i) <= budget {
            return Ok(x0);
        }
        // Bracket: double μ until the constraint is satisfied.
        let mut hi = 1.0;
        loop {
            mu[i] = hi;
            let x = self.stationary_point(mu)?;
            if self.constraint_value(&x, i) <= budget {
                break;
            }
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Solver(format!(
                    "constraint {i}: no multiplier below 1e12 satisfies the budget"
                )));
            }
        }
        let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
        let mut best = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            mu[i] = mid;
            let x = self.stationary_point(mu)?;
            let value = self.constraint_value(&x, i);
            let gap_tol = budget * self.tol.min(5e-7 / mid.max(1.0));
            if (value - budget).abs() <= gap_tol {
                return Ok(x);
            }
            if value > budget {
                lo = mid;
            } else {
                hi = mid;
                best = Some(x);
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        // Bisection exhausted floating-point resolution: take the last
        // feasible-side iterate.
        mu[i] = hi;
        match best {
            Some(x) => Ok(x),
            None => self.stationary_point(mu),
        }
    }
}

/// Solves a convex QCQP to its KKT point via Lagrangian dual bisection.
///
/// `tol` is the relative constraint-gap target of the bisections (callers
/// normally pass `1e-8`). The returned multipliers make the KKT system
/// directly checkable: `(A + Σ μ_i A_i)x = b` up to the solver ridge,
/// feasibility within `(1+tol)·budget`, and `μ_i·(value_i − budget_i)`
/// bounded by `5e-7·budget_i`.
pub fn qcqp_solve(p: &QcqpProblem, tol: f64) -> Result<QcqpSolution> {
    if !(tol > 0.0) {
        return Err(Error::Solver("tolerance must be positive".into()));
    }
    let n = p.objective.dim();
    if p.objective.a.ncols() != n || p.objective.b.len() != n {
        return Err(Error::Dimension("objective blocks disagree on the dimension".into()));
    }
    if p.constraints.len() > 2 {
        return Err(Error::Solver("at most two constraints are supported".into()));
    }
    for (i, (form, budget)) in p.constraints.iter().enumerate() {
        if form.dim() != n {
            return Err(Error::Dimension(format!("constraint {i} has a mismatched dimension")));
        }
        if form.b.norm_squared() != 0.0 || form.c != 0.0 {
            return Err(Error::Solver(format!(
                "constraint {i} must be a pure quadratic (no linear or constant term)"
            )));
        }
        if !(*budget > 0.0) {
            return Err(Error::Solver(format!("constraint {i} needs a positive budget")));
        }
    }

    let solver = DualSolver { p, tol };
    let k = p.constraints.len();
    let mut mu = vec![0.0; k];

    // Unconstrained minimum first: if feasible, all multipliers stay zero.
    let x0 = solver.stationary_point(&mu)?;
    let all_ok =
        (0..k).all(|i| solver.constraint_value(&x0, i) <= p.constraints[i].1 * (1.0 + tol));
    if all_ok {
        return Ok(QcqpSolution { x: x0, multipliers: mu });
    }

    if k == 1 {
        let x = solver.activate(0, &mut mu)?;
        return Ok(QcqpSolution { x, multipliers: mu });
    }

    // Two constraints: try each alone (the other may turn out slack) …
    for first in 0..2 {
        let other = 1 - first;
        mu = vec![0.0; 2];
        let x = solver.activate(first, &mut mu)?;
        if solver.constraint_value(&x, other) <= p.constraints[other].1 * (1.0 + tol) {
            return Ok(QcqpSolution { x, multipliers: mu });
        }
    }

    // … otherwise both are active: coordinate ascent on the concave 2-D dual.
    mu = vec![0.0; 2];
    for _ in 0..200 {
        solver.activate(0, &mut mu)?;
        let x = solver.activate(1, &mut mu)?;
        let converged = (0..2).all(|i| {
            let budget = p.constraints[i].1;
            let value = solver.constraint_value(&x, i);
            let slack_ok = mu[i] * (value - budget).abs() <= 5e-7 * budget;
            let feasible = value <= budget * (1.0 + tol);
            slack_ok && feasible
        });
        if converged {
            return Ok(QcqpSolution { x, multipliers: mu });
        }
    }
    Err(Error::Solver("dual coordinate ascent did not converge in 200 sweeps".into()))
}
