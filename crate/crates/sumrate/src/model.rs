//! Signal-model quantities: effective links, interference-plus-noise
//! covariances, SINR, sum rate, and transmit-power evaluation.
//!
//! # Signal model
//!
//! Base station `k` transmits `V^(k) d^(k)` where `d^(k)` carries one
//! uncorrelated symbol of average power `P_d` per served mobile. In two-hop
//! mode each relay `r` receives `Σ_k H_RB^(r,k) V^(k) d^(k) + n_R`, applies
//! its processing matrix `G^(r)`, and retransmits; mobile `m` then observes
//!
//! ```text
//! y^(m) = Σ_l T_m^(l) V^(l) d^(l) + Σ_r H_MR^(m,r) G^(r) n_R^(r) + n_M ,
//! T_m^(l) = Σ_r H_MR^(m,r) G^(r) H_RB^(r,l)   (effective BS→MS matrix).
//! ```
//!
//! In single-hop mode `T_m^(l) = H_MB^(m,l)` and the relay-noise term is
//! absent. The *effective useful link* is `q^(m) = T_m^(k) v^(k,m)` for the
//! serving station `k`, and everything else received — intra-cell columns
//! `j ≠ m`, all other cells' columns, forwarded relay noise, local noise —
//! is the disturbance `z^(m)` whose covariance `Z^(m)` is computed here in
//! closed form (symbols uncorrelated with power `P_d`, noise i.i.d. with
//! variance `σ²`).

use crate::error::{Error, Result};
use crate::scenario::{serving_bs, ChannelSet, Mode, ScenarioConfig};
use crate::{C64, CMatrix, CVector};

/// One design point: transmit filters, relay processing matrices, and
/// receive filters.
#[derive(Clone, Debug)]
pub struct SystemState {
    /// Per base station `k`: the N_B×M transmit filter whose column `j`
    /// precodes the symbol of the mobile `k·M + j`.
    pub v: Vec<CMatrix>,
    /// Per relay `r`: the N_R×N_R processing matrix. Empty in single-hop mode.
    pub g: Vec<CMatrix>,
    /// Per mobile `m`: the length-N_M receive filter.
    pub u: Vec<CVector>,
}

impl SystemState {
    /// All-zero state with the shapes demanded by `cfg`.
    pub fn zeros(cfg: &ScenarioConfig) -> SystemState {
        let g = match cfg.mode {
            Mode::TwoHop => {
                vec![CMatrix::zeros(cfg.relay_antennas, cfg.relay_antennas); cfg.relays]
            }
            Mode::SingleHop => Vec::new(),
        };
        SystemState {
            v: vec![CMatrix::zeros(cfg.bs_antennas, cfg.users_per_cell); cfg.cells],
            g,
            u: vec![CVector::zeros(cfg.ms_antennas); cfg.num_users()],
        }
    }

    /// Verifies that every filter has the shape demanded by `cfg`.
    pub fn check_dims(&self, cfg: &ScenarioConfig) -> Result<()> {
        let err = |msg: String| Err(Error::Dimension(msg));
        if self.v.len() != cfg.cells {
            return err(format!("expected {} transmit filters, found {}", cfg.cells, self.v.len()));
        }
        for (k, v) in self.v.iter().enumerate() {
            if v.nrows() != cfg.bs_antennas || v.ncols() != cfg.users_per_cell {
                return err(format!(
                    "transmit filter {k} is {}×{}, expected {}×{}",
                    v.nrows(),
                    v.ncols(),
                    cfg.bs_antennas,
                    cfg.users_per_cell
                ));
            }
        }
        let expected_relays = if cfg.mode == Mode::TwoHop { cfg.relays } else { 0 };
        if self.g.len() != expected_relays {
            return err(format!(
                "expected {} relay matrices, found {}",
                expected_relays,
                self.g.len()
            ));
        }
        for (r, g) in self.g.iter().enumerate() {
            if g.nrows() != cfg.relay_antennas || g.ncols() != cfg.relay_antennas {
                return err(format!(
                    "relay matrix {r} is {}×{}, expected {}×{}",
                    g.nrows(),
                    g.ncols(),
                    cfg.relay_antennas,
                    cfg.relay_antennas
                ));
            }
        }
        if self.u.len() != cfg.num_users() {
            return err(format!(
                "expected {} receive filters, found {}",
                cfg.num_users(),
                self.u.len()
            ));
        }
        for (m, u) in self.u.iter().enumerate() {
            if u.len() != cfg.ms_antennas {
                return err(format!(
                    "receive filter {m} has length {}, expected {}",
                    u.len(),
                    cfg.ms_antennas
                ));
            }
        }
        Ok(())
    }
}

/// Effective useful link and disturbance covariance of one mobile station.
#[derive(Clone, Debug)]
pub struct LinkStats {
    /// Effective useful link `q^(m)` (length N_M).
    pub q: CVector,
    /// Covariance of interference plus forwarded and local noise; Hermitian
    /// positive definite with minimum eigenvalue ≥ σ².
    pub z: CMatrix,
}

/// Per-mobile effective propagation matrices, shared by the covariance,
/// receiver, and subproblem-assembly code paths.
pub(crate) struct EffectiveLinks {
    /// Per base station `l`: `T_m^(l)` (N_M×N_B).
    pub bs: Vec<CMatrix>,
    /// Per relay `r`: `H_MR^(m,r) G^(r)` (N_M×N_R); empty in single-hop mode.
    pub relay: Vec<CMatrix>,
}

/// Computes the effective matrices seen by mobile `m` under the current
/// relay processing. Callers guarantee validated dimensions.
pub(crate) fn effective_links(
    m: usize,
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> EffectiveLinks {
    match cfg.mode {
        Mode::TwoHop => {
            let relay: Vec<CMatrix> = (0..cfg.relays)
                .map(|r| ch.relay_to_ms(m, r) * &state.g[r])
                .collect();
            let bs = (0..cfg.cells)
                .map(|l| {
                    let mut t = CMatrix::zeros(cfg.ms_antennas, cfg.bs_antennas);
                    for r in 0..cfg.relays {
                        t += &relay[r] * ch.bs_to_relay(r, l);
                    }
                    t
                })
                .collect();
            EffectiveLinks { bs, relay }
        }
        Mode::SingleHop => EffectiveLinks {
            bs: (0..cfg.cells).map(|l| ch.bs_to_ms(m, l).clone()).collect(),
            relay: Vec::new(),
        },
    }
}

/// Builds [`LinkStats`] for mobile `m` from precomputed effective links.
pub(crate) fn stats_from_links(
    m: usize,
    links: &EffectiveLinks,
    state: &SystemState,
    cfg: &ScenarioConfig,
) -> LinkStats {
    let k = serving_bs(m, cfg);
    let own = m % cfg.users_per_cell;
    let nm = cfg.ms_antennas;

    let q = &links.bs[k] * state.v[k].column(own);

    // Interference: every transmitted column except the mobile's own.
    let mut interference = CMatrix::zeros(nm, nm);
    for l in 0..cfg.cells {
        for j in 0..cfg.users_per_cell {
            if l == k && j == own {
                continue;
            }
            let f = &links.bs[l] * state.v[l].column(j);
            interference += &f * f.adjoint();
        }
    }
    let mut z = interference.scale(cfg.symbol_power);
    // Relay noise forwarded through G (two-hop only).
    for b in &links.relay {
        z += (b * b.adjoint()).scale(cfg.noise_var);
    }
    // Local receiver noise.
    for i in 0..nm {
        z[(i, i)] += C64::new(cfg.noise_var, 0.0);
    }
    LinkStats { q, z }
}

/// Effective useful link `q^(m)` and disturbance covariance `Z^(m)` of
/// mobile `m`, evaluated analytically.
pub fn link_stats(
    m: usize,
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<LinkStats> {
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    state.check_dims(cfg)?;
    let links = effective_links(m, state, ch, cfg);
    Ok(stats_from_links(m, &links, state, cfg))
}

/// Quadratic `u* Z u` (real since `Z` is Hermitian).
pub(crate) fn disturbance_power(stats: &LinkStats, u: &CVector) -> f64 {
    let zu = &stats.z * u;
    u.dotc(&zu).re
}

/// Receive SINR of mobile `m` from precomputed stats; a vanishing receive
/// filter maps to 0 by convention. Since `Z ⪰ σ²I`, the disturbance
/// quadratic can only be zero (including by underflow) when the filter
/// itself is numerically zero, in which case the useful power is too —
/// both the signal and the noise projection vanish with the filter.
pub(crate) fn sinr_from_stats(stats: &LinkStats, u: &CVector, symbol_power: f64) -> f64 {
    let disturbance = disturbance_power(stats, u);
    if disturbance == 0.0 {
        return 0.0;
    }
    let useful = u.dotc(&stats.q).norm_sqr() * symbol_power;
    useful / disturbance
}

/// Receive SINR `γ^(m) = P_d·|u*q|² / (u*Zu)` of mobile `m`.
pub fn sinr(m: usize, state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
    let stats = link_stats(m, state, ch, cfg)?;
    Ok(sinr_from_stats(&stats, &state.u[m], cfg.symbol_power))
}

/// Sum rate `C = Σ_m log₂(1 + γ^(m))` in bits per channel use.
pub fn sum_rate(state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    ch.check_compatible(cfg)?;
    state.check_dims(cfg)?;
    let mut c = 0.0;
    for m in 0..cfg.num_users() {
        let links = effective_links(m, state, ch, cfg);
        let stats = stats_from_links(m, &links, state, cfg);
        c += (1.0 + sinr_from_stats(&stats, &state.u[m], cfg.symbol_power)).log2();
    }
    Ok(c)
}

/// Sum rate per time slot: `C/2` in two-hop mode (the half-duplex protocol
/// occupies two slots per channel use), `C` in single-hop mode.
pub fn sum_rate_per_slot(
    state: &SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    Ok(sum_rate(state, ch, cfg)? / cfg.mode.slots())
}

/// Sum transmit power of all base stations: `P_d · Σ_k tr(V^(k) V^(k)*)`.
pub fn bs_power(v: &[CMatrix], cfg: &ScenarioConfig) -> f64 {
    cfg.symbol_power * v.iter().map(|vk| vk.norm_squared()).sum::<f64>()
}

/// Sum transmit power of all relays:
/// `P_d·Σ_r tr(G D^(r) G*) + σ²·Σ_r tr(G G*)` with
/// `D^(r) = Σ_k H_RB^(r,k) V^(k) V^(k)* H_RB^(r,k)*` — i.e. forwarded signal
/// power plus forwarded noise power. Returns 0 in single-hop mode.
pub fn relay_power(
    v: &[CMatrix],
    g: &[CMatrix],
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> f64 {
    let mut total = 0.0;
    for (r, gr) in g.iter().enumerate() {
        let mut signal = 0.0;
        for (k, vk) in v.iter().enumerate() {
            // tr(G H V V* H* G*) = ‖G H V‖_F².
            signal += (gr * ch.bs_to_relay(r, k) * vk).norm_squared();
        }
        total += cfg.symbol_power * signal + cfg.noise_var * gr.norm_squared();
    }
    total
}
