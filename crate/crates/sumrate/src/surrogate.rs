//! Multi-concave surrogate of the sum rate.
//!
//! The rate term `log₂(1+γ^(m))` is replaced through a scaled mean-square
//! error: with a per-mobile complex scaling `w^(m)`, the estimate `d̂ = u*y`
//! of the scaled symbol `w d` has the error
//!
//! ```text
//! g^(m)(w) = E|d̂ − w d|² = P_d·|u*q − w|² + u* Z u ,
//! ```
//!
//! and the ratio `η^(m)(w) = P_d|w|² / g^(m)(w)` attains its unique maximum
//! `1 + γ^(m)` at [`w_opt`]. A second positive scaling `t^(m)` linearizes the
//! logarithm: the block-concave objective maximized by the main algorithm is
//!
//! ```text
//! b = Σ_m [ log₂(P_d|w^(m)|²) + log₂ t^(m) − (t^(m)/ln 2)·g^(m) ] ,
//! ```
//!
//! which for `t = t_opt(w) = 1/g(w)` collapses to
//! `Σ_m log₂ η^(m)(w^(m)) − KM/ln 2` — at the optimal scalings, maximizing
//! `b` is maximizing the sum rate. `b` is concave in each block (receive
//! filters, transmit filters, relay matrices, `w`, `t`) with the others
//! fixed, which is what the alternating algorithm exploits.

use crate::error::{Error, Result};
use crate::model::{disturbance_power, link_stats, LinkStats};
use crate::scenario::{ChannelSet, ScenarioConfig};
use crate::{C64, CVector};

/// Per-mobile scaling factors of the surrogate objective.
#[derive(Clone, Debug)]
pub struct AuxState {
    /// Complex symbol scalings `w^(m)`; must stay nonzero for `b` to be
    /// defined.
    pub w: Vec<C64>,
    /// Positive real scalings `t^(m)`.
    pub t: Vec<f64>,
}

impl AuxState {
    /// The canonical initial value: `w^(m) = 1`, `t^(m) = 1` for all mobiles.
    pub fn ones(num_users: usize) -> AuxState {
        AuxState {
            w: vec![C64::new(1.0, 0.0); num_users],
            t: vec![1.0; num_users],
        }
    }

    /// Errors unless the factor counts match the scenario.
    pub fn check_dims(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.w.len() != cfg.num_users() || self.t.len() != cfg.num_users() {
            return Err(Error::Dimension(format!(
                "expected {} scaling factors, found {} (w) and {} (t)",
                cfg.num_users(),
                self.w.len(),
                self.t.len()
            )));
        }
        Ok(())
    }
}

/// Scaled mean-square error from precomputed link statistics.
pub(crate) fn g_from_stats(stats: &LinkStats, u: &CVector, symbol_power: f64, w: C64) -> f64 {
    let bias = u.dotc(&stats.q) - w;
    symbol_power * bias.norm_sqr() + disturbance_power(stats, u)
}

/// Scaled mean-square error `g^(m)(w) = P_d·|u*q − w|² + u*Zu` of mobile `m`.
///
/// Strictly positive whenever `σ² > 0`.
pub fn g_value(
    m: usize,
    state: &crate::model::SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    w_m: C64,
) -> Result<f64> {
    let stats = link_stats(m, state, ch, cfg)?;
    Ok(g_from_stats(&stats, &state.u[m], cfg.symbol_power, w_m))
}

/// The ratio `η = P_d|w|²/g` given an already-computed `g`.
pub(crate) fn eta_from_g(symbol_power: f64, w: C64, g: f64) -> f64 {
    symbol_power * w.norm_sqr() / g
}

/// Surrogate ratio `η^(m)(w) = P_d|w|² / g^(m)(w)`.
///
/// `η(0) = 0`, `η → 1` as `|w| → ∞`, and the unique maximum over `w` is
/// `1 + γ^(m)`, attained at [`w_opt`].
pub fn eta(
    m: usize,
    state: &crate::model::SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    w_m: C64,
) -> Result<f64> {
    Ok(eta_from_g(cfg.symbol_power, w_m, g_value(m, state, ch, cfg, w_m)?))
}

/// Maximizer of `η^(m)` from precomputed stats; see [`w_opt`].
pub(crate) fn w_opt_from_stats(
    m: usize,
    stats: &LinkStats,
    u: &CVector,
    symbol_power: f64,
) -> Result<C64> {
    let c = u.dotc(&stats.q);
    if c.norm_sqr() == 0.0 {
        return Err(Error::DegenerateLink { ms: m });
    }
    let numerator = symbol_power * c.norm_sqr() + disturbance_power(stats, u);
    // 1/conj(c) = c/|c|².
    Ok(c * (numerator / (symbol_power * c.norm_sqr())))
}

/// The scaling `w_opt = (P_d|u*q|² + u*Zu) / (P_d·(u*q)*)` at which
/// `η^(m)(w_opt) = 1 + γ^(m)`.
///
/// Errors with [`Error::DegenerateLink`] when `u*q = 0` (the ratio has no
/// maximizer); callers keep the previous scaling for that mobile.
pub fn w_opt(
    m: usize,
    state: &crate::model::SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<C64> {
    let stats = link_stats(m, state, ch, cfg)?;
    w_opt_from_stats(m, &stats, &state.u[m], cfg.symbol_power)
}

/// Maximizer `t_opt = 1/g^(m)(w)` of the per-mobile term of `b` over `t`.
pub fn t_opt(
    m: usize,
    state: &crate::model::SystemState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
    w_m: C64,
) -> Result<f64> {
    Ok(1.0 / g_value(m, state, ch, cfg, w_m)?)
}

/// One mobile's contribution to `b`; domain-checks `w ≠ 0` and `t > 0`.
pub(crate) fn b_term(symbol_power: f64, w: C64, t: f64, g: f64) -> Result<f64> {
    if w.norm_sqr() == 0.0 {
        return Err(Error::Domain("b is undefined at w = 0 (log of zero)".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("b requires t > 0, got t = {t}")));
    }
    Ok((symbol_power * w.norm_sqr()).log2() + t.log2() - t / std::f64::consts::LN_2 * g)
}

/// The block-concave objective
/// `b = Σ_m [log₂(P_d|w^(m)|²) + log₂ t^(m) − (t^(m)/ln 2)·g^(m)(w^(m))]`.
pub fn b_objective(
    state: &crate::model::SystemState,
    aux: &AuxState,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    aux.check_dims(cfg)?;
    let mut b = 0.0;
    for m in 0..cfg.num_users() {
        let g = g_value(m, state, ch, cfg, aux.w[m])?;
        b += b_term(cfg.symbol_power, aux.w[m], aux.t[m], g)?;
    }
    Ok(b)
}
