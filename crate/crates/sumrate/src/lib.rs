//! Sum-rate maximization for relay-aided multi-cell MIMO downlink.
//!
//! This crate implements transceiver design for an interference-limited
//! cellular downlink in two flavours:
//!
//! * **two-hop** — each of `K` base stations serves `M` single-stream mobile
//!   stations through a shared pool of `R` half-duplex amplify-and-forward
//!   relays (no direct base-station→mobile link), and
//! * **single-hop** — the classical interfering-broadcast downlink without
//!   relays.
//!
//! Three iterative algorithms operate on a common signal model:
//!
//! * [`algorithms::maximize_sum_rate`] — block-coordinate ascent on a
//!   multi-concave surrogate of the sum rate (the main algorithm),
//! * [`algorithms::minimize_sum_mse`] — alternating sum-MSE minimization
//!   (baseline),
//! * [`algorithms::minimize_leakage`] — alternating interference-leakage
//!   minimization in the style of interference alignment (baseline).
//!
//! The [`harness`] module drives Monte-Carlo experiments over random channel
//! snapshots (pseudo-SNR sweeps, convergence traces, rate densities) and
//! writes CSV datasets; the `sumrate` binary exposes it as a CLI.
//!
//! # Conventions
//!
//! * All indices are 0-based: mobile stations are `m ∈ 0..K·M`, base
//!   stations `k ∈ 0..K`, relays `r ∈ 0..R`.
//! * Powers are linear (not dB) throughout the library; only the harness
//!   converts a pseudo-SNR given in dB into linear budgets.
//! * Rates are in bits per channel use; "per time slot" rates divide by the
//!   number of hops (2 for the relayed protocol, 1 otherwise).

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod model;
pub mod scenario;
pub mod subsolvers;
pub mod surrogate;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
