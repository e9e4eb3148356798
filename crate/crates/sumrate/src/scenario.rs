//! Scenario configuration, mobile-to-base-station assignment, and random
//! channel generation.
//!
//! A scenario is a cellular downlink with `K` cells. Base station `k` has
//! `N_B` antennas and serves `M` single-antenna-stream mobile stations with
//! `N_M` antennas each. In two-hop mode the base stations reach the mobiles
//! only through `R` shared amplify-and-forward relays with `N_R` antennas
//! each; in single-hop mode they transmit directly.
//!
//! Channels are i.i.d. circularly-symmetric complex Gaussian with unit
//! average gain (real and imaginary parts each of variance 1/2) and are drawn
//! from counter-based substreams: each matrix gets its own ChaCha stream
//! keyed by `(seed, kind, indices)`, so generation is reproducible and
//! independent of evaluation order.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::{C64, CMatrix};

/// Transmission mode of the downlink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Base stations reach mobiles through half-duplex amplify-and-forward
    /// relays; the protocol spends two time slots per channel use.
    TwoHop,
    /// Base stations transmit directly to the mobiles in one time slot.
    SingleHop,
}

impl Mode {
    /// Number of time slots one channel use occupies under this mode.
    pub fn slots(self) -> f64 {
        match self {
            Mode::TwoHop => 2.0,
            Mode::SingleHop => 1.0,
        }
    }

    /// Canonical configuration-file spelling.
    pub fn label(self) -> &'static str {
        match self {
            Mode::TwoHop => "two-hop",
            Mode::SingleHop => "single-hop",
        }
    }
}

/// Dimensions, power budgets, and noise level of one downlink scenario.
///
/// All powers are linear. Invariants are checked by [`ScenarioConfig::validate`],
/// which every public operation taking a config relies on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Number of cells (base stations), `K ≥ 1`.
    pub cells: usize,
    /// Mobile stations served per cell, `1 ≤ M ≤ N_B`.
    pub users_per_cell: usize,
    /// Number of relays `R` (ignored in single-hop mode).
    pub relays: usize,
    /// Antennas per base station, `N_B`.
    pub bs_antennas: usize,
    /// Antennas per relay, `N_R` (ignored in single-hop mode).
    pub relay_antennas: usize,
    /// Antennas per mobile station, `N_M`.
    pub ms_antennas: usize,
    /// Average power of one data symbol, `P_d > 0`.
    pub symbol_power: f64,
    /// Sum transmit power budget over all base stations, `P_B > 0`.
    pub bs_budget: f64,
    /// Sum transmit power budget over all relays, `P_R > 0` in two-hop mode.
    pub relay_budget: f64,
    /// Noise variance at relays and mobiles, `σ² > 0`.
    pub noise_var: f64,
    /// Transmission mode.
    pub mode: Mode,
}

impl ScenarioConfig {
    /// Total number of mobile stations `K·M`.
    pub fn num_users(&self) -> usize {
        self.cells * self.users_per_cell
    }

    /// Checks every invariant, returning a [`Error::Config`] naming the
    /// offending field otherwise.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.cells < 1 {
            return fail("K: at least one cell is required");
        }
        if self.users_per_cell < 1 {
            return fail("M: at least one mobile station per cell is required");
        }
        if self.bs_antennas < 1 {
            return fail("N_B: base stations need at least one antenna");
        }
        if self.ms_antennas < 1 {
            return fail("N_M: mobile stations need at least one antenna");
        }
        if self.users_per_cell > self.bs_antennas {
            return fail("M: per-cell user count must not exceed N_B (one stream per user)");
        }
        if !(self.symbol_power > 0.0 && self.symbol_power.is_finite()) {
            return fail("P_d: symbol power must be positive and finite");
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return fail("sigma2: noise variance must be positive and finite");
        }
        if !(self.bs_budget > 0.0 && self.bs_budget.is_finite()) {
            return fail("P_B: base-station power budget must be positive and finite");
        }
        match self.mode {
            Mode::TwoHop => {
                if self.relays < 1 {
                    return fail("R: two-hop mode needs at least one relay");
                }
                if self.relay_antennas < 1 {
                    return fail("N_R: relays need at least one antenna");
                }
                if !(self.relay_budget > 0.0 && self.relay_budget.is_finite()) {
                    return fail("P_R: relay power budget must be positive and finite in two-hop mode");
                }
            }
            Mode::SingleHop => {
                if !(self.relay_budget >= 0.0) {
                    return fail("P_R: relay power budget must not be negative");
                }
            }
        }
        Ok(())
    }

    /// Returns a copy with power budgets set from a pseudo-SNR.
    ///
    /// The pseudo-SNR is the total transmit power over the noise variance,
    /// `(P_B + P_R)/σ²`, given here in dB. `rho ∈ (0,1)` is the fraction of
    /// the total assigned to the base stations; the relays get the rest. In
    /// single-hop mode the full total goes to the base stations and `rho` is
    /// ignored.
    pub fn with_psnr(&self, psnr_db: f64, rho: f64) -> Result<ScenarioConfig> {
        if !psnr_db.is_finite() {
            return Err(Error::Config("psnr_db: must be finite".into()));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Config("rho: power split must lie strictly between 0 and 1".into()));
        }
        let total = 10f64.powf(psnr_db / 10.0) * self.noise_var;
        let mut cfg = *self;
        match self.mode {
            Mode::TwoHop => {
                cfg.bs_budget = rho * total;
                cfg.relay_budget = (1.0 - rho) * total;
            }
            Mode::SingleHop => {
                cfg.bs_budget = total;
                cfg.relay_budget = 0.0;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Base station serving mobile station `m` (both 0-based).
///
/// Mobiles are assigned in contiguous blocks: station `k` serves
/// `m ∈ k·M .. (k+1)·M`. The mobile's index within its cell is
/// `m % M`.
///
/// # Panics
/// Panics if `m ≥ K·M` (index error).
pub fn serving_bs(m: usize, cfg: &ScenarioConfig) -> usize {
    assert!(
        m < cfg.num_users(),
        "mobile station index {m} out of range (K*M = {})",
        cfg.num_users()
    );
    m / cfg.users_per_cell
}

/// All channel matrices of one scenario snapshot; immutable after creation.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    dims: Dims,
    /// `bs_to_relay[r][k]`: N_R×N_B channel from base station `k` to relay `r`.
    bs_to_relay: Vec<Vec<CMatrix>>,
    /// `relay_to_ms[m][r]`: N_M×N_R channel from relay `r` to mobile `m`.
    relay_to_ms: Vec<Vec<CMatrix>>,
    /// `bs_to_ms[m][k]`: N_M×N_B channel from base station `k` to mobile `m`
    /// (single-hop mode only).
    bs_to_ms: Vec<Vec<CMatrix>>,
    seed: u64,
}

/// Shape-relevant subset of a configuration (power budgets excluded: they do
/// not affect channel shapes and may be rescaled after drawing).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Dims {
    cells: usize,
    users_per_cell: usize,
    relays: usize,
    bs_antennas: usize,
    relay_antennas: usize,
    ms_antennas: usize,
    mode: Mode,
}

impl Dims {
    fn of(cfg: &ScenarioConfig) -> Dims {
        Dims {
            cells: cfg.cells,
            users_per_cell: cfg.users_per_cell,
            relays: if cfg.mode == Mode::TwoHop { cfg.relays } else { 0 },
            bs_antennas: cfg.bs_antennas,
            relay_antennas: if cfg.mode == Mode::TwoHop { cfg.relay_antennas } else { 0 },
            ms_antennas: cfg.ms_antennas,
            mode: cfg.mode,
        }
    }
}

impl ChannelSet {
    /// Channel from base station `k` to relay `r` (two-hop mode).
    ///
    /// # Panics
    /// Panics on out-of-range indices or in single-hop mode.
    pub fn bs_to_relay(&self, r: usize, k: usize) -> &CMatrix {
        assert_eq!(self.dims.mode, Mode::TwoHop, "bs_to_relay is a two-hop channel");
        &self.bs_to_relay[r][k]
    }

    /// Channel from relay `r` to mobile station `m` (two-hop mode).
    ///
    /// # Panics
    /// Panics on out-of-range indices or in single-hop mode.
    pub fn relay_to_ms(&self, m: usize, r: usize) -> &CMatrix {
        assert_eq!(self.dims.mode, Mode::TwoHop, "relay_to_ms is a two-hop channel");
        &self.relay_to_ms[m][r]
    }

    /// Channel from base station `k` to mobile station `m` (single-hop mode).
    ///
    /// # Panics
    /// Panics on out-of-range indices or in two-hop mode.
    pub fn bs_to_ms(&self, m: usize, k: usize) -> &CMatrix {
        assert_eq!(self.dims.mode, Mode::SingleHop, "bs_to_ms is a single-hop channel");
        &self.bs_to_ms[m][k]
    }

    /// Seed this snapshot was drawn from (0 for explicitly constructed sets).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Transmission mode the snapshot was drawn for.
    pub fn mode(&self) -> Mode {
        self.dims.mode
    }

    /// Errors unless this snapshot's shapes match `cfg`.
    pub fn check_compatible(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.dims != Dims::of(cfg) {
            return Err(Error::Dimension(
                "channel set was drawn for a different scenario shape".into(),
            ));
        }
        Ok(())
    }

    /// Builds a channel set from explicit matrices (e.g. fixed unit-gain
    /// channels in tests and closed-form scenarios).
    ///
    /// Two-hop mode expects `bs_to_relay[r][k]` and `relay_to_ms[m][r]` and
    /// ignores `bs_to_ms`; single-hop mode expects `bs_to_ms[m][k]` and
    /// ignores the other two. Shapes are validated against `cfg`.
    pub fn from_matrices(
        cfg: &ScenarioConfig,
        bs_to_relay: Vec<Vec<CMatrix>>,
        relay_to_ms: Vec<Vec<CMatrix>>,
        bs_to_ms: Vec<Vec<CMatrix>>,
    ) -> Result<ChannelSet> {
        cfg.validate()?;
        let dims = Dims::of(cfg);
        let check_family = |name: &str,
                            fam: &[Vec<CMatrix>],
                            outer: usize,
                            inner: usize,
                            rows: usize,
                            cols: usize|
         -> Result<()> {
            if fam.len() != outer || fam.iter().any(|row| row.len() != inner) {
                return Err(Error::Dimension(format!(
                    "{name}: expected a {outer}×{inner} family of matrices"
                )));
            }
            for row in fam {
                for mat in row {
                    if mat.nrows() != rows || mat.ncols() != cols {
                        return Err(Error::Dimension(format!(
                            "{name}: expected {rows}×{cols} matrices, found {}×{}",
                            mat.nrows(),
                            mat.ncols()
                        )));
                    }
                }
            }
            Ok(())
        };
        match cfg.mode {
            Mode::TwoHop => {
                check_family(
                    "bs_to_relay",
                    &bs_to_relay,
                    cfg.relays,
                    cfg.cells,
                    cfg.relay_antennas,
                    cfg.bs_antennas,
                )?;
                check_family(
                    "relay_to_ms",
                    &relay_to_ms,
                    cfg.num_users(),
                    cfg.relays,
                    cfg.ms_antennas,
                    cfg.relay_antennas,
                )?;
                Ok(ChannelSet { dims, bs_to_relay, relay_to_ms, bs_to_ms: Vec::new(), seed: 0 })
            }
            Mode::SingleHop => {
                check_family(
                    "bs_to_ms",
                    &bs_to_ms,
                    cfg.num_users(),
                    cfg.cells,
                    cfg.ms_antennas,
                    cfg.bs_antennas,
                )?;
                Ok(ChannelSet {
                    dims,
                    bs_to_relay: Vec::new(),
                    relay_to_ms: Vec::new(),
                    bs_to_ms,
                    seed: 0,
                })
            }
        }
    }
}

/// Draws a full channel snapshot: every entry i.i.d. circularly-symmetric
/// complex Gaussian with zero mean and unit variance.
///
/// The draw is a pure function of `(cfg, seed)`: the same pair produces a
/// bit-identical [`ChannelSet`] regardless of call order or thread count.
pub fn draw_channels(cfg: &ScenarioConfig, seed: u64) -> Result<ChannelSet> {
    cfg.validate()?;
    let dims = Dims::of(cfg);
    let mut bs_to_relay = Vec::new();
    let mut relay_to_ms = Vec::new();
    let mut bs_to_ms = Vec::new();
    match cfg.mode {
        Mode::TwoHop => {
            for r in 0..cfg.relays {
                let mut per_bs = Vec::new();
                for k in 0..cfg.cells {
                    let mut rng = rng::stream(seed, &[rng::KIND_BS_TO_RELAY, r as u64, k as u64]);
                    per_bs.push(rng::complex_gaussian_matrix(
                        cfg.relay_antennas,
                        cfg.bs_antennas,
                        &mut rng,
                    ));
                }
                bs_to_relay.push(per_bs);
            }
            for m in 0..cfg.num_users() {
                let mut per_relay = Vec::new();
                for r in 0..cfg.relays {
                    let mut rng = rng::stream(seed, &[rng::KIND_RELAY_TO_MS, m as u64, r as u64]);
                    per_relay.push(rng::complex_gaussian_matrix(
                        cfg.ms_antennas,
                        cfg.relay_antennas,
                        &mut rng,
                    ));
                }
                relay_to_ms.push(per_relay);
            }
        }
        Mode::SingleHop => {
            for m in 0..cfg.num_users() {
                let mut per_bs = Vec::new();
                for k in 0..cfg.cells {
                    let mut rng = rng::stream(seed, &[rng::KIND_BS_TO_MS, m as u64, k as u64]);
                    per_bs.push(rng::complex_gaussian_matrix(
                        cfg.ms_antennas,
                        cfg.bs_antennas,
                        &mut rng,
                    ));
                }
                bs_to_ms.push(per_bs);
            }
        }
    }
    Ok(ChannelSet { dims, bs_to_relay, relay_to_ms, bs_to_ms, seed })
}

/// Counter-based RNG substreams: a master seed plus a tag path is hashed
/// (splitmix64 chain) into the key of a dedicated ChaCha stream. Streams for
/// distinct paths are statistically independent, and deriving one never
/// advances another, so matrices/filters can be generated in any order.
pub(crate) mod rng {
    use super::*;

    // Tag-path roots. Channel kinds:
    pub(crate) const KIND_BS_TO_RELAY: u64 = 1;
    pub(crate) const KIND_RELAY_TO_MS: u64 = 2;
    pub(crate) const KIND_BS_TO_MS: u64 = 3;
    // Filter initialization kinds:
    pub(crate) const KIND_INIT_RX: u64 = 10;
    pub(crate) const KIND_INIT_TX: u64 = 11;
    pub(crate) const KIND_INIT_RELAY: u64 = 12;
    // Harness per-trial derivations:
    pub(crate) const KIND_TRIAL_CHANNELS: u64 = 100;
    pub(crate) const KIND_TRIAL_INIT: u64 = 101;

    fn splitmix64(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Hashes `(seed, path)` into a subkey; distinct paths give unrelated keys.
    pub(crate) fn subkey(seed: u64, path: &[u64]) -> u64 {
        let mut state = seed;
        let mut out = splitmix64(&mut state);
        for &tag in path {
            state = out ^ tag;
            out = splitmix64(&mut state);
        }
        out
    }

    /// Dedicated ChaCha stream for `(seed, path)`.
    pub(crate) fn stream(seed: u64, path: &[u64]) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(subkey(seed, path))
    }

    /// One CN(0,1) sample: real and imaginary parts i.i.d. N(0, 1/2).
    pub(crate) fn standard_complex(rng: &mut ChaCha12Rng) -> C64 {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix of i.i.d. CN(0,1) entries, filled column-major.
    pub(crate) fn complex_gaussian_matrix(
        rows: usize,
        cols: usize,
        rng: &mut ChaCha12Rng,
    ) -> CMatrix {
        let data: Vec<C64> = (0..rows * cols).map(|_| standard_complex(rng)).collect();
        DMatrix::from_vec(rows, cols, data)
    }
}

/// Raw layer of the configuration file. Keys are the canonical short names;
/// unknown keys are rejected so typos cannot silently fall back to defaults.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "R")]
    r: Option<usize>,
    #[serde(rename = "N_B")]
    n_b: Option<usize>,
    #[serde(rename = "N_R")]
    n_r: Option<usize>,
    #[serde(rename = "N_M")]
    n_m: Option<usize>,
    #[serde(rename = "P_d")]
    p_d: Option<f64>,
    sigma2: Option<f64>,
    mode: Option<Mode>,
    #[serde(rename = "P_B")]
    p_b: Option<f64>,
    #[serde(rename = "P_R")]
    p_r: Option<f64>,
    psnr_db: Option<f64>,
    rho: Option<f64>,
}

/// Parses and validates a scenario from flat key-value text (TOML).
///
/// Required keys: `K`, `M`, `N_B`, `N_M`, and in two-hop mode `R` and `N_R`.
/// Defaults: `P_d = 1.0`, `sigma2 = 1.0`, `mode = "two-hop"`. Power budgets
/// come either from explicit `P_B` (and `P_R` in two-hop mode) or from a
/// pseudo-SNR specification `psnr_db` with optional split `rho`
/// (default 0.5); giving both is an error.
///
/// # Examples
/// ```
/// use sumrate::scenario::load_config;
/// let cfg = load_config(
///     "K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\npsnr_db = 30.0\n",
/// )
/// .unwrap();
/// assert_eq!(cfg.num_users(), 6);
/// assert!((cfg.bs_budget - 500.0).abs() < 1e-9);
/// ```
pub fn load_config(source: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig =
        toml::from_str(source).map_err(|e| Error::Config(format!("parse failure: {e}")))?;
    let mode = raw.mode.unwrap_or(Mode::TwoHop);
    let require = |field: Option<usize>, name: &str| -> Result<usize> {
        field.ok_or_else(|| Error::Config(format!("{name}: required key is missing")))
    };
    let cells = require(raw.k, "K")?;
    let users_per_cell = require(raw.m, "M")?;
    let bs_antennas = require(raw.n_b, "N_B")?;
    let ms_antennas = require(raw.n_m, "N_M")?;
    let (relays, relay_antennas) = match mode {
        Mode::TwoHop => (require(raw.r, "R")?, require(raw.n_r, "N_R")?),
        // Ignored in single-hop mode even if present.
        Mode::SingleHop => (0, 0),
    };

    let mut cfg = ScenarioConfig {
        cells,
        users_per_cell,
        relays,
        bs_antennas,
        relay_antennas,
        ms_antennas,
        symbol_power: raw.p_d.unwrap_or(1.0),
        // Placeholder budgets; replaced below and then validated.
        bs_budget: 1.0,
        relay_budget: if mode == Mode::TwoHop { 1.0 } else { 0.0 },
        noise_var: raw.sigma2.unwrap_or(1.0),
        mode,
    };

    let explicit = raw.p_b.is_some() || raw.p_r.is_some();
    match (explicit, raw.psnr_db) {
        (true, Some(_)) => {
            return Err(Error::Config(
                "P_B/P_R and psnr_db are mutually exclusive; give one power specification".into(),
            ));
        }
        (true, None) => {
            cfg.bs_budget = raw
                .p_b
                .ok_or_else(|| Error::Config("P_B: required when P_R is given".into()))?;
            match mode {
                Mode::TwoHop => {
                    cfg.relay_budget = raw
                        .p_r
                        .ok_or_else(|| Error::Config("P_R: required in two-hop mode".into()))?;
                }
                Mode::SingleHop => cfg.relay_budget = 0.0,
            }
            cfg.validate()?;
        }
        (false, Some(psnr_db)) => {
            // Validate everything except budgets first so with_psnr starts
            // from a coherent scenario.
            cfg.validate()?;
            cfg = cfg.with_psnr(psnr_db, raw.rho.unwrap_or(0.5))?;
        }
        (false, None) => {
            return Err(Error::Config(
                "P_B (with P_R in two-hop mode) or psnr_db: a power specification is required"
                    .into(),
            ));
        }
    }
    Ok(cfg)
}

/// Reads and parses a configuration file; I/O failures carry the path.
pub fn load_config_path(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_hop_cfg() -> ScenarioConfig {
        ScenarioConfig {
            cells: 2,
            users_per_cell: 3,
            relays: 4,
            bs_antennas: 3,
            relay_antennas: 2,
            ms_antennas: 2,
            symbol_power: 1.0,
            bs_budget: 500.0,
            relay_budget: 500.0,
            noise_var: 1.0,
            mode: Mode::TwoHop,
        }
    }

    #[test]
    fn serving_bs_blocks_are_contiguous() {
        let cfg = two_hop_cfg();
        // First mobile belongs to the first base station.
        assert_eq!(serving_bs(0, &cfg), 0);
        // First mobile of the second cell (1-based m=4 in a K=2, M=3 layout).
        assert_eq!(serving_bs(3, &cfg), 1);
        // Last mobile of the last cell.
        assert_eq!(serving_bs(5, &cfg), 1);
        // Partition property: K contiguous blocks of size M.
        let blocks: Vec<usize> = (0..cfg.num_users()).map(|m| serving_bs(m, &cfg)).collect();
        assert_eq!(blocks, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn serving_bs_rejects_out_of_range_index() {
        let cfg = two_hop_cfg();
        serving_bs(6, &cfg);
    }

    #[test]
    fn draw_channels_is_deterministic_in_cfg_and_seed() {
        let cfg = two_hop_cfg();
        let a = draw_channels(&cfg, 42).unwrap();
        let b = draw_channels(&cfg, 42).unwrap();
        for r in 0..cfg.relays {
            for k in 0..cfg.cells {
                assert_eq!(a.bs_to_relay(r, k), b.bs_to_relay(r, k));
            }
        }
        for m in 0..cfg.num_users() {
            for r in 0..cfg.relays {
                assert_eq!(a.relay_to_ms(m, r), b.relay_to_ms(m, r));
            }
        }
        let c = draw_channels(&cfg, 43).unwrap();
        assert_ne!(a.bs_to_relay(0, 0), c.bs_to_relay(0, 0));
    }

    #[test]
    fn drawn_matrices_have_contract_shapes() {
        let cfg = two_hop_cfg();
        let ch = draw_channels(&cfg, 7).unwrap();
        // N_R×N_B on the first hop, N_M×N_R on the second.
        assert_eq!((ch.bs_to_relay(3, 1).nrows(), ch.bs_to_relay(3, 1).ncols()), (2, 3));
        assert_eq!((ch.relay_to_ms(5, 2).nrows(), ch.relay_to_ms(5, 2).ncols()), (2, 2));

        let mut single = two_hop_cfg();
        single.mode = Mode::SingleHop;
        single.relay_budget = 0.0;
        let ch = draw_channels(&single, 7).unwrap();
        assert_eq!((ch.bs_to_ms(0, 1).nrows(), ch.bs_to_ms(0, 1).ncols()), (2, 3));
    }

    #[test]
    fn entries_have_zero_mean_and_unit_variance() {
        // 10^5 entries: |sample mean| < 0.02 per component and E|h|² within 2%.
        let mut rng = rng::stream(2024, &[999]);
        let n = 100_000;
        let mut mean = C64::new(0.0, 0.0);
        let mut power = 0.0;
        for _ in 0..n {
            let h = rng::standard_complex(&mut rng);
            mean += h;
            power += h.norm_sqr();
        }
        mean /= n as f64;
        power /= n as f64;
        assert!(mean.norm() < 0.02, "sample mean magnitude {} too large", mean.norm());
        assert!((0.98..=1.02).contains(&power), "sample E|h|^2 = {power} outside [0.98, 1.02]");
    }

    #[test]
    fn substreams_do_not_collide() {
        // Neighbouring tag paths must produce unrelated streams.
        let a = rng::subkey(1, &[rng::KIND_BS_TO_RELAY, 0, 1]);
        let b = rng::subkey(1, &[rng::KIND_BS_TO_RELAY, 1, 0]);
        let c = rng::subkey(1, &[rng::KIND_RELAY_TO_MS, 0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn load_config_accepts_the_reference_scenario() {
        let cfg = load_config(
            "K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\nP_B = 500.0\nP_R = 500.0\n",
        )
        .unwrap();
        assert_eq!(cfg, two_hop_cfg());
    }

    #[test]
    fn load_config_applies_documented_defaults() {
        let cfg = load_config("K = 1\nM = 1\nR = 1\nN_B = 1\nN_R = 1\nN_M = 1\npsnr_db = 0.0\n")
            .unwrap();
        assert_eq!(cfg.symbol_power, 1.0);
        assert_eq!(cfg.noise_var, 1.0);
        assert_eq!(cfg.mode, Mode::TwoHop);
        // psnr 0 dB with the default rho = 0.5 split.
        assert!((cfg.bs_budget - 0.5).abs() < 1e-12);
        assert!((cfg.relay_budget - 0.5).abs() < 1e-12);
    }

    #[test]
    fn load_config_rejects_more_users_than_bs_antennas() {
        let err = load_config("K = 2\nM = 4\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\npsnr_db = 30.0\n")
            .unwrap_err();
        assert!(err.to_string().contains("M"), "error should name the field: {err}");
    }

    #[test]
    fn load_config_rejects_bad_noise_and_missing_keys() {
        let err =
            load_config("K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\nsigma2 = -1.0\npsnr_db = 0.0\n")
                .unwrap_err();
        assert!(err.to_string().contains("sigma2"), "{err}");

        let err = load_config("M = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\npsnr_db = 0.0\n")
            .unwrap_err();
        assert!(err.to_string().contains("K"), "{err}");

        let err = load_config("K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\n").unwrap_err();
        assert!(err.to_string().contains("power"), "{err}");
    }

    #[test]
    fn load_config_rejects_conflicting_power_specs_and_unknown_keys() {
        let err = load_config(
            "K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\nP_B = 1.0\nP_R = 1.0\npsnr_db = 30.0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"), "{err}");

        let err = load_config("K = 2\nM = 3\nR = 4\nN_B = 3\nN_R = 2\nN_M = 2\nP_X = 1.0\n")
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn single_hop_config_ignores_relay_keys() {
        let cfg = load_config("K = 3\nM = 2\nN_B = 4\nN_M = 2\nmode = \"single-hop\"\npsnr_db = 10.0\n")
            .unwrap();
        assert_eq!(cfg.mode, Mode::SingleHop);
        assert_eq!(cfg.relays, 0);
        // Single-hop: the full total goes to the base stations.
        assert!((cfg.bs_budget - 10.0).abs() < 1e-12);
        assert_eq!(cfg.relay_budget, 0.0);
    }

    #[test]
    fn with_psnr_round_trips_to_db() {
        let cfg = two_hop_cfg().with_psnr(17.0, 0.3).unwrap();
        let db = 10.0 * ((cfg.bs_budget + cfg.relay_budget) / cfg.noise_var).log10();
        assert!((db - 17.0).abs() < 1e-12);
        assert!((cfg.bs_budget / (cfg.bs_budget + cfg.relay_budget) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn from_matrices_validates_shapes() {
        let mut cfg = two_hop_cfg();
        cfg.cells = 1;
        cfg.users_per_cell = 1;
        cfg.relays = 1;
        let ok = ChannelSet::from_matrices(
            &cfg,
            vec![vec![CMatrix::identity(2, 3)]],
            vec![vec![CMatrix::identity(2, 2)]],
            vec![],
        );
        assert!(ok.is_ok());
        let bad = ChannelSet::from_matrices(
            &cfg,
            vec![vec![CMatrix::identity(3, 3)]],
            vec![vec![CMatrix::identity(2, 2)]],
            vec![],
        );
        assert!(matches!(bad.unwrap_err(), Error::Dimension(_)));
    }
}
