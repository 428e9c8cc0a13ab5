//! Channel-gain sampling and SINR evaluation.
//!
//! All randomness in the crate flows through [`trial_stream`]: every Monte
//! Carlo trial owns a private RNG stream derived from (master seed, trial
//! index), so results do not depend on execution order or worker count.
//!
//! Gains are unit-mean exponential power gains, sampled directly: only
//! squared magnitudes enter any formula, so complex amplitudes are never
//! materialized. Both hops decode at a fixed rate of [`RATE_BITS`] bit/s/Hz,
//! which makes the SINR decoding threshold exactly 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::{Error, Result};

/// Fixed per-link transmission rate, bits/s/Hz. The decoding threshold is
/// `2^RATE_BITS - 1 = 1`; none of the closed forms below generalize past it.
pub const RATE_BITS: f64 = 1.0;

/// Fixed parameters of one experiment: population sizes and link SNRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Number of source–destination pairs (n ≥ 1).
    pub n: usize,
    /// Number of relays (m ≥ 1).
    pub m: usize,
    /// Linear average SNR of the source→relay links (> 0).
    pub rho: f64,
    /// Linear average SNR of the relay→destination links (> 0).
    pub rho_r: f64,
    /// Master RNG seed; per-trial streams derive from it.
    pub seed: u64,
}

impl NetworkConfig {
    /// Validate and build a configuration. SNRs are linear; convert dB
    /// inputs with [`db_to_linear`] first.
    pub fn new(n: usize, m: usize, rho: f64, rho_r: f64, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "need at least one source-destination pair".into(),
            });
        }
        if m < 1 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "need at least one relay".into(),
            });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("linear SNR must be positive and finite, got {rho}"),
            });
        }
        if !(rho_r > 0.0 && rho_r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rho_r",
                reason: format!("linear SNR must be positive and finite, got {rho_r}"),
            });
        }
        Ok(NetworkConfig {
            n,
            m,
            rho,
            rho_r,
            seed,
        })
    }
}

/// Convert decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The RNG stream owned by one trial.
///
/// ChaCha keys on the master seed and selects one of 2⁶⁴ independent streams
/// by trial index, so any trial can be regenerated in isolation and trials
/// may run on any thread in any order without coupling.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One coherence block of channel power gains.
///
/// Gains are constant within a block and redrawn independently across
/// blocks; there is no time correlation and no geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingBlock {
    n: usize,
    m: usize,
    /// Source→relay gains, row-major `[source][relay]`, length n·m.
    gamma: Vec<f64>,
    /// Relay→destination gains, row-major `[relay][dest]`, length m·n.
    xi: Vec<f64>,
}

impl FadingBlock {
    /// Number of source–destination pairs.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of relays.
    pub fn m(&self) -> usize {
        self.m
    }

    /// First-hop power gain from `source` into `relay`.
    #[inline]
    pub fn gamma(&self, source: usize, relay: usize) -> f64 {
        self.gamma[source * self.m + relay]
    }

    /// Second-hop power gain from `relay` into `dest`.
    #[inline]
    pub fn xi(&self, relay: usize, dest: usize) -> f64 {
        self.xi[relay * self.n + dest]
    }

    /// All first-hop gains into `relay`, i.e. column `relay` of γ.
    pub fn gamma_column(&self, relay: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.gamma(i, relay))
    }

    /// Build a block from explicit gain matrices (row-major as in
    /// [`FadingBlock::gamma`] / [`FadingBlock::xi`]). Intended for hand-built
    /// cases in tests and documentation; sampling code should use
    /// [`sample_fading_block`].
    pub fn from_gains(n: usize, m: usize, gamma: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if gamma.len() != n * m || xi.len() != m * n {
            return Err(Error::InvalidParameter {
                name: "gains",
                reason: format!(
                    "need {}x{} gamma and {}x{} xi entries, got {} and {}",
                    n,
                    m,
                    m,
                    n,
                    gamma.len(),
                    xi.len()
                ),
            });
        }
        if gamma.iter().chain(xi.iter()).any(|g| g.is_nan() || *g <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gains",
                reason: "power gains must be strictly positive".into(),
            });
        }
        Ok(FadingBlock { n, m, gamma, xi })
    }
}

/// Draw one fading block: n·m first-hop and m·n second-hop unit-mean
/// exponential gains, in that order, from `stream`.
///
/// Identical stream state yields a bit-identical block, which is the
/// foundation of the crate's reproducibility guarantees.
pub fn sample_fading_block(cfg: &NetworkConfig, stream: &mut ChaCha8Rng) -> FadingBlock {
    let gamma: Vec<f64> = (0..cfg.n * cfg.m).map(|_| Exp1.sample(stream)).collect();
    let xi: Vec<f64> = (0..cfg.m * cfg.n).map(|_| Exp1.sample(stream)).collect();
    FadingBlock {
        n: cfg.n,
        m: cfg.m,
        gamma,
        xi,
    }
}

/// First-hop SINR of `desired` as received by `relay` while the sources in
/// `active` transmit simultaneously.
///
/// Returns γ_desired,relay / (1/ρ + Σ over other active sources of their
/// gain into `relay`). `active` must contain `desired`; duplicates in
/// `active` are rejected by debug assertion (a source transmits one stream).
pub fn sinr_phase1(
    block: &FadingBlock,
    active: &[usize],
    relay: usize,
    desired: usize,
    rho: f64,
) -> Result<f64> {
    if !active.contains(&desired) {
        return Err(Error::DesiredNotActive { desired });
    }
    debug_assert!(
        (1..active.len()).all(|i| !active[..i].contains(&active[i])),
        "active transmit set must not repeat sources"
    );
    let mut interference = 0.0;
    for &t in active {
        if t != desired {
            interference += block.gamma(t, relay);
        }
    }
    Ok(block.gamma(desired, relay) / (1.0 / rho + interference))
}

/// Second-hop SINR of `relay` as received by destination `dest`, with all m
/// relays transmitting (relays without feedback still transmit, so the
/// interference sum always has m−1 terms).
pub fn sinr_phase2(block: &FadingBlock, relay: usize, dest: usize, cfg: &NetworkConfig) -> f64 {
    let mut interference = 0.0;
    for l in 0..block.m() {
        if l != relay {
            interference += block.xi(l, dest);
        }
    }
    block.xi(relay, dest) / (1.0 / cfg.rho_r + interference)
}
