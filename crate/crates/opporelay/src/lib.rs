//! Simulator and analytics for a two-hop relay network with opportunistic,
//! feedback-light scheduling over i.i.d. Rayleigh block fading.
//!
//! The model: `n` source–destination pairs communicate through `m`
//! half-duplex decode-and-forward relays. Traffic moves in two hops. On the
//! first hop each relay listens to the source with the strongest channel
//! toward it; on the second hop each destination tells the unique relay
//! (if any) whose SINR clears the decoding threshold to transmit. Every
//! link runs at a fixed 1 bit/s/Hz, so a link delivers its bit exactly when
//! its SINR is at least 1, and the end-to-end system rate is half the
//! smaller of the two per-hop throughputs.
//!
//! The crate has five library modules:
//!
//! - [`channel`] — channel-gain sampling, SINR evaluation, shared config.
//! - [`scheduler`] — the decentralized two-phase protocol and per-block
//!   throughput accounting.
//! - [`analytics`] — closed-form throughput bounds, SINR laws, scaling
//!   thresholds, and feedback-overhead budgets.
//! - [`genie`] — centralized exhaustive-search scheduling oracles and the
//!   Markov comparison bound.
//! - [`montecarlo`] — parallel trial orchestration: estimators, parameter
//!   sweeps, and distribution validations.
//!
//! A narrative guide with runnable examples lives in [`guide`]; the same
//! chapters build as an mdBook from `book/` at the repository root.
//!
//! The `opporelay` binary drives everything from the command line and writes
//! CSV experiment artifacts; see the `cli` chapter of the guide.

pub mod analytics;
pub mod channel;
pub mod genie;
pub mod guide;
pub mod montecarlo;
pub mod scheduler;

pub use channel::{
    db_to_linear, sample_fading_block, sinr_phase1, sinr_phase2, trial_stream, FadingBlock,
    NetworkConfig,
};

/// Errors reported by the library.
///
/// Configuration and domain guards are validated eagerly at construction so
/// the numerical code paths stay panic- and error-free.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter failed a domain guard; carries the parameter name.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },
    /// The desired transmitter is not part of the active transmit set.
    #[error("desired source {desired} is not in the active set")]
    DesiredNotActive { desired: usize },
    /// A schedule was evaluated against a block of different dimensions.
    #[error("schedule has {got} relays but block has {expected}")]
    ScheduleMismatch { expected: usize, got: usize },
    /// An exhaustive search would exceed its enumeration budget.
    #[error("search budget exceeded: needs {required} assignments, budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    /// An exhaustive search ran past its wall-clock guard.
    #[error("search ran {elapsed_s:.1} s, past its {limit_s:.1} s wall-clock guard")]
    SearchTimeout { elapsed_s: f64, limit_s: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// A Monte Carlo estimate of a rate-like quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    /// Sample mean, bits/s/Hz.
    pub mean: f64,
    /// Standard error of the mean, bits/s/Hz.
    pub std_error: f64,
    /// Number of independent trials behind the estimate.
    pub trials: u64,
}

impl ThroughputEstimate {
    /// Reduce per-trial values into mean and standard error.
    ///
    /// The reduction runs in the order given (callers pass values in
    /// ascending trial index) so results are bit-stable regardless of how
    /// many worker threads produced them.
    pub fn from_samples(samples: &[f64]) -> Self {
        let trials = samples.len() as u64;
        assert!(trials >= 1, "estimate requires at least one trial");
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let std_error = if trials > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (trials as f64 - 1.0)).sqrt() / (trials as f64).sqrt()
        } else {
            0.0
        };
        ThroughputEstimate {
            mean,
            std_error,
            trials,
        }
    }
}
