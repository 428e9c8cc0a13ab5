//! The decentralized two-phase protocol: each relay locks onto its strongest
//! source (first hop), each destination feeds back the index of its unique
//! threshold-clearing relay (second hop), and per-block delivered bits are
//! accounted under both collision conventions.

use rand::Rng;

use crate::channel::{sinr_phase1, sinr_phase2, FadingBlock, NetworkConfig};
use crate::{Error, Result};

/// Decoding threshold: a link carries its 1 bit/s/Hz exactly when SINR ≥ 1.
pub const SINR_THRESHOLD: f64 = 1.0;

/// First-hop accounting convention.
///
/// When several relays pick the same source, that source transmits a single
/// stream; `AllAssignments` credits it once if any of its relays decodes it,
/// while `DistinctOnly` zeroes out every block whose chosen sources are not
/// pairwise distinct (so the estimator targets the distinct-event bound).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase1Mode {
    AllAssignments,
    DistinctOnly,
}

impl std::str::FromStr for Phase1Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all_assignments" => Ok(Phase1Mode::AllAssignments),
            "distinct" | "distinct_only" => Ok(Phase1Mode::DistinctOnly),
            other => Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("expected all|distinct, got {other:?}"),
            }),
        }
    }
}

/// Outcome of the first-hop selection rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase1Schedule {
    /// chosen[r] = the source with the largest gain into relay r
    /// (ties broken toward the lowest index).
    pub chosen: Vec<usize>,
    /// The distinct chosen sources, ascending — the set that transmits.
    pub distinct_set: Vec<usize>,
}

/// First-hop SINRs and delivered bits for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Result {
    /// sinr[r] = relay r's SINR toward chosen[r], interference from the
    /// other transmitting (distinct) sources.
    pub sinr: Vec<f64>,
    /// Bits delivered under the mode the caller asked for.
    pub delivered_bits: usize,
    /// Bits under the distinct-only convention, always populated: the count
    /// of threshold-clearing relays when all m choices are distinct, else 0.
    pub distinct_only_bits: usize,
}

/// Outcome of the second-hop feedback rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase2Result {
    /// good_relay[j] = the unique relay whose SINR at destination j clears
    /// the threshold, if any. Uniqueness is structural: two relays clearing
    /// SINR ≥ 1 at one destination would each need more than half of the
    /// same gain total.
    pub good_relay: Vec<Option<usize>>,
    /// served[r] = the destination relay r picked uniformly among those
    /// that fed back its index, if any.
    pub served: Vec<Option<usize>>,
    /// Count of relays that received at least one feedback; each delivers
    /// 1 bit/s/Hz to its served destination.
    pub delivered_bits: usize,
}

/// First hop selection: every relay picks the source with the strongest
/// gain into it; ties (possible in finite precision) break to the lowest
/// source index so the schedule is a pure function of the block.
pub fn schedule_phase1(block: &FadingBlock) -> Phase1Schedule {
    let (n, m) = (block.n(), block.m());
    let mut chosen = Vec::with_capacity(m);
    for r in 0..m {
        let mut best = 0usize;
        let mut best_gain = block.gamma(0, r);
        for i in 1..n {
            let g = block.gamma(i, r);
            if g > best_gain {
                best = i;
                best_gain = g;
            }
        }
        chosen.push(best);
    }
    let mut distinct_set = chosen.clone();
    distinct_set.sort_unstable();
    distinct_set.dedup();
    Phase1Schedule { chosen, distinct_set }
}

/// Score one block's first hop: the distinct chosen sources transmit
/// simultaneously, each relay measures its SINR toward its own choice, and
/// bits are tallied under both accounting conventions.
pub fn evaluate_phase1(
    block: &FadingBlock,
    sched: &Phase1Schedule,
    mode: Phase1Mode,
    rho: f64,
) -> Result<Phase1Result> {
    if sched.chosen.len() != block.m() {
        return Err(Error::ScheduleMismatch {
            expected: block.m(),
            got: sched.chosen.len(),
        });
    }
    if let Some(&bad) = sched.chosen.iter().find(|&&i| i >= block.n()) {
        return Err(Error::InvalidParameter {
            name: "chosen",
            reason: format!("source index {bad} out of range for n={}", block.n()),
        });
    }
    let m = block.m();
    let active = &sched.distinct_set;
    let sinr = (0..m)
        .map(|r| sinr_phase1(block, active, r, sched.chosen[r], rho))
        .collect::<Result<Vec<f64>>>()?;

    // One stream per distinct source: it counts once if any relay that
    // chose it decodes it.
    let all_assignment_bits = active
        .iter()
        .filter(|&&i| (0..m).any(|r| sched.chosen[r] == i && sinr[r] >= SINR_THRESHOLD))
        .count();
    let distinct_only_bits = if active.len() == m {
        sinr.iter().filter(|&&v| v >= SINR_THRESHOLD).count()
    } else {
        0
    };
    let delivered_bits = match mode {
        Phase1Mode::AllAssignments => all_assignment_bits,
        Phase1Mode::DistinctOnly => distinct_only_bits,
    };
    Ok(Phase1Result {
        sinr,
        delivered_bits,
        distinct_only_bits,
    })
}

/// Second hop: all m relays transmit, each destination measures m SINRs and
/// feeds back the index of its unique threshold-clearing relay (if any);
/// each relay with feedback serves one of its destinations uniformly at
/// random, drawn from `stream`.
pub fn run_phase2<R: Rng>(block: &FadingBlock, cfg: &NetworkConfig, stream: &mut R) -> Phase2Result {
    let (n, m) = (block.n(), block.m());
    debug_assert_eq!((cfg.n, cfg.m), (n, m), "config/block dimension mismatch");

    let mut good_relay = vec![None; n];
    for (j, slot) in good_relay.iter_mut().enumerate() {
        let mut good: Option<usize> = None;
        for r in 0..m {
            if sinr_phase2(block, r, j, cfg) >= SINR_THRESHOLD {
                // A second qualifier is impossible: SINR_r ≥ 1 means
                // 2ξ_r ≥ 1/ρ_R + Σξ, and two gains cannot each exceed half
                // of the same (noise-augmented) total.
                debug_assert!(good.is_none(), "two qualifying relays at destination {j}");
                if good.is_none() {
                    good = Some(r);
                }
            }
        }
        *slot = good;
    }

    let mut fed_back: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, g) in good_relay.iter().enumerate() {
        if let Some(r) = *g {
            fed_back[r].push(j);
        }
    }

    let mut served = vec![None; m];
    let mut delivered_bits = 0;
    for r in 0..m {
        if !fed_back[r].is_empty() {
            delivered_bits += 1;
            let pick = stream.gen_range(0..fed_back[r].len());
            served[r] = Some(fed_back[r][pick]);
        }
    }
    Phase2Result {
        good_relay,
        served,
        delivered_bits,
    }
}
