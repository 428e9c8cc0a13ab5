//! Centralized scheduling oracles: exhaustive subset/assignment search over
//! the first hop, the index-grouped restricted search, and the Markov
//! comparison bound on the existence probability.
//!
//! The full search asks whether any `m`-subset of sources can be assigned
//! one-to-one to the relays so that every assigned link clears the SINR
//! threshold while the whole subset transmits. Subsets are enumerated in
//! lexicographic order; within a subset, a threshold-1 identity collapses
//! the assignment scan. Decoding at threshold 1 means
//! 2·γ(i,r) ≥ 1/ρ + Σ_{t∈A} γ(t,r), and two sources cannot both hold more
//! than half of the same noise-augmented total, so **each relay has at most
//! one decodable source per subset**. A feasible assignment therefore
//! exists iff every subset source is some relay's unique candidate, an
//! O(m²) check that replaces the m! permutation loop with identical
//! semantics (the test suite keeps a literal permutation enumeration as an
//! oracle for this equivalence).
//!
//! Searches are super-exponential in the population; the enumeration
//! budget makes the cost explicit and errs instead of silently truncating,
//! since a partial search would bias existence-probability estimates.
//! Intended envelope: full search for n ≤ 16, m ≤ 4; grouped search for
//! (n/m)^m ≤ 10⁶.

use rayon::prelude::*;

use crate::channel::{sample_fading_block, trial_stream, FadingBlock, NetworkConfig};
use crate::{Error, Result, ThroughputEstimate};

/// Enumeration limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenieSearchBudget {
    /// Cap on counted (subset, assignment) pairs; the full search accounts
    /// C(n,m)·m! and the grouped search ⌊n/m⌋^m, regardless of internal
    /// shortcuts.
    pub max_assignments: u64,
    /// Optional wall-clock guard, seconds, checked during the scan.
    pub max_seconds: Option<f64>,
}

impl Default for GenieSearchBudget {
    fn default() -> Self {
        GenieSearchBudget {
            max_assignments: 10_000_000,
            max_seconds: None,
        }
    }
}

impl GenieSearchBudget {
    /// A budget capping the enumeration count; must be at least 1.
    pub fn new(max_assignments: u64) -> Result<Self> {
        if max_assignments < 1 {
            return Err(Error::InvalidParameter {
                name: "max_assignments",
                reason: "budget must be at least 1".into(),
            });
        }
        Ok(GenieSearchBudget {
            max_assignments,
            max_seconds: None,
        })
    }
}

/// Which search the existence-probability estimator runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenieVariant {
    Full,
    Grouped,
}

fn saturating_binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        // c * (n−j) / (j+1) stays integral at every step
        match c.checked_mul(n - j) {
            Some(v) => c = v / (j + 1),
            None => return u128::MAX,
        }
    }
    c
}

fn saturating_factorial(m: u128) -> u128 {
    let mut f: u128 = 1;
    for j in 2..=m {
        match f.checked_mul(j) {
            Some(v) => f = v,
            None => return u128::MAX,
        }
    }
    f
}

/// Accounting cost of the full search: C(n,m)·m! assignments.
pub fn full_search_cost(n: usize, m: usize) -> u128 {
    saturating_binomial(n as u128, m as u128).saturating_mul(saturating_factorial(m as u128))
}

/// Accounting cost of the grouped search: ⌊n/m⌋^m candidate tuples.
pub fn grouped_search_cost(n: usize, m: usize) -> u128 {
    let q = (n / m) as u128;
    let mut c: u128 = 1;
    for _ in 0..m {
        match c.checked_mul(q) {
            Some(v) => c = v,
            None => return u128::MAX,
        }
    }
    c
}

fn check_budget(required: u128, budget: &GenieSearchBudget) -> Result<()> {
    if required > budget.max_assignments as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: budget.max_assignments,
        });
    }
    Ok(())
}

struct TimeGuard {
    start: std::time::Instant,
    limit_s: Option<f64>,
    ticks: u64,
}

impl TimeGuard {
    fn new(limit_s: Option<f64>) -> Self {
        TimeGuard {
            start: std::time::Instant::now(),
            limit_s,
            ticks: 0,
        }
    }

    /// Cheap periodic check; errs once the wall-clock limit is passed.
    fn tick(&mut self) -> Result<()> {
        if let Some(limit) = self.limit_s {
            self.ticks += 1;
            if self.ticks & 0x3ff == 0 {
                let elapsed = self.start.elapsed().as_secs_f64();
                if elapsed > limit {
                    return Err(Error::SearchTimeout {
                        elapsed_s: elapsed,
                        limit_s: limit,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Advance `idx` to the next lexicographic m-combination of {0..n}.
/// Returns false when the enumeration is exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if idx[i] < n - m + i {
            idx[i] += 1;
            for j in i + 1..m {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Does the subset admit a full assignment? Per the threshold-1 identity,
/// yes iff every subset source is the unique candidate of some relay among
/// `relays`, where candidacy means 2γ(i,r) ≥ 1/ρ + tot_r.
fn subset_feasible(block: &FadingBlock, subset: &[usize], tot: &mut [f64], inv_rho: f64) -> bool {
    let relays = tot.len();
    for (r, t) in tot.iter_mut().enumerate() {
        *t = subset.iter().map(|&i| block.gamma(i, r)).sum();
    }
    subset
        .iter()
        .all(|&i| (0..relays).any(|r| 2.0 * block.gamma(i, r) >= inv_rho + tot[r]))
}

/// True iff some m-subset of sources can be matched one-to-one to the first
/// m relays with every assigned link at SINR ≥ 1 while the whole subset
/// transmits. Short-circuits on the first feasible subset.
pub fn genie_exists_full(
    block: &FadingBlock,
    m: usize,
    cfg: &NetworkConfig,
    budget: &GenieSearchBudget,
) -> Result<bool> {
    if m < 1 || m > block.m() {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("need 1 <= m <= {} relays, got {m}", block.m()),
        });
    }
    if m > block.n() {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("cannot pick {m} distinct sources out of n={}", block.n()),
        });
    }
    check_budget(full_search_cost(block.n(), m), budget)?;

    let inv_rho = 1.0 / cfg.rho;
    let mut guard = TimeGuard::new(budget.max_seconds);
    let mut subset: Vec<usize> = (0..m).collect();
    let mut tot = vec![0.0f64; m];
    loop {
        guard.tick()?;
        if subset_feasible(block, &subset, &mut tot, inv_rho) {
            return Ok(true);
        }
        if !next_combination(&mut subset, block.n()) {
            return Ok(false);
        }
    }
}

/// Restricted search: sources are split by index into m contiguous groups
/// of ⌊n/m⌋ (trailing remainder discarded), group g feeding relay g; true
/// iff some choice of one source per group clears all m thresholds
/// simultaneously. Depth-first with sound pruning: interference only grows
/// as deeper groups commit, so a constraint that already fails can never
/// recover.
pub fn genie_exists_grouped(
    block: &FadingBlock,
    m: usize,
    cfg: &NetworkConfig,
    budget: &GenieSearchBudget,
) -> Result<bool> {
    if m < 1 || m > block.m() {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("need 1 <= m <= {} relays, got {m}", block.m()),
        });
    }
    let q = block.n() / m;
    if q == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("groups are empty: n={} < m={m}", block.n()),
        });
    }
    check_budget(grouped_search_cost(block.n(), m), budget)?;

    let inv_rho = 1.0 / cfg.rho;
    let mut guard = TimeGuard::new(budget.max_seconds);
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut tot = vec![0.0f64; m];
    dfs_grouped(block, m, q, inv_rho, &mut chosen, &mut tot, &mut guard)
}

fn dfs_grouped(
    block: &FadingBlock,
    m: usize,
    q: usize,
    inv_rho: f64,
    chosen: &mut Vec<usize>,
    tot: &mut [f64],
    guard: &mut TimeGuard,
) -> Result<bool> {
    let depth = chosen.len();
    if depth == m {
        return Ok(true);
    }
    for c in depth * q..(depth + 1) * q {
        guard.tick()?;
        for (j, t) in tot.iter_mut().enumerate() {
            *t += block.gamma(c, j);
        }
        chosen.push(c);
        // Relay j must decode chosen[j] against the interference committed
        // so far; future picks only add interference, so failure is final.
        let ok = (0..=depth).all(|j| {
            let g = block.gamma(chosen[j], j);
            g >= inv_rho + (tot[j] - g)
        });
        if ok && dfs_grouped(block, m, q, inv_rho, chosen, tot, guard)? {
            return Ok(true);
        }
        let c = chosen.pop().unwrap();
        for (j, t) in tot.iter_mut().enumerate() {
            *t -= block.gamma(c, j);
        }
    }
    Ok(false)
}

/// Largest k for which some k-subset of sources can be matched injectively
/// into the block's relays with all k links at SINR ≥ 1 under the subset's
/// own interference. Dominates the decentralized scheduler on every block:
/// its distinct successful sources, under interference from a superset,
/// are themselves such a witness.
pub fn genie_max_concurrent(
    block: &FadingBlock,
    cfg: &NetworkConfig,
    budget: &GenieSearchBudget,
) -> Result<usize> {
    let required: u128 = (1..=block.m())
        .map(|j| full_search_cost(block.n(), j))
        .fold(0u128, |a, b| a.saturating_add(b));
    check_budget(required, budget)?;

    let inv_rho = 1.0 / cfg.rho;
    let mut guard = TimeGuard::new(budget.max_seconds);
    let mut tot = vec![0.0f64; block.m()];
    for k in (1..=block.m().min(block.n())).rev() {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            guard.tick()?;
            if subset_feasible(block, &subset, &mut tot, inv_rho) {
                return Ok(k);
            }
            if !next_combination(&mut subset, block.n()) {
                break;
            }
        }
    }
    Ok(0)
}

/// Monte Carlo estimate of the probability that the chosen search finds a
/// feasible set, with binomial-style standard error. Trials run in
/// parallel on per-trial streams and reduce in ascending trial order.
pub fn estimate_existence_prob(
    cfg: &NetworkConfig,
    m: usize,
    trials: u64,
    variant: GenieVariant,
    budget: &GenieSearchBudget,
) -> Result<ThroughputEstimate> {
    if trials < 1 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "need at least one trial".into(),
        });
    }
    // Surface budget violations before any sampling: the per-trial cost is
    // identical across trials.
    let required = match variant {
        GenieVariant::Full => full_search_cost(cfg.n, m),
        GenieVariant::Grouped => grouped_search_cost(cfg.n, m),
    };
    check_budget(required, budget)?;

    let indicators: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = trial_stream(cfg.seed, trial);
            let block = sample_fading_block(cfg, &mut stream);
            let found = match variant {
                GenieVariant::Full => genie_exists_full(&block, m, cfg, budget)?,
                GenieVariant::Grouped => genie_exists_grouped(&block, m, cfg, budget)?,
            };
            Ok(if found { 1.0 } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ThroughputEstimate::from_samples(&indicators))
}

/// Markov-inequality bound on the full-search existence probability:
/// min(1, (n·p_m)^m) with p_m = e^{−1/ρ}/2^{m−1}.
pub fn markov_bound(n: usize, m: usize, rho: f64) -> f64 {
    let ln_np = (n as f64).ln() - 1.0 / rho - (m as f64 - 1.0) * std::f64::consts::LN_2;
    (m as f64 * ln_np).exp().min(1.0)
}
