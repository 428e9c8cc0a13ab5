//! Closed-form throughput quantities: the first-hop lower bound and its
//! threshold optimization, the second-hop SINR law and exact rate, scaling
//! thresholds, the cooperative upper bound, and feedback-overhead budgets.
//!
//! Everything here is a pure function of the parameters; all SNRs are
//! linear. Probabilities of the form (1−p)ⁿ are evaluated through
//! `ln_1p`/`exp_m1` so they stay accurate for n up to 10⁹, and the falling
//! factorial is accumulated in the log domain so no intermediate ever
//! overflows.

use crate::{Error, Result};

/// CDF of a sum of `pairs` independent unit-mean exponentials (equivalently
/// a chi-square variable with 2·`pairs` degrees of freedom, halved):
/// F(y) = 1 − e^{−y} Σ_{j<k} yʲ/j!.
///
/// `pairs = 0` is the empty sum, a point mass at zero: F(y) = 1 for y ≥ 0.
/// This is exactly the aggregate-interference law used by
/// [`r1_lower_bound`], where the first hop sees m−1 interfering sources.
pub fn chi_square_cdf(y: f64, pairs: usize) -> f64 {
    if pairs == 0 {
        return if y >= 0.0 { 1.0 } else { 0.0 };
    }
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 700.0 {
        // Past here e^{-y} underflows; for any desk-scale k the mass above y
        // is far below f64 resolution.
        debug_assert!((pairs as f64) < 0.5 * y, "cdf saturation guard violated");
        return 1.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..pairs {
        term *= y / j as f64;
        sum += term;
    }
    1.0 - (-y).exp() * sum
}

/// Largest admissible selection threshold for [`Phase1BoundParams`]:
/// ln n − ln ln n.
pub fn threshold_cap(n: usize) -> f64 {
    let ln_n = (n as f64).ln();
    ln_n - ln_n.ln()
}

/// Parameters of the first-hop throughput lower bound.
///
/// `s` is the signal-strength cutoff of the suboptimal selection scheme the
/// bound is built on: a first-hop link counts only when its desired gain
/// exceeds `s` while the aggregate interference stays below s − 1/ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase1BoundParams {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub s: f64,
}

impl Phase1BoundParams {
    /// Validate the bound's domain: n ≥ 16 (so the threshold range is
    /// usable), m ≤ n (the distinct-choice probability must be one), ρ > 0,
    /// and 0 < s ≤ ln n − ln ln n.
    pub fn new(n: usize, m: usize, rho: f64, s: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("lower bound needs n >= 16, got {n}"),
            });
        }
        if m < 1 || m > n {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("need 1 <= m <= n, got m={m}, n={n}"),
            });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("linear SNR must be positive and finite, got {rho}"),
            });
        }
        let cap = threshold_cap(n);
        if !(s > 0.0 && s <= cap) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("threshold must lie in (0, {cap:.6}], got {s}"),
            });
        }
        Ok(Phase1BoundParams { n, m, rho, s })
    }
}

/// Probability that m independent per-relay argmax choices over n sources
/// are all distinct: n(n−1)⋯(n−m+1)/nᵐ, accumulated in the log domain.
pub fn distinct_choice_probability(n: usize, m: usize) -> f64 {
    let n = n as f64;
    let log_p: f64 = (0..m).map(|j| (-(j as f64) / n).ln_1p()).sum();
    log_p.exp()
}

/// Lower bound on the first-hop sum throughput, bits/s/Hz:
/// m · Pr[all choices distinct] · Pr[max gain > s] · F_interference(s − 1/ρ).
///
/// The bound undershoots simulation by construction (it ignores successes
/// below the cutoff); it is tightest near the cap for moderate m.
pub fn r1_lower_bound(p: &Phase1BoundParams) -> f64 {
    let n = p.n as f64;
    // 1 − (1 − e^{−s})^n, stable when the power is astronomically close to 1.
    let p_max = -((n * (-(-p.s).exp()).ln_1p()).exp_m1());
    let interference_ok = chi_square_cdf(p.s - 1.0 / p.rho, p.m - 1);
    p.m as f64 * distinct_choice_probability(p.n, p.m) * p_max * interference_ok
}

/// Maximize [`r1_lower_bound`] over the admissible threshold range
/// (0, ln n − ln ln n]; returns (maximum value, maximizing s).
///
/// The objective is treated as a black box: a 512-point grid localizes the
/// global maximum, then golden-section refinement tightens the argmax to
/// |Δs| < 10⁻⁶. The cap itself is always evaluated, so the result never
/// falls below the fixed-threshold bound.
pub fn r1_lower_bound_optimized(n: usize, m: usize, rho: f64) -> Result<(f64, f64)> {
    let cap = threshold_cap(n);
    // Validate everything except s once, up front.
    Phase1BoundParams::new(n, m, rho, cap)?;
    let eval = |s: f64| r1_lower_bound(&Phase1BoundParams { n, m, rho, s });

    struct Best {
        v: f64,
        s: f64,
    }
    impl Best {
        /// Keep the strictly better candidate; ties stay with the incumbent
        /// (so the cap wins whenever the objective plateaus there).
        fn consider(&mut self, v: f64, s: f64) -> bool {
            if v > self.v {
                self.v = v;
                self.s = s;
                true
            } else {
                false
            }
        }
    }
    let mut best = Best { v: eval(cap), s: cap };

    const GRID: usize = 512;
    let mut best_i = GRID - 1;
    for i in 0..GRID {
        let s = cap * (i + 1) as f64 / GRID as f64;
        if best.consider(eval(s), s) {
            best_i = i;
        }
    }

    // Refine inside the bracket around the best grid point.
    let mut a = cap * best_i as f64 / GRID as f64;
    let mut b = cap * ((best_i + 2).min(GRID) as f64) / GRID as f64;
    if a <= 0.0 {
        a = cap * 1e-9;
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    best.consider(f1, x1);
    best.consider(f2, x2);
    while b - a > 1e-6 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
            best.consider(f2, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
            best.consider(f1, x1);
        }
    }
    Ok((best.v, best.s))
}

/// Density of the second-hop SINR at one destination when all m relays
/// transmit: f(x) = e^{−x/ρ_R}/(1+x)ᵐ · ((1+x)/ρ_R + m − 1), x ≥ 0.
pub fn sinr_p2_pdf(x: f64, m: usize, rho_r: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    (-x / rho_r).exp() / (1.0 + x).powi(m as i32) * ((1.0 + x) / rho_r + (m as f64 - 1.0))
}

/// CDF of the second-hop SINR: F(x) = 1 − e^{−x/ρ_R}/(1+x)^{m−1}, x ≥ 0.
pub fn sinr_p2_cdf(x: f64, m: usize, rho_r: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    1.0 - (-x / rho_r).exp() / (1.0 + x).powi(m as i32 - 1)
}

/// Exact mean second-hop throughput, bits/s/Hz:
/// m · (1 − (1 − e^{−1/ρ_R}/2^{m−1})ⁿ).
///
/// The inner probability e^{−1/ρ_R}/2^{m−1} is the chance one destination
/// finds a given relay decodable; the outer expression counts relays that
/// at least one of the n destinations asks to transmit.
pub fn r2_exact(n: usize, m: usize, rho_r: f64) -> f64 {
    let p_good = (-1.0 / rho_r - (m as f64 - 1.0) * std::f64::consts::LN_2).exp();
    m as f64 * (-((n as f64 * (-p_good).ln_1p()).exp_m1()))
}

/// Which side of the second-hop phase transition to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalSide {
    /// Below this relay count the second hop delivers Θ(m).
    Linear,
    /// Above this relay count the second hop saturates, delivering o(m).
    Saturated,
}

/// Critical relay count of the second-hop phase transition:
/// (ln n ∓ ln ln n − 1/ρ_R)/ln 2 + 1, with − for the linear side and + for
/// the saturated side. Real-valued; callers round as needed.
pub fn phase2_critical_m(n: f64, rho_r: f64, side: CriticalSide) -> Result<f64> {
    if n.is_nan() || n <= std::f64::consts::E {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("ln ln n undefined or nonpositive for n = {n}"),
        });
    }
    let ln_n = n.ln();
    let lll = ln_n.ln();
    let signed = match side {
        CriticalSide::Linear => -lll,
        CriticalSide::Saturated => lll,
    };
    Ok((ln_n + signed - 1.0 / rho_r) / std::f64::consts::LN_2 + 1.0)
}

/// Relay counts bracketing the best usable parallelism: the unattainable
/// ceiling ln n/ln 2 + 2 and the achievable target (1−ε)·ln n/(2 ln 2) + 2.
/// Real-valued curves; rounding is left to callers.
pub fn genie_m_bounds(n: f64, epsilon: f64) -> Result<(f64, f64)> {
    if n.is_nan() || n < 2.0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need n >= 2, got {n}"),
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("need 0 < epsilon < 1, got {epsilon}"),
        });
    }
    let ln_n = n.ln();
    let upper = ln_n / std::f64::consts::LN_2 + 2.0;
    let achievable = (1.0 - epsilon) * ln_n / (2.0 * std::f64::consts::LN_2) + 2.0;
    Ok((upper, achievable))
}

/// Information-theoretic ceiling on system throughput if the m relays could
/// cooperate perfectly on both hops: (m/2)·ln ln n bits/s/Hz.
pub fn cooperative_upper_bound(n: f64, m: usize) -> Result<f64> {
    if n.is_nan() || n <= std::f64::consts::E {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("ln ln n undefined or nonpositive for n = {n}"),
        });
    }
    Ok(m as f64 / 2.0 * n.ln().ln())
}

/// Index-feedback cost of one scheduling round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadBudget {
    /// First hop: every relay broadcasts the index of its chosen source.
    pub phase1_bits: u64,
    /// Second hop: expected index bits fed back by destinations, computed
    /// from a union upper bound on the per-destination feedback probability
    /// (so this field itself is an upper bound).
    pub phase2_bits_expected: f64,
    /// The scaling requirement the block length must dominate:
    /// ln n · ln ln n (clamped to 0 where ln ln n is not positive).
    pub tw_required: f64,
    /// Caller-supplied time–bandwidth product actually available, if known.
    pub tw_available: Option<f64>,
}

impl OverheadBudget {
    /// Attach the physically available time–bandwidth product.
    pub fn with_tw_available(mut self, tw: f64) -> Result<Self> {
        if tw.is_nan() || tw < 0.0 {
            return Err(Error::InvalidParameter {
                name: "tw_available",
                reason: format!("must be nonnegative, got {tw}"),
            });
        }
        self.tw_available = Some(tw);
        Ok(self)
    }
}

/// Bits needed to index one of `k` items; 0 when there is nothing to choose.
fn index_bits(k: usize) -> u64 {
    if k <= 1 {
        0
    } else {
        (k - 1).ilog2() as u64 + 1
    }
}

/// Per-block feedback-overhead budget for an (n, m, ρ_R) deployment.
///
/// Phase 1 costs m·⌈log₂ n⌉ bits always. Phase 2 costs ⌈log₂ m⌉ bits per
/// destination that actually feeds back; that probability is bounded above
/// by q = m·e^{−1/ρ_R}/2^{m−1}, giving the expected-bits upper bound here.
pub fn feedback_overhead(n: usize, m: usize, rho_r: f64) -> OverheadBudget {
    let q = ((m as f64).ln() - 1.0 / rho_r - (m as f64 - 1.0) * std::f64::consts::LN_2).exp();
    let ln_n = (n as f64).ln();
    OverheadBudget {
        phase1_bits: m as u64 * index_bits(n),
        phase2_bits_expected: n as f64 * q * index_bits(m) as f64,
        tw_required: if ln_n > 1.0 { ln_n * ln_n.ln() } else { 0.0 },
        tw_available: None,
    }
}

/// Coherence resources of a radio channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceBudget {
    /// Coherence bandwidth W_c = 1/(2·delay spread), Hz.
    pub coherence_bandwidth_hz: f64,
    /// Coherence time T_c = 1/(4·max Doppler spread), seconds.
    pub coherence_time_s: f64,
    /// The product T_c·W_c — the per-block symbol budget feedback must fit in.
    pub time_bandwidth: f64,
}

/// Evaluate the coherence budget of a carrier/mobility/delay-spread triple,
/// using the conventional 3×10⁸ m/s propagation speed.
pub fn coherence_budget(carrier_hz: f64, speed_mps: f64, delay_spread_s: f64) -> Result<CoherenceBudget> {
    if !(carrier_hz > 0.0 && speed_mps > 0.0 && delay_spread_s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "coherence",
            reason: "carrier, speed, and delay spread must all be positive".into(),
        });
    }
    const C: f64 = 3.0e8;
    let w_c = 1.0 / (2.0 * delay_spread_s);
    let doppler = carrier_hz * speed_mps / C;
    let t_c = 1.0 / (4.0 * doppler);
    Ok(CoherenceBudget {
        coherence_bandwidth_hz: w_c,
        coherence_time_s: t_c,
        time_bandwidth: w_c * t_c,
    })
}
