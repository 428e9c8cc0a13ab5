//! Helpers shared by the integration suites: composite quadrature, a
//! least-squares slope, an independent Kolmogorov–Smirnov recomputation,
//! and a permutation-enumeration assignment oracle used to cross-check
//! the subset-search implementations in the library.
//!
//! Everything here is deliberately written from scratch rather than
//! calling back into the crate, so agreement is evidence and not
//! tautology.
#![allow(dead_code)] // each test binary uses a different subset

use opporelay::FadingBlock;

/// Composite Simpson quadrature of `f` over [a, b] with `panels` panels
/// (`panels` must be even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels.is_multiple_of(2), "panels must be even");
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Ordinary least-squares slope of y against x.
pub fn slope_of(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Two-sided Kolmogorov–Smirnov statistic of an ascending sample against
/// a reference CDF.
pub fn ks_against(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let k = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / k - f;
        let below = f - i as f64 / k;
        worst = worst.max(above).max(below);
    }
    worst
}

/// First-hop SINR of `source` at `relay` when exactly the sources in
/// `active` transmit (recomputed from the raw gains, not via the crate).
fn subset_sinr(block: &FadingBlock, active: &[usize], source: usize, relay: usize, rho: f64) -> f64 {
    let interference: f64 = active
        .iter()
        .filter(|&&t| t != source)
        .map(|&t| block.gamma(t, relay))
        .sum();
    block.gamma(source, relay) / (1.0 / rho + interference)
}

/// Whether `perm` (a source-per-relay assignment of the subset `perm`)
/// decodes everywhere at unit threshold under subset-only interference.
fn assignment_works(block: &FadingBlock, perm: &[usize], rho: f64) -> bool {
    perm.iter()
        .enumerate()
        .all(|(relay, &source)| subset_sinr(block, perm, source, relay, rho) >= 1.0)
}

fn heap_permutations(block: &FadingBlock, subset: &mut [usize], k: usize, rho: f64) -> bool {
    if k <= 1 {
        return assignment_works(block, subset, rho);
    }
    for i in 0..k {
        if heap_permutations(block, subset, k - 1, rho) {
            return true;
        }
        if k.is_multiple_of(2) {
            subset.swap(i, k - 1);
        } else {
            subset.swap(0, k - 1);
        }
    }
    false
}

fn subsets_then_permute(
    block: &FadingBlock,
    chosen: &mut Vec<usize>,
    next: usize,
    m: usize,
    rho: f64,
) -> bool {
    if chosen.len() == m {
        let mut perm = chosen.clone();
        let k = perm.len();
        return heap_permutations(block, &mut perm, k, rho);
    }
    for source in next..block.n() {
        chosen.push(source);
        if subsets_then_permute(block, chosen, source + 1, m, rho) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Exhaustive assignment oracle: enumerates every size-`m` source subset
/// and every relay permutation of it, returning whether any assignment
/// decodes at all `m` relays simultaneously. Exponential — keep n and m
/// tiny.
pub fn exists_assignment_brute(block: &FadingBlock, m: usize, rho: f64) -> bool {
    assert!(m >= 1 && m <= block.m() && m <= block.n());
    subsets_then_permute(block, &mut Vec::with_capacity(m), 0, m, rho)
}
