//! Acceptance gate: one test per shipped claim, each printing a
//! `acceptance NN <name>: PASS|FAIL (details)` line before asserting.
//! Run with `cargo test --test acceptance -- --nocapture` to see every
//! verdict; expensive sweeps are computed once and shared.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{exists_assignment_brute, ks_against, simpson, slope_of};
use opporelay::analytics::{
    chi_square_cdf, coherence_budget, feedback_overhead, r1_lower_bound_optimized, r2_exact,
    sinr_p2_cdf, sinr_p2_pdf,
};
use opporelay::genie::{
    estimate_existence_prob, genie_exists_full, genie_exists_grouped, markov_bound,
    GenieSearchBudget, GenieVariant,
};
use opporelay::montecarlo::{
    estimate_r2, sweep_m, sweep_n, validate_chi2_approximation, validate_interferer_distribution,
    SweepRow,
};
use opporelay::{
    db_to_linear, sample_fading_block, sinr_phase2, trial_stream, NetworkConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

const SEED: u64 = 20260816;

fn report(id: u8, name: &str, pass: bool, details: &str) {
    println!(
        "acceptance {id:02} {name}: {} ({details})",
        if pass { "PASS" } else { "FAIL" }
    );
}

struct Timed<T> {
    value: T,
    elapsed: Duration,
}

/// Relay-count sweep at n = 1200, 10 dB both hops, 2000 trials (shared by
/// the first-hop-curve and phase-ordering criteria).
fn relay_sweep() -> &'static Timed<Vec<SweepRow>> {
    static CELL: OnceLock<Timed<Vec<SweepRow>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = NetworkConfig::new(1200, 6, db_to_linear(10.0), db_to_linear(10.0), SEED).unwrap();
        let m_values: Vec<usize> = (1..=12).collect();
        let t0 = Instant::now();
        let rows = sweep_m(&cfg, &m_values, 2000).unwrap();
        Timed { value: rows, elapsed: t0.elapsed() }
    })
}

/// Population sweep with per-point relay-count optimization (shared by the
/// scaling and optimal-relay-count criteria).
fn population_sweep() -> &'static Timed<Vec<SweepRow>> {
    static CELL: OnceLock<Timed<Vec<SweepRow>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = NetworkConfig::new(100, 1, db_to_linear(10.0), db_to_linear(10.0), SEED).unwrap();
        let t0 = Instant::now();
        let rows = sweep_n(&cfg, &[100, 300, 1000, 3000], 800, true).unwrap();
        Timed { value: rows, elapsed: t0.elapsed() }
    })
}

#[test]
fn c01_second_hop_grid_matches_the_exact_law() {
    let t0 = Instant::now();
    let trials = 10_000u64;
    let mut cells = 0u32;
    let mut agree = 0u32;
    let mut failures = String::new();
    for n in [100usize, 1200] {
        for rho_r_db in [3.0f64, 10.0] {
            for m in 1..=12usize {
                let cfg =
                    NetworkConfig::new(n, m, db_to_linear(10.0), db_to_linear(rho_r_db), SEED)
                        .unwrap();
                let est = estimate_r2(&cfg, trials);
                let exact = r2_exact(n, m, cfg.rho_r);
                // Saturated cells have zero sample variance; fall back to
                // the one-count resolution floor of the estimator.
                let tol = (3.0 * est.std_error).max(1.0 / trials as f64);
                cells += 1;
                if (est.mean - exact).abs() <= tol {
                    agree += 1;
                } else {
                    failures.push_str(&format!(
                        " [n={n} m={m} {rho_r_db}dB: {} vs {exact}]",
                        est.mean
                    ));
                }
            }
        }
    }
    let elapsed = t0.elapsed();
    let frac = f64::from(agree) / f64::from(cells);
    let pass = frac >= 0.95 && elapsed < Duration::from_secs(60);
    report(
        1,
        "second-hop grid vs exact law",
        pass,
        &format!(
            "{agree}/{cells} cells within tolerance in {:.1}s{failures}",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass, "agreement {frac:.3}, elapsed {elapsed:?}{failures}");
}

#[test]
fn c02_no_destination_ever_sees_two_qualifying_relays() {
    let cfg = NetworkConfig::new(200, 8, db_to_linear(10.0), db_to_linear(10.0), SEED).unwrap();
    let blocks = 100_000u64;
    let offenders: u64 = (0..blocks)
        .into_par_iter()
        .map(|t| {
            let block = sample_fading_block(&cfg, &mut trial_stream(cfg.seed, t));
            let mut bad = 0u64;
            for j in 0..cfg.n {
                let qualifiers = (0..cfg.m)
                    .filter(|&r| sinr_phase2(&block, r, j, &cfg) >= 1.0)
                    .count();
                if qualifiers > 1 {
                    bad += 1;
                }
            }
            bad
        })
        .sum();
    let pass = offenders == 0;
    report(
        2,
        "second-hop qualifier uniqueness",
        pass,
        &format!("{offenders} dual-qualifier destinations in {blocks} blocks"),
    );
    assert!(pass);
}

#[test]
fn c03_first_hop_curve_peaks_and_brackets() {
    let sweep = relay_sweep();
    let rows = &sweep.value;
    let peak_row = rows
        .iter()
        .max_by(|a, b| a.r1_all.mean.partial_cmp(&b.r1_all.mean).unwrap())
        .unwrap();
    let peak_ok = (5..=7).contains(&peak_row.m);

    let mut ordering_ok = true;
    let mut bound_ok = true;
    for row in rows {
        let joint = (row.r1_all.std_error.powi(2) + row.r1_distinct.std_error.powi(2)).sqrt();
        if row.r1_all.mean < row.r1_distinct.mean - 3.0 * joint {
            ordering_ok = false;
        }
        let (lb, _) = r1_lower_bound_optimized(row.n, row.m, row.rho).unwrap();
        if lb > row.r1_distinct.mean + 3.0 * row.r1_distinct.std_error {
            bound_ok = false;
        }
    }
    let pass = peak_ok && ordering_ok && bound_ok;
    report(
        3,
        "first-hop curve shape",
        pass,
        &format!(
            "peak at m={} ({:.3} bits), ordering_ok={ordering_ok}, bound_ok={bound_ok}, sweep {:.1}s",
            peak_row.m,
            peak_row.r1_all.mean,
            sweep.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c04_second_hop_dominates_and_system_is_half_the_first_hop() {
    let rows = &relay_sweep().value;
    let mut pass = true;
    let mut details = String::new();
    for row in rows {
        // The single-relay point saturates both hops at exactly 1 bit, so
        // dominance is an equality there and strict everywhere else.
        let dominated = if row.m == 1 {
            row.r2.mean >= row.r1_all.mean
        } else {
            row.r2.mean > row.r1_all.mean
        };
        let halved = row.system.mean == 0.5 * row.r1_all.mean && row.phase1_binds;
        if !(dominated && halved) {
            pass = false;
            details.push_str(&format!(
                " [m={}: r1={} r2={} system={}]",
                row.m, row.r1_all.mean, row.r2.mean, row.system.mean
            ));
        }
    }
    report(
        4,
        "second hop dominates; system = half first hop",
        pass,
        &format!("12 relay counts checked{details}"),
    );
    assert!(pass, "{details}");
}

#[test]
fn c05_system_throughput_scales_logarithmically() {
    let sweep = population_sweep();
    let rows = &sweep.value;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.system.mean).collect();
    let slope = slope_of(&xs, &ys);
    let slope_ok = (0.30..=0.45).contains(&slope);

    let mut bracket_ok = true;
    for row in rows {
        let ln_n = (row.n as f64).ln();
        let lower = 0.25 * ln_n;
        let upper = ln_n / (4.0 * std::f64::consts::LN_2) + 1.0;
        if !(row.system.mean >= lower && row.system.mean <= upper) {
            bracket_ok = false;
        }
    }
    let time_ok = sweep.elapsed < Duration::from_secs(600);
    let pass = slope_ok && bracket_ok && time_ok;
    report(
        5,
        "log-population scaling with envelopes",
        pass,
        &format!(
            "slope {slope:.4} vs [0.30, 0.45], brackets_ok={bracket_ok}, sweep {:.1}s",
            sweep.elapsed.as_secs_f64()
        ),
    );
    assert!(pass, "slope {slope}, brackets {bracket_ok}, {:?}", sweep.elapsed);
}

#[test]
fn c06_optimized_relay_count_tracks_the_reference_curve() {
    let rows = &population_sweep().value;
    let mut pass = true;
    let mut details = String::new();
    for row in rows {
        let reference = (row.n as f64).ln() / (2.0 * std::f64::consts::LN_2) + 2.0;
        let dev = (row.m as f64 - reference).abs();
        details.push_str(&format!(" n={}: m*={} ref={reference:.2};", row.n, row.m));
        if dev > 2.0 {
            pass = false;
        }
    }
    report(6, "optimal relay count vs reference", pass, details.trim());
    assert!(pass, "{details}");
}

#[test]
fn c07_interference_distribution_validations() {
    // Pooled non-maximum gains against the unit exponential, one panel per
    // population, a million samples each.
    let mut ks_values = Vec::new();
    for n in [10usize, 20, 40, 100] {
        let trials = 1_000_000u64.div_ceil(n as u64 - 1);
        let rep = validate_interferer_distribution(n, trials, 40, SEED).unwrap();
        ks_values.push((n, rep.ks, rep.samples));
    }
    let decreasing = ks_values.windows(2).all(|w| w[1].1 < w[0].1);
    let final_ks_ok = ks_values.last().unwrap().1 <= 0.02;

    // Residual-sum statistic against its limiting chi-square-style law at a
    // population where the conditioning bias is still visible.
    let chi2 = validate_chi2_approximation(40, 6, 100_000, SEED).unwrap();
    let chi2_ok = chi2.ks <= 0.02;

    let pass = decreasing && final_ks_ok && chi2_ok;
    let summary = ks_values
        .iter()
        .map(|(n, ks, _)| format!("KS(n={n})={ks:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(
        7,
        "interference-distribution validation",
        pass,
        &format!(
            "{summary}, decreasing={decreasing}; residual-sum KS(n=40,m=6)={:.4} vs 0.02: {}",
            chi2.ks,
            if chi2_ok { "ok" } else { "KNOWN LIMITATION — the finite-population residual sum is conditioned on not being the maximum, which shifts its mean visibly at n=40" }
        ),
    );
    assert!(pass, "decreasing={decreasing}, final_ks_ok={final_ks_ok}, chi2 KS={}", chi2.ks);
}

#[test]
fn c08_genie_search_consistency() {
    let t0 = Instant::now();
    let budget = GenieSearchBudget::default();
    let rho = db_to_linear(10.0);

    // (a) Monte Carlo existence probability never exceeds its Markov bound.
    let mut markov_ok = true;
    for n in [8usize, 12, 16] {
        for m in [2usize, 3, 4] {
            let cfg = NetworkConfig::new(n, m, rho, rho, SEED).unwrap();
            let est = estimate_existence_prob(&cfg, m, 10_000, GenieVariant::Full, &budget).unwrap();
            let bound = markov_bound(n, m, rho);
            if est.mean > bound + 3.0 * est.std_error {
                markov_ok = false;
            }
        }
    }

    // (b) Blockwise: a restricted-search hit always implies a full-search hit.
    let cfg = NetworkConfig::new(12, 3, rho, rho, SEED).unwrap();
    let mut nesting_ok = true;
    for t in 0..3000u64 {
        let block = sample_fading_block(&cfg, &mut trial_stream(cfg.seed, t));
        if genie_exists_grouped(&block, 3, &cfg, &budget).unwrap()
            && !genie_exists_full(&block, 3, &cfg, &budget).unwrap()
        {
            nesting_ok = false;
        }
    }

    // (c) Soundness: the fast search agrees with brute-force assignment
    // enumeration on every block.
    let mut sound = true;
    for m in [2usize, 3] {
        let cfg = NetworkConfig::new(8, m, rho, rho, SEED).unwrap();
        for t in 0..300u64 {
            let block = sample_fading_block(&cfg, &mut trial_stream(cfg.seed, t));
            if genie_exists_full(&block, m, &cfg, &budget).unwrap()
                != exists_assignment_brute(&block, m, rho)
            {
                sound = false;
            }
        }
    }

    let elapsed = t0.elapsed();
    let time_ok = elapsed < Duration::from_secs(300);
    let pass = markov_ok && nesting_ok && sound && time_ok;
    report(
        8,
        "exhaustive-search consistency",
        pass,
        &format!(
            "markov_ok={markov_ok}, nesting_ok={nesting_ok}, oracle_agreement={sound}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c09_closed_form_cross_checks() {
    // Density normalization by quadrature plus a provably negligible tail.
    let mut norm_ok = true;
    for (m, rho_r) in [(1usize, 10.0f64), (6, 10.0), (6, 2.0), (12, 0.5)] {
        let mass = simpson(|x| sinr_p2_pdf(x, m, rho_r), 0.0, 200.0, 256_000);
        if (mass - 1.0).abs() > 1e-6 {
            norm_ok = false;
        }
    }

    // CDF/PDF consistency by central differences on [0, 10].
    let mut diff_ok = true;
    let h = 1e-5;
    for (m, rho_r) in [(2usize, 10.0f64), (6, 10.0), (6, 2.0)] {
        for k in 0..=500 {
            let x = 0.01 + (10.0 - 0.01) * k as f64 / 500.0;
            let fd = (sinr_p2_cdf(x + h, m, rho_r) - sinr_p2_cdf(x - h, m, rho_r)) / (2.0 * h);
            if (fd - sinr_p2_pdf(x, m, rho_r)).abs() > 1e-6 {
                diff_ok = false;
            }
        }
    }

    // The exponential-sum CDF against raw samples.
    let mut ks_ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in [3usize, 5] {
        let mut samples: Vec<f64> = (0..100_000)
            .map(|_| (0..k).map(|_| -> f64 { Exp1.sample(&mut rng) }).sum())
            .collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ks_against(&samples, |y| chi_square_cdf(y, k)) > 0.01 {
            ks_ok = false;
        }
    }

    let pass = norm_ok && diff_ok && ks_ok;
    report(
        9,
        "closed-form numeric cross-checks",
        pass,
        &format!("normalization_ok={norm_ok}, derivative_ok={diff_ok}, sample_ks_ok={ks_ok}"),
    );
    assert!(pass);
}

#[test]
fn c10_outputs_are_byte_identical_across_thread_counts() {
    let args = ["fig3", "--n", "300", "--m-range", "1:6", "--trials", "300"];
    let run = |threads: &str| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_opporelay"))
            .args(args)
            .env("OPPORELAY_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "threads={threads}");
        out.stdout
    };
    let one = run("1");
    let eight = run("8");
    let pass = one == eight;
    report(
        10,
        "thread-count determinism",
        pass,
        &format!("{} output bytes compared", one.len()),
    );
    assert!(pass);
}

#[test]
fn c11_coherence_budget_reference_points() {
    let overhead = feedback_overhead(100_000_000, 6, db_to_linear(10.0));
    let tw_ok = (overhead.tw_required - 53.7).abs() <= 0.1;

    let radio = coherence_budget(900.0e6, 3.0 / 3.6, 1.0e-6).unwrap();
    let bw_ok = (radio.coherence_bandwidth_hz - 0.5e6).abs() < 1e-3;
    let time_ok = (radio.coherence_time_s - 0.1).abs() < 1e-12;
    let product_ok = (radio.time_bandwidth - 5.0e4).abs() < 1e-6;
    let headroom_ok = overhead.tw_required <= radio.time_bandwidth;

    let pass = tw_ok && bw_ok && time_ok && product_ok && headroom_ok;
    report(
        11,
        "coherence-budget reference points",
        pass,
        &format!(
            "tw_required(1e8)={:.3} vs 53.7±0.1; radio block {:.0} Hz x {:.3} s = {:.0}",
            overhead.tw_required, radio.coherence_bandwidth_hz, radio.coherence_time_s,
            radio.time_bandwidth
        ),
    );
    assert!(pass);
}
