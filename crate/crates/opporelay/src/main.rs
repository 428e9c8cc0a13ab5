//! Command-line experiment harness.
//!
//! Subcommands regenerate the standard experiment artifacts as CSV (the
//! `figN` preset names are the artifact ids used throughout the docs):
//! `fig2` first-hop throughput and bounds vs relay count, `fig3` per-hop
//! and system throughput vs relay count, `fig4` system throughput vs
//! population, `fig5` optimal relay count vs population, `fig6`
//! interference-distribution histograms, `analytic` a closed-form table,
//! and `genie` exhaustive-search existence probabilities.
//!
//! Every file is self-describing: a `#` comment header echoes the build,
//! seed, and the full effective configuration (no timestamps, so identical
//! runs produce identical bytes). Exit codes: 0 success (including rows
//! skipped over budget), 2 configuration error, 3 when a budget-gated
//! command produced no usable rows at all.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use opporelay::analytics::{
    cooperative_upper_bound, feedback_overhead, genie_m_bounds, phase2_critical_m,
    r1_lower_bound, r1_lower_bound_optimized, r2_exact, sinr_p2_cdf, sinr_p2_pdf, threshold_cap,
    CriticalSide, Phase1BoundParams,
};
use opporelay::genie::{
    estimate_existence_prob, full_search_cost, grouped_search_cost, markov_bound, GenieSearchBudget,
    GenieVariant,
};
use opporelay::montecarlo::{
    measure_row, sweep_m, sweep_n, validate_interferer_distribution,
};
use opporelay::scheduler::Phase1Mode;
use opporelay::{db_to_linear, NetworkConfig};

#[derive(Parser)]
#[command(
    name = "opporelay",
    version,
    about = "Monte Carlo simulator and closed-form analytics for two-hop opportunistic relaying"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// First-hop throughput vs relay count, with fixed and optimized-threshold lower bounds
    Fig2(CommonArgs),
    /// Per-hop and system throughput vs relay count
    Fig3(CommonArgs),
    /// System throughput vs population size at the optimized relay count, with analytic envelopes
    Fig4(CommonArgs),
    /// Optimal relay count vs population size, with the analytic reference curve
    Fig5(CommonArgs),
    /// Non-maximum-gain histograms against the unit exponential, one panel per population size
    Fig6(CommonArgs),
    /// Closed-form quantities for one parameter point (no simulation)
    Analytic(CommonArgs),
    /// Exhaustive-search existence probabilities with the Markov comparison bound
    Genie(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Source–destination pair count
    #[arg(long)]
    n: Option<usize>,
    /// Relay count
    #[arg(long)]
    m: Option<usize>,
    /// Inclusive relay-count sweep "lo:hi"
    #[arg(long = "m-range", value_name = "LO:HI")]
    m_range: Option<String>,
    /// Comma-separated population grid, e.g. "100,300,1000"
    #[arg(long = "n-grid", value_name = "CSV")]
    n_grid: Option<String>,
    /// First-hop SNR in dB
    #[arg(long = "rho-db")]
    rho_db: Option<f64>,
    /// Second-hop SNR in dB
    #[arg(long = "rho-r-db")]
    rho_r_db: Option<f64>,
    /// Monte Carlo trials per point
    #[arg(long)]
    trials: Option<u64>,
    /// RNG master seed
    #[arg(long)]
    seed: Option<u64>,
    /// First-hop accounting: all | distinct
    #[arg(long)]
    mode: Option<String>,
    /// Interior point for the achievable relay-count curve, in (0,1)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Enumeration budget for exhaustive searches
    #[arg(long)]
    budget: Option<u64>,
    /// Output file (defaults to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved experiment settings (builtin defaults <- config file <- flags).
#[derive(Debug, Clone)]
struct Settings {
    n: usize,
    m: usize,
    m_range: (usize, usize),
    n_grid: Vec<usize>,
    rho_db: f64,
    rho_r_db: f64,
    trials: u64,
    seed: u64,
    mode: Phase1Mode,
    epsilon: f64,
    budget: u64,
    out: Option<PathBuf>,
}

impl Settings {
    fn rho(&self) -> f64 {
        db_to_linear(self.rho_db)
    }
    fn rho_r(&self) -> f64 {
        db_to_linear(self.rho_r_db)
    }
    fn mode_name(&self) -> &'static str {
        match self.mode {
            Phase1Mode::AllAssignments => "all",
            Phase1Mode::DistinctOnly => "distinct",
        }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
    fn budget(msg: impl Into<String>) -> Self {
        Failure { code: 3, msg: msg.into() }
    }
}

fn config_err<T>(err: opporelay::Error) -> Result<T, Failure> {
    Err(Failure::config(err.to_string()))
}

fn parse_m_range(text: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Failure::config(format!("m-range must be LO:HI, got {text:?}")));
    }
    let lo: usize = parts[0]
        .parse()
        .map_err(|_| Failure::config(format!("m-range low bound {:?} is not a count", parts[0])))?;
    let hi: usize = parts[1]
        .parse()
        .map_err(|_| Failure::config(format!("m-range high bound {:?} is not a count", parts[1])))?;
    if lo < 1 || hi < lo {
        return Err(Failure::config(format!("m-range needs 1 <= LO <= HI, got {text:?}")));
    }
    Ok((lo, hi))
}

fn parse_n_grid(text: &str) -> Result<Vec<usize>, Failure> {
    let grid: Vec<usize> = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Failure::config(format!("n-grid entry {tok:?} is not a count")))
        })
        .collect::<Result<_, _>>()?;
    if grid.is_empty() || grid.iter().any(|&n| n < 1) {
        return Err(Failure::config("n-grid must list populations >= 1"));
    }
    Ok(grid)
}

/// Which command the defaults are being resolved for; some presets ship
/// their own grids.
#[derive(PartialEq, Clone, Copy)]
enum Preset {
    General,
    Fig6,
    Genie,
}

fn resolve(args: &CommonArgs, preset: Preset) -> Result<Settings, Failure> {
    let mut s = Settings {
        n: 1200,
        m: 6,
        m_range: (1, 12),
        n_grid: vec![100, 300, 1000, 3000],
        rho_db: 10.0,
        rho_r_db: 10.0,
        trials: 2000,
        seed: 20260816,
        mode: Phase1Mode::AllAssignments,
        epsilon: 0.5,
        budget: 10_000_000,
        out: None,
    };
    match preset {
        Preset::Fig6 => s.n_grid = vec![10, 20, 40, 100],
        Preset::Genie => {
            s.n_grid = vec![8, 12, 16];
            s.m_range = (2, 4);
        }
        Preset::General => {}
    }

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        apply_config_file(&mut s, &text, &path.display().to_string())?;
    }

    if let Some(n) = args.n {
        s.n = n;
    }
    if let Some(m) = args.m {
        s.m = m;
    }
    if let Some(r) = &args.m_range {
        s.m_range = parse_m_range(r)?;
    }
    if let Some(g) = &args.n_grid {
        s.n_grid = parse_n_grid(g)?;
    }
    if let Some(v) = args.rho_db {
        s.rho_db = v;
    }
    if let Some(v) = args.rho_r_db {
        s.rho_r_db = v;
    }
    if let Some(v) = args.trials {
        s.trials = v;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(mode) = &args.mode {
        s.mode = Phase1Mode::from_str(mode).or_else(config_err)?;
    }
    if let Some(v) = args.epsilon {
        s.epsilon = v;
    }
    if let Some(v) = args.budget {
        s.budget = v;
    }
    if let Some(out) = &args.out {
        s.out = Some(out.clone());
    }

    if s.trials < 1 {
        return Err(Failure::config("trials must be at least 1"));
    }
    if s.n < 1 || s.m < 1 {
        return Err(Failure::config("n and m must be at least 1"));
    }
    if !(s.rho_db.is_finite() && s.rho_r_db.is_finite()) {
        return Err(Failure::config("SNRs must be finite dB values"));
    }
    if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
        return Err(Failure::config(format!(
            "epsilon must lie strictly between 0 and 1, got {}",
            s.epsilon
        )));
    }
    if s.budget < 1 {
        return Err(Failure::config("budget must be at least 1"));
    }
    Ok(s)
}

fn apply_config_file(s: &mut Settings, text: &str, origin: &str) -> Result<(), Failure> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::config(format!("{origin}: {e}")))?;
    for (key, value) in &table {
        match key.as_str() {
            "n" => s.n = toml_usize(key, value)?,
            "m" => s.m = toml_usize(key, value)?,
            "m_range" => s.m_range = parse_m_range(toml_str(key, value)?)?,
            "n_grid" => s.n_grid = parse_n_grid(toml_str(key, value)?)?,
            "rho_db" => s.rho_db = toml_f64(key, value)?,
            "rho_r_db" => s.rho_r_db = toml_f64(key, value)?,
            "trials" => s.trials = toml_usize(key, value)? as u64,
            "seed" => {
                s.seed = value
                    .as_integer()
                    .and_then(|v| u64::try_from(v).ok())
                    .ok_or_else(|| bad_key(key, value, "a nonnegative integer"))?
            }
            "mode" => s.mode = Phase1Mode::from_str(toml_str(key, value)?).or_else(config_err)?,
            "epsilon" => s.epsilon = toml_f64(key, value)?,
            "budget" => s.budget = toml_usize(key, value)? as u64,
            "out" => s.out = Some(PathBuf::from(toml_str(key, value)?)),
            other => {
                return Err(Failure::config(format!(
                    "{origin}: unknown config key `{other}`"
                )))
            }
        }
    }
    Ok(())
}

fn bad_key(key: &str, value: &toml::Value, wanted: &str) -> Failure {
    Failure::config(format!("config key `{key}` must be {wanted}, got {value}"))
}

fn toml_usize(key: &str, value: &toml::Value) -> Result<usize, Failure> {
    value
        .as_integer()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| bad_key(key, value, "a nonnegative integer"))
}

fn toml_f64(key: &str, value: &toml::Value) -> Result<f64, Failure> {
    match value {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad_key(key, value, "a number")),
    }
}

fn toml_str<'v>(key: &str, value: &'v toml::Value) -> Result<&'v str, Failure> {
    value.as_str().ok_or_else(|| bad_key(key, value, "a string"))
}

/// All numbers are written with 17 significant digits so downstream
/// plotting and the byte-identity determinism check are lossless.
fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(cmd_name: &str, s: &Settings) -> String {
    let grid = s
        .n_grid
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut h = String::new();
    let _ = writeln!(h, "# opporelay {cmd_name}");
    let _ = writeln!(h, "# build: {}", env!("OPPORELAY_BUILD"));
    let _ = writeln!(h, "# seed: {}", s.seed);
    let _ = writeln!(
        h,
        "# params: n={} m={} m_range={}:{} n_grid={} rho_db={} rho_r_db={} trials={} mode={} epsilon={} budget={}",
        s.n, s.m, s.m_range.0, s.m_range.1, grid, s.rho_db, s.rho_r_db, s.trials,
        s.mode_name(), s.epsilon, s.budget
    );
    h
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn network(s: &Settings, n: usize, m: usize) -> Result<NetworkConfig, Failure> {
    NetworkConfig::new(n, m, s.rho(), s.rho_r(), s.seed).or_else(config_err)
}

fn cmd_fig2(s: &Settings) -> Result<(), Failure> {
    let mut body = header("fig2", s);
    body.push_str("m,r1_all_mean,r1_all_se,r1_distinct_mean,r1_distinct_se,lb_fixed_s,lb_opt_s,s_opt\n");
    let cap = threshold_cap(s.n);
    for m in s.m_range.0..=s.m_range.1 {
        let row = measure_row(&network(s, s.n, m)?, s.trials);
        let fixed = Phase1BoundParams::new(s.n, m, s.rho(), cap)
            .map(|p| r1_lower_bound(&p))
            .or_else(config_err)?;
        let (opt, s_opt) = r1_lower_bound_optimized(s.n, m, s.rho()).or_else(config_err)?;
        let _ = writeln!(
            body,
            "{m},{},{},{},{},{},{},{}",
            fmt_f(row.r1_all.mean),
            fmt_f(row.r1_all.std_error),
            fmt_f(row.r1_distinct.mean),
            fmt_f(row.r1_distinct.std_error),
            fmt_f(fixed),
            fmt_f(opt),
            fmt_f(s_opt)
        );
    }
    write_output(&s.out, &body)
}

fn cmd_fig3(s: &Settings) -> Result<(), Failure> {
    let m_values: Vec<usize> = (s.m_range.0..=s.m_range.1).collect();
    let rows = sweep_m(&network(s, s.n, s.m)?, &m_values, s.trials).or_else(config_err)?;
    let mut body = header("fig3", s);
    body.push_str("m,r1,r2,r\n");
    for row in rows {
        let r1 = match s.mode {
            Phase1Mode::AllAssignments => row.r1_all.mean,
            Phase1Mode::DistinctOnly => row.r1_distinct.mean,
        };
        let r = 0.5 * r1.min(row.r2.mean);
        let _ = writeln!(body, "{},{},{},{}", row.m, fmt_f(r1), fmt_f(row.r2.mean), fmt_f(r));
    }
    write_output(&s.out, &body)
}

fn cmd_fig4(s: &Settings) -> Result<(), Failure> {
    let rows = sweep_n(&network(s, s.n, s.m)?, &s.n_grid, s.trials, true).or_else(config_err)?;
    let mut body = header("fig4", s);
    body.push_str("n,system,genie_upper,lower\n");
    for row in rows {
        let ln_n = (row.n as f64).ln();
        let upper = ln_n / (4.0 * std::f64::consts::LN_2) + 1.0;
        let lower = 0.25 * ln_n;
        let _ = writeln!(
            body,
            "{},{},{},{}",
            row.n,
            fmt_f(row.system.mean),
            fmt_f(upper),
            fmt_f(lower)
        );
    }
    write_output(&s.out, &body)
}

fn cmd_fig5(s: &Settings) -> Result<(), Failure> {
    let rows = sweep_n(&network(s, s.n, s.m)?, &s.n_grid, s.trials, true).or_else(config_err)?;
    let mut body = header("fig5", s);
    body.push_str("n,optimal_m,reference\n");
    for row in rows {
        let reference = (row.n as f64).ln() / (2.0 * std::f64::consts::LN_2) + 2.0;
        let _ = writeln!(body, "{},{},{}", row.n, row.m, fmt_f(reference));
    }
    write_output(&s.out, &body)
}

fn cmd_fig6(s: &Settings) -> Result<(), Failure> {
    let mut body = header("fig6", s);
    body.push_str("n,bin_lo,bin_hi,empirical_density,reference_density\n");
    for &n in &s.n_grid {
        let rep =
            validate_interferer_distribution(n, s.trials, 40, s.seed).or_else(config_err)?;
        let _ = writeln!(
            body,
            "# panel: n={n} samples={} ks={} tail_mass={}",
            rep.samples,
            fmt_f(rep.ks),
            fmt_f(rep.tail_mass)
        );
        for b in 0..rep.empirical_density.len() {
            let _ = writeln!(
                body,
                "{n},{},{},{},{}",
                fmt_f(rep.bin_edges[b]),
                fmt_f(rep.bin_edges[b + 1]),
                fmt_f(rep.empirical_density[b]),
                fmt_f(rep.reference_density[b])
            );
        }
    }
    write_output(&s.out, &body)
}

fn cmd_analytic(s: &Settings) -> Result<(), Failure> {
    let (n, m) = (s.n, s.m);
    let (rho, rho_r) = (s.rho(), s.rho_r());
    let cap = threshold_cap(n);
    let fixed = Phase1BoundParams::new(n, m, rho, cap)
        .map(|p| r1_lower_bound(&p))
        .or_else(config_err)?;
    let (opt, s_opt) = r1_lower_bound_optimized(n, m, rho).or_else(config_err)?;
    let (upper_m, achievable_m) = genie_m_bounds(n as f64, s.epsilon).or_else(config_err)?;
    let linear = phase2_critical_m(n as f64, rho_r, CriticalSide::Linear).or_else(config_err)?;
    let saturated =
        phase2_critical_m(n as f64, rho_r, CriticalSide::Saturated).or_else(config_err)?;
    let coop = cooperative_upper_bound(n as f64, m).or_else(config_err)?;
    let overhead = feedback_overhead(n, m, rho_r);

    let mut body = header("analytic", s);
    body.push_str("quantity,value\n");
    let mut row = |name: &str, v: String| {
        let _ = writeln!(body, "{name},{v}");
    };
    row("threshold_cap", fmt_f(cap));
    row("r1_lower_bound_fixed_s", fmt_f(fixed));
    row("r1_lower_bound_optimized", fmt_f(opt));
    row("s_opt", fmt_f(s_opt));
    row("sinr_p2_pdf_at_0", fmt_f(sinr_p2_pdf(0.0, m, rho_r)));
    row("sinr_p2_cdf_at_1", fmt_f(sinr_p2_cdf(1.0, m, rho_r)));
    row("r2_exact", fmt_f(r2_exact(n, m, rho_r)));
    row("phase2_critical_m_linear", fmt_f(linear));
    row("phase2_critical_m_saturated", fmt_f(saturated));
    row("genie_m_upper", fmt_f(upper_m));
    row("genie_m_achievable", fmt_f(achievable_m));
    row("cooperative_upper_bound", fmt_f(coop));
    row("phase1_feedback_bits", overhead.phase1_bits.to_string());
    row(
        "phase2_feedback_bits_expected",
        fmt_f(overhead.phase2_bits_expected),
    );
    row("tw_required", fmt_f(overhead.tw_required));
    row("markov_bound", fmt_f(markov_bound(n, m, rho)));
    write_output(&s.out, &body)
}

fn cmd_genie(s: &Settings) -> Result<(), Failure> {
    let budget = GenieSearchBudget::new(s.budget).or_else(config_err)?;
    let mut body = header("genie", s);
    body.push_str("n,m,prob_full,prob_full_se,prob_grouped,prob_grouped_se,markov_bound,status\n");
    let mut usable_rows = 0usize;
    let mut total_rows = 0usize;
    for &n in &s.n_grid {
        for m in s.m_range.0..=s.m_range.1 {
            total_rows += 1;
            let bound = markov_bound(n, m, s.rho());
            if m > n {
                let _ = writeln!(
                    body,
                    "{n},{m},nan,nan,nan,nan,{},skipped:invalid",
                    fmt_f(bound)
                );
                continue;
            }
            let full_ok = full_search_cost(n, m) <= s.budget as u128;
            let grouped_ok = grouped_search_cost(n, m) <= s.budget as u128;
            if !full_ok && !grouped_ok {
                let _ = writeln!(
                    body,
                    "{n},{m},nan,nan,nan,nan,{},skipped:budget",
                    fmt_f(bound)
                );
                continue;
            }
            let cfg = network(s, n, m)?;
            let full = if full_ok {
                Some(
                    estimate_existence_prob(&cfg, m, s.trials, GenieVariant::Full, &budget)
                        .or_else(config_err)?,
                )
            } else {
                None
            };
            let grouped = if grouped_ok {
                Some(
                    estimate_existence_prob(&cfg, m, s.trials, GenieVariant::Grouped, &budget)
                        .or_else(config_err)?,
                )
            } else {
                None
            };
            usable_rows += 1;
            let status = match (&full, &grouped) {
                (Some(_), Some(_)) => "ok",
                (Some(_), None) => "skipped:grouped-budget",
                (None, Some(_)) => "skipped:full-budget",
                (None, None) => unreachable!("at least one variant fit the budget"),
            };
            let cell = |e: &Option<opporelay::ThroughputEstimate>, f: fn(&opporelay::ThroughputEstimate) -> f64| {
                e.as_ref().map(|v| fmt_f(f(v))).unwrap_or_else(|| "nan".into())
            };
            let _ = writeln!(
                body,
                "{n},{m},{},{},{},{},{},{status}",
                cell(&full, |e| e.mean),
                cell(&full, |e| e.std_error),
                cell(&grouped, |e| e.mean),
                cell(&grouped, |e| e.std_error),
                fmt_f(bound)
            );
        }
    }
    if usable_rows == 0 && total_rows > 0 {
        return Err(Failure::budget(
            "every grid cell exceeded the search budget; raise --budget or shrink the grid",
        ));
    }
    write_output(&s.out, &body)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Fig2(a) => cmd_fig2(&resolve(a, Preset::General)?),
        Cmd::Fig3(a) => cmd_fig3(&resolve(a, Preset::General)?),
        Cmd::Fig4(a) => cmd_fig4(&resolve(a, Preset::General)?),
        Cmd::Fig5(a) => cmd_fig5(&resolve(a, Preset::General)?),
        Cmd::Fig6(a) => cmd_fig6(&resolve(a, Preset::Fig6)?),
        Cmd::Analytic(a) => cmd_analytic(&resolve(a, Preset::General)?),
        Cmd::Genie(a) => cmd_genie(&resolve(a, Preset::Genie)?),
    }
}

fn main() -> std::process::ExitCode {
    if let Ok(raw) = std::env::var("OPPORELAY_THREADS") {
        if !raw.trim().is_empty() {
            match raw.trim().parse::<usize>() {
                Ok(t) if t >= 1 => {
                    // First thing in the process: the global pool cannot
                    // have been built yet.
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build_global()
                        .expect("global thread pool built once at startup");
                }
                _ => {
                    eprintln!("error: OPPORELAY_THREADS must be a positive integer, got {raw:?}");
                    return std::process::ExitCode::from(2);
                }
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            std::process::ExitCode::from(f.code)
        }
    }
}
