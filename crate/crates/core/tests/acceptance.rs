//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p srs-core --release --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use srs_core::channel::{sample_realization, split_csit, trial_rng, ScenarioConfig, StreamPurpose};
use srs_core::estimator::{
    cell_seed, estimate_sdof, estimate_sdof_with, message, sweep, Scheme, SdofEstimate, SweepGrid,
};
use srs_core::formulas;
use srs_core::precoder::{design_srs, verify};
use srs_core::Ablation;

const SLOPE_TOL: f64 = 0.15;
const DOMINANCE_SLACK: f64 = 0.1;
const LEAK_TOL: f64 = 0.1;
const ABLATION_MIN_LEAK: f64 = 0.5;
const PRIVATE_TOL: f64 = 0.1;
const RESIDUAL_TOL: f64 = 1e-8;
const FORMULA_TOL: f64 = 1e-12;
const TRIALS: usize = 200;
const SEED: u64 = 20_240_601;

type Q = Ratio<i64>;

/// Independent rational evaluation of the closed forms.
mod oracle {
    use super::Q;

    pub fn srs_sum_sdof(m: i64, n: i64, a: Q) -> Q {
        let (m, n) = (Q::from(m), Q::from(n));
        if m <= n {
            m
        } else if m <= n * 2 {
            n + a * (m - n)
        } else {
            n * (Q::from(1) + a)
        }
    }

    pub fn zf(m: i64, n: i64, a: Q) -> Q {
        Q::from(2) * a * Q::from((m - n).max(0).min(n))
    }

    pub fn k_user_sum_sdof(k: i64, n: i64, a: Q) -> Q {
        (Q::from(1) - a) * Q::from(n) + Q::from(k) * a * Q::from(n)
    }

    pub fn region_sum(m: i64, n: i64, a: Q) -> Q {
        let single = Q::from(m.min(n));
        let pair = Q::from(m.min(2 * n));
        single + a * (pair - single)
    }
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Simulation results for the rate-splitting acceptance cells, shared by several
/// criteria.
struct CellResults {
    cells: BTreeMap<(usize, usize, u64, Scheme), SdofEstimate>,
}

impl CellResults {
    fn get(&self, m: usize, n: usize, alpha: f64, scheme: Scheme) -> &SdofEstimate {
        &self.cells[&(m, n, alpha.to_bits(), scheme)]
    }
}

const ACCEPTANCE_ALPHAS: [f64; 3] = [0.0, 0.5, 1.0];
const ACCEPTANCE_M: [usize; 3] = [2, 3, 4];

fn base_config() -> ScenarioConfig {
    ScenarioConfig::new(2, 2, 4, 0.0)
        .with_trials(TRIALS)
        .with_seed(SEED)
}

fn run_cells() -> CellResults {
    let grid = SweepGrid {
        tx_antennas: ACCEPTANCE_M.to_vec(),
        rx_antennas: vec![2],
        alphas: ACCEPTANCE_ALPHAS.to_vec(),
        schemes: vec![Scheme::Srs, Scheme::Zf],
    };
    let rows = sweep(&base_config(), &grid).expect("acceptance sweep");
    let cells = rows
        .into_iter()
        .map(|r| {
            (
                (
                    r.tx_antennas,
                    r.rx_antennas,
                    r.alpha.to_bits(),
                    r.estimate.scheme,
                ),
                r.estimate,
            )
        })
        .collect();
    CellResults { cells }
}

fn cell_config(m: usize, n: usize, alpha: f64) -> ScenarioConfig {
    let j = 2 * n;
    ScenarioConfig::new(m, n, j, alpha)
        .with_trials(TRIALS)
        .with_seed(cell_seed(SEED, m, n, j, alpha))
}

fn ac1_formula_exactness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for m in 1..=8i64 {
        for n in 1..=4i64 {
            for k in 0..=10i64 {
                let a = Q::new(k, 10);
                let af = k as f64 / 10.0;
                let (mu, nu) = (m as usize, n as usize);
                let t = formulas::srs_sum_sdof(mu, nu, af).unwrap();
                let z = formulas::zf_bound(mu, nu, af).unwrap();
                let u = formulas::upper_bound_sum(mu, nu, af).unwrap();
                let region = formulas::upper_bound_region(mu, nu, af).unwrap();
                let gap = formulas::optimality_gap(mu, nu, af).unwrap();
                let pairs = [
                    (t, oracle::srs_sum_sdof(m, n, a)),
                    (z, oracle::zf(m, n, a)),
                    (u, oracle::srs_sum_sdof(m, n, a)),
                    (u, oracle::region_sum(m, n, a)),
                    (region[2].bound, oracle::region_sum(m, n, a)),
                ];
                for (got, want) in pairs {
                    let err = (got - to_f64(want)).abs();
                    worst = worst.max(err);
                    if err > FORMULA_TOL {
                        failures.push(format!("M={m} N={n} a={af}: {got} vs {want}"));
                    }
                }
                if gap != 0.0 {
                    failures.push(format!("gap M={m} N={n} a={af} = {gap}"));
                }
                // K-user expression on its validity region M >= K N
                for kk in 1..=8i64 {
                    if m >= kk * n {
                        let c = formulas::k_user_sum_sdof(kk as usize, nu, af, mu).unwrap();
                        let err = (c - to_f64(oracle::k_user_sum_sdof(kk, n, a))).abs();
                        worst = worst.max(err);
                        if err > FORMULA_TOL {
                            failures.push(format!("cor2 K={kk} N={n} a={af}"));
                        }
                    } else if formulas::k_user_sum_sdof(kk as usize, nu, af, mu).is_ok() {
                        failures.push(format!("cor2 accepted M={m} < K N ({kk}x{n})"));
                    }
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(1);
    outcome(
        failures.is_empty() && fast,
        format!(
            "{checked} grid points, max |err| = {worst:.1e}, optimality gap 0 everywhere, {:.3}s{}",
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {:?}", &failures[..failures.len().min(5)])
            }
        ),
    )
}

fn ac2_precoder_correctness() -> Outcome {
    let start = Instant::now();
    let regimes = [(2, 2, 4), (3, 2, 4), (4, 2, 4), (6, 2, 4)];
    let draws = 1000;
    let (alpha, power) = (0.5, 1e9);
    let mut parts = Vec::new();
    let mut ok = true;
    for (m, n, j) in regimes {
        let cfg = ScenarioConfig::new(m, n, j, alpha)
            .with_trials(draws)
            .with_seed(SEED ^ 0xAC2);
        let mut max_res = 0.0f64;
        let mut worst_cond = String::new();
        let mut failed_designs = 0;
        for t in 0..draws {
            let real = sample_realization(&cfg, t, 0).unwrap();
            let mut rng = trial_rng(cfg.seed, t as u64, 0, StreamPurpose::CsitError);
            let csit = split_csit(&real, alpha, power, &mut rng);
            match design_srs(&csit, &real) {
                Ok(ps) => {
                    let report = verify(&ps, &csit, &real);
                    if report.max_residual > max_res {
                        max_res = report.max_residual;
                        worst_cond = report
                            .worst()
                            .map(|r| r.condition.clone())
                            .unwrap_or_default();
                    }
                }
                Err(_) => failed_designs += 1,
            }
        }
        ok &= max_res <= RESIDUAL_TOL && failed_designs == 0;
        parts.push(format!(
            "({m},{n},{j}) max {max_res:.1e} [{worst_cond}]{}",
            if failed_designs > 0 {
                format!(" {failed_designs} infeasible")
            } else {
                String::new()
            }
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    outcome(
        ok,
        format!(
            "{draws} draws/regime: {}; {:.1}s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn ac3_srs_sum_sdof_slopes(cells: &CellResults) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in ACCEPTANCE_M {
        for alpha in ACCEPTANCE_ALPHAS {
            let e = cells.get(m, 2, alpha, Scheme::Srs);
            let want = formulas::srs_sum_sdof(m, 2, alpha).unwrap();
            let good = (e.sum_sdof_slope - want).abs() <= SLOPE_TOL;
            ok &= good;
            parts.push(format!(
                "({m},2,{alpha}) {:.3}/{want}{}",
                e.sum_sdof_slope,
                if good { "" } else { " !" }
            ));
        }
    }
    outcome(
        ok,
        format!(
            "S-RS slope vs srs_sum_sdof (±{SLOPE_TOL}): {}",
            parts.join(", ")
        ),
    )
}

fn ac4_zf_baseline(cells: &CellResults) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in ACCEPTANCE_M {
        for alpha in ACCEPTANCE_ALPHAS {
            let zf = cells.get(m, 2, alpha, Scheme::Zf);
            let srs = cells.get(m, 2, alpha, Scheme::Srs);
            let want = formulas::zf_bound(m, 2, alpha).unwrap();
            let close = (zf.sum_sdof_slope - want).abs() <= SLOPE_TOL;
            let dominated =
                alpha >= 1.0 || srs.sum_sdof_slope >= zf.sum_sdof_slope - DOMINANCE_SLACK;
            ok &= close && dominated;
            parts.push(format!(
                "({m},2,{alpha}) ZF {:.3}/{want} SRS {:.3}{}",
                zf.sum_sdof_slope,
                srs.sum_sdof_slope,
                if close && dominated { "" } else { " !" }
            ));
        }
    }
    outcome(ok, parts.join(", "))
}

fn ac5_secrecy(cells: &CellResults) -> Outcome {
    let mut ok = true;
    let mut worst_common = f64::NEG_INFINITY;
    let mut worst_private = f64::NEG_INFINITY;
    for m in ACCEPTANCE_M {
        for alpha in ACCEPTANCE_ALPHAS {
            let e = cells.get(m, 2, alpha, Scheme::Srs);
            let c = e.slope(message::COMMON_LEAK);
            let p = e.slope(message::PRIVATE_LEAK);
            worst_common = worst_common.max(c);
            worst_private = worst_private.max(p);
            ok &= c <= LEAK_TOL && p <= LEAK_TOL;
        }
    }
    let mut ablation_parts = Vec::new();
    let mut ablation_hit = false;
    for m in ACCEPTANCE_M {
        for alpha in [0.0, 0.5] {
            let est =
                estimate_sdof_with(&cell_config(m, 2, alpha), Scheme::Srs, Ablation::JammerOff)
                    .expect("ablation run");
            let c = est.slope(message::COMMON_LEAK);
            ablation_hit |= c >= ABLATION_MIN_LEAK;
            ablation_parts.push(format!("({m},2,{alpha}) {c:.3}"));
        }
    }
    ok &= ablation_hit;
    outcome(
        ok,
        format!(
            "max common leak slope {worst_common:.3}, max private leak slope {worst_private:.3} (<= {LEAK_TOL}); jammer-off common leak: {}",
            ablation_parts.join(", ")
        ),
    )
}

fn ac6_per_message(cells: &CellResults) -> Outcome {
    let e = cells.get(3, 2, 0.5, Scheme::Srs);
    let common = e.slope(message::COMMON);
    let p1 = e.slope(message::PRIVATE_1);
    let p2 = e.slope(message::PRIVATE_2);
    let ok = (common - 1.5).abs() <= SLOPE_TOL
        && (p1 - 0.5).abs() <= PRIVATE_TOL
        && (p2 - 0.5).abs() <= PRIVATE_TOL;
    outcome(
        ok,
        format!("(3,2,0.5): common {common:.3}/1.5, private {p1:.3}, {p2:.3}/0.5"),
    )
}

fn ac7_saturation(cells: &CellResults) -> Outcome {
    let four = cells.get(4, 2, 0.5, Scheme::Srs).sum_sdof_slope;
    let six = estimate_sdof(&cell_config(6, 2, 0.5), Scheme::Srs)
        .expect("(6,2) run")
        .sum_sdof_slope;
    outcome(
        (six - four).abs() <= SLOPE_TOL,
        format!("S-RS slope (6,2,0.5) {six:.3} vs (4,2,0.5) {four:.3}"),
    )
}

fn ac8_k_user_sum_sdof_table() -> Outcome {
    let start = Instant::now();
    let n = 2usize;
    let alphas: Vec<Q> = (0..=4).map(|k| Q::new(k, 4)).collect();
    let ks = 1..=6usize;
    let mut table: Vec<Vec<Q>> = Vec::new();
    let mut ok = true;
    for k in ks.clone() {
        let mut row = Vec::new();
        for &a in &alphas {
            let af = to_f64(a);
            let value = formulas::k_user_sum_sdof(k, n, af, k * n).unwrap();
            let exact = oracle::k_user_sum_sdof(k as i64, n as i64, a);
            ok &= value == to_f64(exact);
            row.push(exact);
        }
        table.push(row);
    }
    for row in &table {
        ok &= row.windows(2).all(|w| w[1] >= w[0]);
    }
    for col in 0..alphas.len() {
        ok &= table.windows(2).all(|w| w[1][col] >= w[0][col]);
    }
    // increment from one alpha step, strictly growing with K
    for step in 0..alphas.len() - 1 {
        let inc: Vec<Q> = table.iter().map(|row| row[step + 1] - row[step]).collect();
        ok &= inc.windows(2).all(|w| w[1] > w[0]);
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    let last = table.last().unwrap();
    outcome(
        ok,
        format!(
            "N=2, K=1..6, alpha in {{0,1/4,..,1}}: K=6 row {:?}; {:.3}s",
            last.iter().map(|q| to_f64(*q)).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

fn report(name: &str, title: &str, start: Instant, o: Outcome) -> bool {
    println!(
        "[{}] {name} {title} ({:.2}s): {}",
        if o.passed { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        o.detail
    );
    o.passed
}

fn main() -> ExitCode {
    println!("acceptance suite: grid P = 1e6..1e12 (5 points), {TRIALS} trials per cell");
    let mut all = true;

    let t = Instant::now();
    all &= report("AC1", "formula exactness", t, ac1_formula_exactness());
    let t = Instant::now();
    all &= report("AC2", "precoder residuals", t, ac2_precoder_correctness());

    let t = Instant::now();
    let cells = run_cells();
    println!(
        "       simulated {} cells in {:.2}s",
        cells.cells.len(),
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    all &= report(
        "AC3",
        "rate-splitting slopes",
        t,
        ac3_srs_sum_sdof_slopes(&cells),
    );
    let t = Instant::now();
    all &= report("AC4", "zero-forcing baseline", t, ac4_zf_baseline(&cells));
    let t = Instant::now();
    all &= report("AC5", "secrecy and jammer ablation", t, ac5_secrecy(&cells));
    let t = Instant::now();
    all &= report("AC6", "per-message slopes", t, ac6_per_message(&cells));
    let t = Instant::now();
    all &= report("AC7", "saturation beyond M = 2N", t, ac7_saturation(&cells));
    let t = Instant::now();
    all &= report("AC8", "K-user table", t, ac8_k_user_sum_sdof_table());

    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
