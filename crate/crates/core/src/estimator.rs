//! Monte Carlo slope estimation of sum-SDoF and leakage.
//!
//! Every trial draws one realization and reuses its CSIT-error stream at each
//! grid power, so the error differs across the grid only in scale. Rates are
//! averaged over trials per grid point and the slopes are fitted on the
//! averaged curves. Trials run in parallel and are reduced in trial order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_realization, split_csit, trial_rng, ScenarioConfig, StreamPurpose};
use crate::error::{Error, Result};
use crate::numerics::{fit_rate_slope, RegressionFit};
use crate::precoder::design_srs;
use crate::rates::{default_policy, evaluate, Ablation, RateBreakdown};
use crate::zf::design_zf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    Srs,
    Zf,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Srs => "SRS",
            Scheme::Zf => "ZF",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srs" | "s-rs" => Ok(Scheme::Srs),
            "zf" => Ok(Scheme::Zf),
            other => Err(Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Names of the per-message curves whose slopes are reported.
pub mod message {
    pub const SUM: &str = "sum";
    pub const COMMON: &str = "common";
    pub const COMMON_R1: &str = "common_r1";
    pub const COMMON_R2: &str = "common_r2";
    pub const PRIVATE_1: &str = "private_1";
    pub const PRIVATE_2: &str = "private_2";
    pub const COMMON_LEAK: &str = "common_leak";
    pub const PRIVATE_LEAK: &str = "private_leak";
    pub const PRIVATE_LEAK_AT_1: &str = "private_leak_at_1";
    pub const PRIVATE_LEAK_AT_2: &str = "private_leak_at_2";
}

fn curves(rb: &RateBreakdown) -> [(&'static str, f64); 10] {
    [
        (message::SUM, rb.sum_secure_rate),
        (message::COMMON, rb.common_rate()),
        (message::COMMON_R1, rb.common_rate_r1),
        (message::COMMON_R2, rb.common_rate_r2),
        (message::PRIVATE_1, rb.private_rate_1),
        (message::PRIVATE_2, rb.private_rate_2),
        (message::COMMON_LEAK, rb.common_leakage()),
        (message::PRIVATE_LEAK, rb.private_leakage()),
        (message::PRIVATE_LEAK_AT_1, rb.private_leak_at_1),
        (message::PRIVATE_LEAK_AT_2, rb.private_leak_at_2),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub power: f64,
    pub mean_sum_rate: f64,
    pub mean_leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdofEstimate {
    pub scheme: Scheme,
    pub ablation: Ablation,
    pub sum_sdof_slope: f64,
    /// Slope of the total (common plus private) leakage curve.
    pub leakage_slope: f64,
    pub per_message_slopes: BTreeMap<String, f64>,
    /// Standard error of the mean per-trial sum slope.
    pub stderr: f64,
    /// Mean of slopes fitted per trial; diagnostic companion of
    /// `sum_sdof_slope`.
    pub mean_trial_slope: f64,
    pub sum_fit: RegressionFit,
    pub curve: Vec<GridPoint>,
    pub trials: usize,
    pub resampled: usize,
}

impl SdofEstimate {
    pub fn slope(&self, name: &str) -> f64 {
        self.per_message_slopes
            .get(name)
            .copied()
            .unwrap_or(f64::NAN)
    }
}

/// Infeasible draws may be replaced for at most 1% of the trials (rounded up).
pub fn resample_budget(trials: usize) -> usize {
    trials.div_ceil(100)
}

fn check_estimator_config(cfg: &ScenarioConfig) -> Result<()> {
    cfg.validate()?;
    let grid = &cfg.snr_grid;
    if grid.len() < 5 {
        return Err(Error::InvalidConfig(format!(
            "SNR grid needs at least 5 points, got {}",
            grid.len()
        )));
    }
    let decades = (grid[grid.len() - 1] / grid[0]).log10();
    if decades < 4.0 - 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "SNR grid must span at least 4 decades, spans {decades:.2}"
        )));
    }
    if cfg.trials < 100 {
        return Err(Error::InvalidConfig(format!(
            "slope estimation needs at least 100 trials, got {}",
            cfg.trials
        )));
    }
    Ok(())
}

struct TrialOutcome {
    rates: Vec<RateBreakdown>,
    resamples: usize,
}

fn run_trial(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    ablation: Ablation,
    trial: usize,
    budget: usize,
    noise: &[f64],
) -> Result<TrialOutcome> {
    let alpha = cfg.csit_quality;
    let mut attempt = 0u32;
    'attempts: loop {
        let real = sample_realization(cfg, trial, attempt)?;
        let mut rates = Vec::with_capacity(cfg.snr_grid.len());
        for &power in &cfg.snr_grid {
            let mut rng = trial_rng(cfg.seed, trial as u64, attempt, StreamPurpose::CsitError);
            let csit = split_csit(&real, alpha, power, &mut rng);
            let designed = match scheme {
                Scheme::Srs => design_srs(&csit, &real),
                Scheme::Zf => design_zf(&csit).map(|zf| zf.to_precoder_set(cfg.jammer_antennas)),
            };
            let ps = match designed {
                Ok(ps) => ps,
                Err(Error::Infeasible(_)) if (attempt as usize) < budget => {
                    attempt += 1;
                    continue 'attempts;
                }
                Err(Error::Infeasible(_)) => {
                    return Err(Error::ResampleBudgetExceeded {
                        resampled: attempt as usize + 1,
                        budget,
                    })
                }
                Err(e) => return Err(e),
            };
            let policy = default_policy(&ps, power, alpha).with_ablation(ablation);
            rates.push(evaluate(&ps, policy, &real, noise)?);
        }
        return Ok(TrialOutcome {
            rates,
            resamples: attempt as usize,
        });
    }
}

/// Estimates sum-SDoF and leakage slopes for one scenario.
pub fn estimate_sdof(cfg: &ScenarioConfig, scheme: Scheme) -> Result<SdofEstimate> {
    estimate_sdof_with(cfg, scheme, Ablation::None)
}

pub fn estimate_sdof_with(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    ablation: Ablation,
) -> Result<SdofEstimate> {
    check_estimator_config(cfg)?;
    let budget = resample_budget(cfg.trials);
    let noise = cfg.noise_variances.clone();
    let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, scheme, ablation, t, budget, &noise))
        .collect();

    let mut per_trial = Vec::with_capacity(cfg.trials);
    let mut resampled = 0usize;
    for outcome in outcomes {
        let o = outcome?;
        resampled += o.resamples;
        per_trial.push(o.rates);
    }
    if resampled > budget {
        return Err(Error::ResampleBudgetExceeded { resampled, budget });
    }

    let log_p: Vec<f64> = cfg.snr_grid.iter().map(|p| p.log2()).collect();
    let n_trials = per_trial.len() as f64;
    let mut means: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    for rates in &per_trial {
        for (k, rb) in rates.iter().enumerate() {
            for (name, value) in curves(rb) {
                means.entry(name).or_insert_with(|| vec![0.0; log_p.len()])[k] += value / n_trials;
            }
        }
    }

    let fit = |ys: &[f64]| -> Result<RegressionFit> {
        let pts: Vec<(f64, f64)> = log_p.iter().copied().zip(ys.iter().copied()).collect();
        fit_rate_slope(&pts)
    };

    let mut per_message_slopes = BTreeMap::new();
    for (name, ys) in &means {
        per_message_slopes.insert((*name).to_string(), fit(ys)?.slope);
    }
    let sum_fit = fit(&means[message::SUM])?;
    let leakage: Vec<f64> = means[message::COMMON_LEAK]
        .iter()
        .zip(&means[message::PRIVATE_LEAK])
        .map(|(a, b)| a + b)
        .collect();
    let leakage_slope = fit(&leakage)?.slope;

    let trial_slopes: Vec<f64> = per_trial
        .iter()
        .map(|rates| {
            let ys: Vec<f64> = rates.iter().map(|rb| rb.sum_secure_rate).collect();
            fit(&ys).map(|f| f.slope)
        })
        .collect::<Result<_>>()?;
    let mean_trial_slope = trial_slopes.iter().sum::<f64>() / n_trials;
    let var = trial_slopes
        .iter()
        .map(|s| (s - mean_trial_slope).powi(2))
        .sum::<f64>()
        / (n_trials - 1.0).max(1.0);
    let stderr = (var / n_trials).sqrt();

    let curve = cfg
        .snr_grid
        .iter()
        .enumerate()
        .map(|(k, &power)| GridPoint {
            power,
            mean_sum_rate: means[message::SUM][k],
            mean_leakage: leakage[k],
        })
        .collect();

    Ok(SdofEstimate {
        scheme,
        ablation,
        sum_sdof_slope: sum_fit.slope,
        leakage_slope,
        per_message_slopes,
        stderr,
        mean_trial_slope,
        sum_fit,
        curve,
        trials: cfg.trials,
        resampled,
    })
}

/// Cartesian parameter grid for [`sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub alphas: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub jammer_antennas: usize,
    pub alpha: f64,
    pub seed: u64,
    pub estimate: SdofEstimate,
}

/// Seed of one sweep cell. Both schemes of a cell share it, so they see the
/// same channel draws.
pub fn cell_seed(base: u64, m: usize, n: usize, j: usize, alpha: f64) -> u64 {
    let mut h = base ^ 0x5352_535f_4345_4c4c;
    for v in [m as u64, n as u64, j as u64, alpha.to_bits()] {
        h = h.rotate_left(23) ^ v;
        h = h.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^= h >> 29;
    }
    h
}

/// Runs every `(M, N, alpha, scheme)` cell. The jammer gets
/// `max(J_base, 2N)` antennas so each cell is admissible.
pub fn sweep(base: &ScenarioConfig, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    sweep_with(base, grid, Ablation::None)
}

/// [`sweep`] under a power-policy ablation.
pub fn sweep_with(
    base: &ScenarioConfig,
    grid: &SweepGrid,
    ablation: Ablation,
) -> Result<Vec<SweepRow>> {
    if grid.tx_antennas.is_empty()
        || grid.rx_antennas.is_empty()
        || grid.alphas.is_empty()
        || grid.schemes.is_empty()
    {
        return Err(Error::InvalidConfig("sweep grid has an empty axis".into()));
    }
    let mut rows = Vec::new();
    for &n in &grid.rx_antennas {
        for &m in &grid.tx_antennas {
            for &alpha in &grid.alphas {
                let j = base.jammer_antennas.max(2 * n);
                let seed = cell_seed(base.seed, m, n, j, alpha);
                let cfg = ScenarioConfig {
                    tx_antennas: m,
                    rx_antennas: n,
                    jammer_antennas: j,
                    csit_quality: alpha,
                    seed,
                    noise_variances: if base.noise_variances.len() == n {
                        base.noise_variances.clone()
                    } else {
                        Vec::new()
                    },
                    ..base.clone()
                };
                for &scheme in &grid.schemes {
                    rows.push(SweepRow {
                        tx_antennas: m,
                        rx_antennas: n,
                        jammer_antennas: j,
                        alpha,
                        seed,
                        estimate: estimate_sdof_with(&cfg, scheme, ablation)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
