//! Subcommand logic, kept free of argument parsing and terminal output so the
//! binary and the tests drive the same code.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use srs_core::channel::{sample_realization, split_csit, trial_rng, StreamPurpose};
use srs_core::estimator::{sweep_with, SweepGrid};
use srs_core::numerics::C64;
use srs_core::precoder::{design_srs, verify as verify_precoders};
use srs_core::{formulas, Ablation, Regime, ScenarioConfig, Scheme};

use crate::config::{Config, FormulaPreset, SimulatePreset};
use crate::results::ExperimentResultRow;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.run.trials = trials;
            cfg.verify.draws = trials;
        }
        if let Some(out) = &self.out {
            cfg.formulas.out = Some(out.clone());
            cfg.simulate.out = Some(out.clone());
            cfg.plot.out = Some(out.clone());
        }
    }
}

const PRESET_RX: usize = 2;
const RATIO_TX: [usize; 6] = [1, 2, 3, 4, 5, 6];
const RATIO_ALPHAS: [f64; 3] = [0.0, 0.5, 1.0];

fn jammer_for(cfg: &Config, n: usize) -> usize {
    cfg.scenario.jammer_antennas.max(2 * n)
}

fn formula_for(scheme: Scheme, m: usize, n: usize, alpha: f64) -> Result<f64> {
    Ok(match scheme {
        Scheme::Srs => formulas::srs_sum_sdof(m, n, alpha)?,
        Scheme::Zf => formulas::zf_bound(m, n, alpha)?,
    })
}

fn nonempty<T>(axis: &[T], name: &str) -> Result<()> {
    if axis.is_empty() {
        bail!("{name} must not be empty");
    }
    Ok(())
}

/// Closed-form rows for the configured preset.
pub fn formula_rows(cfg: &Config) -> Result<Vec<ExperimentResultRow>> {
    let f = &cfg.formulas;
    let seed = cfg.run.seed;
    let closed_form = |scheme: Scheme, m, n, k, alpha, value| ExperimentResultRow {
        scheme: scheme.to_string(),
        tx_antennas: m,
        rx_antennas: n,
        jammer_antennas: jammer_for(cfg, n),
        users: k,
        alpha,
        formula: value,
        slope: None,
        leak_slope: None,
        stderr: None,
        trials: 0,
        seed,
    };
    let mut rows = Vec::new();
    match f.preset {
        FormulaPreset::Grid | FormulaPreset::AntennaRatio => {
            let (tx, rx, alphas) = if f.preset == FormulaPreset::AntennaRatio {
                (RATIO_TX.to_vec(), vec![PRESET_RX], RATIO_ALPHAS.to_vec())
            } else {
                (
                    f.tx_antennas.clone(),
                    f.rx_antennas.clone(),
                    f.alphas.clone(),
                )
            };
            nonempty(&tx, "formulas.tx_antennas")?;
            nonempty(&rx, "formulas.rx_antennas")?;
            nonempty(&alphas, "formulas.alphas")?;
            for scheme in [Scheme::Srs, Scheme::Zf] {
                for &n in &rx {
                    for &m in &tx {
                        for &alpha in &alphas {
                            let value = formula_for(scheme, m, n, alpha)?;
                            rows.push(closed_form(scheme, m, n, None, alpha, value));
                        }
                    }
                }
            }
        }
        FormulaPreset::Users => {
            nonempty(&f.users, "formulas.users")?;
            nonempty(&f.user_alphas, "formulas.user_alphas")?;
            for &alpha in &f.user_alphas {
                for &k in &f.users {
                    let m = k * PRESET_RX;
                    let value = formulas::k_user_sum_sdof(k, PRESET_RX, alpha, m)?;
                    rows.push(closed_form(
                        Scheme::Srs,
                        m,
                        PRESET_RX,
                        Some(k),
                        alpha,
                        value,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

/// One simulated cell checked against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCheck {
    pub row: ExperimentResultRow,
    pub deviation: f64,
    pub passed: bool,
}

impl fmt::Display for CellCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.row;
        write!(
            f,
            "[{}] {:<22} M={} N={} J={} alpha={:<4} slope {:>6.3} formula {:>5.2} leak {:>6.3}",
            if self.passed { "PASS" } else { "FAIL" },
            r.scheme,
            r.tx_antennas,
            r.rx_antennas,
            r.jammer_antennas,
            r.alpha,
            r.slope.unwrap_or(f64::NAN),
            r.formula,
            r.leak_slope.unwrap_or(f64::NAN),
        )
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub checks: Vec<CellCheck>,
    pub tolerance: f64,
}

impl SimulationOutcome {
    pub fn rows(&self) -> Vec<ExperimentResultRow> {
        self.checks.iter().map(|c| c.row.clone()).collect()
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }
}

fn scheme_label(scheme: Scheme, ablation: Ablation) -> String {
    match ablation {
        Ablation::None => scheme.to_string(),
        Ablation::JammerOff => format!("{scheme}/jammer-off"),
        Ablation::PrivateFullPower => format!("{scheme}/private-full-power"),
    }
}

/// Monte Carlo slopes for every configured cell.
pub fn simulate(cfg: &Config) -> Result<SimulationOutcome> {
    let s = &cfg.simulate;
    let (tx, rx, alphas) = match s.preset {
        SimulatePreset::Acceptance => (vec![2, 3, 4], vec![PRESET_RX], RATIO_ALPHAS.to_vec()),
        SimulatePreset::AntennaRatio => (RATIO_TX.to_vec(), vec![PRESET_RX], RATIO_ALPHAS.to_vec()),
        SimulatePreset::Grid => (
            s.tx_antennas.clone(),
            s.rx_antennas.clone(),
            s.alphas.clone(),
        ),
    };
    let grid = SweepGrid {
        tx_antennas: tx,
        rx_antennas: rx,
        alphas,
        schemes: s.parsed_schemes()?,
    };
    nonempty(&grid.schemes, "simulate.schemes")?;
    if !(s.tolerance.is_finite() && s.tolerance >= 0.0) {
        bail!("simulate.tolerance must be a non-negative number");
    }
    let n0 = grid.rx_antennas.first().copied().unwrap_or(PRESET_RX);
    let base = ScenarioConfig {
        tx_antennas: grid.tx_antennas.first().copied().unwrap_or(1),
        rx_antennas: n0,
        jammer_antennas: jammer_for(cfg, n0),
        csit_quality: 0.0,
        snr_grid: cfg.snr_grid()?,
        trials: cfg.run.trials,
        seed: cfg.run.seed,
        noise_variances: cfg.scenario.noise_variances.clone(),
    };
    base.validate().context("invalid scenario")?;
    for &n in &grid.rx_antennas {
        for &m in &grid.tx_antennas {
            for &alpha in &grid.alphas {
                ScenarioConfig {
                    tx_antennas: m,
                    rx_antennas: n,
                    jammer_antennas: jammer_for(cfg, n),
                    csit_quality: alpha,
                    noise_variances: Vec::new(),
                    ..base.clone()
                }
                .validate()
                .with_context(|| format!("invalid cell M={m} N={n} alpha={alpha}"))?;
            }
        }
    }
    let ablation: Ablation = s.ablation.into();
    let rows = sweep_with(&base, &grid, ablation)?;
    let mut checks = Vec::with_capacity(rows.len());
    for r in rows {
        let e = &r.estimate;
        let formula = formula_for(e.scheme, r.tx_antennas, r.rx_antennas, r.alpha)?;
        let deviation = (e.sum_sdof_slope - formula).abs();
        checks.push(CellCheck {
            row: ExperimentResultRow {
                scheme: scheme_label(e.scheme, ablation),
                tx_antennas: r.tx_antennas,
                rx_antennas: r.rx_antennas,
                jammer_antennas: r.jammer_antennas,
                users: None,
                alpha: r.alpha,
                formula,
                slope: Some(e.sum_sdof_slope),
                leak_slope: Some(e.leakage_slope),
                stderr: Some(e.stderr),
                trials: e.trials,
                seed: cfg.run.seed,
            },
            deviation,
            passed: deviation <= s.tolerance,
        });
    }
    Ok(SimulationOutcome {
        checks,
        tolerance: s.tolerance,
    })
}

/// Residual summary for one `(M, N, J)` regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub antennas: [usize; 3],
    pub regime: Regime,
    pub draws: usize,
    pub max_residual: f64,
    pub worst_condition: String,
    pub worst_draw: usize,
    /// Every condition that exceeded the tolerance on some draw.
    pub failing_conditions: BTreeSet<String>,
    pub infeasible: usize,
    pub degenerate: usize,
    pub passed: bool,
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [m, n, j] = self.antennas;
        write!(
            f,
            "[{}] (M,N,J)=({m},{n},{j}) {:?}: {} draws, max residual {:.2e} at {} (draw {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.regime,
            self.draws,
            self.max_residual,
            self.worst_condition,
            self.worst_draw,
        )?;
        if !self.failing_conditions.is_empty() {
            let names: Vec<&str> = self.failing_conditions.iter().map(String::as_str).collect();
            write!(f, "; violated: {}", names.join(", "))?;
        }
        if self.infeasible > 0 {
            write!(f, ", {} infeasible draws", self.infeasible)?;
        }
        if self.degenerate > 0 {
            write!(f, ", {} degenerate", self.degenerate)?;
        }
        Ok(())
    }
}

/// Perturbation applied to the first jammer precoder in fault-injection runs.
const CORRUPTION: f64 = 1e-3;

/// Seeded precoder designs per regime, each checked against every nulling and
/// alignment condition.
pub fn verify(cfg: &Config) -> Result<Vec<RegimeReport>> {
    let v = &cfg.verify;
    nonempty(&v.regimes, "verify.regimes")?;
    if !v.power_log10.is_finite() || v.power_log10 < 0.0 {
        bail!("verify.power_log10 must be a non-negative number");
    }
    let power = 10f64.powf(v.power_log10);
    let scenarios = v
        .regimes
        .iter()
        .map(|&[m, n, j]| {
            let sc = ScenarioConfig::new(m, n, j, v.alpha)
                .with_trials(v.draws)
                .with_seed(cfg.run.seed);
            sc.validate()
                .with_context(|| format!("invalid regime (M,N,J)=({m},{n},{j})"))?;
            Ok(sc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::new();
    for sc in scenarios {
        let mut report = RegimeReport {
            antennas: [sc.tx_antennas, sc.rx_antennas, sc.jammer_antennas],
            regime: Regime::for_antennas(sc.tx_antennas, sc.rx_antennas),
            draws: sc.trials,
            max_residual: 0.0,
            worst_condition: "-".into(),
            worst_draw: 0,
            failing_conditions: BTreeSet::new(),
            infeasible: 0,
            degenerate: 0,
            passed: false,
        };
        for t in 0..sc.trials {
            let real = sample_realization(&sc, t, 0)?;
            let mut rng = trial_rng(sc.seed, t as u64, 0, StreamPurpose::CsitError);
            let csit = split_csit(&real, sc.csit_quality, power, &mut rng);
            let Ok(mut ps) = design_srs(&csit, &real) else {
                report.infeasible += 1;
                continue;
            };
            if v.corrupt {
                ps.jamming[0]
                    .iter_mut()
                    .for_each(|z| *z += C64::new(CORRUPTION, 0.0));
            }
            let r = verify_precoders(&ps, &csit, &real);
            report.degenerate += usize::from(r.degenerate);
            for res in r.nulling_residuals.iter().chain(&r.alignment_residuals) {
                if res.value > v.tolerance {
                    report.failing_conditions.insert(res.condition.clone());
                }
            }
            if let Some(worst) = r.worst() {
                if worst.value > report.max_residual || report.worst_condition == "-" {
                    report.max_residual = worst.value;
                    report.worst_condition = worst.condition.clone();
                    report.worst_draw = t;
                }
            }
        }
        report.passed = report.infeasible == 0 && report.max_residual <= v.tolerance;
        reports.push(report);
    }
    Ok(reports)
}
