//! TOML experiment configuration. Every key is optional; [`DEFAULT_CONFIG`]
//! spells out the defaults and doubles as the `--help` reference.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use srs_core::channel::DEFAULT_SNR_GRID_LOG10;
use srs_core::{Ablation, Scheme};

/// The configuration file with every default written out.
pub const DEFAULT_CONFIG: &str = r#"[run]
seed = 1                 # base seed, echoed into every output row
trials = 200             # Monte Carlo trials per simulated cell (>= 100)

[scenario]
rx_antennas = 2          # N, antennas per receiver
jammer_antennas = 4      # J; raised to 2N where a cell needs more
snr_grid_log10 = [6.0, 7.5, 9.0, 10.5, 12.0]
noise_variances = []     # per-antenna receiver noise, empty = identity

[formulas]
preset = "grid"          # grid | antenna-ratio | users
tx_antennas = [1, 2, 3, 4, 5, 6, 7, 8]
rx_antennas = [2]
alphas = [0.0, 0.5, 1.0]
users = [1, 2, 3, 4, 5, 6]                # K, users preset only
user_alphas = [0.0, 0.25, 0.5, 0.75, 1.0] # users preset only
# out = "formulas.csv"   # default: stdout

[simulate]
preset = "acceptance"    # acceptance | antenna-ratio | grid
tx_antennas = [2, 3, 4]  # grid only
rx_antennas = [2]
alphas = [0.0, 0.5, 1.0]
schemes = ["srs", "zf"]
ablation = "none"        # none | jammer-off | private-full-power
tolerance = 0.15         # |slope - formula| accepted in the summary
# out = "results.csv"    # default: stdout

[verify]
draws = 1000             # seeded draws per regime
alpha = 0.5
power_log10 = 9.0
regimes = [[2, 2, 4], [3, 2, 4], [4, 2, 4], [6, 2, 4]]  # (M, N, J)
tolerance = 1e-8
corrupt = false          # perturb the first jammer precoder before checking

[plot]
# input = "results.csv"
# out = "figure.svg"
figure = "auto"          # auto | antenna-ratio | users
"#;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub scenario: ScenarioSection,
    pub formulas: FormulasSection,
    pub simulate: SimulateSection,
    pub verify: VerifySection,
    pub plot: PlotSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub rx_antennas: usize,
    pub jammer_antennas: usize,
    pub snr_grid_log10: Vec<f64>,
    pub noise_variances: Vec<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            rx_antennas: 2,
            jammer_antennas: 4,
            snr_grid_log10: DEFAULT_SNR_GRID_LOG10.to_vec(),
            noise_variances: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaPreset {
    /// Cartesian product of the configured axes.
    Grid,
    /// N = 2, M = 1..6, alpha in {0, 0.5, 1}.
    AntennaRatio,
    /// N = 2, K = 1..6, M = K N.
    Users,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormulasSection {
    pub preset: FormulaPreset,
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub alphas: Vec<f64>,
    pub users: Vec<usize>,
    pub user_alphas: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Default for FormulasSection {
    fn default() -> Self {
        Self {
            preset: FormulaPreset::Grid,
            tx_antennas: (1..=8).collect(),
            rx_antennas: vec![2],
            alphas: vec![0.0, 0.5, 1.0],
            users: (1..=6).collect(),
            user_alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SimulatePreset {
    /// (M, N) in {(2,2), (3,2), (4,2)}, alpha in {0, 0.5, 1}.
    Acceptance,
    /// N = 2, M = 1..6, alpha in {0, 0.5, 1}.
    AntennaRatio,
    /// Cartesian product of the configured axes.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AblationName {
    #[default]
    None,
    JammerOff,
    PrivateFullPower,
}

impl From<AblationName> for Ablation {
    fn from(a: AblationName) -> Self {
        match a {
            AblationName::None => Ablation::None,
            AblationName::JammerOff => Ablation::JammerOff,
            AblationName::PrivateFullPower => Ablation::PrivateFullPower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub preset: SimulatePreset,
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub alphas: Vec<f64>,
    pub schemes: Vec<String>,
    pub ablation: AblationName,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            preset: SimulatePreset::Acceptance,
            tx_antennas: vec![2, 3, 4],
            rx_antennas: vec![2],
            alphas: vec![0.0, 0.5, 1.0],
            schemes: vec!["srs".into(), "zf".into()],
            ablation: AblationName::None,
            tolerance: 0.15,
            out: None,
        }
    }
}

impl SimulateSection {
    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>> {
        self.schemes
            .iter()
            .map(|s| s.parse::<Scheme>().map_err(|e| anyhow::anyhow!("{e}")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub draws: usize,
    pub alpha: f64,
    pub power_log10: f64,
    pub regimes: Vec<[usize; 3]>,
    pub tolerance: f64,
    pub corrupt: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            draws: 1000,
            alpha: 0.5,
            power_log10: 9.0,
            regimes: vec![[2, 2, 4], [3, 2, 4], [4, 2, 4], [6, 2, 4]],
            tolerance: 1e-8,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FigureKind {
    /// Users chart when any row carries K, antenna ratio otherwise.
    #[default]
    Auto,
    AntennaRatio,
    Users,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotSection {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub figure: FigureKind,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Loads `path` if given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn snr_grid(&self) -> Result<Vec<f64>> {
        let grid: Vec<f64> = self
            .scenario
            .snr_grid_log10
            .iter()
            .map(|e| 10f64.powf(*e))
            .collect();
        if grid.iter().any(|p| !p.is_finite()) {
            bail!("snr_grid_log10 produces non-finite powers");
        }
        Ok(grid)
    }
}
