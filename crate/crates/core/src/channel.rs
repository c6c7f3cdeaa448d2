//! Scenario parameters, random channel draws and the imperfect-CSIT split
//! `H = Ĥ + H̃` with error power decaying as `P^-alpha`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};

/// Default SNR grid: 10^6, 10^7.5, ..., 10^12.
pub const DEFAULT_SNR_GRID_LOG10: [f64; 5] = [6.0, 7.5, 9.0, 10.5, 12.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub tx_antennas: usize,
    /// Antennas per receiver; both receivers are identical.
    pub rx_antennas: usize,
    pub jammer_antennas: usize,
    pub csit_quality: f64,
    /// Linear total-power levels `P`, strictly increasing, all `>= 1`.
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Diagonal of the receiver noise covariance, shared by both receivers.
    /// Empty means identity.
    #[serde(default)]
    pub noise_variances: Vec<f64>,
}

impl ScenarioConfig {
    pub fn new(m: usize, n: usize, j: usize, alpha: f64) -> Self {
        Self {
            tx_antennas: m,
            rx_antennas: n,
            jammer_antennas: j,
            csit_quality: alpha,
            snr_grid: DEFAULT_SNR_GRID_LOG10
                .iter()
                .map(|e| 10f64.powf(*e))
                .collect(),
            trials: 200,
            seed: 0,
            noise_variances: Vec::new(),
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_snr_grid(mut self, grid: Vec<f64>) -> Self {
        self.snr_grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, j) = (self.tx_antennas, self.rx_antennas, self.jammer_antennas);
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be positive (M = {m}, N = {n})"
            )));
        }
        if j < 2 * n {
            return Err(Error::InvalidConfig(format!(
                "jammer needs J >= 2N antennas (J = {j}, N = {n})"
            )));
        }
        if !(0.0..=1.0).contains(&self.csit_quality) {
            return Err(Error::InvalidConfig(format!(
                "CSIT quality alpha must lie in [0, 1], got {}",
                self.csit_quality
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::InvalidConfig("SNR grid is empty".into()));
        }
        if let Some(p) = self
            .snr_grid
            .iter()
            .find(|p| !(p.is_finite() && **p >= 1.0))
        {
            return Err(Error::InvalidConfig(format!(
                "SNR grid powers must be finite and >= 1, got {p}"
            )));
        }
        if self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "SNR grid must be strictly increasing".into(),
            ));
        }
        if !self.noise_variances.is_empty() {
            if self.noise_variances.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "noise_variances needs {n} entries, got {}",
                    self.noise_variances.len()
                )));
            }
            if self
                .noise_variances
                .iter()
                .any(|v| !(v.is_finite() && *v > 0.0))
            {
                return Err(Error::InvalidConfig(
                    "noise variances must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn noise_diagonal(&self) -> Vec<f64> {
        if self.noise_variances.is_empty() {
            vec![1.0; self.rx_antennas]
        } else {
            self.noise_variances.clone()
        }
    }
}

/// True channels of one Monte Carlo draw. Index 0 is receiver 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Transmitter to receiver, `N x M`.
    pub h: [CMatrix; 2],
    /// Jammer to receiver, `N x J`.
    pub g: [CMatrix; 2],
}

impl ChannelRealization {
    pub fn rx_antennas(&self) -> usize {
        self.h[0].nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.h[0].ncols()
    }

    pub fn jammer_antennas(&self) -> usize {
        self.g[0].ncols()
    }
}

/// What the transmitter knows about `H` at power level `power`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsitView {
    pub h_hat: [CMatrix; 2],
    pub h_err: [CMatrix; 2],
    pub power: f64,
    pub csit_quality: f64,
}

impl CsitView {
    /// Error-free CSIT, the `alpha = 1` limit taken literally.
    pub fn perfect(real: &ChannelRealization, power: f64) -> Self {
        let zero = CMatrix::zeros(real.rx_antennas(), real.tx_antennas());
        Self {
            h_hat: real.h.clone(),
            h_err: [zero.clone(), zero],
            power,
            csit_quality: 1.0,
        }
    }

    pub fn reconstruct(&self, receiver: usize) -> CMatrix {
        &self.h_hat[receiver] + &self.h_err[receiver]
    }
}

/// Purpose tags keeping the channel and CSIT-error streams disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Channel,
    CsitError,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent counter-based substream for `(seed, trial, attempt, purpose)`.
///
/// The key is derived from the seed and purpose; the trial and resampling
/// attempt select the ChaCha stream, so every trial is reproducible on its own.
pub fn trial_rng(seed: u64, trial: u64, attempt: u32, purpose: StreamPurpose) -> ChaCha12Rng {
    let tag = match purpose {
        StreamPurpose::Channel => 0x43_48_41_4e,
        StreamPurpose::CsitError => 0x43_53_49_54,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(splitmix64(trial) ^ ((attempt as u64) << 48));
    rng
}

/// `rows x cols` matrix of i.i.d. `CN(0, variance)` entries.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let sd = (variance / 2.0).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(sd * re, sd * im)
    })
}

/// Rayleigh draw for trial `trial_index`; `attempt` > 0 only when a degenerate
/// draw had to be replaced.
pub fn sample_realization(
    cfg: &ScenarioConfig,
    trial_index: usize,
    attempt: u32,
) -> Result<ChannelRealization> {
    if trial_index >= cfg.trials {
        return Err(Error::InvalidConfig(format!(
            "trial index {trial_index} out of range for {} trials",
            cfg.trials
        )));
    }
    let (m, n, j) = (cfg.tx_antennas, cfg.rx_antennas, cfg.jammer_antennas);
    let mut rng = trial_rng(
        cfg.seed,
        trial_index as u64,
        attempt,
        StreamPurpose::Channel,
    );
    let h1 = complex_gaussian(&mut rng, n, m, 1.0);
    let h2 = complex_gaussian(&mut rng, n, m, 1.0);
    let g1 = complex_gaussian(&mut rng, n, j, 1.0);
    let g2 = complex_gaussian(&mut rng, n, j, 1.0);
    Ok(ChannelRealization {
        h: [h1, h2],
        g: [g1, g2],
    })
}

/// Draws CSIT errors with per-entry variance `P^-alpha` and sets
/// `Ĥ = H - H̃`.
///
/// The error is a scaled standard draw, so feeding an identically seeded
/// stream at several power levels gives errors that differ only in scale.
pub fn split_csit<R: rand::Rng + ?Sized>(
    real: &ChannelRealization,
    alpha: f64,
    power: f64,
    rng: &mut R,
) -> CsitView {
    let (n, m) = (real.rx_antennas(), real.tx_antennas());
    let scale = power.powf(-alpha / 2.0);
    let e1 = complex_gaussian(rng, n, m, 1.0) * C64::new(scale, 0.0);
    let e2 = complex_gaussian(rng, n, m, 1.0) * C64::new(scale, 0.0);
    CsitView {
        h_hat: [&real.h[0] - &e1, &real.h[1] - &e2],
        h_err: [e1, e2],
        power,
        csit_quality: alpha,
    }
}
