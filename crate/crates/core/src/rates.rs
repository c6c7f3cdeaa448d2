//! Power loading, receive covariances and the finite-SNR rate and leakage
//! proxies whose slopes in `log2 P` are the secure degrees of freedom.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, CsitView};
use crate::error::Result;
use crate::numerics::{self, gram, logdet_capacity, CMatrix, C64};
use crate::precoder::{PrecoderSet, Regime};

/// Per-stream powers are `P^exponent` before the global normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPolicy {
    pub total_power: f64,
    pub common_exponent: f64,
    pub private_exponent: f64,
    /// `None` keeps the jammer silent.
    pub jamming_exponent: Option<f64>,
    /// Scale up to spend exactly `total_power`; otherwise the budget is only a
    /// cap and the raw powers are kept when they fit.
    pub fill_budget: bool,
}

/// Diagnostic variants of the power policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Ablation {
    #[default]
    None,
    /// Jammer transmits nothing.
    JammerOff,
    /// Private streams at full order `P` instead of `P^alpha`.
    PrivateFullPower,
}

impl PowerPolicy {
    /// Rate-splitting loading: common and jamming streams at order `P`,
    /// private streams at order `P^alpha`.
    pub fn srs(total_power: f64, alpha: f64) -> Self {
        Self {
            total_power,
            common_exponent: 1.0,
            private_exponent: alpha,
            jamming_exponent: Some(1.0),
            fill_budget: true,
        }
    }

    /// Zero-forcing baseline: private streams at order `P^alpha`, no jammer.
    pub fn zero_forcing(total_power: f64, alpha: f64) -> Self {
        Self {
            total_power,
            common_exponent: 1.0,
            private_exponent: alpha,
            jamming_exponent: None,
            fill_budget: false,
        }
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        match ablation {
            Ablation::None => {}
            Ablation::JammerOff => self.jamming_exponent = None,
            Ablation::PrivateFullPower => self.private_exponent = 1.0,
        }
        self
    }

    pub fn raw_common_power(&self) -> f64 {
        self.total_power.powf(self.common_exponent)
    }

    pub fn raw_private_power(&self) -> f64 {
        self.total_power.powf(self.private_exponent)
    }

    pub fn raw_jamming_power(&self) -> f64 {
        self.jamming_exponent
            .map_or(0.0, |e| self.total_power.powf(e))
    }
}

/// Precoders with power folded in: `x_t = common s_c + private_1 s_1 +
/// private_2 s_2`, `x_h = jamming_1 u_1 + jamming_2 u_2`, all symbols unit
/// power.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPrecoders {
    pub policy: PowerPolicy,
    /// Multiplier applied to every raw per-stream power.
    pub normalization: f64,
    pub common_power: f64,
    pub private_power: f64,
    pub jamming_power: f64,
    pub common: CMatrix,
    /// `P_c,1` and `P_c,2` scaled, kept for inspection.
    pub common_parts: [CMatrix; 2],
    pub private: [CMatrix; 2],
    pub jamming: [CMatrix; 2],
}

impl LoadedPrecoders {
    /// Average transmit power of transmitter plus jammer.
    pub fn total_transmit_power(&self) -> f64 {
        self.common.norm_squared()
            + self.private.iter().map(|p| p.norm_squared()).sum::<f64>()
            + self.jamming.iter().map(|w| w.norm_squared()).sum::<f64>()
    }
}

fn scaled(a: &CMatrix, power: f64) -> CMatrix {
    a * C64::new(power.sqrt(), 0.0)
}

/// Applies the policy and rescales so that transmitter plus jammer spend
/// exactly `policy.total_power` on average.
pub fn load_powers(ps: &PrecoderSet, policy: PowerPolicy) -> LoadedPrecoders {
    let common_sum = ps.common_sum();
    let pc = policy.raw_common_power();
    let pp = policy.raw_private_power();
    let pj = policy.raw_jamming_power();
    let spent = pc * common_sum.norm_squared()
        + pp * ps.private.iter().map(|p| p.norm_squared()).sum::<f64>()
        + pj * ps.jamming.iter().map(|w| w.norm_squared()).sum::<f64>();
    let normalization = if spent > 0.0 {
        let fit = policy.total_power / spent;
        if policy.fill_budget {
            fit
        } else {
            fit.min(1.0)
        }
    } else {
        0.0
    };
    let (pc, pp, pj) = (pc * normalization, pp * normalization, pj * normalization);
    LoadedPrecoders {
        policy,
        normalization,
        common_power: pc,
        private_power: pp,
        jamming_power: pj,
        common: scaled(&common_sum, pc),
        common_parts: [scaled(&ps.common[0], pc), scaled(&ps.common[1], pc)],
        private: [scaled(&ps.private[0], pp), scaled(&ps.private[1], pp)],
        jamming: [scaled(&ps.jamming[0], pj), scaled(&ps.jamming[1], pj)],
    }
}

/// Noise-whitened received covariances at one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverCovariances {
    /// Common stream through the true channel.
    pub common: CMatrix,
    /// This receiver's own jamming, aligned with its common signal.
    pub aligned_jamming: CMatrix,
    pub own_private: CMatrix,
    /// Other user's private stream; only the CSIT error lets it through.
    pub cross_private: CMatrix,
    /// The other receiver's jamming; nulled by design.
    pub residual_jamming: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveBundle {
    pub receivers: [ReceiverCovariances; 2],
    pub private_streams: usize,
}

fn whiten(c: CMatrix, inv_sd: &[f64]) -> CMatrix {
    let n = c.nrows();
    let w = CMatrix::from_fn(n, n, |r, k| {
        c[(r, k)] * C64::new(inv_sd[r] * inv_sd[k], 0.0)
    });
    numerics::hermitian_part(&w)
}

/// Builds the per-receiver covariances from the TRUE channels. `noise` is the
/// diagonal of the receiver noise covariance (empty means identity); all
/// covariances are returned whitened so the noise becomes identity.
pub fn receive_model(
    loaded: &LoadedPrecoders,
    real: &ChannelRealization,
    noise: &[f64],
) -> ReceiveBundle {
    let n = real.rx_antennas();
    let inv_sd: Vec<f64> = if noise.is_empty() {
        vec![1.0; n]
    } else {
        noise.iter().map(|v| 1.0 / v.sqrt()).collect()
    };
    let receiver = |i: usize| {
        let other = 1 - i;
        let h = &real.h[i];
        let g = &real.g[i];
        ReceiverCovariances {
            common: whiten(gram(&(h * &loaded.common)), &inv_sd),
            aligned_jamming: whiten(gram(&(g * &loaded.jamming[i])), &inv_sd),
            own_private: whiten(gram(&(h * &loaded.private[i])), &inv_sd),
            cross_private: whiten(gram(&(h * &loaded.private[other])), &inv_sd),
            residual_jamming: whiten(gram(&(g * &loaded.jamming[other])), &inv_sd),
        }
    };
    ReceiveBundle {
        receivers: [receiver(0), receiver(1)],
        private_streams: loaded.private[0].ncols(),
    }
}

/// Common-message rate at receiver `i`. The aligned jamming is decoded along
/// with the common message and therefore not counted as interference.
pub fn common_rate(bundle: &ReceiveBundle, i: usize) -> Result<f64> {
    let rx = &bundle.receivers[i];
    let interference = &rx.own_private + &rx.cross_private + &rx.residual_jamming;
    logdet_capacity(&rx.common, &interference)
}

/// Rate at which eavesdropping receiver `i` learns the other user's common
/// part. The whole common signal is counted as leaked signal; the receiver's
/// own aligned jamming masks it.
pub fn common_leakage_rate(bundle: &ReceiveBundle, i: usize) -> Result<f64> {
    let rx = &bundle.receivers[i];
    let interference =
        &rx.aligned_jamming + &rx.own_private + &rx.cross_private + &rx.residual_jamming;
    logdet_capacity(&rx.common, &interference)
}

/// Own private rate after the common stream has been cancelled.
pub fn private_rate(bundle: &ReceiveBundle, i: usize) -> Result<f64> {
    if bundle.private_streams == 0 {
        return Ok(0.0);
    }
    let rx = &bundle.receivers[i];
    logdet_capacity(&rx.own_private, &rx.cross_private)
}

/// Rate at which receiver `i` can decode the other user's private stream,
/// with only noise as interference.
pub fn private_leakage_rate(bundle: &ReceiveBundle, i: usize) -> Result<f64> {
    if bundle.private_streams == 0 {
        return Ok(0.0);
    }
    let rx = &bundle.receivers[i];
    let n = rx.cross_private.nrows();
    logdet_capacity(&rx.cross_private, &CMatrix::zeros(n, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub common_rate_r1: f64,
    pub common_rate_r2: f64,
    pub private_rate_1: f64,
    pub private_rate_2: f64,
    pub common_leak_at_1: f64,
    pub common_leak_at_2: f64,
    /// Leakage of user 1's private message at receiver 2.
    pub private_leak_at_2: f64,
    /// Leakage of user 2's private message at receiver 1.
    pub private_leak_at_1: f64,
    pub sum_secure_rate: f64,
}

impl RateBreakdown {
    pub fn common_rate(&self) -> f64 {
        self.common_rate_r1.min(self.common_rate_r2)
    }

    pub fn common_leakage(&self) -> f64 {
        self.common_leak_at_1 + self.common_leak_at_2
    }

    pub fn private_leakage(&self) -> f64 {
        self.private_leak_at_1 + self.private_leak_at_2
    }

    pub fn total_leakage(&self) -> f64 {
        self.common_leakage() + self.private_leakage()
    }
}

/// `[min common - both common leaks]^+ + sum_i [private_i - leak of i]^+`.
pub fn sum_secure_rate(rb: &RateBreakdown) -> f64 {
    let common = (rb.common_rate() - rb.common_leak_at_1 - rb.common_leak_at_2).max(0.0);
    let p1 = (rb.private_rate_1 - rb.private_leak_at_2).max(0.0);
    let p2 = (rb.private_rate_2 - rb.private_leak_at_1).max(0.0);
    common + p1 + p2
}

pub fn rate_breakdown(bundle: &ReceiveBundle) -> Result<RateBreakdown> {
    let mut rb = RateBreakdown {
        common_rate_r1: common_rate(bundle, 0)?,
        common_rate_r2: common_rate(bundle, 1)?,
        private_rate_1: private_rate(bundle, 0)?,
        private_rate_2: private_rate(bundle, 1)?,
        common_leak_at_1: common_leakage_rate(bundle, 0)?,
        common_leak_at_2: common_leakage_rate(bundle, 1)?,
        private_leak_at_1: private_leakage_rate(bundle, 0)?,
        private_leak_at_2: private_leakage_rate(bundle, 1)?,
        sum_secure_rate: 0.0,
    };
    rb.sum_secure_rate = sum_secure_rate(&rb);
    Ok(rb)
}

/// Power-loads `ps`, forms the receive covariances and evaluates every rate.
pub fn evaluate(
    ps: &PrecoderSet,
    policy: PowerPolicy,
    real: &ChannelRealization,
    noise: &[f64],
) -> Result<RateBreakdown> {
    let loaded = load_powers(ps, policy);
    let bundle = receive_model(&loaded, real, noise);
    rate_breakdown(&bundle)
}

/// Default policy for a precoder set at power `P` and CSIT quality `alpha`.
pub fn default_policy(ps: &PrecoderSet, total_power: f64, alpha: f64) -> PowerPolicy {
    match ps.regime {
        Regime::ZeroForcing => PowerPolicy::zero_forcing(total_power, alpha),
        _ => PowerPolicy::srs(total_power, alpha),
    }
}

/// Rates for one realization as seen through a CSIT view; convenience used by
/// tests and diagnostics.
pub fn evaluate_view(
    ps: &PrecoderSet,
    csit: &CsitView,
    real: &ChannelRealization,
    ablation: Ablation,
) -> Result<RateBreakdown> {
    let policy = default_policy(ps, csit.power, csit.csit_quality).with_ablation(ablation);
    evaluate(ps, policy, real, &[])
}
