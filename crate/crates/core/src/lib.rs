//! Secure rate-splitting for the two-user MIMO broadcast channel with
//! imperfect CSIT and a cooperative multi-antenna jammer.
//!
//! The crate builds the nulling/alignment precoders for every antenna regime,
//! evaluates finite-SNR rate and leakage proxies, and estimates secure
//! degrees of freedom as high-SNR rate slopes, next to the closed-form
//! expressions they should match.
//!
//! ```
//! use srs_core::{estimator::{estimate_sdof, Scheme}, formulas, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::new(3, 2, 4, 0.5).with_trials(100).with_seed(1);
//! let est = estimate_sdof(&cfg, Scheme::Srs).unwrap();
//! let want = formulas::srs_sum_sdof(3, 2, 0.5).unwrap();
//! assert!((est.sum_sdof_slope - want).abs() < 0.15);
//! ```

pub mod channel;
pub mod error;
pub mod estimator;
pub mod formulas;
pub mod numerics;
pub mod precoder;
pub mod rates;
pub mod zf;

pub use channel::{ChannelRealization, CsitView, ScenarioConfig};
pub use error::{Error, Result};
pub use estimator::{estimate_sdof, Scheme, SdofEstimate};
pub use precoder::{PrecoderSet, Regime, VerificationReport};
pub use rates::{Ablation, PowerPolicy, RateBreakdown};
