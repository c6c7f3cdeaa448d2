//! Zero-forcing baseline: private streams only, each zero-forced against the
//! estimated channel of the other receiver. The jammer stays silent.

use crate::channel::CsitView;
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, RANK_TOL};
use crate::precoder::{PrecoderSet, Regime};

#[derive(Debug, Clone, PartialEq)]
pub struct ZfPrecoderSet {
    /// `P_1`, `P_2`: `M x d_z`, orthonormal columns.
    pub private: [CMatrix; 2],
    pub streams: usize,
}

/// `min{[M - N]^+, N}`.
pub fn zf_streams(m: usize, n: usize) -> usize {
    m.saturating_sub(n).min(n)
}

pub fn design_zf(csit: &CsitView) -> Result<ZfPrecoderSet> {
    let (n, m) = csit.h_hat[0].shape();
    let d = zf_streams(m, n);
    if d == 0 {
        return Ok(ZfPrecoderSet {
            private: [CMatrix::zeros(m, 0), CMatrix::zeros(m, 0)],
            streams: 0,
        });
    }
    let mut private = Vec::with_capacity(2);
    for i in 0..2 {
        let null_other = numerics::null_space_basis(&csit.h_hat[1 - i], RANK_TOL);
        if null_other.ncols() < d {
            return Err(Error::Infeasible(format!(
                "null space of estimated H{} has dimension {} < {d}",
                2 - i,
                null_other.ncols()
            )));
        }
        private.push(null_other.columns(0, d).clone_owned());
    }
    let [p1, p2]: [CMatrix; 2] = private.try_into().expect("two receivers");
    Ok(ZfPrecoderSet {
        private: [p1, p2],
        streams: d,
    })
}

impl ZfPrecoderSet {
    /// Views the baseline as a precoder set with no common or jamming streams.
    pub fn to_precoder_set(&self, jammer_antennas: usize) -> PrecoderSet {
        let m = self.private[0].nrows();
        PrecoderSet {
            regime: Regime::ZeroForcing,
            common: [CMatrix::zeros(m, 0), CMatrix::zeros(m, 0)],
            private: self.private.clone(),
            jamming: [
                CMatrix::zeros(jammer_antennas, 0),
                CMatrix::zeros(jammer_antennas, 0),
            ],
            common_streams: 0,
            private_streams: self.streams,
        }
    }
}
