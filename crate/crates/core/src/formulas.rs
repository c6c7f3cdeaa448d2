//! Closed-form sum-SDoF expressions: the rate-splitting lower bound, the
//! zero-forcing baseline, the K-user extension and the DoF-region upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One half-plane `coeff_d1 * d1 + coeff_d2 * d2 <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofRegionConstraint {
    pub coeff_d1: f64,
    pub coeff_d2: f64,
    pub bound: f64,
}

fn check_domain(m: usize, n: usize, alpha: f64) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!(
            "antenna counts must be positive (M = {m}, N = {n})"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Sum-SDoF achieved by secure rate-splitting.
///
/// Boundary ratios belong to the smaller case: `M = N` uses the first branch,
/// `M = 2N` the second.
pub fn srs_sum_sdof(m: usize, n: usize, alpha: f64) -> Result<f64> {
    check_domain(m, n, alpha)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok(if m <= n {
        mf
    } else if m <= 2 * n {
        nf + alpha * (mf - nf)
    } else {
        // N (1 + alpha), written so that it agrees bit-for-bit with the
        // middle branch at M = 2N
        nf + alpha * nf
    })
}

/// `2 alpha min{[M - N]^+, N}`.
pub fn zf_bound(m: usize, n: usize, alpha: f64) -> Result<f64> {
    check_domain(m, n, alpha)?;
    let streams = m.saturating_sub(n).min(n);
    Ok(2.0 * alpha * streams as f64)
}

/// `(1 - alpha) N + K alpha N`, valid for `M >= K N`.
pub fn k_user_sum_sdof(k: usize, n: usize, alpha: f64, m: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    check_domain(m, n, alpha)?;
    if m < k * n {
        return Err(Error::Domain(format!(
            "needs M >= K N (M = {m}, K = {k}, N = {n})"
        )));
    }
    let nf = n as f64;
    Ok((1.0 - alpha) * nf + k as f64 * alpha * nf)
}

/// The three half-planes bounding the DoF region with imperfect CSIT.
pub fn upper_bound_region(m: usize, n: usize, alpha: f64) -> Result<Vec<DofRegionConstraint>> {
    check_domain(m, n, alpha)?;
    let single = m.min(n) as f64;
    let pair = m.min(2 * n) as f64;
    Ok(vec![
        DofRegionConstraint {
            coeff_d1: 1.0,
            coeff_d2: 0.0,
            bound: single,
        },
        DofRegionConstraint {
            coeff_d1: 0.0,
            coeff_d2: 1.0,
            bound: single,
        },
        DofRegionConstraint {
            coeff_d1: 1.0,
            coeff_d2: 1.0,
            bound: single + alpha * (pair - single),
        },
    ])
}

/// Sum-DoF upper bound, written out by antenna ratio.
pub fn upper_bound_sum(m: usize, n: usize, alpha: f64) -> Result<f64> {
    check_domain(m, n, alpha)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok(if m <= n {
        mf
    } else if m <= 2 * n {
        nf + alpha * (mf - nf)
    } else {
        // N (1 + alpha), written so that it agrees bit-for-bit with the
        // middle branch at M = 2N
        nf + alpha * nf
    })
}

/// Upper bound minus the achieved rate-splitting sum-SDoF.
pub fn optimality_gap(m: usize, n: usize, alpha: f64) -> Result<f64> {
    Ok(upper_bound_sum(m, n, alpha)? - srs_sum_sdof(m, n, alpha)?)
}
