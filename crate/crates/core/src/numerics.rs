//! Dense complex linear-algebra kernels and the slope regression used by the
//! rest of the crate.
//!
//! Matrices are plain `nalgebra` dynamic matrices over `Complex<f64>`; zero
//! column matrices are legal and show up whenever a null space is trivial or a
//! regime carries no private streams.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative singular-value threshold used for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Absolute floor (relative to the largest entry scale) below which an
/// entry counts as zero for the phase convention.
const PHASE_PIVOT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Bits per unit of log2 P.
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a complex matrix from row-major real entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |r, c| C64::new(entries[r * cols + c], 0.0))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `X Xᴴ`, forced exactly Hermitian.
pub fn gram(x: &CMatrix) -> CMatrix {
    hermitian_part(&(x * x.adjoint()))
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Singular values in descending order, together with the full right
/// singular basis (columns of `V`, same order). Wide inputs are padded with
/// zero rows so that `V` is always square.
fn full_right_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    let padded;
    let work = if m < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = work.clone().svd(false, true);
    let v = svd.v_t.expect("requested V").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v_sorted = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (sv, v_sorted)
}

/// Rotates each column so its first significant entry is real and positive.
fn fix_phase(basis: &mut CMatrix) {
    for mut col in basis.column_iter_mut() {
        let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        if let Some(pivot) = col.iter().find(|z| z.norm() > PHASE_PIVOT_TOL * scale) {
            let rot = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|z| *z *= rot);
        }
    }
}

/// Orthonormal basis of the null space of `a`.
///
/// Singular values at or below `tol * sigma_max` count as zero. Columns are
/// ordered by ascending singular value and carry a fixed phase convention,
/// so the result is a deterministic function of `a`. A full column rank input
/// yields a `cols x 0` matrix.
pub fn null_space_basis(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    let (m, _) = a.shape();
    let (sv, v) = full_right_svd(a);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = tol * sigma_max;
    // Rows of a wide matrix contribute at most m nonzero singular values; the
    // padding supplies the remaining exact zeros.
    let rank = sv
        .iter()
        .take(m.min(n))
        .filter(|&&s| s > threshold && s > 0.0)
        .count();
    let nullity = n - rank;
    // ascending singular value = reverse of the trailing block
    let mut basis = CMatrix::from_fn(n, nullity, |r, c| v[(r, n - 1 - c)]);
    fix_phase(&mut basis);
    basis
}

/// Numerical rank at relative tolerance `tol`.
pub fn numerical_rank(a: &CMatrix, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter()
        .filter(|&&s| s > tol * sigma_max && s > 0.0)
        .count()
}

/// Minimum-norm least-squares solution of `A X = B`.
pub fn least_squares_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "A has {} rows but B has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.ncols() == 0 || b.ncols() == 0 || a.nrows() == 0 {
        return Ok(CMatrix::zeros(a.ncols(), b.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = RANK_TOL * sigma_max;
    let uhb = u.adjoint() * b;
    let mut scaled = uhb;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > threshold && s > 0.0 {
            1.0 / s
        } else {
            0.0
        };
        scaled.row_mut(k).iter_mut().for_each(|z| *z *= inv);
    }
    Ok(v_t.adjoint() * scaled)
}

fn check_hermitian_psd(m: &CMatrix) -> Result<()> {
    let scale = m.norm().max(1.0);
    let asym = (m - m.adjoint()).norm();
    if asym > 1e-10 * scale {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let eig = hermitian_part(m).symmetric_eigenvalues();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(Error::Indefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

fn log2_det_pd(m: &CMatrix) -> Result<f64> {
    let chol = Cholesky::new(hermitian_part(m)).ok_or(Error::Indefinite {
        min_eigenvalue: f64::NAN,
    })?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|k| 2.0 * l[(k, k)].re.log2()).sum())
}

/// `log2 det(I + S (T + I)^-1)` in bits, for Hermitian PSD `S` and `T`.
///
/// Evaluated as `log2 det(I + T + S) - log2 det(I + T)` from two Cholesky
/// factors.
pub fn logdet_capacity(s: &CMatrix, t: &CMatrix) -> Result<f64> {
    if !s.is_square() || s.shape() != t.shape() {
        return Err(Error::Shape(format!(
            "signal {:?} and interference {:?} must be equal square shapes",
            s.shape(),
            t.shape()
        )));
    }
    check_hermitian_psd(s)?;
    check_hermitian_psd(t)?;
    let n = s.nrows();
    let base = identity(n) + t;
    let total = &base + s;
    let rate = log2_det_pd(&total)? - log2_det_pd(&base)?;
    Ok(rate.max(0.0))
}

/// Ordinary least-squares line through `(log2_power, rate_bits)` points.
pub fn fit_rate_slope(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(k) = points
        .windows(2)
        .position(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::NonIncreasingAbscissae(k + 1));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(RegressionFit {
        slope,
        intercept,
        residual_rms: (ss_res / n).sqrt(),
    })
}
