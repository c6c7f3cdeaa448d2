//! Secure rate-splitting precoders.
//!
//! The jammer precoders `W_c,i` are nulled at the unintended receiver through
//! the true jammer channel, and the common precoders `P_c,i` are chosen so that
//! `Ĥ_i P_c,i = G_i W_c,i` at the intended receiver. Private precoders are
//! zero-forced against the estimated channel of the other receiver.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, CsitView};
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, C64, RANK_TOL};

/// Smallest admissible singular value (relative) of the matrices a design
/// has to invert or span with; below this the draw is treated as degenerate.
const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// `M <= N`: common message only.
    LowTx,
    /// `N < M <= 2N`.
    MidTx,
    /// `M > 2N`: run on the first `2N` transmit antennas.
    HighTx,
    /// Private-only zero-forcing baseline, no jammer.
    ZeroForcing,
}

impl Regime {
    pub fn for_antennas(m: usize, n: usize) -> Self {
        if m <= n {
            Regime::LowTx
        } else if m <= 2 * n {
            Regime::MidTx
        } else {
            Regime::HighTx
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub regime: Regime,
    /// `P_c,1`, `P_c,2`: `M x d_c`, unit-norm columns.
    pub common: [CMatrix; 2],
    /// `P_1`, `P_2`: `M x d_p`, orthonormal columns.
    pub private: [CMatrix; 2],
    /// `W_c,1`, `W_c,2`: `J x d_c`, scaled together with the matching common
    /// column so that the alignment equality holds exactly.
    pub jamming: [CMatrix; 2],
    pub common_streams: usize,
    pub private_streams: usize,
}

impl PrecoderSet {
    pub fn tx_antennas(&self) -> usize {
        self.common[0].nrows().max(self.private[0].nrows())
    }

    /// Sum of the two common precoders; both carry the same stream `s_c`.
    pub fn common_sum(&self) -> CMatrix {
        &self.common[0] + &self.common[1]
    }
}

fn check_regime(
    csit: &CsitView,
    real: &ChannelRealization,
    allowed: fn(usize, usize) -> bool,
) -> Result<(usize, usize, usize)> {
    let (n, m) = csit.h_hat[0].shape();
    let j = real.jammer_antennas();
    if csit.h_hat[1].shape() != (n, m) || real.h[0].shape() != (n, m) {
        return Err(Error::Shape("estimated and true channels disagree".into()));
    }
    if real.g[0].nrows() != n || real.g[1].shape() != real.g[0].shape() {
        return Err(Error::Shape("jammer channels must be N x J".into()));
    }
    if j < 2 * n {
        return Err(Error::InvalidConfig(format!(
            "jammer needs J >= 2N antennas (J = {j}, N = {n})"
        )));
    }
    if !allowed(m, n) {
        return Err(Error::InvalidConfig(format!(
            "antenna configuration M = {m}, N = {n} does not belong to this regime"
        )));
    }
    Ok((m, n, j))
}

/// Smallest singular value divided by the largest.
fn relative_sigma_min(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    sv.iter().copied().fold(f64::INFINITY, f64::min) / max
}

/// Scales each column pair so the common column has unit norm.
fn normalize_pairs(common: &mut CMatrix, jamming: &mut CMatrix) -> Result<()> {
    for k in 0..common.ncols() {
        let norm = common.column(k).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Infeasible(format!(
                "common precoder column {k} vanished"
            )));
        }
        let inv = C64::new(1.0 / norm, 0.0);
        common.column_mut(k).iter_mut().for_each(|z| *z *= inv);
        jamming.column_mut(k).iter_mut().for_each(|z| *z *= inv);
    }
    Ok(())
}

/// Joint nulling/alignment solve for receiver `i` when `Ĥ_i` is tall.
///
/// Unknowns `(w, p)` satisfy `G_j w = 0` and `G_i w - Ĥ_i p = 0`; from the
/// null space of that stacked system we keep the `M` directions whose
/// `p`-parts are best conditioned.
fn joint_common_pair(
    h_hat: &CMatrix,
    g_own: &CMatrix,
    g_other: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    let (n, m) = h_hat.shape();
    let j = g_own.ncols();
    let mut stacked = CMatrix::zeros(2 * n, j + m);
    stacked.view_mut((0, 0), (n, j)).copy_from(g_other);
    stacked.view_mut((n, 0), (n, j)).copy_from(g_own);
    stacked.view_mut((n, j), (n, m)).copy_from(&(-h_hat));

    let z = numerics::null_space_basis(&stacked, RANK_TOL);
    if z.ncols() < m {
        return Err(Error::Infeasible(format!(
            "joint nulling/alignment space has dimension {} < M = {m}",
            z.ncols()
        )));
    }
    let z_p = z.rows(j, m).clone_owned();
    let svd = z_p.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma_m = svd.singular_values[order[m - 1]];
    if sigma_m < FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "common precoder would be rank deficient (sigma_M = {sigma_m:.2e})"
        )));
    }
    let k = z.ncols();
    let select = CMatrix::from_fn(k, m, |r, c| v_t[(order[c], r)].conj());
    let pair = z * select;
    let mut w = pair.rows(0, j).clone_owned();
    let mut p = pair.rows(j, m).clone_owned();
    normalize_pairs(&mut p, &mut w)?;
    Ok((w, p))
}

/// Design for `M <= N`: `d_c = M`, no private streams.
pub fn design_low_tx(csit: &CsitView, real: &ChannelRealization) -> Result<PrecoderSet> {
    let (m, _n, _j) = check_regime(csit, real, |m, n| m <= n)?;
    let (w1, p1) = joint_common_pair(&csit.h_hat[0], &real.g[0], &real.g[1])?;
    let (w2, p2) = joint_common_pair(&csit.h_hat[1], &real.g[1], &real.g[0])?;
    Ok(PrecoderSet {
        regime: Regime::LowTx,
        common: [p1, p2],
        private: [CMatrix::zeros(m, 0), CMatrix::zeros(m, 0)],
        jamming: [w1, w2],
        common_streams: m,
        private_streams: 0,
    })
}

/// Design for `N < M <= 2N`: `d_c = N`, `d_p = M - N`.
pub fn design_mid_tx(csit: &CsitView, real: &ChannelRealization) -> Result<PrecoderSet> {
    let (m, n, _j) = check_regime(csit, real, |m, n| n < m && m <= 2 * n)?;
    mid_tx_unchecked(&csit.h_hat, &real.g, m, n, Regime::MidTx)
}

fn mid_tx_unchecked(
    h_hat: &[CMatrix; 2],
    g: &[CMatrix; 2],
    m: usize,
    n: usize,
    regime: Regime,
) -> Result<PrecoderSet> {
    for (i, h) in h_hat.iter().enumerate() {
        let s = relative_sigma_min(h);
        if s < FEASIBILITY_TOL {
            return Err(Error::Infeasible(format!(
                "estimated channel of receiver {} is rank deficient ({s:.2e})",
                i + 1
            )));
        }
    }
    let mut common = Vec::with_capacity(2);
    let mut jamming = Vec::with_capacity(2);
    for i in 0..2 {
        let other = 1 - i;
        // W_c,i lives in null(G_other); keep N directions.
        let null_other = numerics::null_space_basis(&g[other], RANK_TOL);
        if null_other.ncols() < n {
            return Err(Error::Infeasible(format!(
                "null space of G_{} has dimension {} < N = {n}",
                other + 1,
                null_other.ncols()
            )));
        }
        let mut w = null_other.columns(0, n).clone_owned();
        let target = &g[i] * &w;
        let s = relative_sigma_min(&target);
        if s < FEASIBILITY_TOL {
            return Err(Error::Infeasible(format!(
                "aligned jamming at receiver {} is rank deficient ({s:.2e})",
                i + 1
            )));
        }
        let mut p = numerics::least_squares_solve(&h_hat[i], &target)?;
        normalize_pairs(&mut p, &mut w)?;
        common.push(p);
        jamming.push(w);
    }
    // P_1 spans null(Ĥ_2), P_2 spans null(Ĥ_1)
    let private_1 = numerics::null_space_basis(&h_hat[1], RANK_TOL);
    let private_2 = numerics::null_space_basis(&h_hat[0], RANK_TOL);
    let d_p = m - n;
    if private_1.ncols() != d_p || private_2.ncols() != d_p {
        return Err(Error::Infeasible(format!(
            "private null spaces have dimensions ({}, {}), expected {d_p}",
            private_1.ncols(),
            private_2.ncols()
        )));
    }
    let [c1, c2]: [CMatrix; 2] = common.try_into().expect("two receivers");
    let [w1, w2]: [CMatrix; 2] = jamming.try_into().expect("two receivers");
    Ok(PrecoderSet {
        regime,
        common: [c1, c2],
        private: [private_1, private_2],
        jamming: [w1, w2],
        common_streams: n,
        private_streams: d_p,
    })
}

fn embed_rows(a: &CMatrix, rows: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out
}

/// Design for `M > 2N`: antennas beyond the first `2N` stay silent.
pub fn design_high_tx(csit: &CsitView, real: &ChannelRealization) -> Result<PrecoderSet> {
    let (m, n, _j) = check_regime(csit, real, |m, n| m > 2 * n)?;
    let active = 2 * n;
    let truncated = [
        csit.h_hat[0].columns(0, active).clone_owned(),
        csit.h_hat[1].columns(0, active).clone_owned(),
    ];
    let inner = mid_tx_unchecked(&truncated, &real.g, active, n, Regime::HighTx)?;
    Ok(PrecoderSet {
        regime: Regime::HighTx,
        common: [
            embed_rows(&inner.common[0], m),
            embed_rows(&inner.common[1], m),
        ],
        private: [
            embed_rows(&inner.private[0], m),
            embed_rows(&inner.private[1], m),
        ],
        jamming: inner.jamming,
        common_streams: inner.common_streams,
        private_streams: inner.private_streams,
    })
}

/// Picks the designer matching the antenna regime.
pub fn design_srs(csit: &CsitView, real: &ChannelRealization) -> Result<PrecoderSet> {
    let (n, m) = csit.h_hat[0].shape();
    match Regime::for_antennas(m, n) {
        Regime::LowTx => design_low_tx(csit, real),
        Regime::MidTx => design_mid_tx(csit, real),
        Regime::HighTx => design_high_tx(csit, real),
        Regime::ZeroForcing => unreachable!(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub condition: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub nulling_residuals: Vec<Residual>,
    pub alignment_residuals: Vec<Residual>,
    pub max_residual: f64,
    /// Set when some ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

impl VerificationReport {
    pub fn worst(&self) -> Option<&Residual> {
        self.nulling_residuals
            .iter()
            .chain(&self.alignment_residuals)
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

fn guarded_ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        if num == 0.0 {
            return 0.0;
        }
        return f64::INFINITY;
    }
    num / den
}

/// Relative residuals of every nulling and alignment condition the precoders
/// are meant to satisfy. Jammer nulling is measured through the true `G_i`,
/// private nulling through the estimate `Ĥ_i`.
pub fn verify(ps: &PrecoderSet, csit: &CsitView, real: &ChannelRealization) -> VerificationReport {
    let mut degenerate = false;
    let mut nulling = Vec::new();
    let mut alignment = Vec::new();
    for i in 0..2 {
        let other = 1 - i;
        if ps.jamming[other].ncols() > 0 {
            let gw = &real.g[i] * &ps.jamming[other];
            nulling.push(Residual {
                condition: format!("G{}*Wc{} = 0", i + 1, other + 1),
                value: guarded_ratio(
                    gw.norm(),
                    real.g[i].norm() * ps.jamming[other].norm(),
                    &mut degenerate,
                ),
            });
        }
        if ps.private[other].ncols() > 0 {
            let hp = &csit.h_hat[i] * &ps.private[other];
            nulling.push(Residual {
                condition: format!("H{}_hat*P{} = 0", i + 1, other + 1),
                value: guarded_ratio(
                    hp.norm(),
                    csit.h_hat[i].norm() * ps.private[other].norm(),
                    &mut degenerate,
                ),
            });
        }
        if ps.common[i].ncols() > 0 {
            let gw = &real.g[i] * &ps.jamming[i];
            let hp = &csit.h_hat[i] * &ps.common[i];
            alignment.push(Residual {
                condition: format!("H{0}_hat*Pc{0} = G{0}*Wc{0}", i + 1),
                value: guarded_ratio((&hp - &gw).norm(), gw.norm(), &mut degenerate),
            });
        }
    }
    let max_residual = nulling
        .iter()
        .chain(&alignment)
        .map(|r| r.value)
        .fold(0.0, f64::max);
    VerificationReport {
        nulling_residuals: nulling,
        alignment_residuals: alignment,
        max_residual,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        sample_realization, split_csit, trial_rng, ScenarioConfig, StreamPurpose,
    };
    use crate::numerics::{from_real_rows, numerical_rank};

    fn draw(m: usize, n: usize, j: usize, trial: usize) -> (ChannelRealization, CsitView) {
        let cfg = ScenarioConfig::new(m, n, j, 0.5)
            .with_trials(trial + 1)
            .with_seed(17);
        let real = sample_realization(&cfg, trial, 0).unwrap();
        let mut rng = trial_rng(17, trial as u64, 0, StreamPurpose::CsitError);
        let csit = split_csit(&real, 0.5, 1e6, &mut rng);
        (real, csit)
    }

    fn unit_columns(a: &CMatrix) -> bool {
        a.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-12)
    }

    #[test]
    fn regime_boundaries() {
        assert_eq!(Regime::for_antennas(2, 2), Regime::LowTx);
        assert_eq!(Regime::for_antennas(3, 2), Regime::MidTx);
        assert_eq!(Regime::for_antennas(4, 2), Regime::MidTx);
        assert_eq!(Regime::for_antennas(5, 2), Regime::HighTx);
        assert_eq!(Regime::for_antennas(1, 2), Regime::LowTx);
    }

    #[test]
    fn low_tx_generic() {
        let (real, csit) = draw(2, 2, 4, 0);
        let ps = design_low_tx(&csit, &real).unwrap();
        assert_eq!((ps.common_streams, ps.private_streams), (2, 0));
        assert_eq!(numerical_rank(&ps.common[0], 1e-10), 2);
        assert_eq!(numerical_rank(&ps.common[1], 1e-10), 2);
        assert!(unit_columns(&ps.common[0]) && unit_columns(&ps.common[1]));
        let report = verify(&ps, &csit, &real);
        assert!(report.max_residual <= 1e-8, "{report:?}");
        assert_eq!(report.nulling_residuals.len(), 2);
        assert_eq!(report.alignment_residuals.len(), 2);
    }

    #[test]
    fn low_tx_coordinate_null_space() {
        let (mut real, csit) = draw(2, 2, 4, 1);
        real.g[1] = from_real_rows(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let ps = design_low_tx(&csit, &real).unwrap();
        let w1 = &ps.jamming[0];
        assert!(w1.rows(0, 2).norm() <= 1e-12 * w1.norm());
        assert!(verify(&ps, &csit, &real).max_residual <= 1e-8);
    }

    #[test]
    fn low_tx_single_antenna() {
        let (real, csit) = draw(1, 2, 4, 2);
        let ps = design_low_tx(&csit, &real).unwrap();
        assert_eq!(ps.common_streams, 1);
        for i in 0..2 {
            assert_eq!(ps.common[i].shape(), (1, 1));
            assert_eq!(ps.jamming[i].shape(), (4, 1));
            assert_eq!(ps.private[i].ncols(), 0);
        }
        assert!(verify(&ps, &csit, &real).max_residual <= 1e-8);
    }

    #[test]
    fn low_tx_with_spare_jammer_antennas() {
        let (real, csit) = draw(2, 2, 6, 3);
        let ps = design_low_tx(&csit, &real).unwrap();
        assert_eq!(numerical_rank(&ps.common[0], 1e-10), 2);
        assert!(verify(&ps, &csit, &real).max_residual <= 1e-8);
    }

    #[test]
    fn mid_tx_private_nulling() {
        let (real, csit) = draw(3, 2, 4, 4);
        let ps = design_mid_tx(&csit, &real).unwrap();
        assert_eq!(ps.private[0].shape(), (3, 1));
        let r = (&csit.h_hat[1] * &ps.private[0]).norm() / csit.h_hat[1].norm();
        assert!(r <= 1e-8);
        assert!(unit_columns(&ps.private[0]) && unit_columns(&ps.common[1]));
    }

    #[test]
    fn mid_tx_all_six_conditions() {
        let (real, csit) = draw(4, 2, 4, 5);
        let ps = design_mid_tx(&csit, &real).unwrap();
        assert_eq!((ps.common_streams, ps.private_streams), (2, 2));
        let report = verify(&ps, &csit, &real);
        assert_eq!(
            report.nulling_residuals.len() + report.alignment_residuals.len(),
            6
        );
        assert!(report.max_residual <= 1e-8, "{report:?}");
    }

    #[test]
    fn mid_tx_coordinate_private_precoder() {
        let (real, mut csit) = draw(3, 2, 4, 6);
        csit.h_hat[1] = from_real_rows(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ps = design_mid_tx(&csit, &real).unwrap();
        let p1 = &ps.private[0];
        assert!((p1[(2, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(p1.rows(0, 2).norm() < 1e-12);
    }

    #[test]
    fn mid_tx_rejects_rank_deficient_estimate() {
        let (real, mut csit) = draw(3, 2, 4, 7);
        let row = csit.h_hat[0].row(0).clone_owned();
        csit.h_hat[0].set_row(1, &row);
        assert!(matches!(
            design_mid_tx(&csit, &real),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn high_tx_truncation() {
        let (real, csit) = draw(6, 2, 4, 8);
        let ps = design_high_tx(&csit, &real).unwrap();
        for mat in ps.common.iter().chain(&ps.private) {
            assert_eq!(mat.nrows(), 6);
            assert_eq!(mat.rows(4, 2).norm(), 0.0);
        }
        assert!(verify(&ps, &csit, &real).max_residual <= 1e-8);

        let (real, csit) = draw(5, 2, 4, 9);
        let ps = design_high_tx(&csit, &real).unwrap();
        assert_eq!((ps.common_streams, ps.private_streams), (2, 2));
    }

    #[test]
    fn designers_reject_wrong_regime() {
        let (real, csit) = draw(3, 2, 4, 10);
        assert!(design_low_tx(&csit, &real).is_err());
        assert!(design_high_tx(&csit, &real).is_err());
        assert!(design_srs(&csit, &real).is_ok());
    }

    #[test]
    fn verify_zero_precoders_is_degenerate() {
        let (real, csit) = draw(3, 2, 4, 11);
        let mut ps = design_mid_tx(&csit, &real).unwrap();
        for i in 0..2 {
            ps.common[i].fill(C64::new(0.0, 0.0));
            ps.jamming[i].fill(C64::new(0.0, 0.0));
            ps.private[i].fill(C64::new(0.0, 0.0));
        }
        let report = verify(&ps, &csit, &real);
        assert!(report.degenerate);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn verify_detects_corrupted_jammer() {
        let (real, csit) = draw(3, 2, 4, 12);
        let mut ps = design_mid_tx(&csit, &real).unwrap();
        ps.jamming[0]
            .iter_mut()
            .for_each(|z| *z += C64::new(1e-2, 0.0));
        let report = verify(&ps, &csit, &real);
        assert!(report.max_residual >= 1e-3, "{report:?}");
        let nulling = report
            .nulling_residuals
            .iter()
            .find(|r| r.condition == "G2*Wc1 = 0")
            .unwrap();
        assert!(nulling.value >= 1e-3);
        // untouched receiver-2 conditions stay clean
        let clean = report
            .alignment_residuals
            .iter()
            .find(|r| r.condition == "H2_hat*Pc2 = G2*Wc2")
            .unwrap();
        assert!(clean.value <= 1e-8);
    }

    #[test]
    fn private_leaks_only_through_error_channel() {
        let (real, csit) = draw(3, 2, 4, 13);
        let ps = design_mid_tx(&csit, &real).unwrap();
        assert!((&csit.h_err[1] * &ps.private[0]).norm() > 1e-6);

        let perfect = CsitView::perfect(&real, 1e6);
        let ps = design_mid_tx(&perfect, &real).unwrap();
        let leak = &real.h[1] * &ps.private[0];
        assert!(leak.norm() <= 1e-14 * real.h[1].norm());
    }
}
