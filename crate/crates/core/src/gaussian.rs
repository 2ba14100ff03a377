//! Hybrid quantum-classical Gaussian states and Gaussian channels, at the
//! level of first and second moments.
//!
//! Coordinates are ordered `(Q_1, P_1, …, Q_K, P_K, B_1, …, B_C)`. The
//! symplectic form is `Ω = Diag(σ, …, σ, 0_C)` with `σ = [[0, 1], [-1, 0]]`.
//! A covariance `V` is physical iff `V + (i/2)Ω ⪰ 0`, and a channel `(X, Y)`
//! acting as `M ↦ XᵀM`, `V ↦ XᵀVX + Y` is completely positive iff
//! `Y + (i/2)(Ω − XᵀΩX) ⪰ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RevertError};
use crate::io::{ChannelJson, StateJson};
use crate::linalg::{complexify, min_eig, sym_norm, symmetric_part, CMat, RMat, RVec};

/// Number of bosonic modes and classical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSignature {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "C")]
    pub classical: usize,
}

impl ModeSignature {
    pub fn new(modes: usize, classical: usize) -> Result<Self> {
        if 2 * modes + classical == 0 {
            return Err(RevertError::DimensionMismatch(
                "signature must have at least one coordinate".into(),
            ));
        }
        Ok(Self { modes, classical })
    }

    /// Total number of real coordinates, `2K + C`.
    pub fn dim(&self) -> usize {
        2 * self.modes + self.classical
    }

    pub fn omega(&self) -> RMat {
        let n = self.dim();
        let mut om = RMat::zeros(n, n);
        for m in 0..self.modes {
            om[(2 * m, 2 * m + 1)] = 1.0;
            om[(2 * m + 1, 2 * m)] = -1.0;
        }
        om
    }

    fn check_square(&self, what: &str, a: &RMat) -> Result<()> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(RevertError::DimensionMismatch(format!(
                "{what} is {}x{}, expected {n}x{n}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }
}

/// Numerical tolerances shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative eigenvalue slack in PSD tests.
    pub psd_tol: f64,
    /// Largest condition number accepted when inverting `X`.
    pub cond_max: f64,
    /// Absolute tolerance on `k` for the bisection oracle.
    pub bisect_tol: f64,
    /// Smallest admissible gap between neighbouring eigenvalues of a qudit state.
    pub spectrum_gap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { psd_tol: 1e-10, cond_max: 1e10, bisect_tol: 1e-10, spectrum_gap_tol: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.psd_tol, self.cond_max, self.bisect_tol, self.spectrum_gap_tol];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(RevertError::Domain("tolerances must be finite and strictly positive".into()))
        }
    }
}

/// Outcome of a positivity check with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub pass: bool,
    /// Smallest eigenvalue of the certificate matrix.
    pub min_eig: f64,
    /// `min_eig` must be at least this value.
    pub threshold: f64,
    pub violations: Vec<String>,
}

/// Gaussian state `Φ(M, V)` of a hybrid system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateJson", try_from = "StateJson")]
pub struct HybridGaussianState {
    pub sig: ModeSignature,
    pub mean: RVec,
    pub cov: RMat,
}

impl HybridGaussianState {
    /// Builds a state, checking shapes and storing the symmetrized covariance.
    pub fn new(sig: ModeSignature, mean: RVec, cov: RMat) -> Result<Self> {
        sig.check_square("covariance", &cov)?;
        if mean.len() != sig.dim() {
            return Err(RevertError::DimensionMismatch(format!(
                "mean has length {}, expected {}",
                mean.len(),
                sig.dim()
            )));
        }
        Ok(Self { sig, mean, cov: symmetric_part(&cov) })
    }

    /// Zero-mean state with covariance `cov`.
    pub fn centered(sig: ModeSignature, cov: RMat) -> Result<Self> {
        Self::new(sig, RVec::zeros(sig.dim()), cov)
    }

    /// `V + (i/2)Ω`.
    pub fn uncertainty_matrix(&self) -> CMat {
        complexify(&self.cov, &(self.sig.omega() * 0.5))
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidityReport {
        validate_state(self, tol)
    }
}

/// Checks the uncertainty principle `V + (i/2)Ω ⪰ 0`.
pub fn validate_state(s: &HybridGaussianState, tol: &Tolerances) -> ValidityReport {
    let min = min_eig(&s.uncertainty_matrix());
    let threshold = -tol.psd_tol * sym_norm(&s.cov);
    let mut violations = Vec::new();
    if !min.is_finite() || min < threshold {
        violations.push(format!(
            "uncertainty principle violated: min eigenvalue of V + (i/2)Omega is {min:e}"
        ));
    }
    if s.mean.iter().chain(s.cov.iter()).any(|x| !x.is_finite()) {
        violations.push("non-finite moment".into());
    }
    ValidityReport { pass: violations.is_empty(), min_eig: min, threshold, violations }
}

/// Gaussian channel acting on moments by `M ↦ XᵀM`, `V ↦ XᵀVX + Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ChannelJson", try_from = "ChannelJson")]
pub struct GaussianChannel {
    pub sig: ModeSignature,
    pub x: RMat,
    pub y: RMat,
}

impl GaussianChannel {
    pub fn new(sig: ModeSignature, x: RMat, y: RMat) -> Result<Self> {
        sig.check_square("X", &x)?;
        sig.check_square("Y", &y)?;
        Ok(Self { sig, x, y: symmetric_part(&y) })
    }

    pub fn identity(sig: ModeSignature) -> Self {
        let n = sig.dim();
        Self { sig, x: RMat::identity(n, n), y: RMat::zeros(n, n) }
    }

    /// `Y + (i/2)(Ω − XᵀΩX)`; the channel is CP iff this is PSD.
    pub fn cp_matrix(&self) -> CMat {
        let om = self.sig.omega();
        let im = (&om - self.x.transpose() * &om * &self.x) * 0.5;
        complexify(&self.y, &im)
    }

    pub fn cp_margin(&self) -> f64 {
        min_eig(&self.cp_matrix())
    }

    pub fn is_cp(&self, tol: &Tolerances) -> bool {
        is_cp(self, tol).pass
    }

    /// The moment map, without positivity checks.
    pub fn apply_moments(&self, mean: &RVec, cov: &RMat) -> (RVec, RMat) {
        let xt = self.x.transpose();
        let m = &xt * mean;
        let v = symmetric_part(&(&xt * cov * &self.x + &self.y));
        (m, v)
    }
}

/// CP certificate for a Gaussian channel.
pub fn is_cp(g: &GaussianChannel, tol: &Tolerances) -> ValidityReport {
    let min = g.cp_margin();
    let threshold = -tol.psd_tol * (1.0 + sym_norm(&g.y));
    let mut violations = Vec::new();
    if !min.is_finite() || min < threshold {
        violations.push(format!(
            "CP condition violated: min eigenvalue of Y + (i/2)(Omega - X^T Omega X) is {min:e}"
        ));
    }
    ValidityReport { pass: violations.is_empty(), min_eig: min, threshold, violations }
}

/// Applies `g` to `s` after checking both.
pub fn apply(
    g: &GaussianChannel,
    s: &HybridGaussianState,
    tol: &Tolerances,
) -> Result<HybridGaussianState> {
    if g.sig.dim() != s.sig.dim() {
        return Err(RevertError::DimensionMismatch(format!(
            "channel acts on {} coordinates, state has {}",
            g.sig.dim(),
            s.sig.dim()
        )));
    }
    let cp = is_cp(g, tol);
    if !cp.pass {
        return Err(RevertError::NotCp { min_eig: cp.min_eig });
    }
    let rep = validate_state(s, tol);
    if !rep.pass {
        return Err(RevertError::InvalidState(rep.violations.join("; ")));
    }
    let (mean, cov) = g.apply_moments(&s.mean, &s.cov);
    HybridGaussianState::new(g.sig, mean, cov)
}

/// `g2 ∘ g1`: first `g1`, then `g2`.
pub fn compose(g2: &GaussianChannel, g1: &GaussianChannel) -> Result<GaussianChannel> {
    if g1.sig.dim() != g2.sig.dim() {
        return Err(RevertError::DimensionMismatch(format!(
            "cannot compose channels on {} and {} coordinates",
            g2.sig.dim(),
            g1.sig.dim()
        )));
    }
    let x = &g1.x * &g2.x;
    let y = g2.x.transpose() * &g1.y * &g2.x + &g2.y;
    GaussianChannel::new(g2.sig, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_mode() -> ModeSignature {
        ModeSignature::new(1, 0).unwrap()
    }

    fn attenuator(eta: f64, excess: f64) -> GaussianChannel {
        let n = 2;
        GaussianChannel::new(
            one_mode(),
            RMat::identity(n, n) * eta.sqrt(),
            RMat::identity(n, n) * ((1.0 - eta) / 2.0 + excess),
        )
        .unwrap()
    }

    #[test]
    fn omega_layout() {
        let om = ModeSignature::new(2, 1).unwrap().omega();
        assert_eq!(om.nrows(), 5);
        assert_eq!(om[(0, 1)], 1.0);
        assert_eq!(om[(1, 0)], -1.0);
        assert_eq!(om[(2, 3)], 1.0);
        assert_eq!(om[(4, 4)], 0.0);
        assert_eq!(om.iter().filter(|x| **x != 0.0).count(), 4);
    }

    #[test]
    fn empty_signature_rejected() {
        assert!(ModeSignature::new(0, 0).is_err());
        assert!(ModeSignature::new(0, 1).is_ok());
    }

    #[test]
    fn vacuum_is_on_the_boundary() {
        let s = HybridGaussianState::new(
            one_mode(),
            RVec::from_vec(vec![3.0, -1.0]),
            RMat::identity(2, 2) * 0.5,
        )
        .unwrap();
        let rep = validate_state(&s, &Tolerances::default());
        assert!(rep.pass);
        assert!(rep.min_eig.abs() < 1e-15);
    }

    #[test]
    fn sub_vacuum_fails() {
        let s = HybridGaussianState::centered(one_mode(), RMat::identity(2, 2) * 0.25).unwrap();
        let rep = validate_state(&s, &Tolerances::default());
        assert!(!rep.pass);
        assert!((rep.min_eig + 0.25).abs() < 1e-15);
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn qubit_lan_state_passes() {
        // ‖r‖ = 0.5: quantum variance 1/(2‖r‖) = 1, classical λ₁(1 − λ₁) = 3/16.
        let sig = ModeSignature::new(1, 1).unwrap();
        let v = RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, 3.0 / 16.0]));
        let s = HybridGaussianState::centered(sig, v).unwrap();
        let rep = validate_state(&s, &Tolerances::default());
        assert!(rep.pass);
        assert!((rep.min_eig - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let err = HybridGaussianState::new(one_mode(), RVec::zeros(3), RMat::identity(2, 2))
            .unwrap_err();
        assert_eq!(err.code(), "DimensionMismatch");
        let err = GaussianChannel::new(one_mode(), RMat::identity(3, 3), RMat::zeros(2, 2))
            .unwrap_err();
        assert_eq!(err.code(), "DimensionMismatch");
    }

    #[test]
    fn minimal_attenuator_is_cp_with_zero_margin() {
        let tol = Tolerances::default();
        for eta in [0.1, 0.5, 0.9] {
            let rep = is_cp(&attenuator(eta, 0.0), &tol);
            assert!(rep.pass);
            assert!(rep.min_eig.abs() < 1e-15, "eta={eta}: {}", rep.min_eig);
            assert!(!is_cp(&attenuator(eta, -0.01), &tol).pass);
        }
        assert!(GaussianChannel::identity(one_mode()).is_cp(&tol));
    }

    #[test]
    fn attenuator_moment_map() {
        let tol = Tolerances::default();
        let s = HybridGaussianState::new(
            one_mode(),
            RVec::from_vec(vec![2.0, 0.0]),
            RMat::identity(2, 2) * 1.5,
        )
        .unwrap();
        let out = apply(&attenuator(0.5, 0.0), &s, &tol).unwrap();
        assert!((out.mean[0] - 0.5_f64.sqrt() * 2.0).abs() < 1e-15);
        assert_eq!(out.mean[1], 0.0);
        assert!((out.cov[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((out.cov[(1, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(out.cov[(0, 1)], 0.0);
    }

    #[test]
    fn apply_rejects_non_cp_and_invalid_states() {
        let tol = Tolerances::default();
        let good = HybridGaussianState::centered(one_mode(), RMat::identity(2, 2)).unwrap();
        let err = apply(&attenuator(0.5, -0.1), &good, &tol).unwrap_err();
        assert_eq!(err.code(), "NotCp");
        let bad = HybridGaussianState::centered(one_mode(), RMat::identity(2, 2) * 0.1).unwrap();
        let err = apply(&GaussianChannel::identity(one_mode()), &bad, &tol).unwrap_err();
        assert_eq!(err.code(), "InvalidState");
    }

    #[test]
    fn attenuators_compose() {
        let g = compose(&attenuator(0.3, 0.0), &attenuator(0.6, 0.0)).unwrap();
        let expect = attenuator(0.18, 0.0);
        assert!(crate::linalg::max_abs_diff(&g.x, &expect.x) < 1e-15);
        assert!(crate::linalg::max_abs_diff(&g.y, &expect.y) < 1e-15);
    }

    #[test]
    fn identity_is_neutral_for_composition() {
        let g = attenuator(0.4, 0.2);
        let id = GaussianChannel::identity(one_mode());
        assert_eq!(compose(&id, &g).unwrap(), g);
        assert_eq!(compose(&g, &id).unwrap(), g);
    }
}
