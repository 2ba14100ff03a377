//! Optimal reversal of a Gaussian channel on a fixed-covariance family.
//!
//! Given a channel `G = (X, Y)` and the family `{Φ(M, V) : M}`, we look for the
//! largest `k` such that some channel `H` maps `G(Φ(M, V))` to `Φ(kM, V)` for
//! every mean. `H` must have `X_H = k X⁻¹` and `Y_H = V − k² X⁻ᵀ V′ X⁻¹` with
//! `V′ = XᵀVX + Y`, and it is CP exactly when `ς − k²ϱ ⪰ 0` for the pencil
//!
//! ```text
//! ς = V + (i/2)Ω,    ϱ = X⁻ᵀ (V′ + (i/2)Ω) X⁻¹.
//! ```
//!
//! The optimum is `k★ = λ_max(ς^{-1/2} ϱ ς^{-1/2})^{-1/2}`, equivalently
//! `log₂ k★⁻² = D_max(ϱ‖ς)`. [`k_by_bisection`] reaches the same number by
//! bisecting on the LMI directly and serves as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RevertError};
use crate::gaussian::{
    is_cp, validate_state, GaussianChannel, HybridGaussianState, ModeSignature, Tolerances,
};
use crate::io::{matrix_from_rows, rows_of, MatrixPairJson};
use crate::linalg::{
    complexify, condition_number, herm_eigenvalues, herm_inv_sqrt, herm_norm, hermitian_part,
    max_abs_diff, max_eig, min_eig, symmetric_part, to_complex, CMat, RMat,
};

/// A channel to be reversed together with the covariance of the input family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProblemJson", try_from = "ProblemJson")]
pub struct ReversalProblem {
    pub channel: GaussianChannel,
    pub family_cov: RMat,
}

impl ReversalProblem {
    /// Checks that the channel is CP and that `Φ(0, V)` is a valid state.
    /// Invertibility of `X` is checked later, by [`build_pencil`].
    pub fn new(channel: GaussianChannel, family_cov: RMat, tol: &Tolerances) -> Result<Self> {
        let p = Self::new_unchecked(channel, family_cov)?;
        let cp = is_cp(&p.channel, tol);
        if !cp.pass {
            return Err(RevertError::NotCp { min_eig: cp.min_eig });
        }
        let state = HybridGaussianState::centered(p.sig(), p.family_cov.clone())?;
        let rep = validate_state(&state, tol);
        if !rep.pass {
            return Err(RevertError::InvalidState(rep.violations.join("; ")));
        }
        Ok(p)
    }

    /// Shape checks only.
    pub fn new_unchecked(channel: GaussianChannel, family_cov: RMat) -> Result<Self> {
        let n = channel.sig.dim();
        if family_cov.shape() != (n, n) {
            return Err(RevertError::DimensionMismatch(format!(
                "family covariance is {}x{}, expected {n}x{n}",
                family_cov.nrows(),
                family_cov.ncols()
            )));
        }
        Ok(Self { family_cov: symmetric_part(&family_cov), channel })
    }

    pub fn sig(&self) -> ModeSignature {
        self.channel.sig
    }

    /// Output covariance `V′ = XᵀVX + Y`.
    pub fn output_cov(&self) -> RMat {
        let x = &self.channel.x;
        symmetric_part(&(x.transpose() * &self.family_cov * x + &self.channel.y))
    }

    fn inverse_x(&self, tol: &Tolerances) -> Result<RMat> {
        let cond = condition_number(&self.channel.x);
        if !cond.is_finite() || cond > tol.cond_max {
            return Err(RevertError::SingularX { cond });
        }
        self.channel.x.clone().try_inverse().ok_or(RevertError::SingularX { cond })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub channel: MatrixPairJson,
    pub family_cov: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "C")]
    pub classical: usize,
}

impl From<ReversalProblem> for ProblemJson {
    fn from(p: ReversalProblem) -> Self {
        Self {
            modes: p.channel.sig.modes,
            classical: p.channel.sig.classical,
            family_cov: rows_of(&p.family_cov),
            channel: MatrixPairJson { x: rows_of(&p.channel.x), y: rows_of(&p.channel.y) },
        }
    }
}

impl TryFrom<ProblemJson> for ReversalProblem {
    type Error = RevertError;
    fn try_from(j: ProblemJson) -> Result<Self> {
        let sig = ModeSignature::new(j.modes, j.classical)?;
        let g = GaussianChannel::new(
            sig,
            matrix_from_rows(&j.channel.x)?,
            matrix_from_rows(&j.channel.y)?,
        )?;
        ReversalProblem::new_unchecked(g, matrix_from_rows(&j.family_cov)?)
    }
}

/// The Hermitian pencil `(ϱ, ς)` whose feasibility region `ς ⪰ k²ϱ` bounds `k`.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub varrho: CMat,
    pub varsigma: CMat,
    pub x_inv: RMat,
}

pub fn build_pencil(p: &ReversalProblem, tol: &Tolerances) -> Result<Pencil> {
    let x_inv = p.inverse_x(tol)?;
    let half_omega = p.sig().omega() * 0.5;
    let vp = complexify(&p.output_cov(), &half_omega);
    let xi = to_complex(&x_inv);
    let varrho = hermitian_part(&(xi.transpose() * vp * &xi));
    let varsigma = complexify(&p.family_cov, &half_omega);
    let sigma_min = min_eig(&varsigma);
    if sigma_min <= tol.psd_tol * herm_norm(&varsigma).max(1.0) {
        return Err(RevertError::BoundaryFamily { min_eig: sigma_min });
    }
    Ok(Pencil { varrho, varsigma, x_inv })
}

/// Largest generalized eigenvalue of `(ϱ, ς)`, i.e. `λ_max(ς^{-1/2} ϱ ς^{-1/2})`.
pub fn pencil_lambda_max(varrho: &CMat, varsigma: &CMat, tol: &Tolerances) -> Result<f64> {
    let norm = herm_norm(varsigma);
    let sigma_min = min_eig(varsigma);
    if sigma_min <= tol.psd_tol * norm.max(1.0) {
        return Err(RevertError::BoundaryFamily { min_eig: sigma_min });
    }
    let s = herm_inv_sqrt(varsigma, tol.psd_tol * norm);
    Ok(max_eig(&(&s * varrho * &s)))
}

/// Max-relative entropy `D_max(ϱ‖ς) = log₂ min{c : ϱ ⪯ cς}`, in bits.
pub fn dmax(varrho: &CMat, varsigma: &CMat, tol: &Tolerances) -> Result<f64> {
    if varrho.shape() != varsigma.shape() {
        return Err(RevertError::DimensionMismatch("pencil matrices differ in shape".into()));
    }
    Ok(pencil_lambda_max(varrho, varsigma, tol)?.log2())
}

/// Builds `H = (k X⁻¹, V − k² X⁻ᵀ V′ X⁻¹)`.
pub fn build_reverser(p: &ReversalProblem, k: f64, tol: &Tolerances) -> Result<GaussianChannel> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(RevertError::Domain(format!("reversal factor must be >= 0, got {k}")));
    }
    let x_inv = p.inverse_x(tol)?;
    Ok(reverser_from_inverse(p, &x_inv, k))
}

fn reverser_from_inverse(p: &ReversalProblem, x_inv: &RMat, k: f64) -> GaussianChannel {
    let x_h = x_inv * k;
    let y_h = &p.family_cov - x_inv.transpose() * p.output_cov() * x_inv * (k * k);
    GaussianChannel { sig: p.sig(), x: x_h, y: symmetric_part(&y_h) }
}

/// Numerical side information attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub x_condition: f64,
    /// `λ_min(ς)`; strictly positive for admissible families.
    pub varsigma_min_eig: f64,
    pub varrho_min_eig: f64,
    /// `λ_min` of the CP matrix of `H` at `k★`; zero up to roundoff.
    pub h_cp_margin: f64,
    /// Max entrywise error of `X X_H = kI` and `X_Hᵀ V′ X_H + Y_H = V`.
    pub moment_residual: f64,
    /// Independent estimate of `k★` from LMI bisection.
    pub bisection_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalSolution {
    pub k_star: f64,
    /// `log₂(k★⁻²)` in bits.
    pub d_max: f64,
    pub lambda_max: f64,
    #[serde(rename = "H")]
    pub h: GaussianChannel,
    pub diagnostics: Diagnostics,
}

/// Closed-form optimum `k★` together with the reversing channel at `k★`.
pub fn optimal_k(p: &ReversalProblem, tol: &Tolerances) -> Result<ReversalSolution> {
    let pencil = build_pencil(p, tol)?;
    let lambda_max = pencil_lambda_max(&pencil.varrho, &pencil.varsigma, tol)?;
    if lambda_max.is_nan() || lambda_max <= 0.0 {
        return Err(RevertError::Domain(format!(
            "pencil has no positive generalized eigenvalue ({lambda_max:e})"
        )));
    }
    let k_star = lambda_max.powf(-0.5);
    let h = reverser_from_inverse(p, &pencil.x_inv, k_star);
    let diagnostics = Diagnostics {
        x_condition: condition_number(&p.channel.x),
        varsigma_min_eig: min_eig(&pencil.varsigma),
        varrho_min_eig: min_eig(&pencil.varrho),
        h_cp_margin: h.cp_margin(),
        moment_residual: moment_residual(p, &h, k_star),
        bisection_k: bisect_pencil(&pencil, tol),
    };
    Ok(ReversalSolution { k_star, d_max: lambda_max.log2(), lambda_max, h, diagnostics })
}

/// Residual of the exact moment identities that make `H` a `k`-reversal of `G`.
pub fn moment_residual(p: &ReversalProblem, h: &GaussianChannel, k: f64) -> f64 {
    let n = p.sig().dim();
    let transport = &p.channel.x * &h.x - RMat::identity(n, n) * k;
    let cov = h.x.transpose() * p.output_cov() * &h.x + &h.y;
    let t = transport.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    t.max(max_abs_diff(&cov, &p.family_cov))
}

/// `k★` by bisection on `λ_min(ς − k²ϱ) ≥ −psd_tol`.
pub fn k_by_bisection(p: &ReversalProblem, tol: &Tolerances) -> Result<f64> {
    let pencil = build_pencil(p, tol)?;
    Ok(bisect_pencil(&pencil, tol))
}

fn bisect_pencil(pencil: &Pencil, tol: &Tolerances) -> f64 {
    let feasible = |k: f64| min_eig(&(&pencil.varsigma - &pencil.varrho * num_complex::Complex64::from(k * k))) >= -tol.psd_tol;

    let trace_sigma: f64 = pencil.varsigma.diagonal().iter().map(|z| z.re).sum();
    let rho_min_pos = herm_eigenvalues(&pencil.varrho)
        .into_iter()
        .find(|&x| x > tol.psd_tol);
    let mut hi = match rho_min_pos {
        Some(l) => (trace_sigma / l).sqrt(),
        None => 1.0,
    };
    let mut lo = 0.0;
    let mut doublings = 0;
    while feasible(hi) && doublings < 200 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    while hi - lo > tol.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
