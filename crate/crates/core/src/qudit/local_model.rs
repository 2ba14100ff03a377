use num_complex::Complex64;

use super::QuditState;
use crate::error::{Result, RevertError};
use crate::gaussian::{ModeSignature, Tolerances};
use crate::linalg::{herm_eigh, hermitian_part, min_eig, trace_product, CMat, RMat, RVec};

/// Local Gaussian model of a full-rank qudit state with non-degenerate spectrum.
///
/// Coordinates are `(q₁₂, p₁₂, q₁₃, p₁₃, …, q_{d−1,d}, p_{d−1,d}, b₁, …, b_{d−1})`
/// in the eigenbasis of `ρ₀` with eigenvalues sorted descending. For `j < k`
///
/// ```text
/// q_jk = (|j⟩⟨k| + |k⟩⟨j|) / √(2(λ_j − λ_k))
/// p_jk = i(|k⟩⟨j| − |j⟩⟨k|) / √(2(λ_j − λ_k))
/// b_i  = |i⟩⟨i| − λ_i·1
/// ```
///
/// and the displacement directions `D_a = ∂ρ/∂M_a` put `Λ_jk z̄_jk` above the
/// diagonal, `Λ_jk z_jk` below it (`Λ_jk = √((λ_j − λ_k)/2)`) and `u` on the
/// diagonal, with the last diagonal entry fixing the trace. `Tr(D_a O_b) = δ_ab`.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub base: QuditState,
    /// Eigenvalues of `ρ₀`, strictly decreasing.
    pub eigenvalues: Vec<f64>,
    /// Phase-fixed eigenvectors of `ρ₀`, as columns in the same order.
    pub eigenvectors: CMat,
    pub basis_ops: Vec<CMat>,
    pub param_dirs: Vec<CMat>,
    pub sig: ModeSignature,
    pub cov: RMat,
}

impl LocalModel {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Coordinate expectations `Tr(ρ O_a)`.
    pub fn coordinates(&self, rho: &CMat) -> RVec {
        RVec::from_iterator(
            self.basis_ops.len(),
            self.basis_ops.iter().map(|o| trace_product(rho, o).re),
        )
    }

    /// Index pairs `(j, k)`, `j < k`, in coordinate order.
    pub fn mode_pairs(&self) -> Vec<(usize, usize)> {
        mode_pairs(self.dim())
    }
}

fn mode_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|j| (j + 1..d).map(move |k| (j, k))).collect()
}

fn unit(d: usize, i: usize, j: usize, z: Complex64) -> CMat {
    let mut e = CMat::zeros(d, d);
    e[(i, j)] = z;
    e
}

/// Rotates the eigenvector so its largest-magnitude component is real and positive.
fn fix_phase(v: &mut nalgebra::DVectorViewMut<'_, Complex64>) {
    let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if let Some(z) = v.iter().copied().find(|z| z.norm() >= max * (1.0 - 1e-12)) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

pub fn build_local_model(s: &QuditState, tol: &Tolerances) -> Result<LocalModel> {
    let d = s.dim();
    if d < 2 {
        return Err(RevertError::Domain("local model needs d >= 2".into()));
    }
    let (vals, vecs) = herm_eigh(s.rho());
    let lambda: Vec<f64> = vals.iter().rev().copied().collect();
    let mut u = CMat::from_fn(d, d, |r, c| vecs[(r, d - 1 - c)]);
    for mut col in u.column_iter_mut() {
        fix_phase(&mut col);
    }
    if lambda[d - 1] <= tol.spectrum_gap_tol {
        return Err(RevertError::RankDeficient { min_eig: lambda[d - 1] });
    }
    if let Some(gap) = lambda
        .windows(2)
        .map(|w| w[0] - w[1])
        .find(|g| *g <= tol.spectrum_gap_tol)
    {
        return Err(RevertError::DegenerateSpectrum { gap });
    }

    let one = Complex64::new(1.0, 0.0);
    let i = crate::linalg::I;
    let to_lab = |a: CMat| &u * a * u.adjoint();

    let pairs = mode_pairs(d);
    let n_coords = d * d - 1;
    let mut basis_ops = Vec::with_capacity(n_coords);
    let mut param_dirs = Vec::with_capacity(n_coords);
    let mut cov = RMat::zeros(n_coords, n_coords);

    for (idx, &(j, k)) in pairs.iter().enumerate() {
        let diff = lambda[j] - lambda[k];
        let norm = Complex64::new(1.0 / (2.0 * diff).sqrt(), 0.0);
        let big_lambda = Complex64::new((diff / 2.0).sqrt(), 0.0);
        let ejk = unit(d, j, k, one);
        let ekj = unit(d, k, j, one);

        basis_ops.push(to_lab((&ejk + &ekj) * norm));
        basis_ops.push(to_lab((&ekj - &ejk) * (i * norm)));
        // z = 1 and z = i respectively.
        param_dirs.push(to_lab((&ejk + &ekj) * big_lambda));
        param_dirs.push(to_lab((&ekj - &ejk) * (i * big_lambda)));

        let v = (lambda[j] + lambda[k]) / (2.0 * diff);
        cov[(2 * idx, 2 * idx)] = v;
        cov[(2 * idx + 1, 2 * idx + 1)] = v;
    }
    let offset = 2 * pairs.len();
    for a in 0..d - 1 {
        basis_ops.push(to_lab(unit(d, a, a, one) - CMat::identity(d, d) * Complex64::new(lambda[a], 0.0)));
        param_dirs.push(to_lab(unit(d, a, a, one) - unit(d, d - 1, d - 1, one)));
        for b in 0..d - 1 {
            let delta = if a == b { lambda[a] } else { 0.0 };
            cov[(offset + a, offset + b)] = delta - lambda[a] * lambda[b];
        }
    }

    Ok(LocalModel {
        base: s.clone(),
        eigenvalues: lambda,
        eigenvectors: u,
        basis_ops,
        param_dirs,
        sig: ModeSignature::new(pairs.len(), d - 1)?,
        cov,
    })
}

/// `ρ₀ + n^{-1/2} Σ_a M_a D_a`, checked for positivity.
pub fn perturbed_state(m: &LocalModel, mean: &RVec, n: u64, tol: &Tolerances) -> Result<QuditState> {
    if mean.len() != m.param_dirs.len() {
        return Err(RevertError::DimensionMismatch(format!(
            "displacement has length {}, expected {}",
            mean.len(),
            m.param_dirs.len()
        )));
    }
    if n == 0 {
        return Err(RevertError::Domain("ensemble size must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut rho = m.base.rho().clone();
    for (ma, da) in mean.iter().zip(&m.param_dirs) {
        rho += da * Complex64::new(ma * scale, 0.0);
    }
    let rho = hermitian_part(&rho);
    let min = min_eig(&rho);
    if min < -tol.psd_tol {
        return Err(RevertError::NotPsd { min_eig: min });
    }
    QuditState::new(rho, tol)
}
