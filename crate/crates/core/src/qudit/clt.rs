use num_complex::Complex64;
use serde::Serialize;

use super::LocalModel;
use crate::error::{Result, RevertError};
use crate::linalg::herm_eigh;

/// 61 evenly spaced points on `[-3, 3]`.
pub fn default_t_grid() -> Vec<f64> {
    (0..61).map(|i| -3.0 + 0.1 * i as f64).collect()
}

/// Largest deviation on `t_grid` between the characteristic function of the
/// collective observable `O_a(n)/√n` in `ρ₀^{⊗n}` and its Gaussian limit
/// `exp(−t² V_aa / 2)`.
///
/// The collective observable is a sum of i.i.d. copies, so its characteristic
/// function is `[Tr(ρ₀ exp(itO_a/√n))]^n`.
pub fn clt_char_error(m: &LocalModel, a: usize, n: u32, t_grid: &[f64]) -> Result<f64> {
    let op = m.basis_ops.get(a).ok_or_else(|| {
        RevertError::Domain(format!("coordinate {a} out of range (0..{})", m.basis_ops.len()))
    })?;
    if n == 0 {
        return Err(RevertError::Domain("ensemble size must be positive".into()));
    }
    let (mu, w) = herm_eigh(op);
    let rho = m.base.rho();
    // Spectral weights ⟨w_k|ρ₀|w_k⟩ of ρ₀ on the eigenvectors of O_a.
    let weights: Vec<f64> = (0..mu.len())
        .map(|k| {
            let col = w.column(k);
            (col.adjoint() * rho * col)[(0, 0)].re
        })
        .collect();
    let var = m.cov[(a, a)];
    let scale = 1.0 / (n as f64).sqrt();
    let err = t_grid
        .iter()
        .map(|&t| {
            let single: Complex64 = mu
                .iter()
                .zip(&weights)
                .map(|(&x, &p)| Complex64::from_polar(p, t * x * scale))
                .sum();
            let f = single.powu(n);
            (f - Complex64::new((-0.5 * t * t * var).exp(), 0.0)).norm()
        })
        .fold(0.0_f64, f64::max);
    Ok(err)
}

/// One line of a CLT error table.
#[derive(Debug, Clone, Serialize)]
pub struct CltRow {
    pub coordinate: usize,
    pub n: u32,
    pub max_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Tolerances;
    use crate::qudit::{build_local_model, QuditState};

    fn model() -> LocalModel {
        let tol = Tolerances::default();
        build_local_model(&QuditState::from_bloch([0.2, 0.1, 0.5], &tol).unwrap(), &tol).unwrap()
    }

    #[test]
    fn exact_at_zero() {
        let m = model();
        for a in 0..3 {
            assert!(clt_char_error(&m, a, 10, &[0.0]).unwrap() < 1e-13);
        }
    }

    #[test]
    fn classical_coordinate_is_binomial() {
        // b₁ takes 1 − λ₁ with probability λ₁ and −λ₁ otherwise.
        let m = model();
        let l = m.eigenvalues[0];
        let (n, t) = (50_u32, 1.3);
        let s = 1.0 / (n as f64).sqrt();
        let phi = Complex64::from_polar(l, t * (1.0 - l) * s) + Complex64::from_polar(1.0 - l, -t * l * s);
        let expect = (phi.powu(n) - Complex64::new((-0.5 * t * t * l * (1.0 - l)).exp(), 0.0)).norm();
        let got = clt_char_error(&m, 2, n, &[t]).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn error_shrinks_with_n() {
        let m = model();
        let grid = default_t_grid();
        for a in 0..3 {
            let e: Vec<f64> = [100, 1000, 10_000]
                .iter()
                .map(|&n| clt_char_error(&m, a, n, &grid).unwrap())
                .collect();
            assert!(e[0] > e[1] && e[1] > e[2], "{a}: {e:?}");
        }
        assert!(clt_char_error(&m, 3, 10, &grid).is_err());
    }
}
