//! Random generators shared by the integration suites.
#![allow(dead_code)]

use gauss_revert::linalg::{complexify, condition_number, min_eig, CMat, RMat};
use gauss_revert::qudit::{QuditChannel, QuditState};
use gauss_revert::{GaussianChannel, ModeSignature, ReversalProblem, Tolerances};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RMat {
    RMat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn complex_normal(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_signature(rng: &mut ChaCha8Rng) -> ModeSignature {
    loop {
        let k = rng.random_range(0..=3);
        let c = rng.random_range(0..=2);
        if 2 * k + c > 0 {
            return ModeSignature::new(k, c).unwrap();
        }
    }
}

/// Covariance with `V ⪰ (0.6)·I`, hence `V + (i/2)Ω` strictly positive.
pub fn random_cov(rng: &mut ChaCha8Rng, n: usize) -> RMat {
    let b = normal_matrix(rng, n, n) * 0.5;
    &b * b.transpose() + RMat::identity(n, n) * (0.6 + rng.random::<f64>())
}

/// Well-conditioned `X` and the cheapest isotropic noise that makes `(X, Y)` CP, plus slack.
pub fn random_channel(rng: &mut ChaCha8Rng, sig: ModeSignature) -> GaussianChannel {
    let n = sig.dim();
    let x = loop {
        let x = RMat::identity(n, n) * (0.3 + rng.random::<f64>()) + normal_matrix(rng, n, n) * 0.4;
        if condition_number(&x) < 1e3 {
            break x;
        }
    };
    let om = sig.omega();
    let sym = complexify(&RMat::zeros(n, n), &((&om - x.transpose() * &om * &x) * 0.5));
    let floor = (-min_eig(&sym)).max(0.0);
    let c = normal_matrix(rng, n, n) * 0.3;
    let y = RMat::identity(n, n) * (floor + 0.01 + 0.2 * rng.random::<f64>()) + &c * c.transpose();
    GaussianChannel::new(sig, x, y).unwrap()
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> ReversalProblem {
    let sig = random_signature(rng);
    let g = random_channel(rng, sig);
    let v = random_cov(rng, sig.dim());
    ReversalProblem::new(g, v, &Tolerances::default()).unwrap()
}

/// Random Hermitian PSD matrix `AA†` of rank `n`, plus `shift·I`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let a = complex_normal(rng, n, n);
    &a * a.adjoint() + CMat::identity(n, n) * Complex64::new(shift, 0.0)
}

/// Ginibre state whose neighbouring eigenvalues differ by at least `min_gap`.
pub fn random_state(rng: &mut ChaCha8Rng, d: usize, min_gap: f64) -> QuditState {
    let tol = Tolerances::default();
    loop {
        let g = complex_normal(rng, d, d);
        let rho = &g * g.adjoint();
        let tr = rho.trace();
        let rho = rho / tr;
        let mut ev = gauss_revert::linalg::herm_eigenvalues(&rho);
        ev.sort_by(f64::total_cmp);
        if ev[0] >= min_gap && ev.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return QuditState::new(rho, &tol).unwrap();
        }
    }
}

/// Kraus operators read off a random isometry `ℂ^d → ℂ^{rd}`.
pub fn random_channel_qudit(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> QuditChannel {
    let g = complex_normal(rng, rank * d, d);
    let q = g.qr().q();
    let kraus = (0..rank).map(|j| q.rows(j * d, d).into_owned()).collect();
    QuditChannel::from_kraus(kraus).unwrap()
}

/// Random unitary from the QR of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    complex_normal(rng, d, d).qr().q()
}
