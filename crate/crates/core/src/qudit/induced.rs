use serde::Serialize;

use super::{apply_qudit_channel, build_local_model, LocalModel, QuditChannel, QuditMap, QuditState};
use crate::error::{Result, RevertError};
use crate::gaussian::{GaussianChannel, Tolerances};
use crate::linalg::{condition_number, hermitian_part, symmetric_part, trace_product, RMat};
use crate::reversal::{optimal_k, Diagnostics, ReversalProblem, ReversalSolution};

/// Displacement transport `X_ab = Re Tr(C(D_a) O′_b)`, so that `M′ = XᵀM`.
pub fn compute_x<C: QuditMap + ?Sized>(c: &C, m_in: &LocalModel, m_out: &LocalModel) -> Result<RMat> {
    if c.dim() != m_in.dim() || c.dim() != m_out.dim() {
        return Err(RevertError::DimensionMismatch(
            "channel and local models have different dimensions".into(),
        ));
    }
    let images: Vec<_> = m_in.param_dirs.iter().map(|d| c.apply_map(d)).collect();
    Ok(RMat::from_fn(images.len(), m_out.basis_ops.len(), |a, b| {
        trace_product(&images[a], &m_out.basis_ops[b]).re
    }))
}

/// Gaussian channel induced on the local models by a qudit map.
#[derive(Debug, Clone, Serialize)]
pub struct InducedGaussianChannel {
    #[serde(rename = "G")]
    pub g: GaussianChannel,
    #[serde(rename = "Vin")]
    pub v_in: RMatJson,
    #[serde(rename = "Vout")]
    pub v_out: RMatJson,
    /// `λ_min(Y + (i/2)(Ω − XᵀΩX))`.
    pub cp_margin: f64,
    pub x_condition: f64,
    #[serde(skip)]
    pub input_model: LocalModel,
    #[serde(skip)]
    pub output_model: LocalModel,
}

/// Serializes as row-major nested arrays.
#[derive(Debug, Clone)]
pub struct RMatJson(pub RMat);

impl Serialize for RMatJson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::rows_of(&self.0).serialize(s)
    }
}

/// Builds `G = (X, V′ − XᵀVX)` from the local models at `ρ` and `C(ρ)`.
///
/// Accepts any linear map so that the positivity certificate can be evaluated
/// for maps that are not completely positive.
pub fn build_induced_channel<C: QuditMap + ?Sized>(
    c: &C,
    s: &QuditState,
    tol: &Tolerances,
) -> Result<InducedGaussianChannel> {
    if c.dim() != s.dim() {
        return Err(RevertError::DimensionMismatch(format!(
            "map acts on d = {}, state has d = {}",
            c.dim(),
            s.dim()
        )));
    }
    let m_in = build_local_model(s, tol)?;
    let out = QuditState::new(hermitian_part(&c.apply_map(s.rho())), tol)?;
    let m_out = build_local_model(&out, tol)?;
    let x = compute_x(c, &m_in, &m_out)?;
    let y = symmetric_part(&(&m_out.cov - x.transpose() * &m_in.cov * &x));
    let g = GaussianChannel::new(m_in.sig, x, y)?;
    Ok(InducedGaussianChannel {
        cp_margin: g.cp_margin(),
        x_condition: condition_number(&g.x),
        v_in: RMatJson(m_in.cov.clone()),
        v_out: RMatJson(m_out.cov.clone()),
        g,
        input_model: m_in,
        output_model: m_out,
    })
}

/// Asymptotic reversal rate of a qudit channel at a given state.
#[derive(Debug, Clone, Serialize)]
pub struct QuditRate {
    #[serde(rename = "Gamma_star")]
    pub gamma_star: f64,
    pub k_star: f64,
    #[serde(rename = "G")]
    pub g: GaussianChannel,
    #[serde(rename = "H")]
    pub h: GaussianChannel,
    pub cp_margin: f64,
    /// Set when `X` is singular: no displacement survives and the rate is 0.
    pub singular_transport: bool,
    pub d_max: f64,
    #[serde(skip)]
    pub induced: InducedGaussianChannel,
    #[serde(skip)]
    pub solution: ReversalSolution,
}

/// `Γ★ = k★²` for the Gaussian problem `(G, V)` induced by `c` at `s`.
///
/// When the displacement transport is singular no `k > 0` is reachable, and
/// the reverser is the constant channel onto `Φ(0, V)`.
pub fn optimal_rate(c: &QuditChannel, s: &QuditState, tol: &Tolerances) -> Result<QuditRate> {
    let _ = apply_qudit_channel(c, s)?;
    let induced = build_induced_channel(c, s, tol)?;
    let v = induced.input_model.cov.clone();
    let problem = ReversalProblem::new(induced.g.clone(), v.clone(), tol)?;

    let solution = match optimal_k(&problem, tol) {
        Ok(sol) => sol,
        Err(RevertError::SingularX { .. }) => {
            let n = v.nrows();
            let h = GaussianChannel::new(problem.sig(), RMat::zeros(n, n), v)?;
            ReversalSolution {
                k_star: 0.0,
                d_max: f64::INFINITY,
                lambda_max: f64::INFINITY,
                diagnostics: Diagnostics {
                    x_condition: induced.x_condition,
                    varsigma_min_eig: f64::NAN,
                    varrho_min_eig: f64::NAN,
                    h_cp_margin: h.cp_margin(),
                    moment_residual: 0.0,
                    bisection_k: 0.0,
                },
                h,
            }
        }
        Err(e) => return Err(e),
    };
    Ok(QuditRate {
        gamma_star: solution.k_star * solution.k_star,
        k_star: solution.k_star,
        g: induced.g.clone(),
        h: solution.h.clone(),
        cp_margin: induced.cp_margin,
        singular_transport: solution.k_star == 0.0,
        d_max: solution.d_max,
        induced,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, RVec};
    use crate::qudit::{perturbed_state, ChoiMap};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_channel_induces_identity() {
        let s = QuditState::from_bloch([0.2, -0.1, 0.3], &tol()).unwrap();
        let ind = build_induced_channel(&QuditChannel::identity(2), &s, &tol()).unwrap();
        assert!(max_abs_diff(&ind.g.x, &RMat::identity(3, 3)) < 1e-12);
        assert!(ind.g.y.iter().all(|y| y.abs() < 1e-12));
        assert!(ind.cp_margin.abs() < 1e-12);
        let rate = optimal_rate(&QuditChannel::identity(2), &s, &tol()).unwrap();
        assert!((rate.gamma_star - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_flip_on_z_axis() {
        let p = 0.75;
        let s = QuditState::from_bloch([0.0, 0.0, 0.5], &tol()).unwrap();
        let c = QuditChannel::phase_flip(p).unwrap();
        let ind = build_induced_channel(&c, &s, &tol()).unwrap();
        assert!(max_abs_diff(&ind.v_in.0, &ind.v_out.0) < 1e-14);
        let expect = RMat::from_diagonal(&RVec::from_vec(vec![0.5, 0.5, 1.0]));
        assert!(max_abs_diff(&ind.g.x, &expect) < 1e-14);
        let rate = optimal_rate(&c, &s, &tol()).unwrap();
        assert!((rate.gamma_star - 0.25).abs() < 1e-10);
        assert!(!rate.singular_transport);
    }

    #[test]
    fn fully_dephasing_flip_has_zero_rate() {
        let s = QuditState::from_bloch([0.3, 0.0, 0.5], &tol()).unwrap();
        let rate = optimal_rate(&QuditChannel::phase_flip(0.5).unwrap(), &s, &tol()).unwrap();
        assert_eq!(rate.gamma_star, 0.0);
        assert!(rate.singular_transport);
        assert!(rate.h.is_cp(&tol()));
    }

    #[test]
    fn transport_matches_finite_difference() {
        let s = QuditState::from_bloch([0.3, 0.2, -0.4], &tol()).unwrap();
        let c = QuditChannel::depolarizing(2, 0.2).unwrap();
        let ind = build_induced_channel(&c, &s, &tol()).unwrap();
        let m = RVec::from_vec(vec![0.7, -0.3, 0.5]);
        let n = 1_000_000;
        let tau = perturbed_state(&ind.input_model, &m, n, &tol()).unwrap();
        let out = apply_qudit_channel(&c, &tau).unwrap();
        let base = ind.output_model.coordinates(ind.output_model.base.rho());
        let shifted = (ind.output_model.coordinates(out.rho()) - base) * (n as f64).sqrt();
        let expect = ind.g.x.transpose() * &m;
        assert!((shifted - expect).amax() < 1e-6);
    }

    #[test]
    fn transpose_map_fails_certificate() {
        let s = QuditState::from_bloch([0.3, 0.2, -0.4], &tol()).unwrap();
        let ind = build_induced_channel(&ChoiMap::transpose(2), &s, &tol()).unwrap();
        assert!(ind.cp_margin < -1e-6, "{}", ind.cp_margin);
    }
}
