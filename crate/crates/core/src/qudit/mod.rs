//! Finite-dimensional states and channels, and their local Gaussian models.

mod clt;
mod induced;
mod local_model;

pub use clt::{clt_char_error, default_t_grid, CltRow};
pub use induced::{build_induced_channel, compute_x, optimal_rate, InducedGaussianChannel, QuditRate};
pub use local_model::{build_local_model, perturbed_state, LocalModel};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RevertError};
use crate::gaussian::Tolerances;
use crate::io::{complex_matrix_from_rows, complex_rows_of, ComplexRows};
use crate::linalg::{condition_number, herm_eigh, hermitian_part, max_abs_diff_c, min_eig, CMat, RMat};

/// Slack on `Tr ρ = 1` and on `Σ K†K = I`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Density matrix of a `d`-level system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuditStateJson", try_from = "QuditStateJson")]
pub struct QuditState {
    rho: CMat,
}

impl QuditState {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(rho: CMat, tol: &Tolerances) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(RevertError::DimensionMismatch(format!(
                "density matrix is {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let herm_err = max_abs_diff_c(&rho, &rho.adjoint());
        if herm_err > NORMALIZATION_TOL {
            return Err(RevertError::InvalidQuditState(format!(
                "not Hermitian (deviation {herm_err:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > NORMALIZATION_TOL {
            return Err(RevertError::InvalidQuditState(format!("trace is {tr}")));
        }
        let rho = hermitian_part(&rho);
        let min = min_eig(&rho);
        if min < -tol.psd_tol {
            return Err(RevertError::InvalidQuditState(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { rho })
    }

    /// Qubit state `(I + r·σ)/2`.
    pub fn from_bloch(r: [f64; 3], tol: &Tolerances) -> Result<Self> {
        let [x, y, z] = r;
        let rho = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5 * (1.0 + z), 0.0),
                Complex64::new(0.5 * x, -0.5 * y),
                Complex64::new(0.5 * x, 0.5 * y),
                Complex64::new(0.5 * (1.0 - z), 0.0),
            ],
        );
        Self::new(rho, tol)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    /// Bloch vector of a qubit state; `None` for other dimensions.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        (self.dim() == 2).then(|| {
            let r = &self.rho;
            [2.0 * r[(1, 0)].re, 2.0 * r[(1, 0)].im, (r[(0, 0)] - r[(1, 1)]).re]
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuditStateJson {
    pub d: usize,
    pub rho: ComplexRows,
}

impl From<QuditState> for QuditStateJson {
    fn from(s: QuditState) -> Self {
        Self { d: s.dim(), rho: complex_rows_of(&s.rho) }
    }
}

impl TryFrom<QuditStateJson> for QuditState {
    type Error = RevertError;
    fn try_from(j: QuditStateJson) -> Result<Self> {
        let rho = complex_matrix_from_rows(&j.rho)?;
        if rho.nrows() != j.d {
            return Err(RevertError::DimensionMismatch(format!(
                "d = {} but rho has {} rows",
                j.d,
                rho.nrows()
            )));
        }
        QuditState::new(rho, &Tolerances::default())
    }
}

/// A linear map on `d×d` matrices.
pub trait QuditMap {
    fn dim(&self) -> usize;
    fn apply_map(&self, a: &CMat) -> CMat;

    /// Matrix of the map acting on row-major vectorized operators.
    fn transfer_matrix(&self) -> CMat {
        let d = self.dim();
        let mut t = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = Complex64::new(1.0, 0.0);
                let out = self.apply_map(&e);
                for a in 0..d {
                    for b in 0..d {
                        t[(a * d + b, i * d + j)] = out[(a, b)];
                    }
                }
            }
        }
        t
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ C(|i⟩⟨j|)`.
    fn choi(&self) -> CMat {
        let d = self.dim();
        let mut j = CMat::zeros(d * d, d * d);
        for r in 0..d {
            for c in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(r, c)] = Complex64::new(1.0, 0.0);
                let out = self.apply_map(&e);
                for a in 0..d {
                    for b in 0..d {
                        j[(r * d + a, c * d + b)] = out[(a, b)];
                    }
                }
            }
        }
        j
    }
}

/// Completely positive trace preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuditChannelJson", try_from = "QuditChannelJson")]
pub struct QuditChannel {
    kraus: Vec<CMat>,
}

impl QuditChannel {
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| {
            RevertError::InvalidChannel("at least one Kraus operator is required".into())
        })?;
        if d == 0 || kraus.iter().any(|k| k.shape() != (d, d)) {
            return Err(RevertError::DimensionMismatch("Kraus operators must be d x d".into()));
        }
        let sum = kraus.iter().fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let err = max_abs_diff_c(&sum, &CMat::identity(d, d));
        if err > NORMALIZATION_TOL {
            return Err(RevertError::InvalidChannel(format!(
                "Kraus operators are not trace preserving (deviation {err:e})"
            )));
        }
        Ok(Self { kraus })
    }

    /// Kraus decomposition of a Choi matrix; rejects maps that are not CPTP.
    pub fn from_choi(choi: &CMat, tol: &Tolerances) -> Result<Self> {
        let n = choi.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || choi.ncols() != n || d == 0 {
            return Err(RevertError::DimensionMismatch(format!(
                "Choi matrix is {}x{}, not d^2 x d^2",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let herm_err = max_abs_diff_c(choi, &choi.adjoint());
        if herm_err > NORMALIZATION_TOL {
            return Err(RevertError::InvalidChannel(format!(
                "Choi matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let (vals, vecs) = herm_eigh(choi);
        let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if vals[0] < -tol.psd_tol * scale {
            return Err(RevertError::InvalidChannel(format!(
                "map is not completely positive (Choi min eigenvalue {:e})",
                vals[0]
            )));
        }
        let kraus = vals
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol.psd_tol * scale)
            .map(|(k, &l)| CMat::from_fn(d, d, |a, i| vecs[(i * d + a, k)] * l.sqrt()))
            .collect();
        Self::from_kraus(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMat::identity(d, d)] }
    }

    /// Unitary channel `ρ ↦ UρU†`.
    pub fn unitary(u: CMat) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    /// Qubit phase flip: Kraus operators `√p·I` and `√(1−p)·Diag(1, −1)`.
    pub fn phase_flip(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(RevertError::Domain(format!("flip parameter {p} outside [0, 1]")));
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        let e0 = CMat::identity(2, 2) * c(p.sqrt());
        let e1 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]))
            * c((1.0 - p).sqrt());
        Self::from_kraus(vec![e0, e1])
    }

    /// `ρ ↦ (1 − q)ρ + q·I/d`.
    pub fn depolarizing(d: usize, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) || d == 0 {
            return Err(RevertError::Domain(format!("depolarizing parameter {q} outside [0, 1]")));
        }
        // Uniform mixture over the d² matrix units realizes the full twirl.
        let mut kraus = vec![CMat::identity(d, d) * Complex64::new((1.0 - q).sqrt(), 0.0)];
        let w = (q / d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = Complex64::new(w, 0.0);
                kraus.push(e);
            }
        }
        Self::from_kraus(kraus)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Condition number of the map as a linear operator on `M(ℂ^d)`.
    pub fn map_condition(&self) -> f64 {
        let t = self.transfer_matrix();
        let re = RMat::from_fn(2 * t.nrows(), 2 * t.ncols(), |i, j| {
            let z = t[(i % t.nrows(), j % t.ncols())];
            match (i < t.nrows(), j < t.ncols()) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        condition_number(&re)
    }
}

impl QuditMap for QuditChannel {
    fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    fn apply_map(&self, a: &CMat) -> CMat {
        let d = self.dim();
        self.kraus.iter().fold(CMat::zeros(d, d), |acc, k| acc + k * a * k.adjoint())
    }
}

/// Arbitrary linear map given by its Choi matrix. No positivity is assumed,
/// so this can represent maps that are not channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMap {
    d: usize,
    choi: CMat,
}

impl ChoiMap {
    pub fn new(choi: CMat) -> Result<Self> {
        let n = choi.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || choi.ncols() != n {
            return Err(RevertError::DimensionMismatch("Choi matrix must be d^2 x d^2".into()));
        }
        Ok(Self { d, choi })
    }

    /// Transpose map `A ↦ Aᵀ`: positive and trace preserving, not completely positive.
    pub fn transpose(d: usize) -> Self {
        let mut choi = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                choi[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
            }
        }
        Self { d, choi }
    }
}

impl QuditMap for ChoiMap {
    fn dim(&self) -> usize {
        self.d
    }

    fn apply_map(&self, a: &CMat) -> CMat {
        let d = self.d;
        CMat::from_fn(d, d, |x, y| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += a[(i, j)] * self.choi[(i * d + x, j * d + y)];
                }
            }
            acc
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuditChannelJson {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<ComplexRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<ComplexRows>,
}

impl From<QuditChannel> for QuditChannelJson {
    fn from(c: QuditChannel) -> Self {
        Self {
            d: c.dim(),
            kraus: Some(c.kraus.iter().map(complex_rows_of).collect()),
            choi: None,
        }
    }
}

impl TryFrom<QuditChannelJson> for QuditChannel {
    type Error = RevertError;
    fn try_from(j: QuditChannelJson) -> Result<Self> {
        let c = match (j.kraus, j.choi) {
            (Some(k), None) => QuditChannel::from_kraus(
                k.iter().map(complex_matrix_from_rows).collect::<Result<Vec<_>>>()?,
            )?,
            (None, Some(choi)) => {
                QuditChannel::from_choi(&complex_matrix_from_rows(&choi)?, &Tolerances::default())?
            }
            _ => {
                return Err(RevertError::InvalidChannel(
                    "exactly one of \"kraus\" or \"choi\" must be given".into(),
                ))
            }
        };
        if c.dim() != j.d {
            return Err(RevertError::DimensionMismatch(format!(
                "d = {} but operators are {}x{}",
                j.d,
                c.dim(),
                c.dim()
            )));
        }
        Ok(c)
    }
}

/// `Σ_j K_j ρ K_j†`.
pub fn apply_qudit_channel(c: &QuditChannel, s: &QuditState) -> Result<QuditState> {
    if c.dim() != s.dim() {
        return Err(RevertError::DimensionMismatch(format!(
            "channel acts on d = {}, state has d = {}",
            c.dim(),
            s.dim()
        )));
    }
    Ok(QuditState { rho: hermitian_part(&c.apply_map(&s.rho)) })
}
