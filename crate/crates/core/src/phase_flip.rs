//! The qubit phase-flip channel: closed forms for `k★` and sweep data.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RevertError};
use crate::gaussian::Tolerances;
use crate::io::fmt_f64;
use crate::linalg::RMat;
use crate::qudit::{optimal_rate, QuditChannel, QuditState};

/// Flip parameter `p ∈ [1/2, 1]` and a Bloch vector strictly inside the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFlipConfig {
    pub p: f64,
    pub r: [f64; 3],
}

impl PhaseFlipConfig {
    pub fn new(p: f64, r: [f64; 3]) -> Result<Self> {
        let cfg = Self { p, r };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.p) {
            return Err(RevertError::Domain(format!("p = {} outside [1/2, 1]", self.p)));
        }
        let norm = self.norm();
        if !(norm > 0.0 && norm < 1.0) {
            return Err(RevertError::Domain(format!(
                "Bloch vector norm {norm} outside the open interval (0, 1)"
            )));
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Norm of the image Bloch vector `((2p−1)r_x, (2p−1)r_y, r_z)`.
    pub fn image_norm(&self) -> f64 {
        let s = 2.0 * self.p - 1.0;
        (s * s * (self.r[0].powi(2) + self.r[1].powi(2)) + self.r[2].powi(2)).sqrt()
    }

    /// Rotates about the z axis so that `r_y = 0` and `r_x ≥ 0`. The channel
    /// commutes with such rotations.
    pub fn rotated(&self) -> Self {
        Self { p: self.p, r: [self.r[0].hypot(self.r[1]), 0.0, self.r[2]] }
    }
}

/// Reference closed form of the 3×3 matrix `Xᵀ`, for `r_y = 0`.
pub fn gflip_matrix(cfg: &PhaseFlipConfig) -> Result<RMat> {
    cfg.validate()?;
    if cfg.r[1] != 0.0 {
        return Err(RevertError::Domain("closed-form transport needs r_y = 0".into()));
    }
    let PhaseFlipConfig { p, r: [rx, _, rz] } = *cfg;
    let (n, np) = (cfg.norm(), cfg.image_norm());
    let s = 2.0 * p - 1.0;
    let ratio = n / np;
    let mut xt = RMat::zeros(3, 3);
    xt[(0, 0)] = s * ratio.sqrt();
    xt[(1, 1)] = s * ratio.powf(1.5);
    xt[(2, 1)] = -4.0 * (1.0 - p) * p * rx * rz / (np * n);
    xt[(2, 2)] = np / n;
    Ok(xt)
}

/// Where a value of `k★` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KStarSource {
    ClosedForm,
    Pipeline,
}

/// `k★` from a closed form when one is known (`r_x = 0`, `r_z = 0`, or
/// `p ∈ {1/2, 1}`), otherwise from the general qudit pipeline.
pub fn closed_form_kstar(cfg: &PhaseFlipConfig, tol: &Tolerances) -> Result<(f64, KStarSource)> {
    cfg.validate()?;
    match closed_form_only(cfg) {
        Some(k) => Ok((k, KStarSource::ClosedForm)),
        None => Ok((pipeline_kstar(cfg, tol)?, KStarSource::Pipeline)),
    }
}

fn closed_form_only(cfg: &PhaseFlipConfig) -> Option<f64> {
    let c = cfg.rotated();
    let s = 2.0 * c.p - 1.0;
    let [rx, _, rz] = c.r;
    if c.p == 0.5 {
        Some(0.0)
    } else if c.p == 1.0 {
        Some(1.0)
    } else if rx == 0.0 {
        Some(s)
    } else if rz == 0.0 {
        Some((s * s * (1.0 - rx * rx) / (1.0 - s * s * rx * rx)).sqrt())
    } else {
        None
    }
}

/// `k★ = √Γ★` from the induced Gaussian problem.
pub fn pipeline_kstar(cfg: &PhaseFlipConfig, tol: &Tolerances) -> Result<f64> {
    cfg.validate()?;
    let state = QuditState::from_bloch(cfg.r, tol)?;
    let channel = QuditChannel::phase_flip(cfg.p)?;
    Ok(optimal_rate(&channel, &state, tol)?.k_star)
}

/// Grid of configurations: two families of curves in `p` and a surface in `(r_x, r_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub p_grid: Vec<f64>,
    /// Bloch norms for the curves, each in `(0, 1)`.
    pub norms: Vec<f64>,
    /// Flip parameter of the `(r_x, r_z)` surface.
    pub surface_p: f64,
    /// Values taken by both `r_x` and `r_z` on the surface.
    pub surface_grid: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            p_grid: (0..=50).map(|i| 0.5 + 0.01 * i as f64).collect(),
            norms: vec![1e-3, 0.3, 0.5, 0.8, 0.95, 0.99],
            surface_p: 0.6,
            surface_grid: (0..20).map(|i| 0.05 * i as f64).collect(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.norms.is_empty() {
            return Err(RevertError::Domain("sweep grids must be nonempty".into()));
        }
        let p_ok = |p: &f64| (0.5..=1.0).contains(p);
        if !self.p_grid.iter().all(p_ok) || !p_ok(&self.surface_p) {
            return Err(RevertError::Domain("flip parameters must lie in [1/2, 1]".into()));
        }
        if !self.norms.iter().all(|n| *n > 0.0 && *n < 1.0) {
            return Err(RevertError::Domain("Bloch norms must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Curves with `r_z = 0`, then curves with `r_z = 2r_x`, then the surface
    /// (points outside the open unit disk and the origin are skipped).
    pub fn configs(&self) -> Vec<PhaseFlipConfig> {
        let mut out = Vec::new();
        for &n in &self.norms {
            out.extend(self.p_grid.iter().map(|&p| PhaseFlipConfig { p, r: [n, 0.0, 0.0] }));
        }
        let sqrt5 = 5.0_f64.sqrt();
        for &n in &self.norms {
            out.extend(
                self.p_grid
                    .iter()
                    .map(|&p| PhaseFlipConfig { p, r: [n / sqrt5, 0.0, 2.0 * n / sqrt5] }),
            );
        }
        for &rx in &self.surface_grid {
            for &rz in &self.surface_grid {
                let cfg = PhaseFlipConfig { p: self.surface_p, r: [rx, 0.0, rz] };
                if cfg.validate().is_ok() {
                    out.push(cfg);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub r_x: f64,
    pub r_z: f64,
    pub r_norm: f64,
    /// `NaN` where no closed form is known.
    pub k_closed: f64,
    /// `NaN` where the local model is undefined (degenerate output state).
    pub k_pipeline: f64,
    pub abs_diff: f64,
}

pub fn sweep_row(cfg: &PhaseFlipConfig, tol: &Tolerances) -> SweepRow {
    let k_closed = closed_form_only(cfg).unwrap_or(f64::NAN);
    let k_pipeline = pipeline_kstar(cfg, tol).unwrap_or(f64::NAN);
    SweepRow {
        p: cfg.p,
        r_x: cfg.r[0],
        r_z: cfg.r[2],
        r_norm: cfg.norm(),
        k_closed,
        k_pipeline,
        abs_diff: (k_closed - k_pipeline).abs(),
    }
}

/// Evaluates every configuration of the spec; row order follows [`SweepSpec::configs`].
pub fn sweep(spec: &SweepSpec, tol: &Tolerances) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.configs().par_iter().map(|cfg| sweep_row(cfg, tol)).collect())
}

pub const CSV_HEADER: &str = "p,r_x,r_z,r_norm,k_closed,k_pipeline,abs_diff";

/// Writes rows as CSV with LF line endings; missing values are empty fields.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let fields = [r.p, r.r_x, r.r_z, r.r_norm, r.k_closed, r.k_pipeline, r.abs_diff];
        let line: Vec<String> = fields.iter().map(|x| fmt_f64(*x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn gflip_identity_at_p_one() {
        let x = gflip_matrix(&PhaseFlipConfig::new(1.0, [0.3, 0.0, 0.4]).unwrap()).unwrap();
        assert!(max_abs_diff(&x, &RMat::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn gflip_on_z_axis_is_diagonal() {
        let p = 0.8;
        let x = gflip_matrix(&PhaseFlipConfig::new(p, [0.0, 0.0, 0.6]).unwrap()).unwrap();
        let s = 2.0 * p - 1.0;
        let expect = RMat::from_diagonal(&crate::linalg::RVec::from_vec(vec![s, s, 1.0]));
        assert!(max_abs_diff(&x, &expect) < 1e-15);
    }

    #[test]
    fn gflip_off_diagonal_entry() {
        let cfg = PhaseFlipConfig::new(0.6, [0.3, 0.0, 0.4]).unwrap();
        let x = gflip_matrix(&cfg).unwrap();
        let np = (0.04 * 0.09 + 0.16_f64).sqrt();
        assert!((x[(2, 1)] - (-4.0 * 0.4 * 0.6 * 0.3 * 0.4 / (np * 0.5))).abs() < 1e-15);
        assert!(gflip_matrix(&PhaseFlipConfig { p: 0.6, r: [0.3, 0.1, 0.4] }).is_err());
    }

    #[test]
    fn closed_forms() {
        let (k, src) = closed_form_kstar(&PhaseFlipConfig::new(0.85, [0.0, 0.0, 0.7]).unwrap(), &tol()).unwrap();
        assert_eq!(src, KStarSource::ClosedForm);
        assert!((k - 0.7).abs() < 1e-15);
        let (k, _) = closed_form_kstar(&PhaseFlipConfig::new(0.5, [0.2, 0.0, 0.3]).unwrap(), &tol()).unwrap();
        assert_eq!(k, 0.0);
        let (k, _) = closed_form_kstar(&PhaseFlipConfig::new(0.6, [0.5, 0.0, 0.0]).unwrap(), &tol()).unwrap();
        let expect = (0.04 * 0.75 / (1.0 - 0.04 * 0.25_f64)).sqrt();
        assert!((k - expect).abs() < 1e-15);
        let (_, src) = closed_form_kstar(&PhaseFlipConfig::new(0.6, [0.3, 0.0, 0.4]).unwrap(), &tol()).unwrap();
        assert_eq!(src, KStarSource::Pipeline);
    }

    #[test]
    fn domain_errors() {
        assert!(PhaseFlipConfig::new(0.4, [0.1, 0.0, 0.0]).is_err());
        assert!(PhaseFlipConfig::new(0.7, [0.0, 0.0, 0.0]).is_err());
        assert!(PhaseFlipConfig::new(0.7, [0.8, 0.0, 0.6]).is_err());
        let spec = SweepSpec { norms: vec![0.0], ..SweepSpec::default() };
        assert_eq!(sweep(&spec, &tol()).unwrap_err().code(), "Domain");
    }

    #[test]
    fn csv_layout() {
        let spec = SweepSpec {
            p_grid: vec![0.5, 0.75],
            norms: vec![0.5],
            surface_p: 0.6,
            surface_grid: vec![0.0, 0.3],
        };
        let rows = sweep(&spec, &tol()).unwrap();
        assert_eq!(rows.len(), 2 + 2 + 3);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
        assert!(!text.contains('\r'));
        // p = 1/2 on the equator: the output state is maximally mixed.
        assert!(lines[1].ends_with(",0,,"), "{}", lines[1]);
    }
}
