//! JSON wire formats and deterministic number formatting.
//!
//! Real matrices are row-major arrays of arrays; complex entries are `[re, im]`
//! pairs. Emitted numbers are rounded to [`SIG_DIGITS`] significant digits so
//! identical inputs give byte-identical output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::RevertError;
use crate::gaussian::{GaussianChannel, HybridGaussianState, ModeSignature};
use crate::linalg::{CMat, RMat, RVec};

pub const SIG_DIGITS: usize = 12;

pub fn rows_of(a: &RMat) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<RMat, RevertError> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(RevertError::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(RMat::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

pub fn complex_rows_of(a: &CMat) -> ComplexRows {
    a.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn complex_matrix_from_rows(rows: &ComplexRows) -> Result<CMat, RevertError> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(RevertError::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nr, nc, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Rounds to `digits` significant digits; non-finite values pass through, `-0` becomes `0`.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let r: f64 = s.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Formats a float with at most [`SIG_DIGITS`] significant digits, switching to
/// exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    let r = round_sig(x, SIG_DIGITS);
    let a = r.abs();
    if r != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x, SIG_DIGITS)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to [`SIG_DIGITS`] significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "C")]
    pub classical: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl From<HybridGaussianState> for StateJson {
    fn from(s: HybridGaussianState) -> Self {
        Self {
            modes: s.sig.modes,
            classical: s.sig.classical,
            mean: s.mean.iter().copied().collect(),
            cov: rows_of(&s.cov),
        }
    }
}

impl TryFrom<StateJson> for HybridGaussianState {
    type Error = RevertError;
    fn try_from(j: StateJson) -> Result<Self, Self::Error> {
        let sig = ModeSignature::new(j.modes, j.classical)?;
        HybridGaussianState::new(sig, RVec::from_vec(j.mean), matrix_from_rows(&j.cov)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "C")]
    pub classical: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
}

impl From<GaussianChannel> for ChannelJson {
    fn from(g: GaussianChannel) -> Self {
        Self {
            modes: g.sig.modes,
            classical: g.sig.classical,
            x: rows_of(&g.x),
            y: rows_of(&g.y),
        }
    }
}

impl TryFrom<ChannelJson> for GaussianChannel {
    type Error = RevertError;
    fn try_from(j: ChannelJson) -> Result<Self, Self::Error> {
        let sig = ModeSignature::new(j.modes, j.classical)?;
        GaussianChannel::new(sig, matrix_from_rows(&j.x)?, matrix_from_rows(&j.y)?)
    }
}

/// `{X, Y}` without a signature, as nested inside a reversal problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixPairJson {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_sig(-2.0e-17, 12), -2.0e-17);
        assert_eq!(fmt_f64(0.1 + 0.2), "0.3");
        assert_eq!(fmt_f64(f64::NAN), "");
        assert_eq!(fmt_f64(5.551115123125783e-17), "5.55111512313e-17");
        assert_eq!(fmt_f64(-2.5e20), "-2.5e20");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "0");
        assert!(round_sig(f64::INFINITY, 12).is_infinite());
    }

    #[test]
    fn state_json_field_names() {
        let sig = ModeSignature::new(1, 0).unwrap();
        let s = HybridGaussianState::new(
            sig,
            RVec::from_vec(vec![1.0, 2.0]),
            RMat::identity(2, 2),
        )
        .unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["K"], 1);
        assert_eq!(v["C"], 0);
        assert_eq!(v["mean"][1], 2.0);
        assert_eq!(v["cov"][0][0], 1.0);
        let back: HybridGaussianState = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_json_rejected() {
        let bad = r#"{"K":1,"C":0,"X":[[1,0],[0]],"Y":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<GaussianChannel>(bad).is_err());
        let wrong_dim = r#"{"K":1,"C":1,"X":[[1,0],[0,1]],"Y":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<GaussianChannel>(wrong_dim).is_err());
    }

    #[test]
    fn complex_rows_roundtrip() {
        let a = CMat::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 - 0.5));
        let back = complex_matrix_from_rows(&complex_rows_of(&a)).unwrap();
        assert_eq!(a, back);
    }
}
