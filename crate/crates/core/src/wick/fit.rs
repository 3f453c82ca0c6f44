//! One-constant envelope fits `value ~ C * model(parameter)`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    SqrtEps,
    Eps,
    LnNOverSqrtN,
    SqrtLnNOverN,
    Ln3NOverSqrtN,
    InverseSqrtN,
    InverseN,
}

impl DecayModel {
    pub const ALL: [DecayModel; 7] = [
        DecayModel::SqrtEps,
        DecayModel::Eps,
        DecayModel::LnNOverSqrtN,
        DecayModel::SqrtLnNOverN,
        DecayModel::Ln3NOverSqrtN,
        DecayModel::InverseSqrtN,
        DecayModel::InverseN,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecayModel::SqrtEps => "sqrt-eps",
            DecayModel::Eps => "eps",
            DecayModel::LnNOverSqrtN => "lnN-over-sqrtN",
            DecayModel::SqrtLnNOverN => "sqrt-lnN-over-N",
            DecayModel::Ln3NOverSqrtN => "ln3N-over-sqrtN",
            DecayModel::InverseSqrtN => "inverse-sqrtN",
            DecayModel::InverseN => "inverse-N",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DecayModel::SqrtEps => x.sqrt(),
            DecayModel::Eps => x,
            DecayModel::LnNOverSqrtN => x.ln() / x.sqrt(),
            DecayModel::SqrtLnNOverN => (x.ln() / x).sqrt(),
            DecayModel::Ln3NOverSqrtN => x.ln().powi(3) / x.sqrt(),
            DecayModel::InverseSqrtN => 1.0 / x.sqrt(),
            DecayModel::InverseN => 1.0 / x,
        }
    }
}

impl FromStr for DecayModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DecayModel::ALL
            .iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::invalid("model", format!("unknown decay model `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Least-squares constant `sum v m / sum m^2`.
    #[serde(deserialize_with = "crate::experiments::nan::f64_or_nan")]
    pub c: f64,
    /// `(v - C m) / (C m)` per point.
    #[serde(deserialize_with = "crate::experiments::nan::vec_or_nan")]
    pub residuals: Vec<f64>,
    #[serde(deserialize_with = "crate::experiments::nan::f64_or_nan")]
    pub max_residual: f64,
    /// Smallest constant with `v <= C m` at every point.
    #[serde(deserialize_with = "crate::experiments::nan::f64_or_nan")]
    pub c_env: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const MIN_POINTS: usize = 4;

/// Fit `(parameter, value)` pairs; `passed` when `C` is finite and positive and
/// every relative residual is below `tolerance`.
pub fn decay_fit(points: &[(f64, f64)], model: DecayModel, tolerance: f64) -> Result<DecayFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!("{} points, need {MIN_POINTS}", points.len())));
    }
    let ms: Vec<f64> = points.iter().map(|&(x, _)| model.eval(x)).collect();
    let smm: f64 = ms.iter().map(|m| m * m).sum();
    let svm: f64 = points.iter().zip(&ms).map(|(&(_, v), m)| v * m).sum();
    let c = svm / smm;
    let residuals: Vec<f64> = points.iter().zip(&ms).map(|(&(_, v), m)| (v - c * m) / (c * m)).collect();
    let max_residual = residuals.iter().fold(0.0f64, |a, r| if r.is_nan() { f64::NAN } else { a.max(r.abs()) });
    let c_env = points.iter().zip(&ms).map(|(&(_, v), m)| v / m).fold(f64::NEG_INFINITY, f64::max);
    let passed = c.is_finite() && c > 0.0 && max_residual < tolerance;
    Ok(DecayFit { model, c, residuals, max_residual, c_env, tolerance, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_constant() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e: &f64| (e, 3.7 * e.sqrt())).collect();
        let f = decay_fit(&pts, DecayModel::SqrtEps, 0.2).unwrap();
        assert!((f.c - 3.7).abs() < 1e-6 && f.passed);
        assert!(f.max_residual < 1e-12);
    }

    #[test]
    fn degenerate_data() {
        assert!(decay_fit(&[(1.0, 1.0); 3], DecayModel::Eps, 0.2).is_err());
        let f = decay_fit(&[(1.0, 0.0); 4], DecayModel::Eps, 0.2).unwrap();
        assert!(!f.passed);
        let f = decay_fit(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)], DecayModel::Eps, 0.2).unwrap();
        assert!(!f.passed);
    }

    #[test]
    fn names_round_trip() {
        for m in DecayModel::ALL {
            assert_eq!(m.name().parse::<DecayModel>().unwrap(), m);
        }
    }
}
