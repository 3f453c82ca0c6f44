//! Convergence of `Phi_N^eps(t) phi` towards the reference flow as `N` grows.

use rayon::prelude::*;
use serde::Serialize;

use super::{advance, reference_flow, FlowConfig, ReferenceSpec};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;
use crate::stats::{linear_fit, LinearFit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSpec {
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub t: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub dt: f64,
    pub max_phase_step: f64,
    pub reference: ReferenceSpec,
}

impl ConvergenceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.len() < 2 {
            return Err(Error::invalid("n_list", "need at least two truncations"));
        }
        if !(self.sigma > self.sigma_prime && self.sigma_prime >= 0.0) {
            return Err(Error::invalid("sigma", "require sigma > sigma_prime >= 0"));
        }
        let largest = *self.n_list.iter().max().expect("non-empty");
        if self.reference.n_ref < 4 * largest {
            return Err(Error::invalid(
                "n_ref",
                format!("reference resolution {} < 4 x largest N {largest}", self.reference.n_ref),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_list: Vec<usize>,
    /// `errors[i][k]`: datum `i`, truncation `n_list[k]`, in `H^{1/2 - sigma}`.
    pub errors: Vec<Vec<f64>>,
    pub mean_errors: Vec<f64>,
    /// `||phi_i||_{H^{1/2 - sigma'}}`.
    pub data_norms: Vec<f64>,
    /// Fit of `log(mean error)` against `log N`; `theta = -slope`.
    pub fit: Option<LinearFit>,
    pub theta: f64,
    pub strictly_decreasing: bool,
}

/// Errors of the truncated flows against the reference flow at time `t`.
/// A non-monotone error sequence is reported in the result, not as an error.
pub fn convergence_experiment(phis: &[SpectralField], spec: &ConvergenceSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let s_err = 0.5 - spec.sigma;
    let per_phi: Vec<Result<Vec<f64>>> = phis
        .par_iter()
        .map(|phi| {
            let reference = reference_flow(phi, spec.t, &spec.reference)?;
            spec.n_list
                .iter()
                .map(|&n| {
                    let dt = spec.dt.min(super::CFL_LIMIT / (n * n) as f64);
                    let cfg = FlowConfig::new(n, spec.eps, dt, spec.t)?.with_max_phase_step(spec.max_phase_step);
                    let u = advance(phi, &cfg, spec.t)?;
                    Ok((&u - &reference).inhomogeneous_norm_sq(s_err).sqrt())
                })
                .collect()
        })
        .collect();
    let errors: Vec<Vec<f64>> = per_phi.into_iter().collect::<Result<_>>()?;
    let k = spec.n_list.len();
    let mean_errors: Vec<f64> =
        (0..k).map(|j| errors.iter().map(|e| e[j]).sum::<f64>() / errors.len().max(1) as f64).collect();
    let strictly_decreasing = errors.iter().all(|e| e.windows(2).all(|w| w[1] < w[0]));
    let xs: Vec<f64> = spec.n_list.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let fit = if ys.iter().all(|y| y.is_finite()) { linear_fit(&xs, &ys).ok() } else { None };
    let theta = fit.as_ref().map_or(f64::NAN, |f| -f.slope);
    let data_norms =
        phis.iter().map(|p| p.inhomogeneous_norm_sq(0.5 - spec.sigma_prime).sqrt()).collect();
    Ok(ConvergenceReport { n_list: spec.n_list.clone(), errors, mean_errors, data_norms, fit, theta, strictly_decreasing })
}
