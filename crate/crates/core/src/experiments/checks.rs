//! Conservation along the truncated flow and the centering constant `alpha_N`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve, Direction, FlowConfig};
use crate::error::Result;
use crate::gaussian::{alpha_n, EnsembleSpec, GaussianMeasure};
use crate::spectral::project;
use crate::stats::{mean_se, MeanEstimate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    /// Per draw: largest relative change of `||pi_N u||_{L^2}`.
    pub l2_drift: Vec<f64>,
    /// Per draw: largest relative change of `||u||^2_{H^{1/2}} + 1/3 mean((Su)^3)`.
    pub half_drift: Vec<f64>,
    pub max_l2_drift: f64,
    pub max_half_drift: f64,
}

impl ConservationReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_l2_drift < tol && self.max_half_drift < tol
    }
}

/// Evolve `mu_1` draws with `n_grid = N` over `[0, cfg.t_end]`.
pub fn conservation_check(cfg: &FlowConfig, samples: &EnsembleSpec) -> Result<ConservationReport> {
    let measure = GaussianMeasure::mu_one(cfg.n);
    let per: Vec<(f64, f64)> = (0..samples.count as u64)
        .into_par_iter()
        .map(|i| {
            let phi = measure.sample(samples, i).field;
            let traj = evolve(&phi, cfg, Direction::Forward)?;
            let (_, half) = traj.max_relative_drift();
            // drift of the norm itself, not of its square
            let l2 = traj
                .diagnostics
                .iter()
                .map(|d| (d.l2.sqrt() / traj.diagnostics[0].l2.sqrt() - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((l2, half))
        })
        .collect::<Result<_>>()?;
    let l2_drift: Vec<f64> = per.iter().map(|p| p.0).collect();
    let half_drift: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(ConservationReport {
        max_l2_drift: l2_drift.iter().copied().fold(0.0, f64::max),
        max_half_drift: half_drift.iter().copied().fold(0.0, f64::max),
        l2_drift,
        half_drift,
    })
}

/// Sample mean of `||pi_N phi||^2_{H^{1/2}} - alpha_N` under `mu_1`.
pub fn alpha_centering(n: usize, samples: &EnsembleSpec) -> MeanEstimate {
    let measure = GaussianMeasure::mu_one(n);
    let v: Vec<f64> = (0..samples.count as u64)
        .into_par_iter()
        .map(|i| project(&measure.sample(samples, i).field, n).sobolev_norm_sq(0.5) - alpha_n(n))
        .collect();
    mean_se(&v)
}
