//! Pathwise distance between the smooth-cutoff densities and their sharp
//! counterparts as `N` grows.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{density_f, density_h, density_sharp_f, density_sharp_h, DensityParams, EnsembleSpec, GaussianMeasure};
use crate::stats::{mean_se, quantile, MeanEstimate};
use crate::wick::psi_defect_sum;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityConvergenceSpec {
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub r: f64,
    pub samples: EnsembleSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub n: usize,
    /// `|F^eps - F|` under `mu_1`.
    pub f_diff: MeanEstimate,
    pub f_q95: f64,
    /// `|H^eps - H|` under `mu_{3/2}`.
    pub h_diff: MeanEstimate,
    pub h_q95: f64,
    /// `sum |1 - psi psi psi|^2 / (j^2 k^2)`.
    pub psi_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityConvergence {
    pub rows: Vec<DensityRow>,
    /// Each mean at most the previous one plus their combined standard error.
    pub f_decreasing: bool,
    pub h_decreasing: bool,
    pub psi_decreasing: bool,
}

fn decreasing_within_error(m: &[MeanEstimate]) -> bool {
    m.windows(2).all(|w| w[1].mean <= w[0].mean + (w[0].se.powi(2) + w[1].se.powi(2)).sqrt())
}

/// Draws are taken once at the largest `N` and truncated, so every row sees
/// the same fields.
pub fn density_convergence(spec: &DensityConvergenceSpec) -> Result<DensityConvergence> {
    let n_max = *spec.n_list.iter().max().ok_or_else(|| Error::invalid("n_list", "empty"))?;
    if spec.samples.count < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    let mu1 = GaussianMeasure::mu_one(n_max);
    let mu32 = GaussianMeasure::mu_three_halves(n_max);
    let rows: Vec<DensityRow> = spec
        .n_list
        .iter()
        .map(|&n| {
            let pf = DensityParams::new(n, spec.eps, spec.r, 2)?;
            let ph = DensityParams::new(n, spec.eps, spec.r, 3)?;
            let (fd, hd): (Vec<f64>, Vec<f64>) = (0..spec.samples.count as u64)
                .into_par_iter()
                .map(|i| {
                    let u = mu1.sample(&spec.samples, i).field;
                    let w = mu32.sample(&spec.samples, i).field;
                    ((density_f(&u, &pf) - density_sharp_f(&u, &pf)).abs(), (density_h(&w, &ph) - density_sharp_h(&w, &ph)).abs())
                })
                .unzip();
            Ok(DensityRow {
                n,
                f_diff: mean_se(&fd),
                f_q95: quantile(&fd, 0.95),
                h_diff: mean_se(&hd),
                h_q95: quantile(&hd, 0.95),
                psi_sum: psi_defect_sum(n, spec.eps)?,
            })
        })
        .collect::<Result<_>>()?;
    let f: Vec<MeanEstimate> = rows.iter().map(|r| r.f_diff).collect();
    let h: Vec<MeanEstimate> = rows.iter().map(|r| r.h_diff).collect();
    Ok(DensityConvergence {
        f_decreasing: decreasing_within_error(&f),
        h_decreasing: decreasing_within_error(&h),
        psi_decreasing: rows.windows(2).all(|w| w[1].psi_sum < w[0].psi_sum),
        rows,
    })
}
