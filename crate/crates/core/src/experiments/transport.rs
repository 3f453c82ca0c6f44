//! Weighted mass of a Sobolev ball before and after transport by the flow.
//!
//! With `F` the density and `A` a ball, `I_0 = E[F(phi) 1_A(phi)]` and
//! `I_t = E[F(phi) 1_A(Phi(-t) phi)]`; both use the same draws, so the
//! difference is estimated from the paired values `F (1_A(phi) - 1_A(Phi(-t)phi))`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{advance, reference_flow, FlowConfig, ReferenceSpec, CFL_LIMIT};
use crate::error::{Error, Result};
use crate::gaussian::{density_f, density_sharp_f, DensityParams, EnsembleSpec, GaussianMeasure};
use crate::spectral::SpectralField;
use crate::stats::{mean_se, MeanEstimate};

/// `{u : ||u - center||_{H^{1/2 - sigma}} <= rho}`; `rho = inf` is the whole space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub rho: f64,
    pub sigma: f64,
    pub center: Option<SpectralField>,
}

impl Ball {
    pub fn new(rho: f64, sigma: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::invalid("rho", "ball radius must be positive"));
        }
        if !(sigma > 0.0 && sigma < 0.5) {
            return Err(Error::invalid("sigma", "must lie in (0, 1/2)"));
        }
        Ok(Self { rho, sigma, center: None })
    }

    pub fn everything(sigma: f64) -> Self {
        Self { rho: f64::INFINITY, sigma, center: None }
    }

    pub fn with_center(mut self, c: SpectralField) -> Self {
        self.center = Some(c);
        self
    }

    pub fn norm(&self, u: &SpectralField) -> f64 {
        let s = 0.5 - self.sigma;
        match &self.center {
            Some(c) => (u - c).inhomogeneous_norm_sq(s).sqrt(),
            None => u.inhomogeneous_norm_sq(s).sqrt(),
        }
    }

    pub fn contains(&self, u: &SpectralField) -> bool {
        self.rho.is_infinite() || self.norm(u) <= self.rho
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportSpec {
    pub n: usize,
    pub eps: f64,
    /// Cutoff radius of the density.
    pub r: f64,
    pub t: f64,
    /// Modes kept in each draw; at least `n`.
    pub n_grid: usize,
    pub dt: f64,
    pub max_phase_step: f64,
    pub samples: EnsembleSpec,
    pub ball: Ball,
}

impl TransportSpec {
    pub fn validate(&self) -> Result<()> {
        DensityParams::new(self.n, self.eps, self.r, 2)?;
        if self.n_grid < self.n {
            return Err(Error::invalid("n_grid", format!("{} < N = {}", self.n_grid, self.n)));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::invalid("t", "must be finite and non-negative"));
        }
        if self.samples.count < 2 {
            return Err(Error::invalid("samples", "need at least two samples"));
        }
        self.flow_config()?;
        Ok(())
    }

    fn flow_config(&self) -> Result<FlowConfig> {
        let dt = self.dt.min(CFL_LIMIT / (self.n * self.n) as f64);
        Ok(FlowConfig::new(self.n, self.eps, dt, self.t)?.with_max_phase_step(self.max_phase_step))
    }
}

/// Fraction of draws inside the ball below which (or above one minus which)
/// the indicator carries too little signal.
pub const TAIL_FLAG: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportCell {
    pub n: usize,
    pub eps: f64,
    pub t: f64,
    pub i0: MeanEstimate,
    pub it: MeanEstimate,
    /// Paired estimate of `I_0 - I_t`.
    pub diff: MeanEstimate,
    /// `|I_0 - I_t| / t` and its standard error; 0 at `t = 0`.
    pub slope: f64,
    pub slope_se: f64,
    pub inside_fraction: f64,
    /// Draws whose membership changed under the flow.
    pub flips: usize,
    /// Set when the ball sits in a tail of the measure.
    pub flagged: bool,
}

struct Paired {
    i0: Vec<f64>,
    it: Vec<f64>,
    inside: usize,
    flips: usize,
}

fn paired<F, M>(count: usize, density: F, map: M, ball: &Ball) -> Result<Paired>
where
    F: Fn(u64) -> (SpectralField, f64) + Sync,
    M: Fn(&SpectralField) -> Result<SpectralField> + Sync,
{
    let per: Vec<(f64, f64, bool, bool)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (phi, w) = density(i);
            let a = ball.contains(&phi);
            let b = if ball.rho.is_infinite() { true } else { ball.contains(&map(&phi)?) };
            Ok((if a { w } else { 0.0 }, if b { w } else { 0.0 }, a, b))
        })
        .collect::<Result<_>>()?;
    Ok(Paired {
        i0: per.iter().map(|p| p.0).collect(),
        it: per.iter().map(|p| p.1).collect(),
        inside: per.iter().filter(|p| p.2).count(),
        flips: per.iter().filter(|p| p.2 != p.3).count(),
    })
}

pub fn transport_experiment(spec: &TransportSpec) -> Result<TransportCell> {
    spec.validate()?;
    let params = DensityParams::new(spec.n, spec.eps, spec.r, 2)?;
    let measure = GaussianMeasure::mu_one(spec.n_grid);
    let cfg = spec.flow_config()?;
    let t = spec.t;
    let pairs = paired(
        spec.samples.count,
        |i| {
            let phi = measure.sample(&spec.samples, i).field;
            let w = density_f(&phi, &params);
            (phi, w)
        },
        |phi| if t == 0.0 { Ok(phi.clone()) } else { advance(phi, &cfg, -t) },
        &spec.ball,
    )?;
    let d: Vec<f64> = pairs.i0.iter().zip(&pairs.it).map(|(a, b)| a - b).collect();
    let diff = mean_se(&d);
    let (slope, slope_se) = if t > 0.0 { (diff.mean.abs() / t, diff.se / t) } else { (0.0, 0.0) };
    let inside_fraction = pairs.inside as f64 / spec.samples.count as f64;
    Ok(TransportCell {
        n: spec.n,
        eps: spec.eps,
        t,
        i0: mean_se(&pairs.i0),
        it: mean_se(&pairs.it),
        diff,
        slope,
        slope_se,
        inside_fraction,
        flips: pairs.flips,
        flagged: spec.ball.rho.is_finite() && !(TAIL_FLAG..=1.0 - TAIL_FLAG).contains(&inside_fraction),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportSweep {
    pub cells: Vec<TransportCell>,
    /// `slope[k+1] <= slope[k] + sqrt(se[k]^2 + se[k+1]^2)` for each consecutive pair.
    pub steps_ok: Vec<bool>,
    pub non_increasing: bool,
}

/// Runs `base` at each `(N, eps)` of `cells`, in order, with the same draws.
pub fn transport_sweep(base: &TransportSpec, cells: &[(usize, f64)]) -> Result<TransportSweep> {
    let cells: Vec<TransportCell> = cells
        .iter()
        .map(|&(n, eps)| transport_experiment(&TransportSpec { n, eps, ..base.clone() }))
        .collect::<Result<_>>()?;
    let steps_ok: Vec<bool> = cells
        .windows(2)
        .map(|w| w[1].slope <= w[0].slope + (w[0].slope_se.powi(2) + w[1].slope_se.powi(2)).sqrt())
        .collect();
    let non_increasing = steps_ok.iter().all(|&b| b);
    Ok(TransportSweep { cells, steps_ok, non_increasing })
}

/// Comparison of `rho_{1,R}(A)` with `rho_{1,R}(Phi(t) A)`, both surrogated at
/// the reference resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicitySpec {
    pub t_bar: f64,
    pub r: f64,
    pub reference: ReferenceSpec,
    pub samples: EnsembleSpec,
    pub ball: Ball,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub before: MeanEstimate,
    pub after: MeanEstimate,
    /// Paired estimate of `after - before`.
    pub diff: MeanEstimate,
    /// `diff >= -3 se`.
    pub passed: bool,
    pub flips: usize,
}

pub fn monotonicity_probe(spec: &MonotonicitySpec) -> Result<MonotonicityReport> {
    let n = spec.reference.n_ref;
    let params = DensityParams::new(n, spec.reference.eps_ref, spec.r, 2)?;
    if spec.samples.count < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    let measure = GaussianMeasure::mu_one(n);
    let t = spec.t_bar;
    let pairs = paired(
        spec.samples.count,
        |i| {
            let phi = measure.sample(&spec.samples, i).field;
            let w = density_sharp_f(&phi, &params);
            (phi, w)
        },
        |phi| if t == 0.0 { Ok(phi.clone()) } else { reference_flow(phi, -t, &spec.reference) },
        &spec.ball,
    )?;
    let d: Vec<f64> = pairs.it.iter().zip(&pairs.i0).map(|(a, b)| a - b).collect();
    let diff = mean_se(&d);
    Ok(MonotonicityReport {
        before: mean_se(&pairs.i0),
        after: mean_se(&pairs.it),
        passed: diff.mean >= -3.0 * diff.se,
        diff,
        flips: pairs.flips,
    })
}
