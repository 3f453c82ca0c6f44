//! `L^2(mu)` norms of the time derivatives of the modified energies, by
//! sampling the closed-form derivatives and through the lattice forms.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{advance, FlowConfig};
use crate::energies::{de_dt_formula, dg_dt_formula, modified_e, modified_g, GDerivative};
use crate::error::{Error, Result};
use crate::gaussian::{EnsembleSpec, GaussianMeasure};
use crate::spectral::{project, SmoothProjector, SpectralField};
use crate::wick::{
    collapse_form, form_functional, l2_norm_exact, l2_norm_functional_mc, rms_estimate, FormKind, SumEstimate,
};

/// Sampling setup for the derivative norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeMc {
    pub n: usize,
    pub eps: f64,
    pub samples: EnsembleSpec,
    /// Keep only the modes `j <= low_pass` of each draw.
    pub low_pass: Option<usize>,
}

impl DerivativeMc {
    pub fn new(n: usize, eps: f64, samples: EnsembleSpec) -> Result<Self> {
        SmoothProjector::new(n, eps)?;
        if samples.count == 0 {
            return Err(Error::invalid("samples", "need at least one sample"));
        }
        Ok(Self { n, eps, samples, low_pass: None })
    }

    pub fn with_low_pass(mut self, band: usize) -> Self {
        self.low_pass = Some(band);
        self
    }

    fn draw(&self, k: u32, i: u64) -> SpectralField {
        let f = GaussianMeasure::new(k, self.n).expect("positive grid").sample(&self.samples, i).field;
        match self.low_pass {
            Some(b) => project(&f, b.min(self.n)).resized(self.n),
            None => f,
        }
    }
}

/// `d/dt E_N^eps` at the `i`-th `mu_1` draw of `mc`.
pub fn derivative_sample_e(mc: &DerivativeMc, i: u64) -> f64 {
    let s = SmoothProjector::new(mc.n, mc.eps).expect("validated");
    de_dt_formula(&mc.draw(2, i), &s)
}

/// Block decomposition of `d/dt G_N^eps` at the `i`-th `mu_{3/2}` draw of `mc`.
pub fn derivative_sample_g(mc: &DerivativeMc, i: u64) -> GDerivative {
    let s = SmoothProjector::new(mc.n, mc.eps).expect("validated");
    dg_dt_formula(&mc.draw(3, i), &s)
}

/// `|| d/dt E_N^eps(pi_N Phi(t) phi)|_{t=0} ||_{L^2(d mu_1)}` by sampling.
pub fn derivative_norm_mu1(mc: &DerivativeMc) -> SumEstimate {
    let sq: Vec<f64> =
        (0..mc.samples.count as u64).into_par_iter().map(|i| derivative_sample_e(mc, i).powi(2)).collect();
    rms_estimate(&sq, mc.n, mc.eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GNormEstimate {
    pub estimate: SumEstimate,
    /// Largest `|cubic| / max |cubic constituent|` over the draws.
    pub max_cubic_relative: f64,
    pub max_cubic_abs: f64,
}

/// `|| d/dt G_N^eps(pi_N Phi(t) phi)|_{t=0} ||_{L^2(d mu_{3/2})}` by sampling,
/// with the size of the cubic block on every draw.
pub fn derivative_norm_mu32(mc: &DerivativeMc) -> GNormEstimate {
    let per: Vec<(f64, f64, f64)> = (0..mc.samples.count as u64)
        .into_par_iter()
        .map(|i| {
            let d = derivative_sample_g(mc, i);
            (d.total.powi(2), d.cubic_relative(), d.cubic.abs())
        })
        .collect();
    let sq: Vec<f64> = per.iter().map(|p| p.0).collect();
    GNormEstimate {
        estimate: rms_estimate(&sq, mc.n, mc.eps),
        max_cubic_relative: per.iter().fold(0.0, |m, p| m.max(p.1)),
        max_cubic_abs: per.iter().fold(0.0, |m, p| m.max(p.2)),
    }
}

/// Norm of one lattice form: exact within the enumeration budget, otherwise
/// sampled through [`form_functional`] with `samples`.
pub fn form_norm(kind: FormKind, n: usize, eps: f64, samples: &EnsembleSpec) -> Result<SumEstimate> {
    if n <= kind.exact_budget() {
        let form = collapse_form(kind, n, eps, |_, _| true)?;
        return Ok(SumEstimate::exact(l2_norm_exact(&form), n, eps));
    }
    l2_norm_functional_mc(|g| form_functional(kind, g, n, eps), n, samples, n, eps)
}

/// `sqrt(9/4 ||Q_4||^2 + 1/4 ||Q_5||^2)` from the quartic-E1 and quintic-E1 forms;
/// their cross term vanishes since the degrees differ in parity.
pub fn e_derivative_wick_route(n: usize, eps: f64, samples: &EnsembleSpec) -> Result<SumEstimate> {
    let q4 = form_norm(FormKind::QuarticE1, n, eps, samples)?;
    let q5 = form_norm(FormKind::QuinticE1, n, eps, samples)?;
    let sq = 2.25 * q4.value.powi(2) + 0.25 * q5.value.powi(2);
    let value = sq.sqrt();
    // d value = (9/4 q4 dq4 + 1/4 q5 dq5) / value
    let se = if value > 0.0 {
        ((2.25 * q4.value * q4.se).powi(2) + (0.25 * q5.value * q5.se).powi(2)).sqrt() / value
    } else {
        0.0
    };
    let method = if q4.se == 0.0 && q5.se == 0.0 { q4.method } else { crate::wick::Method::MonteCarlo };
    Ok(SumEstimate { value, method, samples: q4.samples.max(q5.samples), se, n, eps })
}

/// Closed-form derivative against a centered difference along the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdCheck {
    pub formula: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

fn fd_check(phi: &SpectralField, n: usize, eps: f64, h: f64, energy: impl Fn(&SpectralField) -> f64, formula: f64) -> Result<FdCheck> {
    // RK4 substeps small enough that the integration error sits far below O(h^2).
    let cfg = FlowConfig::new(n, eps, h, h)?.with_max_phase_step(1e-3);
    let plus = advance(phi, &cfg, h)?;
    let minus = advance(phi, &cfg, -h)?;
    let fd = (energy(&project(&plus, n)) - energy(&project(&minus, n))) / (2.0 * h);
    let relative_error = (fd - formula).abs() / formula.abs().max(f64::MIN_POSITIVE);
    Ok(FdCheck { formula, finite_difference: fd, relative_error })
}

pub fn fd_check_e(phi: &SpectralField, n: usize, eps: f64, h: f64) -> Result<FdCheck> {
    let s = SmoothProjector::new(n, eps)?;
    fd_check(phi, n, eps, h, |u| modified_e(u, &s), de_dt_formula(phi, &s))
}

pub fn fd_check_g(phi: &SpectralField, n: usize, eps: f64, h: f64) -> Result<FdCheck> {
    let s = SmoothProjector::new(n, eps)?;
    fd_check(phi, n, eps, h, |u| modified_g(u, &s), dg_dt_formula(phi, &s).total)
}
