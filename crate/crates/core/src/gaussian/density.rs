//! Cutoff-and-exponential weights against `mu_1` and `mu_{3/2}`.
//!
//! With `E|g|^2 = 1` the Gaussian measure `mu_{k/2}` has formal density
//! `exp(-||u||^2_{H^{k/2}} / 2)`, so the weight completing it to the conserved
//! energy is `exp(-R(S u) / 2)` with `R` the non-quadratic remainder.

use crate::energies::{energy_e1, energy_e3half, modified_e};
use crate::error::{Error, Result};
use crate::spectral::{mean_product, project, SmoothProjector, SpectralField};

pub use crate::spectral::chi_r;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityParams {
    pub n: usize,
    pub eps: f64,
    pub r: f64,
    /// Twice the index of the reference measure: 2 for `mu_1`, 3 for `mu_{3/2}`.
    pub k: u32,
}

impl DensityParams {
    pub fn new(n: usize, eps: f64, r: f64, k: u32) -> Result<Self> {
        let p = Self { n, eps, r, k };
        p.projector()?;
        if !(r > 0.0) {
            return Err(Error::invalid("R", "cutoff radius must be positive"));
        }
        Ok(p)
    }

    pub fn projector(&self) -> Result<SmoothProjector> {
        SmoothProjector::new(self.n, self.eps)
    }
}

/// `alpha_N = 2 sum_{n=1}^N 1/n`, the mean of `||pi_N u||^2_{H^{1/2}}` under `mu_1`.
pub fn alpha_n(n: usize) -> f64 {
    (1..=n).map(|k| 2.0 / k as f64).sum()
}

/// `||pi_N u||^2_{H^{1/2}} - alpha_N + 1/3 mean((S u)^3)`.
pub fn renormalized_half_energy(u: &SpectralField, s: &SmoothProjector) -> f64 {
    let su = u.apply(s);
    project(u, s.n).sobolev_norm_sq(0.5) - alpha_n(s.n) + mean_product(&[&su, &su, &su]) / 3.0
}

fn l2_factor(u: &SpectralField, p: &DensityParams) -> f64 {
    chi_r(project(u, p.n).sobolev_norm_sq(0.0).sqrt(), p.r)
}

fn projector(p: &DensityParams) -> SmoothProjector {
    p.projector().expect("validated density parameters")
}

/// `F_{N,R}^eps(u) = chi_R(||pi_N u||_{L^2}) chi_R(||pi_N u||^2_{H^{1/2}} - alpha_N + 1/3 mean((Su)^3))
///   exp(-R_1(Su)/2)`.
pub fn density_f(u: &SpectralField, p: &DensityParams) -> f64 {
    let s = projector(p);
    let c1 = l2_factor(u, p);
    if c1 == 0.0 {
        return 0.0;
    }
    let c2 = chi_r(renormalized_half_energy(u, &s), p.r);
    if c2 == 0.0 {
        return 0.0;
    }
    c1 * c2 * (-0.5 * energy_e1(&u.apply(&s)).remainder()).exp()
}

/// `H_{N,R}^eps(u)`: the `F` cutoffs without the renormalization in the second
/// factor, a third factor `chi_R(E_N^eps(pi_N u) - alpha_N)`, and weight
/// `exp(-R_{3/2}(Su)/2)`.
pub fn density_h(u: &SpectralField, p: &DensityParams) -> f64 {
    let s = projector(p);
    let c1 = l2_factor(u, p);
    if c1 == 0.0 {
        return 0.0;
    }
    let su = u.apply(&s);
    let half = project(u, p.n).sobolev_norm_sq(0.5) + mean_product(&[&su, &su, &su]) / 3.0;
    let c2 = chi_r(half, p.r);
    if c2 == 0.0 {
        return 0.0;
    }
    let c3 = chi_r(modified_e(&project(u, p.n), &s) - alpha_n(p.n), p.r);
    if c3 == 0.0 {
        return 0.0;
    }
    c1 * c2 * c3 * (-0.5 * energy_e3half(&su).remainder()).exp()
}

/// `F_{N,R}`: `density_f` with every `S` replaced by `pi_N`.
pub fn density_sharp_f(u: &SpectralField, p: &DensityParams) -> f64 {
    let pu = project(u, p.n);
    let c1 = chi_r(pu.sobolev_norm_sq(0.0).sqrt(), p.r);
    let half = pu.sobolev_norm_sq(0.5) - alpha_n(p.n) + mean_product(&[&pu, &pu, &pu]) / 3.0;
    let c2 = chi_r(half, p.r);
    if c1 * c2 == 0.0 {
        return 0.0;
    }
    c1 * c2 * (-0.5 * energy_e1(&pu).remainder()).exp()
}

/// `H_{N,R}`: `density_h` with every `S` replaced by `pi_N`.
pub fn density_sharp_h(u: &SpectralField, p: &DensityParams) -> f64 {
    let pu = project(u, p.n);
    let c1 = chi_r(pu.sobolev_norm_sq(0.0).sqrt(), p.r);
    let c2 = chi_r(pu.sobolev_norm_sq(0.5) + mean_product(&[&pu, &pu, &pu]) / 3.0, p.r);
    let c3 = chi_r(energy_e1(&pu).total - alpha_n(p.n), p.r);
    if c1 * c2 * c3 == 0.0 {
        return 0.0;
    }
    c1 * c2 * c3 * (-0.5 * energy_e3half(&pu).remainder()).exp()
}
