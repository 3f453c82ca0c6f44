//! Evaluation of the lattice forms at a Gaussian draw through physical-space
//! products, `O(N log N)` per draw instead of a sum over `A_N(n)`.

use num_complex::Complex64;

use super::forms::FormKind;
use crate::error::{Error, Result};
use crate::gaussian::GaussianMeasure;
use crate::spectral::{mean_product, multiply, SmoothProjector, SpectralField};

/// `sum_{A_N(n)} c_t g_{t_1} .. g_{t_n}` for the form `kind`, from `g_1..g_N`.
///
/// With `phi` built from `g` under the measure of the form, `v = S phi` and
/// `P = (Id - S^2)(v v_x)`, each form is a single mean up to a power of `i`.
pub fn form_functional(kind: FormKind, g: &[Complex64], n: usize, eps: f64) -> Result<Complex64> {
    if g.len() < n {
        return Err(Error::invalid("gaussians", format!("need {n} draws, got {}", g.len())));
    }
    let s = SmoothProjector::new(n, eps)?;
    let measure = GaussianMeasure::new(kind.measure_k(), n)?;
    let phi = measure.field_from_gaussians(&g[..n]);
    let v = phi.apply(&s);
    let vx = v.dx();
    let w = multiply(&v, &vx).1;
    let p = &w - &w.apply(&s).apply(&s);
    let hvx = vx.hilbert();
    let i = Complex64::new(0.0, 1.0);
    let m = |fs: &[&SpectralField]| mean_product(fs);
    Ok(match kind {
        FormKind::QuarticE1 => i * m(&[&v, &hvx, &p]),
        FormKind::QuinticE1 => -i * m(&[&v, &v, &v, &p]),
        FormKind::QuarticGa => -i * m(&[&v, &hvx, &p.dx().hilbert()]),
        FormKind::QuarticGb => i * m(&[&vx, &vx, &p]),
        FormKind::QuarticGc => -i * m(&[&hvx, &hvx, &p]),
        FormKind::QuinticG => -i * m(&[&v, &v, &hvx, &p]),
        FormKind::SexticG => -i * m(&[&v, &v, &v, &v, &p]),
    })
}
