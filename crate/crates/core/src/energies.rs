//! Benjamin-Ono conservation laws `E_0 .. E_{3/2}`, the modified energies built
//! on the smoothed field `S u`, and closed forms for their time derivatives
//! along the truncated flow.
//!
//! All integrals here are torus means `(1/2 pi) * integral_0^{2 pi}`, the
//! normalization under which the plain coefficient-sum norms and the
//! higher-order terms combine into exactly conserved quantities.

use serde::Serialize;

use crate::spectral::{mean_product, multiply, SmoothProjector, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyTerm {
    pub label: &'static str,
    pub degree: u32,
    pub value: f64,
}

/// Quadratic part plus labeled higher-order terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub quadratic: f64,
    pub terms: Vec<EnergyTerm>,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(quadratic: f64, terms: Vec<EnergyTerm>) -> Self {
        let total = quadratic + terms.iter().map(|t| t.value).sum::<f64>();
        Self { quadratic, terms, total }
    }

    /// Total minus the quadratic part.
    pub fn remainder(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    /// Sum of all parts of the given homogeneity degree (2 is the quadratic part).
    pub fn degree_part(&self, degree: u32) -> f64 {
        if degree == 2 {
            return self.quadratic;
        }
        self.terms.iter().filter(|t| t.degree == degree).map(|t| t.value).sum()
    }
}

fn term(label: &'static str, degree: u32, value: f64) -> EnergyTerm {
    EnergyTerm { label, degree, value }
}

/// `u u_x` as a mean-zero field.
fn u_ux(u: &SpectralField) -> SpectralField {
    multiply(u, &u.dx()).1
}

pub fn energy_e0(u: &SpectralField) -> f64 {
    u.sobolev_norm_sq(0.0)
}

/// `||u||^2_{H^{1/2}} + (1/3) mean(u^3)`.
pub fn energy_e_half(u: &SpectralField) -> f64 {
    u.sobolev_norm_sq(0.5) + mean_product(&[u, u, u]) / 3.0
}

/// `||u||^2_{H^1} + 3/4 mean(u^2 H u_x) + 1/8 mean(u^4)`.
pub fn energy_e1(u: &SpectralField) -> EnergyBreakdown {
    let hux = u.dx().hilbert();
    EnergyBreakdown::new(
        u.sobolev_norm_sq(1.0),
        vec![
            term("u^2 Hu_x", 3, 0.75 * mean_product(&[u, u, &hux])),
            term("u^4", 4, 0.125 * mean_product(&[u, u, u, u])),
        ],
    )
}

/// `||u||^2_{H^{3/2}} + mean(3/2 u u_x^2 + 1/2 u (Hu_x)^2)
///   + mean(1/3 u^3 Hu_x + 1/4 u^2 H(u u_x)) + 1/20 mean(u^5)`.
pub fn energy_e3half(u: &SpectralField) -> EnergyBreakdown {
    let ux = u.dx();
    let hux = ux.hilbert();
    let huux = u_ux(u).hilbert();
    EnergyBreakdown::new(
        u.sobolev_norm_sq(1.5),
        vec![
            term("u u_x^2", 3, 1.5 * mean_product(&[u, &ux, &ux])),
            term("u (Hu_x)^2", 3, 0.5 * mean_product(&[u, &hux, &hux])),
            term("u^3 Hu_x", 4, mean_product(&[u, u, u, &hux]) / 3.0),
            term("u^2 H(u u_x)", 4, 0.25 * mean_product(&[u, u, &huux])),
            term("u^5", 5, 0.05 * mean_product(&[u, u, u, u, u])),
        ],
    )
}

/// `||u||^2_{H^1} - ||Su||^2_{H^1} + E_1(Su)`.
pub fn modified_e(u: &SpectralField, s: &SmoothProjector) -> f64 {
    let su = u.apply(s);
    u.sobolev_norm_sq(1.0) - su.sobolev_norm_sq(1.0) + energy_e1(&su).total
}

/// `||u||^2_{H^{3/2}} - ||Su||^2_{H^{3/2}} + E_{3/2}(Su)`.
pub fn modified_g(u: &SpectralField, s: &SmoothProjector) -> f64 {
    let su = u.apply(s);
    u.sobolev_norm_sq(1.5) - su.sobolev_norm_sq(1.5) + energy_e3half(&su).total
}

/// `v = S phi`, `w = v v_x` and `P = (Id - S^2) w`, shared by both derivative formulas.
struct DefectFields {
    v: SpectralField,
    w: SpectralField,
    p: SpectralField,
}

impl DefectFields {
    fn new(phi: &SpectralField, s: &SmoothProjector) -> Self {
        let v = phi.apply(s);
        let w = u_ux(&v);
        let p = &w - &w.apply(s).apply(s);
        Self { v, w, p }
    }
}

/// The two pieces of `dE/dt`: `X4 = mean(v Hv_x P)` and `X5 = mean(v^3 P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyDerivative {
    pub quartic: f64,
    pub quintic: f64,
    pub total: f64,
}

/// `d/dt E_N^eps(pi_N u(t))` at `t = 0` along the truncated flow from `phi`:
/// `3/2 mean(v Hv_x P) + 1/2 mean(v^3 P)`.
pub fn de_dt_parts(phi: &SpectralField, s: &SmoothProjector) -> EnergyDerivative {
    let DefectFields { v, p, .. } = DefectFields::new(phi, s);
    let hvx = v.dx().hilbert();
    let quartic = 1.5 * mean_product(&[&v, &hvx, &p]);
    let quintic = 0.5 * mean_product(&[&v, &v, &v, &p]);
    EnergyDerivative { quartic, quintic, total: quartic + quintic }
}

pub fn de_dt_formula(phi: &SpectralField, s: &SmoothProjector) -> f64 {
    de_dt_parts(phi, s).total
}

/// Block decomposition of `d/dt G_N^eps(pi_N u(t))` at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GDerivative {
    /// Constituent integrals of the cubic block; they cancel exactly.
    pub cubic_terms: [f64; 4],
    pub cubic: f64,
    pub quartic: f64,
    /// `3 mean(v v_x P_x)`, part of the quartic block, identically zero.
    pub quartic_identity: f64,
    pub quintic: f64,
    pub sextic: f64,
    pub total: f64,
}

impl GDerivative {
    /// `|cubic| / max |constituent|`.
    pub fn cubic_relative(&self) -> f64 {
        let scale = self.cubic_terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if scale == 0.0 {
            0.0
        } else {
            self.cubic.abs() / scale
        }
    }
}

/// `mean(f H g_xxx)`.
fn hilbert_third(f: &SpectralField, g: &SpectralField) -> f64 {
    mean_product(&[f, &g.dx_n(3).hilbert()])
}

pub fn dg_dt_formula(phi: &SpectralField, s: &SmoothProjector) -> GDerivative {
    let DefectFields { v, w, p } = DefectFields::new(phi, s);
    let phi_n = crate::spectral::project(phi, s.n);
    let vx = v.dx();
    let hvx = vx.hilbert();
    let px = p.dx();
    let hpx = px.hilbert();

    // Derivatives of the three quadratic pieces ||pi u||^2, -||S pi u||^2 and the
    // quadratic part of E_{3/2}(S pi u).
    let sw = w.apply(s);
    let ssw = sw.apply(s);
    let cubic_terms = [
        2.0 * hilbert_third(&phi_n, &sw),
        -2.0 * hilbert_third(&ssw, &v),
        -hilbert_third(&p, &v),
        -hilbert_third(&v, &p),
    ];
    let cubic = cubic_terms.iter().sum();

    let quartic_identity = 3.0 * mean_product(&[&v, &vx, &px]);
    let quartic = 1.5 * mean_product(&[&p, &vx, &vx])
        + quartic_identity
        + 0.5 * mean_product(&[&p, &hvx, &hvx])
        + mean_product(&[&v, &hvx, &hpx]);

    let hw = w.hilbert();
    let h_pvx = multiply(&p, &vx).1.hilbert();
    let h_vpx = multiply(&v, &px).1.hilbert();
    let quintic = mean_product(&[&v, &v, &p, &hvx])
        + mean_product(&[&v, &v, &v, &hpx]) / 3.0
        + 0.5 * mean_product(&[&v, &p, &hw])
        + 0.25 * mean_product(&[&v, &v, &h_pvx])
        + 0.25 * mean_product(&[&v, &v, &h_vpx]);

    let sextic = 0.25 * mean_product(&[&v, &v, &v, &v, &p]);
    GDerivative {
        cubic_terms,
        cubic,
        quartic,
        quartic_identity,
        quintic,
        sextic,
        total: cubic + quartic + quintic + sextic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_energies() {
        let c = SpectralField::cosine(1, 1);
        assert_abs_diff_eq!(energy_e0(&c), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(energy_e_half(&c), 0.5, epsilon = 1e-15);
        let e1 = energy_e1(&c);
        assert_abs_diff_eq!(e1.quadratic, 0.5, epsilon = 1e-15);
        // mean(cos^2 x sin x) = 0 and mean(cos^4) = 3/8.
        assert_abs_diff_eq!(e1.term("u^2 Hu_x").unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e1.total, 0.5 + 3.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let z = SpectralField::zeros(4);
        assert_eq!(energy_e1(&z).total, 0.0);
        assert_eq!(energy_e3half(&z).total, 0.0);
        let s = SmoothProjector::new(8, 0.25).unwrap();
        assert_eq!(de_dt_formula(&z, &s), 0.0);
        assert_eq!(dg_dt_formula(&z, &s).total, 0.0);
    }
}
