//! The gauge transform `M = exp((i/2) S P S)` with `P g = (S z) g`, `z` the
//! mean-zero antiderivative of `u`, realized as a truncated power series.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{fft_forward, fft_inverse, next_fast_len, SmoothProjector, SpectralField};

pub const MAX_SERIES_TERMS: usize = 64;

/// Complex trigonometric polynomial with coefficients on `-K..=K`, zero mode included.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    k: usize,
    coeffs: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(k: usize) -> Self {
        Self { k, coeffs: vec![Complex64::new(0.0, 0.0); 2 * k + 1] }
    }

    pub fn from_real(u: &SpectralField) -> Self {
        let k = u.n_modes();
        let mut f = Self::zeros(k);
        for j in 1..=k as i64 {
            f.set(j, u.coeff(j));
            f.set(-j, u.coeff(-j));
        }
        f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, j: i64) -> Complex64 {
        if j.unsigned_abs() as usize > self.k {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(j + self.k as i64) as usize]
    }

    pub fn set(&mut self, j: i64, value: Complex64) {
        let a = j.unsigned_abs() as usize;
        if a > self.k {
            *self = self.resized(a);
        }
        let k = self.k as i64;
        self.coeffs[(j + k) as usize] = value;
    }

    pub fn resized(&self, k: usize) -> Self {
        let mut out = Self::zeros(k);
        let m = self.k.min(k) as i64;
        for j in -m..=m {
            out.coeffs[(j + k as i64) as usize] = self.get(j);
        }
        out
    }

    pub fn bandwidth(&self) -> usize {
        (0..=self.k as i64)
            .rev()
            .find(|&j| self.get(j).norm_sqr() > 0.0 || self.get(-j).norm_sqr() > 0.0)
            .unwrap_or(0) as usize
    }

    /// `sum_j |c_j|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_j (1 + j^2)^s |c_j|^2`.
    pub fn inhomogeneous_norm_sq(&self, s: f64) -> f64 {
        let k = self.k as i64;
        (-k..=k).map(|j| (1.0 + (j * j) as f64).powf(s) * self.get(j).norm_sqr()).sum()
    }

    fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let k = self.k as i64;
        let mut out = self.clone();
        for j in -k..=k {
            out.coeffs[(j + k) as usize] = f(j, self.get(j));
        }
        out
    }

    pub fn dx(&self) -> Self {
        self.map_modes(|j, c| c * Complex64::new(0.0, j as f64))
    }

    /// Multiplier `psi(j/N)`, shrinking storage to `|j| < N`.
    pub fn apply_smooth(&self, s: &SmoothProjector) -> Self {
        let k = self.k.min(s.n.saturating_sub(1));
        self.resized(k).map_modes(|j, c| c * s.cutoff.weight(j, s.n))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map_modes(|_, c| c * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.k.max(other.k);
        let mut out = self.resized(k);
        for j in -(k as i64)..=k as i64 {
            let v = out.get(j) + other.get(j);
            out.set(j, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `pi_{>0}`, `pi_0` and `pi_{<0}`.
    pub fn positive_part(&self) -> Self {
        self.map_modes(|j, c| if j > 0 { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn zero_part(&self) -> Self {
        self.map_modes(|j, c| if j == 0 { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn negative_part(&self) -> Self {
        self.map_modes(|j, c| if j < 0 { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Exact product with a real field.
    pub fn multiply_real(&self, a: &SpectralField) -> Self {
        let ka = a.bandwidth();
        let kg = self.bandwidth();
        let k = ka + kg;
        let m = next_fast_len(2 * k + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for j in -(kg as i64)..=kg as i64 {
            buf[j.rem_euclid(m as i64) as usize] = self.get(j);
        }
        fft_inverse(&mut buf);
        for (z, x) in buf.iter_mut().zip(a.sample(m)) {
            *z *= x;
        }
        fft_forward(&mut buf);
        let mut out = Self::zeros(k);
        let inv = 1.0 / m as f64;
        for j in -(k as i64)..=k as i64 {
            out.coeffs[(j + k as i64) as usize] = buf[j.rem_euclid(m as i64) as usize] * inv;
        }
        out
    }
}

/// `P`, `Q` and their smoothed versions for a fixed `u`.
#[derive(Clone, Debug)]
pub struct GaugeOperators {
    pub s: SmoothProjector,
    /// Mean-zero antiderivative of `u`.
    pub z: SpectralField,
    pub sz: SpectralField,
    pub su: SpectralField,
}

pub fn gauge_operators(u: &SpectralField, s: &SmoothProjector) -> GaugeOperators {
    let z = u.antiderivative();
    GaugeOperators { s: *s, sz: z.apply(s), su: u.apply(s), z }
}

impl GaugeOperators {
    /// `P g = (S z) g`.
    pub fn p(&self, g: &ComplexField) -> ComplexField {
        g.multiply_real(&self.sz)
    }

    /// `Q g = (S u) g`.
    pub fn q(&self, g: &ComplexField) -> ComplexField {
        g.multiply_real(&self.su)
    }

    pub fn sps(&self, g: &ComplexField) -> ComplexField {
        self.p(&g.apply_smooth(&self.s)).apply_smooth(&self.s)
    }

    pub fn sqs(&self, g: &ComplexField) -> ComplexField {
        self.q(&g.apply_smooth(&self.s)).apply_smooth(&self.s)
    }

    /// `sum_l (c SPS)^l g / l!`, stopping once a term drops below `tol` in `L^2`.
    fn exp_series(&self, g: &ComplexField, c: Complex64, tol: f64) -> Result<ComplexField> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        let mut sum = g.clone();
        let mut term = g.clone();
        for l in 1..=MAX_SERIES_TERMS {
            term = self.sps(&term).scale(c / l as f64);
            sum = sum.add(&term);
            let norm = term.l2_norm_sq().sqrt();
            if norm < tol {
                return Ok(sum);
            }
            if l == MAX_SERIES_TERMS {
                return Err(Error::NotConverged { terms: l, last: norm });
            }
        }
        unreachable!("loop returns on its last iteration")
    }

    pub fn apply_m(&self, g: &ComplexField, tol: f64) -> Result<ComplexField> {
        self.exp_series(g, Complex64::new(0.0, 0.5), tol)
    }

    pub fn apply_m_inverse(&self, g: &ComplexField, tol: f64) -> Result<ComplexField> {
        self.exp_series(g, Complex64::new(0.0, -0.5), tol)
    }
}

/// `w = pi_{>0}(M u)`.
pub fn gauge_w(u: &SpectralField, s: &SmoothProjector, tol: f64) -> Result<ComplexField> {
    let ops = gauge_operators(u, s);
    Ok(ops.apply_m(&ComplexField::from_real(u), tol)?.positive_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antiderivative_of_cosine_is_sine() {
        let s = SmoothProjector::new(8, 0.25).unwrap();
        let ops = gauge_operators(&SpectralField::cosine(1, 4), &s);
        assert!((ops.z.coeff(1) - SpectralField::sine(1, 4).coeff(1)).norm() < 1e-16);
        assert_eq!(ops.z.coeff(0).norm(), 0.0);
    }

    #[test]
    fn zero_u_gives_identity() {
        let s = SmoothProjector::new(8, 0.25).unwrap();
        let ops = gauge_operators(&SpectralField::zeros(4), &s);
        let mut g = ComplexField::zeros(3);
        g.set(2, Complex64::new(1.0, -2.0));
        g.set(-1, Complex64::new(0.5, 0.0));
        assert_eq!(ops.apply_m(&g, 1e-12).unwrap(), g);
    }

    #[test]
    fn series_divergence_is_reported() {
        let s = SmoothProjector::new(8, 0.25).unwrap();
        let u = SpectralField::cosine(1, 4).scale(2000.0);
        let ops = gauge_operators(&u, &s);
        let err = ops.apply_m(&ComplexField::from_real(&SpectralField::cosine(1, 4)), 1e-12);
        assert!(matches!(err, Err(Error::NotConverged { .. })));
    }
}
