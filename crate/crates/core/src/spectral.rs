//! Real mean-zero trigonometric polynomials on the torus, Fourier multipliers,
//! smooth and sharp frequency cutoffs, and exact quadrature of products.
//!
//! Coefficients follow `u(x) = sum_j c_j e^{ijx}` with `c_{-j} = conj(c_j)`.
//! Only `j = 0..=K` is stored; index 0 is always zero.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward DFT: `X_k = sum_n x_n e^{-2 pi i k n / M}`.
pub fn fft_forward(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// In-place unnormalized inverse DFT.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5, 7}.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Equispaced collocation grid `x_m = 2 pi m / M` able to represent fields with
/// modes up to `n_modes` and integrate products of up to six of them exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    n_modes: usize,
    n_points: usize,
}

impl TorusGrid {
    pub fn new(n_modes: usize, n_points: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "must be positive"));
        }
        if n_points < 6 * n_modes + 1 {
            return Err(Error::invalid(
                "n_points",
                format!("{n_points} < 6*n_modes+1 = {}", 6 * n_modes + 1),
            ));
        }
        if next_fast_len(n_points) != n_points {
            return Err(Error::invalid("n_points", format!("{n_points} is not 7-smooth")));
        }
        Ok(Self { n_modes, n_points })
    }

    /// Smallest admissible grid for `n_modes`.
    pub fn for_modes(n_modes: usize) -> Self {
        let n_modes = n_modes.max(1);
        Self { n_modes, n_points: next_fast_len(6 * n_modes + 1) }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| 2.0 * PI * m as f64 / self.n_points as f64).collect()
    }
}

/// Real mean-zero trigonometric polynomial stored by its coefficients `c_0..=c_K`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n_modes: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); n_modes + 1] }
    }

    /// Build from the positive-mode coefficients `c_1, c_2, ...`.
    pub fn from_positive(positive: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(positive.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(positive);
        Self { coeffs }
    }

    /// Build from a full coefficient vector; `coeffs[0]` must vanish.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::invalid("coeffs", "empty coefficient vector")),
            Some(c) if c.norm() > 0.0 => Err(Error::invalid("coeffs", "mean must be zero")),
            _ => Ok(Self { coeffs }),
        }
    }

    /// `cos(jx)`, i.e. `c_{+-j} = 1/2`.
    pub fn cosine(j: usize, n_modes: usize) -> Self {
        let mut f = Self::zeros(n_modes.max(j));
        f.coeffs[j] = Complex64::new(0.5, 0.0);
        f
    }

    /// `sin(jx)`, i.e. `c_j = -i/2`.
    pub fn sine(j: usize, n_modes: usize) -> Self {
        let mut f = Self::zeros(n_modes.max(j));
        f.coeffs[j] = Complex64::new(0.0, -0.5);
        f
    }

    /// Storage size `K`.
    pub fn n_modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest mode with a nonzero coefficient (0 for the zero field).
    pub fn bandwidth(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm_sqr() > 0.0).unwrap_or(0)
    }

    /// Full coefficient vector, index 0 included.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable view of `c_1..=c_K`.
    pub fn positive_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs[1..]
    }

    /// Coefficient of `e^{ijx}` for any signed `j`; zero outside the storage.
    pub fn coeff(&self, j: i64) -> Complex64 {
        let a = j.unsigned_abs() as usize;
        match self.coeffs.get(a) {
            Some(&c) if j > 0 => c,
            Some(&c) if j < 0 => c.conj(),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Set `c_j` (and implicitly `c_{-j}`) for `j >= 1`, growing the storage.
    pub fn set(&mut self, j: usize, value: Complex64) {
        assert!(j >= 1, "the zero mode is fixed at 0");
        if j >= self.coeffs.len() {
            self.coeffs.resize(j + 1, Complex64::new(0.0, 0.0));
        }
        self.coeffs[j] = value;
    }

    /// Copy into storage of size `n_modes`, dropping or zero-padding modes.
    pub fn resized(&self, n_modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n_modes + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Apply a real-field-preserving multiplier.
    pub fn apply<M: Multiplier + ?Sized>(&self, m: &M) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
            if c.norm_sqr() > 0.0 {
                *c *= m.symbol(j);
            }
        }
        Self { coeffs }
    }

    pub fn hilbert(&self) -> Self {
        self.apply(&Hilbert)
    }

    pub fn dx(&self) -> Self {
        self.apply(&Derivative)
    }

    /// `dx^k`.
    pub fn dx_n(&self, k: u32) -> Self {
        self.apply(&DerivativePower(k))
    }

    /// Mean-zero antiderivative.
    pub fn antiderivative(&self) -> Self {
        self.apply(&Antiderivative)
    }

    /// `sum_{j != 0} |j|^{2s} |c_j|^2`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| 2.0 * (j as f64).powf(2.0 * s) * c.norm_sqr())
            .sum()
    }

    /// Inhomogeneous `sum_{j != 0} (1+j^2)^s |c_j|^2`.
    pub fn inhomogeneous_norm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| 2.0 * (1.0 + (j * j) as f64).powf(s) * c.norm_sqr())
            .sum()
    }

    /// Sobolev inner product `sum_{j != 0} |j|^{2s} c_j conj(d_j)`, which is real.
    pub fn sobolev_inner(&self, other: &Self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .skip(1)
            .map(|(j, (a, b))| 2.0 * (j as f64).powf(2.0 * s) * (a * b.conj()).re)
            .sum()
    }

    /// Point values on an `n_points` grid. No check on aliasing; see
    /// [`to_physical`] for the checked version.
    pub fn sample(&self, n_points: usize) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n_points];
        let k = self.bandwidth();
        for j in 1..=k {
            let c = self.coeffs[j];
            buf[j % n_points] += c;
            buf[(n_points - j % n_points) % n_points] += c.conj();
        }
        fft_inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Evaluate at one point by direct summation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| 2.0 * (c * Complex64::from_polar(1.0, j as f64 * x)).re)
            .sum()
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = self.resized(n - 1);
        for (o, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *o += r;
        }
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self + &(-rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

/// Point values of `f` on `grid`.
pub fn to_physical(f: &SpectralField, grid: &TorusGrid) -> Result<Vec<f64>> {
    if f.bandwidth() > grid.n_modes() {
        return Err(Error::GridTooSmall {
            needed: 6 * f.bandwidth() + 1,
            available: grid.n_points(),
        });
    }
    Ok(f.sample(grid.n_points()))
}

/// Discrete coefficients `c_j = (1/M) sum_m f(x_m) e^{-ij x_m}` for `j = 1..=n_modes`.
/// The mean of the samples is discarded.
pub fn from_physical(values: &[f64], n_modes: usize) -> Result<SpectralField> {
    let m = values.len();
    if m < 2 * n_modes + 1 {
        return Err(Error::GridTooSmall { needed: 2 * n_modes + 1, available: m });
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    let inv = 1.0 / m as f64;
    let mut coeffs: Vec<Complex64> = buf[..=n_modes].iter().map(|c| c * inv).collect();
    coeffs[0] = Complex64::new(0.0, 0.0);
    Ok(SpectralField { coeffs })
}

/// Un-normalized integral over `[0, 2 pi]` of the pointwise product of `fields`.
/// Exact for trigonometric polynomials as long as the grid resolves the product.
pub fn integrate(fields: &[&SpectralField], grid: &TorusGrid) -> Result<f64> {
    let total: usize = fields.iter().map(|f| f.bandwidth()).sum();
    if total >= grid.n_points() {
        return Err(Error::GridTooSmall { needed: total + 1, available: grid.n_points() });
    }
    Ok(2.0 * PI * mean_on(fields, grid.n_points()))
}

/// Normalized mean `(1/2 pi) * integral` of the product, on an automatically sized grid.
pub fn mean_product(fields: &[&SpectralField]) -> f64 {
    let total: usize = fields.iter().map(|f| f.bandwidth()).sum();
    if total == 0 {
        return if fields.is_empty() { 1.0 } else { 0.0 };
    }
    mean_on(fields, next_fast_len(total + 1))
}

fn mean_on(fields: &[&SpectralField], n_points: usize) -> f64 {
    let mut acc = vec![1.0; n_points];
    for f in fields {
        for (a, v) in acc.iter_mut().zip(f.sample(n_points)) {
            *a *= v;
        }
    }
    acc.iter().sum::<f64>() / n_points as f64
}

/// Product of two fields split into its mean and its mean-zero part.
pub fn multiply(a: &SpectralField, b: &SpectralField) -> (f64, SpectralField) {
    let k = a.bandwidth() + b.bandwidth();
    if k == 0 {
        return (0.0, SpectralField::zeros(1));
    }
    let m = next_fast_len(2 * k + 1);
    let prod: Vec<f64> = a.sample(m).iter().zip(b.sample(m)).map(|(x, y)| x * y).collect();
    let mean = prod.iter().sum::<f64>() / m as f64;
    let field = from_physical(&prod, k).expect("grid sized for the product");
    (mean, field)
}

/// Fourier multiplier acting on real fields. `symbol(j)` for `j >= 1`; the
/// symbol on negative modes is the conjugate.
pub trait Multiplier {
    fn symbol(&self, j: usize) -> Complex64;
}

/// `H`, symbol `-i sign(j)`.
pub struct Hilbert;

impl Multiplier for Hilbert {
    fn symbol(&self, _j: usize) -> Complex64 {
        Complex64::new(0.0, -1.0)
    }
}

/// `dx`, symbol `ij`.
pub struct Derivative;

impl Multiplier for Derivative {
    fn symbol(&self, j: usize) -> Complex64 {
        Complex64::new(0.0, j as f64)
    }
}

pub struct DerivativePower(pub u32);

impl Multiplier for DerivativePower {
    fn symbol(&self, j: usize) -> Complex64 {
        Complex64::new(0.0, j as f64).powu(self.0)
    }
}

/// Symbol `1/(ij)`.
pub struct Antiderivative;

impl Multiplier for Antiderivative {
    fn symbol(&self, j: usize) -> Complex64 {
        Complex64::new(0.0, -1.0 / j as f64)
    }
}

/// Linear Benjamin-Ono propagator `exp(-t H dxx)`, symbol `exp(-i |j| j t)`.
pub struct LinearPropagator(pub f64);

impl Multiplier for LinearPropagator {
    fn symbol(&self, j: usize) -> Complex64 {
        let j = j as f64;
        Complex64::from_polar(1.0, -j * j * self.0)
    }
}

/// `exp(-t H dxx) f`.
pub fn linear_flow(f: &SpectralField, t: f64) -> SpectralField {
    f.apply(&LinearPropagator(t))
}

/// `s(t) = f(t) / (f(t) + f(1-t))` with `f(t) = exp(-1/t)` for `t > 0`; a smooth
/// monotone step from 0 on `t <= 0` to 1 on `t >= 1`.
pub fn bump_bridge(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    let a = f(t);
    a / (a + f(1.0 - t))
}

/// Even smooth profile `psi_eps`: 1 on `[-(1-eps), 1-eps]`, 0 outside `(-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothCutoff {
    epsilon: f64,
}

impl SmoothCutoff {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid("eps", format!("{epsilon} not in (0, 1)")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 - self.epsilon {
            1.0
        } else if a >= 1.0 {
            0.0
        } else {
            bump_bridge((1.0 - a) / self.epsilon)
        }
    }

    /// `psi_eps(j / n)`.
    pub fn weight(&self, j: i64, n: usize) -> f64 {
        self.eval(j as f64 / n as f64)
    }
}

/// The smooth projector `S = S_N^eps`, symbol `psi_eps(j/N)`. Its range has
/// modes `|j| < N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothProjector {
    pub n: usize,
    pub cutoff: SmoothCutoff,
}

impl SmoothProjector {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "truncation parameter must be >= 2"));
        }
        Ok(Self { n, cutoff: SmoothCutoff::new(epsilon)? })
    }

    /// Symbol values `psi(j/N)` for `j = 0..N`.
    pub fn table(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.cutoff.weight(j as i64, self.n)).collect()
    }
}

impl Multiplier for SmoothProjector {
    fn symbol(&self, j: usize) -> Complex64 {
        Complex64::new(self.cutoff.weight(j as i64, self.n), 0.0)
    }
}

/// Sharp projector `pi_N` onto modes `|j| <= N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirichletProjector(pub usize);

impl Multiplier for DirichletProjector {
    fn symbol(&self, j: usize) -> Complex64 {
        Complex64::new(if j <= self.0 { 1.0 } else { 0.0 }, 0.0)
    }
}

/// `pi_N f`, shrinking the storage to `N` modes.
pub fn project(f: &SpectralField, n: usize) -> SpectralField {
    f.resized(n.min(f.n_modes()))
}

/// Plateau function `chi`: 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
pub fn chi(y: f64) -> f64 {
    bump_bridge(2.0 - y.abs())
}

/// `chi_R(x) = chi(x / R)`.
pub fn chi_r(x: f64, r: f64) -> f64 {
    chi(x / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_round_trip_on_grid() {
        let g = TorusGrid::new(4, 25).unwrap();
        let f = SpectralField::cosine(1, 4);
        let v = to_physical(&f, &g).unwrap();
        for (x, y) in g.points().iter().zip(&v) {
            assert_abs_diff_eq!(x.cos(), *y, epsilon = 1e-14);
        }
        let back = from_physical(&v, 4).unwrap();
        assert_abs_diff_eq!(back.coeff(1).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(4, 24).is_err());
        assert!(TorusGrid::new(4, 29).is_err());
        assert_eq!(TorusGrid::for_modes(4).n_points(), 25);
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let h = SpectralField::cosine(3, 3).hilbert();
        let s = SpectralField::sine(3, 3);
        assert_abs_diff_eq!((h.coeff(3) - s.coeff(3)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(h.dx().coeff(3), SpectralField::cosine(3, 3).dx().hilbert().coeff(3));
    }

    #[test]
    fn integrals_of_cosine_powers() {
        let g = TorusGrid::for_modes(1);
        let c = SpectralField::cosine(1, 1);
        assert_abs_diff_eq!(integrate(&[&c, &c], &g).unwrap(), PI, epsilon = 1e-13);
        assert_abs_diff_eq!(
            integrate(&[&c, &c, &c, &c], &g).unwrap(),
            3.0 * PI / 4.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn undersized_integration_grid_is_rejected() {
        let g = TorusGrid::new(2, 14).unwrap();
        let c = SpectralField::cosine(2, 2);
        assert!(integrate(&[&c; 7], &g).is_err());
        assert!(integrate(&[&c; 6], &g).is_ok());
    }

    #[test]
    fn sobolev_norm_of_cosine() {
        assert_abs_diff_eq!(SpectralField::cosine(1, 1).sobolev_norm_sq(1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_profile() {
        let psi = SmoothCutoff::new(0.25).unwrap();
        assert_eq!(psi.eval(0.75), 1.0);
        assert_eq!(psi.eval(1.0), 0.0);
        assert_eq!(psi.eval(-0.5), 1.0);
        let mid = psi.eval(0.875);
        assert!(mid > 0.0 && mid < 1.0);
        assert_abs_diff_eq!(mid, 0.5, epsilon = 1e-15);
        assert!(SmoothCutoff::new(0.0).is_err());
        assert!(SmoothCutoff::new(1.0).is_err());
    }

    #[test]
    fn chi_plateau() {
        assert_eq!(chi(0.9), 1.0);
        assert_eq!(chi(-1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert_abs_diff_eq!(chi(1.5), 0.5, epsilon = 1e-15);
        assert!(chi(1.2) > chi(1.7));
    }

    #[test]
    fn smooth_projector_stops_below_n() {
        let s = SmoothProjector::new(8, 0.3).unwrap();
        assert_eq!(s.symbol(8).re, 0.0);
        assert!(s.symbol(7).re > 0.0);
        assert_eq!(s.symbol(5).re, 1.0);
    }

    #[test]
    fn multiply_recovers_mean() {
        let c = SpectralField::cosine(2, 2);
        let (mean, rest) = multiply(&c, &c);
        assert_abs_diff_eq!(mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rest.coeff(4).re, 0.25, epsilon = 1e-15);
    }
}
