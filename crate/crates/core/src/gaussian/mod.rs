//! Gaussian measures `mu_{k/2}`: the law of `sum_n g_n |n|^{-k/2} e^{inx}` with
//! independent standard complex Gaussians `g_n` (`E|g|^2 = 1`, `g_{-n} = conj(g_n)`).

mod density;
mod ensemble_io;

pub use density::{
    alpha_n, chi_r, density_f, density_h, density_sharp_f, density_sharp_h, renormalized_half_energy,
    DensityParams,
};
pub use ensemble_io::{read_ensemble, write_ensemble, EnsembleHeader, EnsembleRecord, ENSEMBLE_FORMAT};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample seed: sample `i` of an ensemble with base seed `b`.
pub fn stream_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Deterministic generator for stream `index`.
pub fn stream_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(base_seed, index))
}

/// One standard complex Gaussian `(x + iy)/sqrt(2)`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// `count` independent standard complex Gaussians `g_1..g_count`, drawn in order.
pub fn gaussian_vector<R: rand::Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Complex64> {
    (0..count).map(|_| complex_gaussian(rng)).collect()
}

/// `mu_{k/2}` truncated to `0 < |n| <= n_grid`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMeasure {
    k: u32,
    n_grid: usize,
}

impl GaussianMeasure {
    /// `k` is twice the regularity index: `k = 2` is `mu_1`, `k = 3` is `mu_{3/2}`.
    pub fn new(k: u32, n_grid: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k_half", "must be at least 1/2"));
        }
        if n_grid == 0 {
            return Err(Error::invalid("n_grid", "must be positive"));
        }
        Ok(Self { k, n_grid })
    }

    pub fn mu_half(n_grid: usize) -> Self {
        Self { k: 1, n_grid: n_grid.max(1) }
    }

    pub fn mu_one(n_grid: usize) -> Self {
        Self { k: 2, n_grid: n_grid.max(1) }
    }

    pub fn mu_three_halves(n_grid: usize) -> Self {
        Self { k: 3, n_grid: n_grid.max(1) }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn k_half(&self) -> f64 {
        self.k as f64 / 2.0
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    /// Field with coefficients `g_n / n^{k/2}`.
    pub fn field_from_gaussians(&self, g: &[Complex64]) -> SpectralField {
        let s = self.k_half();
        let positive: Vec<Complex64> =
            g.iter().enumerate().map(|(i, &gn)| gn / ((i + 1) as f64).powf(s)).collect();
        SpectralField::from_positive(&positive)
    }

    pub fn sample_with_seed(&self, seed: u64) -> GaussianSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian_vector(&mut rng, self.n_grid);
        GaussianSample { k: self.k, n_grid: self.n_grid, seed, field: self.field_from_gaussians(&g) }
    }

    /// Sample `index` of the ensemble `spec`.
    pub fn sample(&self, spec: &EnsembleSpec, index: u64) -> GaussianSample {
        self.sample_with_seed(stream_seed(spec.base_seed, index))
    }

    pub fn ensemble(&self, spec: &EnsembleSpec) -> Vec<GaussianSample> {
        (0..spec.count as u64).map(|i| self.sample(spec, i)).collect()
    }

    /// Expected `H^s` (inhomogeneous) mass beyond `n_grid` relative to the retained mass,
    /// summed up to `cap` modes.
    pub fn tail_fraction(&self, s: f64, cap: usize) -> f64 {
        let w = |n: usize| (1.0 + (n * n) as f64).powf(s) / (n as f64).powf(self.k as f64);
        let kept: f64 = (1..=self.n_grid).map(w).sum();
        let tail: f64 = (self.n_grid + 1..=cap.max(self.n_grid)).map(w).sum();
        tail / kept
    }
}

/// Reproducible ensemble: sample `i` uses `stream_seed(base_seed, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub base_seed: u64,
}

impl EnsembleSpec {
    pub fn new(count: usize, base_seed: u64) -> Self {
        Self { count, base_seed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSample {
    pub k: u32,
    pub n_grid: usize,
    pub seed: u64,
    pub field: SpectralField,
}

/// Direct sampler, equivalent to `GaussianMeasure::new(k, n_grid)?.sample_with_seed(seed)`.
pub fn sample_mu(k: u32, n_grid: usize, seed: u64) -> Result<GaussianSample> {
    Ok(GaussianMeasure::new(k, n_grid)?.sample_with_seed(seed))
}
