//! Fixtures shared by the criterion benches.

use bolab_core::gaussian::{gaussian_vector, stream_rng};
use bolab_core::{EnsembleSpec, GaussianMeasure, SpectralField};

/// A reproducible `mu_{k/2}` draw with `n` modes.
pub fn fixture(k: u32, n: usize, index: u64) -> SpectralField {
    let measure = GaussianMeasure::new(k, n).expect("valid measure");
    measure.sample(&EnsembleSpec::new(index as usize + 1, 7), index).field
}

/// Standard complex Gaussians `g_1..g_n`.
pub fn gaussian_coeffs(n: usize, index: u64) -> Vec<bolab_core::Complex64> {
    gaussian_vector(&mut stream_rng(7, index), n)
}
