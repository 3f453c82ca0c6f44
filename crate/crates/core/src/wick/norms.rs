//! `L^2_omega` norms of Gaussian polynomials: exact by Wick pairing within
//! charge buckets, brute-force pairwise, and Monte Carlo.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::forms::{CollapsedForm, MultilinearForm};
use super::{pair_moment, NetExponents};
use crate::error::Result;
use crate::gaussian::{gaussian_vector, stream_rng, EnsembleSpec};
use crate::stats::batch_means;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumEstimate {
    pub value: f64,
    pub method: Method,
    pub samples: usize,
    /// Standard error; 0 for exact values.
    pub se: f64,
    pub n: usize,
    pub eps: f64,
}

impl SumEstimate {
    pub fn exact(value: f64, n: usize, eps: f64) -> Self {
        Self { value, method: Method::Exact, samples: 0, se: 0.0, n, eps }
    }
}

fn exponents_of(key: &[i32]) -> NetExponents {
    NetExponents::from_tuple(key).expect("form entries are nonzero")
}

/// Monomials keyed by charge vector.
type Buckets = BTreeMap<Vec<(u32, i8)>, Vec<(NetExponents, f64)>>;

/// `sqrt(E|X|^2)` for `X = sum_t c_t g_t`, summing `c c' E[T conj T']` only
/// among monomials with the same charge vector.
pub fn l2_norm_exact(form: &CollapsedForm) -> f64 {
    let mut buckets = Buckets::new();
    for (key, c) in &form.monomials {
        if *c == 0.0 {
            continue;
        }
        let e = exponents_of(&key[..form.degree]);
        buckets.entry(e.charges()).or_default().push((e, *c));
    }
    let parts: Vec<f64> = buckets
        .into_values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|b| {
            let mut s = 0.0;
            for (i, (ei, ci)) in b.iter().enumerate() {
                s += ci * ci * pair_moment(ei, ei);
                for (ej, cj) in &b[i + 1..] {
                    s += 2.0 * ci * cj * pair_moment(ei, ej);
                }
            }
            s
        })
        .collect();
    parts.iter().sum::<f64>().max(0.0).sqrt()
}

/// Reference evaluation over all ordered pairs of raw terms, no collapsing or bucketing.
pub fn l2_norm_pairwise(form: &MultilinearForm) -> f64 {
    let exps: Vec<(NetExponents, f64)> = form.terms().map(|(t, c)| (exponents_of(t), c)).collect();
    let rows: Vec<f64> = exps
        .par_iter()
        .map(|(ei, ci)| exps.iter().map(|(ej, cj)| ci * cj * pair_moment(ei, ej)).sum::<f64>())
        .collect();
    rows.iter().sum::<f64>().max(0.0).sqrt()
}

const BATCHES: usize = 50;

/// `sqrt(mean |X|^2)` from samples of `|X|^2`, with a delta-method standard
/// error from batch means.
pub fn rms_estimate(sq: &[f64], n: usize, eps: f64) -> SumEstimate {
    let m = batch_means(sq, BATCHES);
    let value = m.mean.max(0.0).sqrt();
    let se = if value > 0.0 { m.se / (2.0 * value) } else { 0.0 };
    SumEstimate { value, method: Method::MonteCarlo, samples: sq.len(), se, n, eps }
}

/// Sampled norm from draws of `g_1..g_K`, `K` the largest frequency of the form.
pub fn l2_norm_mc(form: &CollapsedForm, spec: &EnsembleSpec, n: usize, eps: f64) -> SumEstimate {
    let k = form.max_frequency();
    let deg = form.degree;
    let sq: Vec<f64> = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.base_seed, i);
            let g = gaussian_vector(&mut rng, k);
            // table[j + k] = g_j with g_{-m} = conj(g_m)
            let mut table = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
            for m in 1..=k {
                table[k + m] = g[m - 1];
                table[k - m] = g[m - 1].conj();
            }
            let x: Complex64 = form
                .monomials
                .iter()
                .map(|(key, c)| key[..deg].iter().fold(Complex64::new(*c, 0.0), |acc, &j| acc * table[(j + k as i32) as usize]))
                .sum();
            x.norm_sqr()
        })
        .collect();
    rms_estimate(&sq, n, eps)
}

/// Sampled norm of an arbitrary functional of `g_1..g_K`.
pub fn l2_norm_functional_mc<F>(value: F, k: usize, spec: &EnsembleSpec, n: usize, eps: f64) -> Result<SumEstimate>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    let sq: Vec<f64> = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.base_seed, i);
            let g = gaussian_vector(&mut rng, k);
            value(&g).map(|x| x.norm_sqr())
        })
        .collect::<Result<_>>()?;
    Ok(rms_estimate(&sq, n, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::forms::MultilinearForm;

    #[test]
    fn single_and_orthogonal_terms() {
        let mut f = MultilinearForm::new(3);
        f.push(&[1, 2, -3], -2.5).unwrap();
        assert!((l2_norm_exact(&f.collapse()) - 2.5).abs() < 1e-15);
        assert!((l2_norm_pairwise(&f) - 2.5).abs() < 1e-15);
        f.push(&[1, 1, -2], 1.0).unwrap();
        let mut g = MultilinearForm::new(3);
        g.push(&[1, 2, -3], 1.0).unwrap();
        g.push(&[2, 2, -4], 1.0).unwrap();
        // E|g_2^2 conj(g_4)|^2 = 2.
        assert!((l2_norm_exact(&g.collapse()) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn permuted_terms_add_coherently() {
        let mut f = MultilinearForm::new(3);
        f.push(&[1, 2, -3], 1.0).unwrap();
        f.push(&[2, 1, -3], 1.0).unwrap();
        assert!((l2_norm_exact(&f.collapse()) - 2.0).abs() < 1e-15);
        assert!((l2_norm_pairwise(&f) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_functional_has_zero_se() {
        let spec = EnsembleSpec::new(200, 3);
        let est = l2_norm_functional_mc(|_| Ok(Complex64::new(3.0, 4.0)), 4, &spec, 4, 0.5).unwrap();
        assert_eq!(est.value, 5.0);
        assert_eq!(est.se, 0.0);
    }
}
