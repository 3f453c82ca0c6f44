//! Moments of products of independent standard complex Gaussians
//! `g_m` (`E|g|^2 = 1`, `g_{-m} = conj(g_m)`), lattice sums over
//! `A_N(n) = {(j_1..j_n) : 0 < |j_i| <= N, sum j_i = 0}`, and exact or
//! sampled `L^2` norms of the random polynomials `sum_t c_t g_{j_1} .. g_{j_n}`.

mod fit;
mod forms;
mod functional;
mod norms;
mod sums;

pub use fit::{decay_fit, DecayFit, DecayModel, MIN_POINTS};
pub use forms::{
    build_form, cancellation_check, CancellationOutcome, Key, collapse_form, delta_coeff, enumerate_tuples, gamma_coeff, lambda6_coeff,
    lambda_coeff, CancellationSet, CollapsedForm, FormKind, MultilinearForm, PsiTable, MAX_DEGREE,
};
pub use functional::form_functional;
pub use norms::{
    l2_norm_exact, l2_norm_functional_mc, l2_norm_mc, l2_norm_pairwise, rms_estimate, Method, SumEstimate,
};
pub use sums::{constrained_sum, psi_defect_sum, MAX_ARITY};

use crate::error::{Error, Result};

const FACTORIAL: [f64; 13] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0, 362880.0, 3628800.0, 39916800.0, 479001600.0,
];

pub(crate) fn factorial(n: usize) -> f64 {
    FACTORIAL.get(n).copied().unwrap_or_else(|| (1..=n).map(|k| k as f64).product())
}

/// `E[g^p conj(g)^q]`: `p!` when `p = q`, else 0.
pub fn wick_moment(p: usize, q: usize) -> f64 {
    if p == q {
        factorial(p)
    } else {
        0.0
    }
}

/// Exponents `(m, p_m, q_m)` of `g_m` and `conj(g_m)`, sorted by `m > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetExponents(pub Vec<(u32, u8, u8)>);

impl NetExponents {
    pub fn from_tuple(t: &[i32]) -> Result<Self> {
        let mut v: Vec<(u32, u8, u8)> = Vec::with_capacity(t.len());
        let mut sorted: Vec<i32> = t.to_vec();
        sorted.sort_by_key(|j| (j.unsigned_abs(), *j < 0));
        for &j in &sorted {
            if j == 0 {
                return Err(Error::invalid("tuple", "frequency 0 does not occur"));
            }
            let m = j.unsigned_abs();
            match v.last_mut() {
                Some(last) if last.0 == m => {
                    if j > 0 {
                        last.1 += 1
                    } else {
                        last.2 += 1
                    }
                }
                _ => v.push(if j > 0 { (m, 1, 0) } else { (m, 0, 1) }),
            }
        }
        Ok(Self(v))
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&(_, p, q)| (p + q) as usize).sum()
    }

    /// `m -> p_m - q_m`, zeros dropped.
    pub fn charges(&self) -> Vec<(u32, i8)> {
        self.0
            .iter()
            .filter(|&&(_, p, q)| p != q)
            .map(|&(m, p, q)| (m, p as i8 - q as i8))
            .collect()
    }
}

/// `E[T conj(T')]` for exponent vectors of equal charge; 0 if charges differ.
pub(crate) fn pair_moment(a: &NetExponents, b: &NetExponents) -> f64 {
    let (x, y) = (&a.0, &b.0);
    let (mut i, mut j) = (0, 0);
    let mut prod = 1.0;
    while i < x.len() || j < y.len() {
        let mx = x.get(i).map_or(u32::MAX, |e| e.0);
        let my = y.get(j).map_or(u32::MAX, |e| e.0);
        let (p, q, p2, q2) = if mx == my {
            let r = (x[i].1, x[i].2, y[j].1, y[j].2);
            i += 1;
            j += 1;
            r
        } else if mx < my {
            i += 1;
            (x[i - 1].1, x[i - 1].2, 0, 0)
        } else {
            j += 1;
            (0, 0, y[j - 1].1, y[j - 1].2)
        };
        // g^{p + q'} conj(g)^{q + p'}
        let (s, t) = ((p + q2) as usize, (q + p2) as usize);
        if s != t {
            return 0.0;
        }
        prod *= factorial(s);
    }
    prod
}

/// `E[g_{t_1}..g_{t_n} conj(g_{t'_1}..g_{t'_n})]`.
pub fn expect_pair(t: &[i32], t_prime: &[i32]) -> Result<f64> {
    Ok(pair_moment(&NetExponents::from_tuple(t)?, &NetExponents::from_tuple(t_prime)?))
}
