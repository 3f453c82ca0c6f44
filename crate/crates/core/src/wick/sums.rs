//! Scalar lattice sums over `0 < |j_i| <= N` with at most three free indices.

use crate::error::{Error, Result};
use crate::spectral::SmoothCutoff;

pub const MAX_ARITY: usize = 3;

/// `sum weight(j)` over `j in {0 < |j_i| <= N}^arity` with `predicate(j)`.
pub fn constrained_sum(
    arity: usize,
    n: usize,
    weight: impl Fn(&[i32]) -> f64,
    predicate: impl Fn(&[i32]) -> bool,
) -> Result<f64> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(Error::invalid("arity", format!("must be between 1 and {MAX_ARITY}, got {arity}")));
    }
    let n = n as i32;
    let range: Vec<i32> = (-n..=n).filter(|&j| j != 0).collect();
    let mut idx = vec![0usize; arity];
    let mut t = vec![0i32; arity];
    let mut total = 0.0;
    if range.is_empty() {
        return Ok(0.0);
    }
    loop {
        for (slot, &i) in t.iter_mut().zip(&idx) {
            *slot = range[i];
        }
        if predicate(&t) {
            total += weight(&t);
        }
        // odometer increment
        let mut pos = arity;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < range.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `sum_{j,k} |1 - psi(j)psi(k)psi(-j-k)|^2 / (j^2 k^2)` over `0 < |j|, |k|, |j+k| <= N`.
pub fn psi_defect_sum(n: usize, eps: f64) -> Result<f64> {
    let cutoff = SmoothCutoff::new(eps)?;
    let w = |j: i32| cutoff.weight(j as i64, n);
    constrained_sum(
        2,
        n,
        |t| {
            let (j, k) = (t[0], t[1]);
            let d = 1.0 - w(j) * w(k) * w(-j - k);
            d * d / ((j * j) as f64 * (k * k) as f64)
        },
        |t| {
            let s = (t[0] + t[1]).unsigned_abs() as usize;
            s > 0 && s <= n
        },
    )
}
