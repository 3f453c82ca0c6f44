//! Cutoff weights, the multilinear forms of the energy-derivative estimates,
//! lattice enumeration over `A_N(n)`, and the exact cancellation checks.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SmoothCutoff;

pub const MAX_DEGREE: usize = 6;

/// Sorted signed frequencies padded with zeros; identifies a Gaussian monomial.
pub type Key = [i32; MAX_DEGREE];

/// `psi_eps(j/N)` for `|j| <= 2N`.
#[derive(Clone, Debug)]
pub struct PsiTable {
    n: usize,
    eps: f64,
    values: Vec<f64>,
}

impl PsiTable {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N", "must be positive"));
        }
        let cutoff = SmoothCutoff::new(eps)?;
        let m = 2 * n as i64;
        let values = (-m..=m).map(|j| cutoff.weight(j, n)).collect();
        Ok(Self { n, eps, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn at(&self, j: i32) -> f64 {
        let i = j as i64 + 2 * self.n as i64;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// `N (1 - eps)`, the edge of the flat region.
    pub fn flat_edge(&self) -> f64 {
        self.n as f64 * (1.0 - self.eps)
    }
}

fn prod_psi(psi: &PsiTable, t: &[i32]) -> f64 {
    t.iter().map(|&j| psi.at(j)).product()
}

/// `psi_a psi_b psi_c psi_d [psi^2(a+c) - 1]`.
pub fn lambda_coeff(psi: &PsiTable, a: i32, b: i32, c: i32, d: i32) -> f64 {
    let s = psi.at(a + c);
    prod_psi(psi, &[a, b, c, d]) * (s * s - 1.0)
}

/// `psi_a .. psi_e [1 - psi^2(d+e)]`.
pub fn gamma_coeff(psi: &PsiTable, t: [i32; 5]) -> f64 {
    let s = psi.at(t[3] + t[4]);
    prod_psi(psi, &t) * (1.0 - s * s)
}

/// `psi_a psi_b psi_c psi_d [1 - psi^2(c+d)]`.
pub fn delta_coeff(psi: &PsiTable, a: i32, b: i32, c: i32, d: i32) -> f64 {
    let s = psi.at(c + d);
    prod_psi(psi, &[a, b, c, d]) * (1.0 - s * s)
}

/// `psi_a .. psi_f [1 - psi^2(e+f)]`.
pub fn lambda6_coeff(psi: &PsiTable, t: [i32; 6]) -> f64 {
    let s = psi.at(t[4] + t[5]);
    prod_psi(psi, &t) * (1.0 - s * s)
}

fn sgn(j: i32) -> f64 {
    j.signum() as f64
}

fn abs_pow(j: i32, p: f64) -> f64 {
    (j.unsigned_abs() as f64).powf(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FormKind {
    /// `Lambda sign(d) / (|a||b|)`.
    QuarticE1,
    /// `Gamma sign(e) / (|a||b||c||d|)`.
    QuinticE1,
    /// `Delta |c+d| sign(d) / (|a|^{3/2}|b|^{1/2}|c|^{3/2}|d|^{1/2})`.
    QuarticGa,
    /// `Delta sign(a)sign(b)sign(d) / (|a|^{1/2}|b|^{1/2}|c|^{3/2}|d|^{1/2})`.
    QuarticGb,
    /// `Delta sign(d) / (|a|^{1/2}|b|^{1/2}|c|^{3/2}|d|^{1/2})`.
    QuarticGc,
    /// `Gamma sign(e) / (|a|^{3/2}|b|^{3/2}|c|^{1/2}|d|^{3/2}|e|^{1/2})`.
    QuinticG,
    /// `Lambda_6 sign(f) / (|a..e|^{3/2}|f|^{1/2})`.
    SexticG,
}

impl FormKind {
    pub const ALL: [FormKind; 7] = [
        FormKind::QuarticE1,
        FormKind::QuinticE1,
        FormKind::QuarticGa,
        FormKind::QuarticGb,
        FormKind::QuarticGc,
        FormKind::QuinticG,
        FormKind::SexticG,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FormKind::QuarticE1 => "quartic-E1",
            FormKind::QuinticE1 => "quintic-E1",
            FormKind::QuarticGa => "quartic-G-a",
            FormKind::QuarticGb => "quartic-G-b",
            FormKind::QuarticGc => "quartic-G-c",
            FormKind::QuinticG => "quintic-G",
            FormKind::SexticG => "sextic-G",
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FormKind::QuarticE1 | FormKind::QuarticGa | FormKind::QuarticGb | FormKind::QuarticGc => 4,
            FormKind::QuinticE1 | FormKind::QuinticG => 5,
            FormKind::SexticG => 6,
        }
    }

    /// Index of the reference Gaussian measure (twice the regularity): 2 or 3.
    pub fn measure_k(&self) -> u32 {
        match self {
            FormKind::QuarticE1 | FormKind::QuinticE1 => 2,
            _ => 3,
        }
    }

    /// Largest `N` for exact enumeration.
    pub fn exact_budget(&self) -> usize {
        match self.degree() {
            4 => 64,
            5 => 24,
            _ => 16,
        }
    }

    pub fn coefficient(&self, psi: &PsiTable, t: &[i32]) -> f64 {
        match *self {
            FormKind::QuarticE1 => {
                let [a, b, c, d] = [t[0], t[1], t[2], t[3]];
                let l = lambda_coeff(psi, a, b, c, d);
                if l == 0.0 {
                    return 0.0;
                }
                l * sgn(d) / (abs_pow(a, 1.0) * abs_pow(b, 1.0))
            }
            FormKind::QuinticE1 => {
                let g = gamma_coeff(psi, [t[0], t[1], t[2], t[3], t[4]]);
                if g == 0.0 {
                    return 0.0;
                }
                g * sgn(t[4]) / t[..4].iter().map(|&j| abs_pow(j, 1.0)).product::<f64>()
            }
            FormKind::QuarticGa | FormKind::QuarticGb | FormKind::QuarticGc => {
                let [a, b, c, d] = [t[0], t[1], t[2], t[3]];
                let del = delta_coeff(psi, a, b, c, d);
                if del == 0.0 {
                    return 0.0;
                }
                match self {
                    FormKind::QuarticGa => {
                        del * (c + d).unsigned_abs() as f64 * sgn(d)
                            / (abs_pow(a, 1.5) * abs_pow(b, 0.5) * abs_pow(c, 1.5) * abs_pow(d, 0.5))
                    }
                    FormKind::QuarticGb => {
                        del * sgn(a) * sgn(b) * sgn(d)
                            / (abs_pow(a, 0.5) * abs_pow(b, 0.5) * abs_pow(c, 1.5) * abs_pow(d, 0.5))
                    }
                    _ => del * sgn(d) / (abs_pow(a, 0.5) * abs_pow(b, 0.5) * abs_pow(c, 1.5) * abs_pow(d, 0.5)),
                }
            }
            FormKind::QuinticG => {
                let g = gamma_coeff(psi, [t[0], t[1], t[2], t[3], t[4]]);
                if g == 0.0 {
                    return 0.0;
                }
                g * sgn(t[4])
                    / (abs_pow(t[0], 1.5)
                        * abs_pow(t[1], 1.5)
                        * abs_pow(t[2], 0.5)
                        * abs_pow(t[3], 1.5)
                        * abs_pow(t[4], 0.5))
            }
            FormKind::SexticG => {
                let l = lambda6_coeff(psi, [t[0], t[1], t[2], t[3], t[4], t[5]]);
                if l == 0.0 {
                    return 0.0;
                }
                l * sgn(t[5]) / (t[..5].iter().map(|&j| abs_pow(j, 1.5)).product::<f64>() * abs_pow(t[5], 0.5))
            }
        }
    }
}

impl FromStr for FormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormKind::ALL
            .iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::invalid("form", format!("unknown form `{s}`")))
    }
}

impl std::fmt::Display for FormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Visit every tuple of `A_N(degree)` in lexicographic order of the free entries.
pub fn enumerate_tuples(degree: usize, n: usize, mut visit: impl FnMut(&[i32])) {
    assert!((2..=MAX_DEGREE).contains(&degree), "degree out of range");
    let n = n as i32;
    let mut t = [0i32; MAX_DEGREE];
    fn rec(t: &mut [i32; MAX_DEGREE], pos: usize, degree: usize, n: i32, sum: i32, visit: &mut dyn FnMut(&[i32])) {
        if pos == degree - 1 {
            let last = -sum;
            if last != 0 && last.abs() <= n {
                t[pos] = last;
                visit(&t[..degree]);
            }
            return;
        }
        let remaining = (degree - 1 - pos) as i32;
        for j in -n..=n {
            if j == 0 {
                continue;
            }
            // The remaining entries can move the sum by at most remaining * n.
            if (sum + j).abs() > remaining * n {
                continue;
            }
            t[pos] = j;
            rec(t, pos + 1, degree, n, sum + j, visit);
        }
    }
    rec(&mut t, 0, degree, n, 0, &mut visit);
}

/// Explicit term list `(tuple, coefficient)` with nonzero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearForm {
    pub degree: usize,
    entries: Vec<i32>,
    coeffs: Vec<f64>,
}

impl MultilinearForm {
    pub fn new(degree: usize) -> Self {
        Self { degree, entries: Vec::new(), coeffs: Vec::new() }
    }

    pub fn push(&mut self, tuple: &[i32], coeff: f64) -> Result<()> {
        if tuple.len() != self.degree {
            return Err(Error::invalid("tuple", format!("length {} != degree {}", tuple.len(), self.degree)));
        }
        if tuple.contains(&0) {
            return Err(Error::invalid("tuple", "frequency 0 does not occur"));
        }
        if !coeff.is_finite() {
            return Err(Error::invalid("coeff", "must be finite"));
        }
        self.entries.extend_from_slice(tuple);
        self.coeffs.push(coeff);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn term(&self, i: usize) -> (&[i32], f64) {
        (&self.entries[i * self.degree..(i + 1) * self.degree], self.coeffs[i])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], f64)> + '_ {
        (0..self.len()).map(move |i| self.term(i))
    }

    /// Group identical monomials.
    pub fn collapse(&self) -> CollapsedForm {
        let mut acc = Collapser::new(self.degree);
        for (t, c) in self.terms() {
            acc.add(t, c);
        }
        acc.finish()
    }

    /// CSV with one row per term: the entries then the coefficient.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.degree).map(|i| format!("j{i}")).collect();
        header.push("coeff".into());
        w.write_record(&header)?;
        for (t, c) in self.terms() {
            let mut row: Vec<String> = t.iter().map(|j| j.to_string()).collect();
            row.push(format!("{c:e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Form with one coefficient per distinct monomial, sorted by monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapsedForm {
    pub degree: usize,
    pub monomials: Vec<(Key, f64)>,
}

impl CollapsedForm {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.monomials.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Largest `|j|` present.
    pub fn max_frequency(&self) -> usize {
        self.monomials
            .iter()
            .flat_map(|(k, _)| k[..self.degree].iter())
            .map(|j| j.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

pub(crate) struct Collapser {
    degree: usize,
    map: HashMap<Key, f64>,
}

impl Collapser {
    pub(crate) fn new(degree: usize) -> Self {
        Self { degree, map: HashMap::new() }
    }

    pub(crate) fn add(&mut self, t: &[i32], c: f64) {
        let mut key = [0i32; MAX_DEGREE];
        key[..self.degree].copy_from_slice(t);
        key[..self.degree].sort_unstable();
        *self.map.entry(key).or_insert(0.0) += c;
    }

    pub(crate) fn finish(self) -> CollapsedForm {
        let mut monomials: Vec<(Key, f64)> = self.map.into_iter().collect();
        monomials.sort_unstable_by_key(|m| m.0);
        CollapsedForm { degree: self.degree, monomials }
    }
}

fn check_budget(kind: FormKind, n: usize) -> Result<()> {
    if n > kind.exact_budget() {
        return Err(Error::BudgetExceeded {
            what: format!("{kind} at N = {n} (exact limit N <= {})", kind.exact_budget()),
        });
    }
    Ok(())
}

pub fn build_form(kind: FormKind, n: usize, eps: f64) -> Result<MultilinearForm> {
    check_budget(kind, n)?;
    let psi = PsiTable::new(n, eps)?;
    let mut form = MultilinearForm::new(kind.degree());
    enumerate_tuples(kind.degree(), n, |t| {
        let c = kind.coefficient(&psi, t);
        if c != 0.0 {
            form.entries.extend_from_slice(t);
            form.coeffs.push(c);
        }
    });
    Ok(form)
}

/// Collapsed form restricted to tuples accepted by `keep`, without storing raw terms.
pub fn collapse_form(
    kind: FormKind,
    n: usize,
    eps: f64,
    keep: impl Fn(&[i32], &PsiTable) -> bool,
) -> Result<CollapsedForm> {
    check_budget(kind, n)?;
    let psi = PsiTable::new(n, eps)?;
    let mut acc = Collapser::new(kind.degree());
    enumerate_tuples(kind.degree(), n, |t| {
        if keep(t, &psi) {
            let c = kind.coefficient(&psi, t);
            if c != 0.0 {
                acc.add(t, c);
            }
        }
    });
    Ok(acc.finish())
}

/// Index sets on which a quartic form cancels identically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CancellationSet {
    /// Quartic-E1 with every `|j| <= N(1-eps)`.
    E1Flat,
    /// Quartic-E1 with `|a|,|b| <= N(1-eps) < |c|,|d|`.
    E1Split,
    /// Quartic-G-a with every `|j| <= N(1-eps)`.
    GFlat,
    /// Quartic-G-a with `|a|,|c| <= N(1-eps) < max(|b|,|d|)`.
    GSplit,
}

impl CancellationSet {
    pub const ALL: [CancellationSet; 4] =
        [CancellationSet::E1Flat, CancellationSet::E1Split, CancellationSet::GFlat, CancellationSet::GSplit];

    pub fn name(&self) -> &'static str {
        match self {
            CancellationSet::E1Flat => "e1-flat",
            CancellationSet::E1Split => "e1-split",
            CancellationSet::GFlat => "g-flat",
            CancellationSet::GSplit => "g-split",
        }
    }

    pub fn form(&self) -> FormKind {
        match self {
            CancellationSet::E1Flat | CancellationSet::E1Split => FormKind::QuarticE1,
            _ => FormKind::QuarticGa,
        }
    }

    pub fn contains(&self, t: &[i32], psi: &PsiTable) -> bool {
        let edge = psi.flat_edge();
        let inside = |j: i32| (j.unsigned_abs() as f64) <= edge;
        match self {
            CancellationSet::E1Flat | CancellationSet::GFlat => t.iter().all(|&j| inside(j)),
            CancellationSet::E1Split => inside(t[0]) && inside(t[1]) && !inside(t[2]) && !inside(t[3]),
            CancellationSet::GSplit => inside(t[0]) && inside(t[2]) && !(inside(t[1]) && inside(t[3])),
        }
    }
}

impl FromStr for CancellationSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CancellationSet::ALL
            .iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::invalid("set", format!("unknown cancellation set `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CancellationOutcome {
    pub set: CancellationSet,
    pub n: usize,
    pub eps: f64,
    /// Tuples in the set with a nonzero coefficient before collapsing.
    pub raw_terms: usize,
    pub max_raw_coeff: f64,
    /// Largest collapsed coefficient; zero when the cancellation holds.
    pub residual: f64,
}

pub fn cancellation_check(set: CancellationSet, n: usize, eps: f64) -> Result<CancellationOutcome> {
    let kind = set.form();
    check_budget(kind, n)?;
    let psi = PsiTable::new(n, eps)?;
    let mut acc = Collapser::new(kind.degree());
    let mut raw_terms = 0;
    let mut max_raw_coeff = 0.0f64;
    enumerate_tuples(kind.degree(), n, |t| {
        if set.contains(t, &psi) {
            let c = kind.coefficient(&psi, t);
            if c != 0.0 {
                raw_terms += 1;
                max_raw_coeff = max_raw_coeff.max(c.abs());
                acc.add(t, c);
            }
        }
    });
    let residual = acc.finish().max_abs_coeff();
    Ok(CancellationOutcome { set, n, eps, raw_terms, max_raw_coeff, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_counts() {
        // |A_3(2)| = 6; A_2(3) = permutations of (1, 1, -2) and (-1, -1, 2).
        let mut c2 = 0;
        enumerate_tuples(2, 3, |_| c2 += 1);
        assert_eq!(c2, 6);
        let mut all = Vec::new();
        enumerate_tuples(3, 2, |t| all.push(t.to_vec()));
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|t| t.iter().sum::<i32>() == 0 && !t.contains(&0)));
    }

    #[test]
    fn brackets() {
        let psi = PsiTable::new(8, 0.25).unwrap();
        assert_eq!(lambda_coeff(&psi, 1, 2, -1, -2), 0.0);
        assert_eq!(delta_coeff(&psi, 8, 1, -1, -8), 0.0);
        let l = lambda_coeff(&psi, 5, -6, 2, -1);
        assert!(l < 0.0 && l > -1.0);
        assert_eq!(delta_coeff(&psi, 1, 6, 1, -8), 0.0);
        // psi(7/8) = 1/2 sits in the middle of the transition band.
        assert_eq!(delta_coeff(&psi, -3, -4, 4, 3), 0.75);
        assert_eq!(delta_coeff(&psi, -1, -2, 1, 2), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for k in FormKind::ALL {
            assert_eq!(k.name().parse::<FormKind>().unwrap(), k);
        }
        assert!("cubic".parse::<FormKind>().is_err());
        assert_eq!("g-split".parse::<CancellationSet>().unwrap(), CancellationSet::GSplit);
    }

    #[test]
    fn budgets_are_enforced() {
        assert!(build_form(FormKind::SexticG, 17, 0.2).is_err());
        assert!(build_form(FormKind::QuarticE1, 2, 0.5).is_ok());
    }
}
