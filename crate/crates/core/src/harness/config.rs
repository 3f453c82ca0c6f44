//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated.
//! Only `experiment` is required, every other key has a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::CFL_LIMIT;
use crate::error::{Error, Result};
use crate::spectral::SmoothCutoff;
use crate::wick::{CancellationSet, DecayModel, FormKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Sample,
    Evolve,
    Energy,
    DerivativeMc,
    Lattice,
    CancelCheck,
    Transport,
    Converge,
    DensityDiff,
    Monotonicity,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Sample,
        Experiment::Evolve,
        Experiment::Energy,
        Experiment::DerivativeMc,
        Experiment::Lattice,
        Experiment::CancelCheck,
        Experiment::Transport,
        Experiment::Converge,
        Experiment::DensityDiff,
        Experiment::Monotonicity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::Evolve => "evolve",
            Experiment::Energy => "energy",
            Experiment::DerivativeMc => "derivative-mc",
            Experiment::Lattice => "lattice",
            Experiment::CancelCheck => "cancel-check",
            Experiment::Transport => "transport",
            Experiment::Converge => "converge",
            Experiment::DensityDiff => "density-diff",
            Experiment::Monotonicity => "monotonicity",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| Error::invalid("experiment", format!("unknown experiment `{s}`")))
    }
}

/// How lattice norms are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    /// Exact within the enumeration budget, sampled beyond it.
    Auto,
    Exact,
    MonteCarlo,
}

impl FromStr for NormMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(NormMethod::Auto),
            "exact" => Ok(NormMethod::Exact),
            "mc" | "monte-carlo" => Ok(NormMethod::MonteCarlo),
            _ => Err(Error::invalid("method", format!("unknown method `{s}` (auto, exact, mc)"))),
        }
    }
}

impl NormMethod {
    fn name(&self) -> &'static str {
        match self {
            NormMethod::Auto => "auto",
            NormMethod::Exact => "exact",
            NormMethod::MonteCarlo => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n: usize,
    /// Twice the index of the sampled Gaussian measure.
    pub k: u32,
    /// Modes per Gaussian draw; defaults to `n`.
    pub n_grid: Option<usize>,
    pub eps: f64,
    pub r: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub t: f64,
    pub dt: f64,
    pub max_phase_step: f64,
    pub samples: usize,
    pub seed: u64,
    pub rho: f64,
    pub n_ref: usize,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub form: FormKind,
    pub set: CancellationSet,
    pub method: NormMethod,
    /// Envelope for lattice sweeps; chosen from the form when absent.
    pub model: Option<DecayModel>,
    /// Finite-difference step.
    pub h: f64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_OUTPUT_DIR: &str = "bolab-out";

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n: 16,
            k: 2,
            n_grid: None,
            eps: 0.25,
            r: 10.0,
            sigma: 0.2,
            sigma_prime: 0.1,
            t: 0.1,
            dt: 1e-3,
            max_phase_step: 0.125,
            samples: 1000,
            seed: 1,
            rho: f64::INFINITY,
            n_ref: 512,
            n_list: Vec::new(),
            eps_list: Vec::new(),
            form: FormKind::QuarticE1,
            set: CancellationSet::E1Flat,
            method: NormMethod::Auto,
            model: None,
            h: 1e-4,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    pub fn grid(&self) -> usize {
        self.n_grid.unwrap_or(self.n)
    }

    /// Apply one `key = value` setting.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = v.parse()?,
            "N" => self.n = parse(key, v)?,
            "k" => self.k = parse(key, v)?,
            "N_grid" => self.n_grid = Some(parse(key, v)?),
            "eps" => self.eps = parse(key, v)?,
            "R" => self.r = parse(key, v)?,
            "sigma" => self.sigma = parse(key, v)?,
            "sigma_prime" => self.sigma_prime = parse(key, v)?,
            "t" => self.t = parse(key, v)?,
            "dt" => self.dt = parse(key, v)?,
            "max_phase_step" => self.max_phase_step = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "rho" => self.rho = parse(key, v)?,
            "N_ref" => self.n_ref = parse(key, v)?,
            "N_list" => self.n_list = parse_list(key, v)?,
            "eps_list" => self.eps_list = parse_list(key, v)?,
            "form" => self.form = v.parse()?,
            "set" => self.set = v.parse()?,
            "method" => self.method = v.parse()?,
            "model" => self.model = Some(v.parse()?),
            "h" => self.h = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(Error::invalid(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
            let k = k.trim().to_string();
            if pairs.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::invalid(&k, "key given twice"));
            }
        }
        let exp = pairs.remove("experiment").ok_or_else(|| Error::invalid("experiment", "missing required key"))?;
        let mut cfg = RunConfig::new(exp.parse()?);
        for (k, v) in &pairs {
            cfg.set_key(k, v)?;
        }
        Ok(cfg)
    }

    /// Canonical text form; `parse_str(emit())` reproduces the config.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.name().into());
        kv("N", self.n.to_string());
        kv("k", self.k.to_string());
        if let Some(g) = self.n_grid {
            kv("N_grid", g.to_string());
        }
        kv("eps", fmt_f(self.eps));
        kv("R", fmt_f(self.r));
        kv("sigma", fmt_f(self.sigma));
        kv("sigma_prime", fmt_f(self.sigma_prime));
        kv("t", fmt_f(self.t));
        kv("dt", fmt_f(self.dt));
        kv("max_phase_step", fmt_f(self.max_phase_step));
        kv("samples", self.samples.to_string());
        kv("seed", self.seed.to_string());
        kv("rho", fmt_f(self.rho));
        kv("N_ref", self.n_ref.to_string());
        if !self.n_list.is_empty() {
            kv("N_list", self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
        }
        if !self.eps_list.is_empty() {
            kv("eps_list", self.eps_list.iter().map(|&e| fmt_f(e)).collect::<Vec<_>>().join(","));
        }
        kv("form", self.form.name().into());
        kv("set", self.set.name().into());
        kv("method", self.method.name().into());
        if let Some(m) = self.model {
            kv("model", m.name().into());
        }
        kv("h", fmt_f(self.h));
        kv("output_dir", self.output_dir.display().to_string());
        s
    }

    /// Per-experiment constraints, checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let e = self.experiment;
        if self.n < 2 {
            return Err(Error::invalid("N", "must be at least 2"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k", "must be positive"));
        }
        SmoothCutoff::new(self.eps).map_err(|_| Error::invalid("eps", format!("{} not in (0, 1)", self.eps)))?;
        for &x in &self.eps_list {
            SmoothCutoff::new(x).map_err(|_| Error::invalid("eps_list", format!("{x} not in (0, 1)")))?;
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::invalid("N_list", "every N must be at least 2"));
        }
        if self.grid() < self.n {
            return Err(Error::invalid("N_grid", format!("{} < N = {}", self.grid(), self.n)));
        }
        if self.samples == 0 && !matches!(e, Experiment::CancelCheck | Experiment::Lattice) {
            return Err(Error::invalid("samples", "must be positive"));
        }
        if !(self.r > 0.0) {
            return Err(Error::invalid("R", "must be positive"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::invalid("rho", "must be positive"));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::invalid("t", "must be finite and non-negative"));
        }
        if !(self.max_phase_step > 0.0) {
            return Err(Error::invalid("max_phase_step", "must be positive"));
        }
        if !(self.h > 0.0) {
            return Err(Error::invalid("h", "must be positive"));
        }
        let flows = matches!(e, Experiment::Evolve | Experiment::Transport | Experiment::Converge);
        if flows {
            if !(self.dt > 0.0) {
                return Err(Error::invalid("dt", "must be positive"));
            }
            let largest = self.n_list.iter().copied().chain([self.n]).max().unwrap_or(self.n);
            // converge and transport clamp dt per N; evolve uses dt as given
            if e == Experiment::Evolve {
                let cfl = self.dt * (largest * largest) as f64;
                if cfl > CFL_LIMIT {
                    return Err(Error::invalid("dt", format!("CFL guard dt*N^2 <= {CFL_LIMIT} violated ({cfl})")));
                }
            }
        }
        if matches!(e, Experiment::Converge) {
            if self.n_list.len() < 2 {
                return Err(Error::invalid("N_list", "converge needs at least two values"));
            }
            let largest = *self.n_list.iter().max().expect("non-empty");
            if self.n_ref < 4 * largest {
                return Err(Error::invalid("N_ref", format!("{} < 4 x largest N {largest}", self.n_ref)));
            }
            if !(self.sigma > self.sigma_prime && self.sigma_prime >= 0.0) {
                return Err(Error::invalid("sigma", "require sigma > sigma_prime >= 0"));
            }
        }
        if matches!(e, Experiment::Transport | Experiment::Monotonicity) && !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(Error::invalid("sigma", "must lie in (0, 1/2)"));
        }
        if matches!(e, Experiment::Lattice | Experiment::CancelCheck) {
            let kind = if e == Experiment::CancelCheck { self.set.form() } else { self.form };
            let ns: Vec<usize> = if self.n_list.is_empty() { vec![self.n] } else { self.n_list.clone() };
            let exact_needed = e == Experiment::CancelCheck || self.method == NormMethod::Exact;
            if exact_needed {
                if let Some(&n) = ns.iter().find(|&&n| n > kind.exact_budget()) {
                    return Err(Error::invalid(
                        "N",
                        format!("{kind} at N = {n} exceeds the exact enumeration budget N <= {}", kind.exact_budget()),
                    ));
                }
            }
            if self.method != NormMethod::Exact && e == Experiment::Lattice && self.samples == 0 {
                return Err(Error::invalid("samples", "sampled norms need samples > 0"));
            }
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::invalid(key, format!("cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s.trim())).collect()
}

/// Shortest text that parses back to the same `f64`.
fn fmt_f(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::parse_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse_str("experiment = lattice\n").unwrap();
        assert_eq!(c, RunConfig::new(Experiment::Lattice));
        c.validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(Experiment::Transport);
        c.n_list = vec![16, 32];
        c.eps_list = vec![0.5, 0.125];
        c.rho = 2.5;
        c.eps = 0.1 + 0.2;
        assert_eq!(RunConfig::parse_str(&c.emit()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse_str("experiment = evolve\nN = 32\ndt = 0.1\n").unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("CFL guard"), "{e}");
        let e = RunConfig::parse_str("experiment = evolve\nN = x\n").unwrap_err();
        assert!(e.to_string().contains("N"), "{e}");
        let e = RunConfig::parse_str("N = 3\n").unwrap_err();
        assert!(e.to_string().contains("experiment"), "{e}");
        let e = RunConfig::parse_str("experiment = evolve\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("foo"), "{e}");
    }
}
