//! Truncated Benjamin-Ono flow
//! `u_t + H u_xx + S(Su * Su_x) = 0`
//! integrated in the interaction picture: linear phases `exp(-i|j|j t)` are
//! applied exactly and the nonlinearity, which only touches modes `|j| < N`,
//! is advanced with classical RK4 (Lawson form).

mod convergence;
pub mod gauge;

pub use convergence::{convergence_experiment, ConvergenceReport, ConvergenceSpec};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::EnsembleRecord;
use crate::spectral::{
    fft_forward, fft_inverse, mean_product, next_fast_len, project, SmoothProjector, SpectralField,
};

pub use crate::spectral::linear_flow as linear_phase;

/// Largest admissible `dt * N^2`.
pub const CFL_LIMIT: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    pub n: usize,
    pub eps: f64,
    /// Step between conservation checks and trajectory records.
    pub dt: f64,
    pub t_end: f64,
    /// Collocation points for the pseudo-spectral product; at least `3N`.
    pub grid_points: usize,
    /// Bound on `h * (N-1)^2` for the internal RK4 step `h`; `dt` is split
    /// into as many equal substeps as needed.
    pub max_phase_step: f64,
    /// Per-step bound on the relative change of `||pi_N u||^2`.
    pub drift_limit: f64,
    /// Keep every `record_every`-th state in the trajectory.
    pub record_every: usize,
}

impl FlowConfig {
    pub fn new(n: usize, eps: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            n,
            eps,
            dt,
            t_end,
            grid_points: next_fast_len(3 * n + 1),
            max_phase_step: 0.125,
            drift_limit: 1e-6,
            record_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_phase_step(mut self, v: f64) -> Self {
        self.max_phase_step = v;
        self
    }

    pub fn with_t_end(mut self, t: f64) -> Self {
        self.t_end = t;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        SmoothProjector::new(self.n, self.eps)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "time step must be positive"));
        }
        let cfl = self.dt * (self.n * self.n) as f64;
        if cfl > CFL_LIMIT {
            return Err(Error::invalid("dt", format!("CFL guard dt*N^2 <= {CFL_LIMIT} violated ({cfl})")));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t", "final time must be finite and non-negative"));
        }
        if self.grid_points < 3 * self.n {
            return Err(Error::invalid("grid", format!("{} points < 3N", self.grid_points)));
        }
        if !(self.max_phase_step > 0.0) {
            return Err(Error::invalid("max_phase_step", "must be positive"));
        }
        Ok(())
    }

    pub fn projector(&self) -> SmoothProjector {
        SmoothProjector::new(self.n, self.eps).expect("validated flow config")
    }

    /// RK4 substeps per step of size `step`.
    pub fn substeps(&self, step: f64) -> usize {
        let k = self.n.saturating_sub(1) as f64;
        let phase = step.abs() * k * k;
        ((phase / self.max_phase_step).ceil() as usize).max(1)
    }
}

/// Conserved quantities of the truncated flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub time: f64,
    /// `||pi_N u||^2_{L^2}`.
    pub l2: f64,
    /// `||u||^2_{H^{1/2}} + 1/3 mean((Su)^3)`.
    pub half_energy: f64,
}

pub fn diagnostics(u: &SpectralField, s: &SmoothProjector, time: f64) -> Diagnostics {
    let su = u.apply(s);
    Diagnostics {
        time,
        l2: project(u, s.n).sobolev_norm_sq(0.0),
        half_energy: u.sobolev_norm_sq(0.5) + mean_product(&[&su, &su, &su]) / 3.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("a trajectory holds at least its initial state")
    }

    /// Largest relative deviation from the initial value, for `(l2, half_energy)`.
    pub fn max_relative_drift(&self) -> (f64, f64) {
        let d0 = self.diagnostics[0];
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
        self.diagnostics.iter().fold((0.0f64, 0.0f64), |(x, y), d| {
            (x.max(rel(d.l2, d0.l2)), y.max(rel(d.half_energy, d0.half_energy)))
        })
    }

    /// Checkpoint rows for persistence in the ensemble format.
    pub fn checkpoint_records(&self, sample: usize, seed: u64) -> Vec<EnsembleRecord> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&time, field)| EnsembleRecord { sample, seed, time, field: field.clone() })
            .collect()
    }
}

/// Workspace for repeated steps at fixed `(N, eps, grid)`.
pub struct TruncatedFlow {
    n: usize,
    psi: Vec<f64>,
    grid_points: usize,
    drift_limit: f64,
    buf: Vec<Complex64>,
}

impl TruncatedFlow {
    pub fn new(cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            n: cfg.n,
            psi: cfg.projector().table(),
            grid_points: cfg.grid_points,
            drift_limit: cfg.drift_limit,
            buf: vec![Complex64::new(0.0, 0.0); cfg.grid_points],
        })
    }

    /// `-S(Su * Su_x)` restricted to modes `0..N`.
    fn nonlinear(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        let m = self.grid_points;
        let buf = &mut self.buf;
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // z = v + i v_x has coefficients v_j (1 - j) at j and conj(v_j)(1 + j) at -j.
        for j in 1..self.n {
            let v = c[j] * self.psi[j];
            let jf = j as f64;
            buf[j] = v * (1.0 - jf);
            buf[m - j] = v.conj() * (1.0 + jf);
        }
        fft_inverse(buf);
        for z in buf.iter_mut() {
            *z = Complex64::new(z.re * z.im, 0.0);
        }
        fft_forward(buf);
        let inv = 1.0 / m as f64;
        out[0] = Complex64::new(0.0, 0.0);
        for j in 1..self.n {
            out[j] = -buf[j] * (self.psi[j] * inv);
        }
    }

    /// Lawson RK4 step of size `h` on the low modes `c[0..N]`.
    fn rk4(&mut self, c: &mut [Complex64], h: f64) {
        let n = self.n;
        let half: Vec<Complex64> =
            (0..n).map(|j| Complex64::from_polar(1.0, -((j * j) as f64) * h / 2.0)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
        let mut tmp = vec![zero; n];

        self.nonlinear(c, &mut k1);
        for j in 0..n {
            tmp[j] = half[j] * (c[j] + k1[j] * (h / 2.0));
        }
        self.nonlinear(&tmp, &mut k2);
        for j in 0..n {
            tmp[j] = half[j] * c[j] + k2[j] * (h / 2.0);
        }
        self.nonlinear(&tmp, &mut k3);
        for j in 0..n {
            tmp[j] = half[j] * half[j] * c[j] + half[j] * k3[j] * h;
        }
        self.nonlinear(&tmp, &mut k4);
        for j in 0..n {
            let e = half[j];
            let e2 = e * e;
            c[j] = e2 * c[j] + (e2 * k1[j] + e * (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
        }
    }

    /// Advance `u` by `step` (negative steps run backward) in `substeps` RK4 steps.
    /// `time` is only used for error reporting.
    pub fn step(&mut self, u: &mut SpectralField, step: f64, substeps: usize, time: f64) -> Result<()> {
        let n = self.n;
        if u.n_modes() + 1 < n {
            *u = u.resized(n - 1);
        }
        let before = project(u, n).sobolev_norm_sq(0.0);
        let mut low: Vec<Complex64> = u.coeffs()[..n].to_vec();
        let h = step / substeps as f64;
        for _ in 0..substeps {
            self.rk4(&mut low, h);
        }
        let coeffs = u.positive_mut();
        coeffs[..n - 1].copy_from_slice(&low[1..n]);
        for (i, c) in coeffs.iter_mut().enumerate().skip(n - 1) {
            let j = (i + 1) as f64;
            *c *= Complex64::from_polar(1.0, -j * j * step);
        }
        let after = project(u, n).sobolev_norm_sq(0.0);
        let drift = if before > 0.0 { ((after - before) / before).abs() } else { after };
        if !(drift <= self.drift_limit) {
            return Err(Error::StepRejected { time, drift, limit: self.drift_limit });
        }
        Ok(())
    }
}

/// One `dt` step of the truncated flow.
pub fn step_truncated(u: &SpectralField, cfg: &FlowConfig) -> Result<SpectralField> {
    let mut flow = TruncatedFlow::new(cfg)?;
    let mut out = u.clone();
    flow.step(&mut out, cfg.dt, cfg.substeps(cfg.dt), 0.0)?;
    Ok(out)
}

fn step_plan(cfg: &FlowConfig, duration: f64) -> Vec<f64> {
    let n_full = (duration / cfg.dt + 1e-9).floor() as usize;
    let mut steps = vec![cfg.dt; n_full];
    let rem = duration - n_full as f64 * cfg.dt;
    if rem > 1e-12 * cfg.dt {
        steps.push(rem);
    }
    steps
}

/// Integrate from `phi`, given at signed time `t0`, until `|t| = cfg.t_end`,
/// recording states and diagnostics. Backward runs use negative steps and
/// record negative times.
pub fn evolve_from(
    phi: &SpectralField,
    t0: f64,
    cfg: &FlowConfig,
    direction: Direction,
) -> Result<Trajectory> {
    let mut flow = TruncatedFlow::new(cfg)?;
    let s = cfg.projector();
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let mut u = phi.clone();
    let mut time = t0;
    let mut traj = Trajectory {
        times: vec![time],
        states: vec![u.clone()],
        diagnostics: vec![diagnostics(&u, &s, time)],
    };
    let plan = step_plan(cfg, (cfg.t_end - t0.abs()).max(0.0));
    let last = plan.len();
    for (i, h) in plan.into_iter().enumerate() {
        flow.step(&mut u, sign * h, cfg.substeps(h), time)?;
        time += sign * h;
        if (i + 1) % cfg.record_every == 0 || i + 1 == last {
            traj.times.push(time);
            traj.states.push(u.clone());
            traj.diagnostics.push(diagnostics(&u, &s, time));
        }
    }
    Ok(traj)
}

pub fn evolve(phi: &SpectralField, cfg: &FlowConfig, direction: Direction) -> Result<Trajectory> {
    evolve_from(phi, 0.0, cfg, direction)
}

/// Resume a checkpointed state and continue until `|t| = cfg.t_end`.
pub fn resume(record: &EnsembleRecord, cfg: &FlowConfig, direction: Direction) -> Result<Trajectory> {
    evolve_from(&record.field, record.time, cfg, direction)
}

/// `Phi_N^eps(t) phi` without storing intermediate states; `t < 0` runs backward.
pub fn advance(phi: &SpectralField, cfg: &FlowConfig, t: f64) -> Result<SpectralField> {
    let mut flow = TruncatedFlow::new(cfg)?;
    let mut u = phi.clone();
    let sign = t.signum();
    let mut time = 0.0;
    for h in step_plan(cfg, t.abs()) {
        flow.step(&mut u, sign * h, cfg.substeps(h), time)?;
        time += sign * h;
    }
    Ok(u)
}

/// High-resolution truncated flow standing in for the untruncated one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSpec {
    pub n_ref: usize,
    pub eps_ref: f64,
    pub dt: f64,
    pub max_phase_step: f64,
}

impl ReferenceSpec {
    pub fn new(n_ref: usize) -> Self {
        Self { n_ref, eps_ref: 0.25, dt: 1e-4, max_phase_step: 0.5 }
    }

    pub fn flow_config(&self, t: f64) -> Result<FlowConfig> {
        let dt = self.dt.min(CFL_LIMIT / (self.n_ref * self.n_ref) as f64);
        Ok(FlowConfig::new(self.n_ref, self.eps_ref, dt, t.abs())?.with_max_phase_step(self.max_phase_step))
    }
}

pub fn reference_flow(phi: &SpectralField, t: f64, spec: &ReferenceSpec) -> Result<SpectralField> {
    advance(phi, &spec.flow_config(t)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianMeasure;

    #[test]
    fn zero_field_stays_zero() {
        let cfg = FlowConfig::new(8, 0.25, 1e-2, 0.1).unwrap();
        let traj = evolve(&SpectralField::zeros(8), &cfg, Direction::Forward).unwrap();
        assert!(traj.final_state().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cfl_guard() {
        assert!(FlowConfig::new(32, 0.25, 0.1, 1.0).is_err());
        assert!(FlowConfig::new(32, 0.25, 1e-3, 1.0).is_ok());
    }

    #[test]
    fn high_modes_only_rotate() {
        let cfg = FlowConfig::new(8, 0.25, 1e-2, 0.05).unwrap();
        let u = GaussianMeasure::mu_one(16).sample_with_seed(1).field;
        let v = advance(&u, &cfg, 0.05).unwrap();
        for j in 8..=16 {
            let expect = u.coeff(j) * Complex64::from_polar(1.0, -((j * j) as f64) * 0.05);
            assert!((v.coeff(j) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn step_plan_covers_duration() {
        let cfg = FlowConfig::new(8, 0.25, 0.03, 0.1).unwrap();
        let plan = step_plan(&cfg, 0.1);
        assert_eq!(plan.len(), 4);
        assert!((plan.iter().sum::<f64>() - 0.1).abs() < 1e-15);
        assert!(step_plan(&cfg, 0.0).is_empty());
    }
}
