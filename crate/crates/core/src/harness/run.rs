//! Dispatch from a validated [`RunConfig`] to the experiment routines.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{Experiment, NormMethod, RunConfig};
use crate::dynamics::{convergence_experiment, ConvergenceSpec, FlowConfig, ReferenceSpec};
use crate::energies::{energy_e0, energy_e1, energy_e3half, energy_e_half, modified_e, modified_g};
use crate::error::Result;
use crate::experiments::{
    alpha_centering, conservation_check, density_convergence, derivative_norm_mu1, derivative_norm_mu32,
    e_derivative_wick_route, form_norm, monotonicity_probe, transport_experiment, transport_sweep, Ball,
    DensityConvergenceSpec, DerivativeMc, ExperimentReport, MonotonicitySpec, Table, TransportSpec,
};
use crate::gaussian::{write_ensemble, EnsembleHeader, EnsembleRecord, EnsembleSpec, GaussianMeasure};
use crate::spectral::SmoothProjector;
use crate::stats::mean_se;
use crate::wick::{
    cancellation_check, decay_fit, l2_norm_functional_mc, form_functional, DecayModel, FormKind, SumEstimate,
};

/// Relative drift bound for conserved quantities.
pub const CONSERVATION_TOL: f64 = 1e-8;
/// Largest collapsed coefficient accepted as an exact cancellation.
pub const CANCELLATION_TOL: f64 = 1e-12;
/// Relative size of the cubic block accepted as cancellation.
pub const CUBIC_TOL: f64 = 1e-10;
/// Relative residual band of envelope fits.
pub const FIT_TOL: f64 = 0.2;

fn ensemble(cfg: &RunConfig) -> EnsembleSpec {
    EnsembleSpec::new(cfg.samples, cfg.seed)
}

fn base_report(cfg: &RunConfig) -> ExperimentReport {
    ExperimentReport::new(cfg.experiment.name())
        .param("N", cfg.n)
        .param("eps", cfg.eps)
        .param("samples", cfg.samples)
        .param("seed", cfg.seed)
}

/// Run `cfg` (validated first) and return its report without writing files.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let report = match cfg.experiment {
        Experiment::Sample => run_sample(cfg)?,
        Experiment::Evolve => run_evolve(cfg)?,
        Experiment::Energy => run_energy(cfg)?,
        Experiment::DerivativeMc => run_derivative(cfg)?,
        Experiment::Lattice => run_lattice(cfg)?,
        Experiment::CancelCheck => run_cancel(cfg)?,
        Experiment::Transport => run_transport(cfg)?,
        Experiment::Converge => run_converge(cfg)?,
        Experiment::DensityDiff => run_density(cfg)?,
        Experiment::Monotonicity => run_monotonicity(cfg)?,
    };
    Ok(report.timed(start))
}

fn run_sample(cfg: &RunConfig) -> Result<ExperimentReport> {
    let measure = GaussianMeasure::new(cfg.k, cfg.grid())?;
    let spec = ensemble(cfg);
    let samples = measure.ensemble(&spec);
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("ensemble.csv");
    let header = EnsembleHeader { k: cfg.k, n_grid: cfg.grid(), base_seed: cfg.seed, count: cfg.samples };
    let records: Vec<EnsembleRecord> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| EnsembleRecord { sample: i, seed: s.seed, time: 0.0, field: s.field.clone() })
        .collect();
    write_ensemble(&path, &header, &records)?;
    let l2: Vec<f64> = samples.iter().map(|s| s.field.sobolev_norm_sq(0.0)).collect();
    let half: Vec<f64> = samples.iter().map(|s| s.field.sobolev_norm_sq(0.5)).collect();
    let mut r = base_report(cfg).param("k", cfg.k).param("N_grid", cfg.grid()).param("ensemble", path.display().to_string());
    r.mean("mean L2 norm^2", &mean_se(&l2));
    r.mean("mean H^1/2 norm^2", &mean_se(&half));
    if cfg.k == 2 {
        let c = alpha_centering(cfg.grid(), &spec);
        r.mean("H^1/2 norm^2 - alpha_N", &c);
        r.check("alpha centering", c.mean.abs() <= 3.0 * c.se, format!("{:.3e} +- {:.3e}", c.mean, c.se));
    }
    Ok(r)
}

fn run_evolve(cfg: &RunConfig) -> Result<ExperimentReport> {
    let flow = FlowConfig::new(cfg.n, cfg.eps, cfg.dt, cfg.t)?.with_max_phase_step(cfg.max_phase_step);
    let rep = conservation_check(&flow, &ensemble(cfg))?;
    let mut r = base_report(cfg).param("t", cfg.t).param("dt", cfg.dt).param("max_phase_step", cfg.max_phase_step);
    r.scalar("max relative drift L2", rep.max_l2_drift, 0.0, "max");
    r.scalar("max relative drift H^1/2 energy", rep.max_half_drift, 0.0, "max");
    let mut t = Table::new("drift", &["sample", "l2", "half_energy"]);
    for (i, (a, b)) in rep.l2_drift.iter().zip(&rep.half_drift).enumerate() {
        t.push(vec![i as f64, *a, *b]);
    }
    r.tables.push(t);
    r.check(
        "conservation",
        rep.within(CONSERVATION_TOL),
        format!("max drift {:.3e} / {:.3e} < {CONSERVATION_TOL:e}", rep.max_l2_drift, rep.max_half_drift),
    );
    Ok(r)
}

fn run_energy(cfg: &RunConfig) -> Result<ExperimentReport> {
    let measure = GaussianMeasure::new(cfg.k, cfg.grid())?;
    let s = SmoothProjector::new(cfg.n, cfg.eps)?;
    let spec = ensemble(cfg);
    let rows: Vec<[f64; 6]> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = measure.sample(&spec, i).field;
            [
                energy_e0(&u),
                energy_e_half(&u),
                energy_e1(&u).total,
                energy_e3half(&u).total,
                modified_e(&u, &s),
                modified_g(&u, &s),
            ]
        })
        .collect();
    let mut r = base_report(cfg).param("k", cfg.k).param("N_grid", cfg.grid());
    for (c, name) in ["E_0", "E_1/2", "E_1", "E_3/2", "modified E", "modified G"].iter().enumerate() {
        let v: Vec<f64> = rows.iter().map(|row| row[c]).collect();
        r.mean(name, &mean_se(&v));
    }
    Ok(r)
}

fn run_derivative(cfg: &RunConfig) -> Result<ExperimentReport> {
    let ns: Vec<usize> = if cfg.n_list.is_empty() { vec![cfg.n] } else { cfg.n_list.clone() };
    let mut r = base_report(cfg);
    let mut t = Table::new("derivative_norms", &["N", "dE_mu1", "dE_mu1_se", "dE_wick", "dE_wick_se", "dG_mu32", "dG_mu32_se"]);
    for &n in &ns {
        let mc = DerivativeMc::new(n, cfg.eps, ensemble(cfg))?;
        let e = derivative_norm_mu1(&mc);
        let g = derivative_norm_mu32(&mc);
        // an independent stream for the sampled parts of the lattice route
        let w = e_derivative_wick_route(n, cfg.eps, &EnsembleSpec::new(cfg.samples, cfg.seed ^ 0x5eed))?;
        r.estimate(&format!("dE/dt norm N={n}"), &e);
        r.estimate(&format!("dE/dt lattice route N={n}"), &w);
        r.estimate(&format!("dG/dt norm N={n}"), &g.estimate);
        let z = (e.value - w.value).abs() / e.se.hypot(w.se).max(f64::MIN_POSITIVE);
        r.check(&format!("cross-route N={n}"), z <= 3.0, format!("|difference| = {z:.2} SE"));
        r.check(
            &format!("cubic block N={n}"),
            g.max_cubic_relative <= CUBIC_TOL,
            format!("max relative {:.3e}", g.max_cubic_relative),
        );
        t.push(vec![n as f64, e.value, e.se, w.value, w.se, g.estimate.value, g.estimate.se]);
    }
    r.tables.push(t);
    Ok(r)
}

fn lattice_norm(cfg: &RunConfig, kind: FormKind, n: usize, eps: f64) -> Result<SumEstimate> {
    let spec = ensemble(cfg);
    match cfg.method {
        NormMethod::Auto | NormMethod::Exact => form_norm(kind, n, eps, &spec),
        NormMethod::MonteCarlo => l2_norm_functional_mc(|g| form_functional(kind, g, n, eps), n, &spec, n, eps),
    }
}

fn default_model(kind: FormKind, eps_sweep: bool) -> DecayModel {
    if eps_sweep {
        return DecayModel::SqrtEps;
    }
    match kind {
        FormKind::QuarticE1 | FormKind::QuinticE1 => DecayModel::LnNOverSqrtN,
        FormKind::SexticG => DecayModel::InverseSqrtN,
        _ => DecayModel::SqrtLnNOverN,
    }
}

fn run_lattice(cfg: &RunConfig) -> Result<ExperimentReport> {
    let kind = cfg.form;
    let mut r = base_report(cfg).param("form", kind.name());
    let eps_sweep = !cfg.eps_list.is_empty();
    let points: Vec<(usize, f64)> = if eps_sweep {
        cfg.eps_list.iter().map(|&e| (cfg.n, e)).collect()
    } else if !cfg.n_list.is_empty() {
        cfg.n_list.iter().map(|&n| (n, cfg.eps)).collect()
    } else {
        vec![(cfg.n, cfg.eps)]
    };
    let mut t = Table::new("norms", &[if eps_sweep { "eps" } else { "N" }, "norm", "se"]);
    let mut data = Vec::new();
    for &(n, eps) in &points {
        let e = lattice_norm(cfg, kind, n, eps)?;
        r.estimate(&format!("{kind} N={n} eps={eps}"), &e);
        let x = if eps_sweep { eps } else { n as f64 };
        t.push(vec![x, e.value, e.se]);
        data.push((x, e.value));
    }
    r.tables.push(t);
    if data.len() >= crate::wick::MIN_POINTS {
        let model = cfg.model.unwrap_or_else(|| default_model(kind, eps_sweep));
        let fit = decay_fit(&data, model, FIT_TOL)?;
        r.check(
            &format!("envelope {}", model.name()),
            fit.passed,
            format!("C = {:.4e}, max residual {:.1}%", fit.c, 100.0 * fit.max_residual),
        );
        r.fits.push(fit);
    }
    Ok(r)
}

fn run_cancel(cfg: &RunConfig) -> Result<ExperimentReport> {
    let ns: Vec<usize> = if cfg.n_list.is_empty() { vec![cfg.n] } else { cfg.n_list.clone() };
    let es: Vec<f64> = if cfg.eps_list.is_empty() { vec![cfg.eps] } else { cfg.eps_list.clone() };
    let mut r = base_report(cfg).param("set", cfg.set.name());
    let mut t = Table::new("residuals", &["N", "eps", "raw_terms", "max_raw_coeff", "residual"]);
    for &n in &ns {
        for &eps in &es {
            let o = cancellation_check(cfg.set, n, eps)?;
            t.push(vec![n as f64, eps, o.raw_terms as f64, o.max_raw_coeff, o.residual]);
            r.scalar(&format!("residual N={n} eps={eps}"), o.residual, 0.0, "exact");
            r.check(
                &format!("{} N={n} eps={eps}", cfg.set.name()),
                o.residual <= CANCELLATION_TOL,
                format!("residual {:.3e} over {} raw terms (max |coeff| {:.3e})", o.residual, o.raw_terms, o.max_raw_coeff),
            );
        }
    }
    r.tables.push(t);
    Ok(r)
}

fn transport_base(cfg: &RunConfig) -> Result<TransportSpec> {
    let ball = if cfg.rho.is_infinite() { Ball::everything(cfg.sigma) } else { Ball::new(cfg.rho, cfg.sigma)? };
    let largest = cfg.n_list.iter().copied().chain([cfg.n]).max().unwrap_or(cfg.n);
    Ok(TransportSpec {
        n: cfg.n,
        eps: cfg.eps,
        r: cfg.r,
        t: cfg.t,
        n_grid: cfg.n_grid.unwrap_or(largest).max(largest),
        dt: cfg.dt,
        max_phase_step: cfg.max_phase_step,
        samples: ensemble(cfg),
        ball,
    })
}

/// Sweep cells: `N` over `n_list` at the first `eps`, then the remaining `eps`
/// values at the largest `N`.
pub fn sweep_cells(n_list: &[usize], eps_list: &[f64], n: usize, eps: f64) -> Vec<(usize, f64)> {
    let ns: Vec<usize> = if n_list.is_empty() { vec![n] } else { n_list.to_vec() };
    let es: Vec<f64> = if eps_list.is_empty() { vec![eps] } else { eps_list.to_vec() };
    let mut cells: Vec<(usize, f64)> = ns.iter().map(|&n| (n, es[0])).collect();
    let n_max = *ns.last().expect("non-empty");
    cells.extend(es[1..].iter().map(|&e| (n_max, e)));
    cells
}

fn run_transport(cfg: &RunConfig) -> Result<ExperimentReport> {
    let base = transport_base(cfg)?;
    let mut r = base_report(cfg)
        .param("t", cfg.t)
        .param("R", cfg.r)
        .param("rho", cfg.rho)
        .param("sigma", cfg.sigma)
        .param("N_grid", base.n_grid);
    let mut t = Table::new("slopes", &["cell", "N", "eps", "slope", "slope_se", "inside_fraction", "flips"]);
    let push = |t: &mut Table, i: usize, c: &crate::experiments::TransportCell| {
        t.push(vec![i as f64, c.n as f64, c.eps, c.slope, c.slope_se, c.inside_fraction, c.flips as f64]);
    };
    if cfg.n_list.is_empty() && cfg.eps_list.is_empty() {
        let c = transport_experiment(&base)?;
        r.mean("I_0", &c.i0);
        r.mean("I_t", &c.it);
        r.mean("I_0 - I_t", &c.diff);
        r.scalar("slope |I_0 - I_t| / t", c.slope, c.slope_se, "monte-carlo");
        r.check("ball away from the tails", !c.flagged, format!("inside fraction {:.3}", c.inside_fraction));
        push(&mut t, 0, &c);
    } else {
        let cells = sweep_cells(&cfg.n_list, &cfg.eps_list, cfg.n, cfg.eps);
        let sweep = transport_sweep(&base, &cells)?;
        for (i, c) in sweep.cells.iter().enumerate() {
            r.scalar(&format!("slope N={} eps={}", c.n, c.eps), c.slope, c.slope_se, "monte-carlo");
            push(&mut t, i, c);
        }
        r.check("slope non-increasing within 1 SE", sweep.non_increasing, format!("{:?}", sweep.steps_ok));
    }
    r.tables.push(t);
    Ok(r)
}

fn run_converge(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut reference = ReferenceSpec::new(cfg.n_ref);
    reference.eps_ref = cfg.eps;
    let spec = ConvergenceSpec {
        n_list: cfg.n_list.clone(),
        eps: cfg.eps,
        t: cfg.t,
        sigma: cfg.sigma,
        sigma_prime: cfg.sigma_prime,
        dt: cfg.dt,
        max_phase_step: cfg.max_phase_step,
        reference,
    };
    let measure = GaussianMeasure::mu_one(cfg.n_grid.unwrap_or(cfg.n_ref));
    let es = ensemble(cfg);
    let phis: Vec<_> = (0..cfg.samples as u64).map(|i| measure.sample(&es, i).field).collect();
    let rep = convergence_experiment(&phis, &spec)?;
    let mut r = base_report(cfg).param("t", cfg.t).param("N_ref", cfg.n_ref).param("sigma", cfg.sigma);
    let mut t = Table::new("errors", &["N", "mean_error"]);
    for (n, e) in rep.n_list.iter().zip(&rep.mean_errors) {
        t.push(vec![*n as f64, *e]);
    }
    r.tables.push(t);
    let se = rep.fit.as_ref().map_or(f64::NAN, |f| f.slope_se);
    r.scalar("theta", rep.theta, se, "fit");
    r.check("errors strictly decreasing", rep.strictly_decreasing, format!("{:?}", rep.mean_errors));
    r.check("theta > 0", rep.theta > 0.0, format!("theta = {:.3}", rep.theta));
    Ok(r)
}

fn run_density(cfg: &RunConfig) -> Result<ExperimentReport> {
    let n_list = if cfg.n_list.is_empty() { vec![16, 32, 64, 128] } else { cfg.n_list.clone() };
    let rep = density_convergence(&DensityConvergenceSpec { n_list, eps: cfg.eps, r: cfg.r, samples: ensemble(cfg) })?;
    let mut r = base_report(cfg).param("R", cfg.r);
    let mut t = Table::new("differences", &["N", "F_mean", "F_q95", "H_mean", "H_q95", "psi_sum"]);
    for row in &rep.rows {
        t.push(vec![row.n as f64, row.f_diff.mean, row.f_q95, row.h_diff.mean, row.h_q95, row.psi_sum]);
        r.mean(&format!("|F^eps - F| N={}", row.n), &row.f_diff);
        r.mean(&format!("|H^eps - H| N={}", row.n), &row.h_diff);
    }
    r.tables.push(t);
    r.check("F difference decreasing", rep.f_decreasing, "within combined SE");
    r.check("H difference decreasing", rep.h_decreasing, "within combined SE");
    r.check("lattice sum decreasing", rep.psi_decreasing, "strict");
    Ok(r)
}

fn run_monotonicity(cfg: &RunConfig) -> Result<ExperimentReport> {
    let ball = if cfg.rho.is_infinite() { Ball::everything(cfg.sigma) } else { Ball::new(cfg.rho, cfg.sigma)? };
    let mut reference = ReferenceSpec::new(cfg.n_ref);
    reference.eps_ref = cfg.eps;
    let spec = MonotonicitySpec { t_bar: cfg.t, r: cfg.r, reference, samples: ensemble(cfg), ball };
    let rep = monotonicity_probe(&spec)?;
    let mut r = base_report(cfg).param("t", cfg.t).param("N_ref", cfg.n_ref).param("rho", cfg.rho);
    r.mean("rho(A)", &rep.before);
    r.mean("rho(Phi(t) A)", &rep.after);
    r.mean("difference", &rep.diff);
    r.check("difference >= -3 SE", rep.passed, format!("{:.3e} +- {:.3e}", rep.diff.mean, rep.diff.se));
    Ok(r)
}
