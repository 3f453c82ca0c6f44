//! Acceptance run: one `[PASS]` / `[FAIL]` line per criterion, exit status 1 if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bolab_core::dynamics::{convergence_experiment, ConvergenceSpec, FlowConfig, ReferenceSpec};
use bolab_core::experiments::{
    alpha_centering, conservation_check, derivative_norm_mu32, fd_check_e, fd_check_g, transport_sweep, Ball,
    DerivativeMc, TransportSpec,
};
use bolab_core::wick::{
    build_form, cancellation_check, collapse_form, decay_fit, expect_pair, form_functional, l2_norm_exact,
    l2_norm_functional_mc, l2_norm_mc, l2_norm_pairwise, CancellationSet, DecayModel, FormKind,
};
use bolab_core::{EnsembleSpec, GaussianMeasure};

type Outcome = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Relative drift of the projected L2 norm and of the H^{1/2} energy along the flow.
fn conservation() -> Outcome {
    let cfg = FlowConfig::new(32, 0.25, 1e-3, 1.0).map_err(err)?;
    let rep = conservation_check(&cfg, &EnsembleSpec::new(20, 101)).map_err(err)?;
    Ok((
        rep.within(1e-8),
        format!("max drift L2 {:.2e}, H^1/2 energy {:.2e} (< 1e-8, 20 draws)", rep.max_l2_drift, rep.max_half_drift),
    ))
}

/// Closed-form derivatives against centered differences along the flow. The
/// verdict uses the centered difference at h = 1e-4 alone; the 2h difference only
/// feeds the reported convergence order and Richardson value.
fn derivative_formulas() -> Outcome {
    let spec = EnsembleSpec::new(20, 202);
    let (mu1, mu32) = (GaussianMeasure::mu_one(16), GaussianMeasure::mu_three_halves(16));
    let h = 1e-4;
    let (mut worst_e, mut worst_g, mut worst_rich) = (0.0f64, 0.0f64, 0.0f64);
    let mut orders = Vec::new();
    for i in 0..20 {
        let (pe, pg) = (mu1.sample(&spec, i).field, mu32.sample(&spec, i).field);
        let e = fd_check_e(&pe, 16, 0.25, h).map_err(err)?;
        let g = fd_check_g(&pg, 16, 0.25, h).map_err(err)?;
        worst_e = worst_e.max(e.relative_error);
        worst_g = worst_g.max(g.relative_error);
        for (fine, coarse) in [(e, fd_check_e(&pe, 16, 0.25, 2.0 * h).map_err(err)?), (g, fd_check_g(&pg, 16, 0.25, 2.0 * h).map_err(err)?)] {
            orders.push((coarse.relative_error / fine.relative_error).log2());
            let rich = (4.0 * fine.finite_difference - coarse.finite_difference) / 3.0;
            worst_rich = worst_rich.max((rich - fine.formula).abs() / fine.formula.abs());
        }
    }
    orders.sort_by(f64::total_cmp);
    Ok((
        worst_e < 1e-5 && worst_g < 1e-5,
        format!(
            "max relative error dE/dt {worst_e:.2e}, dG/dt {worst_g:.2e} (< 1e-5, h = 1e-4, N = 16); \
             observed order {:.2}..{:.2}, Richardson(h, 2h) max relative error {worst_rich:.1e}",
            orders[0],
            orders[orders.len() - 1]
        ),
    ))
}

fn cubic_cancellation() -> Outcome {
    let mc = DerivativeMc::new(16, 0.25, EnsembleSpec::new(50, 303)).map_err(err)?;
    let g = derivative_norm_mu32(&mc);
    Ok((
        g.max_cubic_relative <= 1e-10,
        format!("max |cubic| / max constituent {:.2e} over 50 draws (<= 1e-10)", g.max_cubic_relative),
    ))
}

fn cancellation_sets() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for set in CancellationSet::ALL {
        for n in 2..=16 {
            for eps in [0.5, 0.25, 0.125] {
                let o = cancellation_check(set, n, eps).map_err(err)?;
                worst = worst.max(o.residual);
                count += 1;
            }
        }
    }
    Ok((worst <= 1e-12, format!("max residual {worst:.2e} over {count} (set, N, eps) cases (<= 1e-12)")))
}

fn oracle_equivalence() -> Outcome {
    let mut forms = 0;
    let (mut worst, mut worst_rel) = (0.0f64, 0.0f64);
    for kind in FormKind::ALL {
        for eps in [0.5, 0.25, 0.125] {
            for n in 2.. {
                let form = build_form(kind, n, eps).map_err(err)?;
                if form.len() > 10_000 {
                    break;
                }
                let a = l2_norm_exact(&form.collapse());
                let b = l2_norm_pairwise(&form);
                // round-off is measured against the coefficient mass that cancels,
                // so identically vanishing forms are compared on the same footing
                let mass: f64 = form.terms().map(|(_, c)| c.abs()).sum();
                worst = worst.max((a * a - b * b).abs() / (mass * mass).max(f64::MIN_POSITIVE));
                if a > 1e-6 * mass {
                    worst_rel = worst_rel.max((a - b).abs() / a);
                }
                forms += 1;
            }
        }
    }
    let mut ok = worst <= 1e-12;
    let mut detail = format!(
        "bucketed vs pairwise: {forms} forms, max |a^2 - b^2| / (sum |c|)^2 = {worst:.1e} (<= 1e-12), \
         max relative gap on non-vanishing forms {worst_rel:.1e}"
    );
    let spec = EnsembleSpec::new(100_000, 505);
    for kind in [FormKind::QuarticE1, FormKind::QuinticE1] {
        // at eps = 0.25 the quartic form vanishes identically for N = 8
        let (n, eps) = (8, 0.5);
        let collapsed = collapse_form(kind, n, eps, |_, _| true).map_err(err)?;
        let exact = l2_norm_exact(&collapsed);
        let mc = l2_norm_mc(&collapsed, &spec, n, eps);
        let fun = l2_norm_functional_mc(|g| form_functional(kind, g, n, eps), n, &spec, n, eps).map_err(err)?;
        let (za, zb) = ((mc.value - exact) / mc.se, (fun.value - exact) / fun.se);
        ok &= za.abs() <= 3.0 && zb.abs() <= 3.0;
        detail += &format!("; {kind} N=8 eps=0.5 exact {exact:.5}, MC z = {za:+.2} (monomials) {zb:+.2} (functional)");
    }
    Ok((ok, detail))
}

/// Zero-sum tuple of degree `n` in `[-8, 8]` with no `j_k = -j_l`.
fn no_pair_tuple(rng: &mut ChaCha8Rng, n: usize) -> Vec<i32> {
    loop {
        let mut v: Vec<i32> = (0..n - 1).map(|_| if rng.random() { rng.random_range(1..=8) } else { -rng.random_range(1..=8) }).collect();
        let last = -v.iter().sum::<i32>();
        if last == 0 || last.abs() > 8 {
            continue;
        }
        v.push(last);
        if v.iter().all(|&a| v.iter().all(|&b| a != -b)) {
            return v;
        }
    }
}

fn multiset(v: &[i32]) -> Vec<i32> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

fn orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut pairs, mut nonzero) = (0, 0);
    while pairs < 10_000 {
        let (t, s) = if pairs % 2 == 0 {
            let n = rng.random_range(3..=5);
            (no_pair_tuple(&mut rng, n), no_pair_tuple(&mut rng, n))
        } else {
            // one cancelling pair and a no-pair residual triple
            let (a, b) = (no_pair_tuple(&mut rng, 3), no_pair_tuple(&mut rng, 3));
            if multiset(&a) == multiset(&b) {
                continue;
            }
            let (j, i) = (rng.random_range(1..=8), rng.random_range(1..=8));
            ([vec![j, -j], a].concat(), [vec![i, -i], b].concat())
        };
        if pairs % 2 == 0 && multiset(&t) == multiset(&s) {
            continue;
        }
        if expect_pair(&t, &s).map_err(err)? != 0.0 {
            nonzero += 1;
        }
        pairs += 1;
    }
    Ok((nonzero == 0, format!("{nonzero} nonzero moments among {pairs} pairs")))
}

fn decay_envelopes() -> Outcome {
    let mut eps_pts = Vec::new();
    for eps in [0.4, 0.2, 0.1, 0.05] {
        let f = collapse_form(FormKind::QuarticE1, 64, eps, |_, _| true).map_err(err)?;
        eps_pts.push((eps, l2_norm_exact(&f)));
    }
    let a = decay_fit(&eps_pts, DecayModel::SqrtEps, 0.2).map_err(err)?;
    let spec = EnsembleSpec::new(20_000, 707);
    let mut n_pts = Vec::new();
    for n in [8usize, 12, 16, 24] {
        let e = bolab_core::experiments::form_norm(FormKind::SexticG, n, 0.2, &spec).map_err(err)?;
        n_pts.push((n as f64, e.value));
    }
    let b = decay_fit(&n_pts, DecayModel::InverseSqrtN, 0.2).map_err(err)?;
    let fmt = |p: &[(f64, f64)]| p.iter().map(|(x, v)| format!("{x}:{v:.4}")).collect::<Vec<_>>().join(" ");
    Ok((
        a.passed && b.passed,
        format!(
            "quartic-E1 N=64 sqrt-eps fit C = {:.4}, max residual {:.0}% [{}]; sextic-G eps=0.2 1/sqrtN fit C = {:.4}, max residual {:.0}% [{}] (< 20%)",
            a.c,
            100.0 * a.max_residual,
            fmt(&eps_pts),
            b.c,
            100.0 * b.max_residual,
            fmt(&n_pts)
        ),
    ))
}

fn flow_convergence() -> Outcome {
    let spec = ConvergenceSpec {
        n_list: vec![16, 32, 64, 128],
        eps: 0.25,
        t: 0.05,
        sigma: 0.2,
        sigma_prime: 0.1,
        dt: 1e-3,
        max_phase_step: 0.125,
        reference: ReferenceSpec::new(512),
    };
    let m = GaussianMeasure::mu_one(512);
    let es = EnsembleSpec::new(5, 808);
    let phis: Vec<_> = (0..5).map(|i| m.sample(&es, i).field).collect();
    let rep = convergence_experiment(&phis, &spec).map_err(err)?;
    let errs: Vec<String> = rep.mean_errors.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((
        rep.strictly_decreasing && rep.theta > 0.0,
        format!("mean errors [{}], theta = {:.3}", errs.join(", "), rep.theta),
    ))
}

fn transport() -> Outcome {
    let base = TransportSpec {
        n: 16,
        eps: 0.5,
        r: 10.0,
        t: 0.05,
        n_grid: 128,
        dt: 1e-3,
        max_phase_step: 0.125,
        samples: EnsembleSpec::new(10_000, 909),
        ball: Ball::new(2.3, 0.2).map_err(err)?,
    };
    let cells = [(16, 0.5), (32, 0.5), (64, 0.5), (64, 0.25), (64, 0.125)];
    let sweep = transport_sweep(&base, &cells).map_err(err)?;
    let cells: Vec<String> = sweep
        .cells
        .iter()
        .map(|c| format!("({}, {}): {:.4} +- {:.4}", c.n, c.eps, c.slope, c.slope_se))
        .collect();
    Ok((sweep.non_increasing, format!("slopes {}", cells.join("; "))))
}

fn alpha() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [8, 32, 128] {
        let c = alpha_centering(n, &EnsembleSpec::new(100_000, 1010 + n as u64));
        ok &= c.mean.abs() <= 3.0 * c.se;
        parts.push(format!("N={n}: {:+.4} +- {:.4}", c.mean, c.se));
    }
    Ok((ok, parts.join("; ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact conservation", conservation),
        ("derivative formulas vs finite differences", derivative_formulas),
        ("cubic cancellation", cubic_cancellation),
        ("cancellation sets", cancellation_sets),
        ("Wick oracle equivalence", oracle_equivalence),
        ("orthogonality", orthogonality),
        ("decay envelopes", decay_envelopes),
        ("flow convergence", flow_convergence),
        ("transport smallness", transport),
        ("alpha_N centering", alpha),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let (pass, detail) = match res {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {id:>2}. {name}: {detail} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
