use bolab_core::dynamics::{advance, diagnostics, evolve, Direction, FlowConfig};
use bolab_core::energies::{de_dt_formula, energy_e0, energy_e1, modified_e};
use bolab_core::spectral::{linear_flow, project};
use bolab_core::{Complex64, GaussianMeasure, SpectralField};
use proptest::prelude::*;

fn field(modes: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), modes)
        .prop_map(|v| SpectralField::from_positive(&v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()))
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let k = a.n_modes().max(b.n_modes()) as i64;
    (1..=k).map(|j| (a.coeff(j) - b.coeff(j)).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncated_flow_conserves(u in field(10), eps in 0.1f64..0.9) {
        let cfg = FlowConfig::new(10, eps, 1e-3, 0.2).unwrap();
        let tr = evolve(&u, &cfg, Direction::Forward).unwrap();
        let (l2, half) = tr.max_relative_drift();
        prop_assert!(l2 < 1e-9 && half < 1e-9, "drift {l2:e} {half:e}");
    }

    #[test]
    fn flow_is_reversible(u in field(8)) {
        let cfg = FlowConfig::new(8, 0.25, 1e-3, 0.1).unwrap();
        let there = advance(&u, &cfg, 0.1).unwrap();
        let back = advance(&there, &cfg, -0.1).unwrap();
        prop_assert!(max_diff(&back, &u) < 1e-9);
    }

    #[test]
    fn modes_beyond_n_evolve_linearly(u in field(20), t in 0.01f64..0.2) {
        let cfg = FlowConfig::new(10, 0.3, 1e-3, t).unwrap();
        let v = advance(&u, &cfg, t).unwrap();
        let lin = linear_flow(&u, t);
        for j in 11..=20 {
            prop_assert!((v.coeffs()[j] - lin.coeffs()[j]).norm() < 1e-12);
        }
    }
}

#[test]
fn small_data_follow_the_linear_flow() {
    let phi = GaussianMeasure::mu_one(12).sample_with_seed(4).field;
    let cfg = FlowConfig::new(12, 0.25, 1e-3, 0.5).unwrap();
    let mut errs = Vec::new();
    for delta in [1e-2, 1e-3] {
        let u = phi.scale(delta);
        let v = advance(&u, &cfg, 0.5).unwrap();
        errs.push(max_diff(&v, &linear_flow(&u, 0.5)) / delta);
    }
    // the relative deviation is first order in the amplitude
    let ratio = errs[0] / errs[1];
    assert!((7.0..13.0).contains(&ratio), "{errs:?}");
}

#[test]
fn l2_norm_of_projection_is_exactly_conserved_over_long_runs() {
    let phi = GaussianMeasure::mu_one(32).sample_with_seed(11).field;
    let cfg = FlowConfig::new(32, 0.25, 1e-3, 1.0).unwrap().with_record_every(100);
    let tr = evolve(&phi, &cfg, Direction::Forward).unwrap();
    let (l2, half) = tr.max_relative_drift();
    assert!(l2 < 1e-8 && half < 1e-8, "{l2:e} {half:e}");
    assert_eq!(tr.times.len(), 11);
    let s = cfg.projector();
    let d = diagnostics(tr.final_state(), &s, 1.0);
    assert!((d.l2 - project(&phi, 32).sobolev_norm_sq(0.0)).abs() < 1e-8 * d.l2);
    // E_0 of the whole field is conserved too: the tail only rotates
    assert!((energy_e0(tr.final_state()) - energy_e0(&phi)).abs() < 1e-8 * energy_e0(&phi));
}

#[test]
fn modified_energy_rate_matches_flow() {
    let phi = GaussianMeasure::mu_one(16).sample_with_seed(2).field;
    let cfg = FlowConfig::new(16, 0.25, 1e-4, 1e-4).unwrap().with_max_phase_step(1e-3);
    let s = cfg.projector();
    let h = 1e-4;
    let plus = project(&advance(&phi, &cfg, h).unwrap(), 16);
    let minus = project(&advance(&phi, &cfg, -h).unwrap(), 16);
    let fd = (modified_e(&plus, &s) - modified_e(&minus, &s)) / (2.0 * h);
    let exact = de_dt_formula(&project(&phi, 16), &s);
    assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{fd} vs {exact}");
    // E1 itself is not conserved by the truncated flow
    assert!(energy_e1(&plus).total != energy_e1(&minus).total);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(FlowConfig::new(32, 0.25, 0.1, 1.0).is_err());
    assert!(FlowConfig::new(32, 0.0, 1e-3, 1.0).is_err());
    assert!(FlowConfig::new(32, 0.25, -1e-3, 1.0).is_err());
    assert!(FlowConfig::new(32, 0.25, 1e-3, f64::NAN).is_err());
}
