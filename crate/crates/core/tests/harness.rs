use std::fs;

use bolab_core::harness::{load_config, run_experiment, sweep_cells, Experiment, NormMethod, RunConfig};
use bolab_core::wick::{CancellationSet, DecayModel, FormKind};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = RunConfig> {
    (
        0usize..Experiment::ALL.len(),
        2usize..200,
        1u32..4,
        prop::option::of(2usize..400),
        0.01f64..0.99,
        (0.1f64..100.0, 0.0f64..1.0, 1e-6f64..1e-2, 1usize..100_000, any::<u64>()),
        prop::collection::vec(2usize..300, 0..5),
        prop::collection::vec(0.01f64..0.99, 0..5),
        (0usize..7, 0usize..4, 0usize..3, prop::option::of(0usize..7)),
        prop_oneof![Just(f64::INFINITY), 0.1f64..50.0],
    )
        .prop_map(|(e, n, k, n_grid, eps, (r, t, dt, samples, seed), n_list, eps_list, (f, s, m, model), rho)| {
            let mut c = RunConfig::new(Experiment::ALL[e]);
            c.n = n;
            c.k = k;
            c.n_grid = n_grid;
            c.eps = eps;
            c.r = r;
            c.t = t;
            c.dt = dt;
            c.samples = samples;
            c.seed = seed;
            c.n_list = n_list;
            c.eps_list = eps_list;
            c.form = FormKind::ALL[f];
            c.set = CancellationSet::ALL[s];
            c.method = [NormMethod::Auto, NormMethod::Exact, NormMethod::MonteCarlo][m];
            c.model = model.map(|i| DecayModel::ALL[i]);
            c.rho = rho;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn emit_then_parse_is_identity(cfg in config()) {
        let text = cfg.emit();
        prop_assert_eq!(RunConfig::parse_str(&text).unwrap(), cfg);
    }
}

#[test]
fn file_round_trip_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "# minimal\nexperiment = lattice\n").unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg, RunConfig::new(Experiment::Lattice));
    cfg.validate().unwrap();
    fs::write(&path, cfg.emit()).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);
}

#[test]
fn errors_name_the_key() {
    let msg = |t: &str| RunConfig::parse_str(t).unwrap_err().to_string();
    assert!(msg("N = 8").contains("experiment"));
    assert!(msg("experiment = lattice\neps = big").contains("eps"));
    assert!(msg("experiment = lattice\nfrobnicate = 1").contains("frobnicate"));
    assert!(msg("experiment = lattice\nN = 4\nN = 5").contains("`N`"));
    let cfg = RunConfig::parse_str("experiment = evolve\nN = 64\ndt = 0.01").unwrap();
    assert!(cfg.validate().unwrap_err().to_string().contains("CFL guard dt*N^2 <= 20"));
    let cfg = RunConfig::parse_str("experiment = lattice\nform = sextic-G\nN = 40\nmethod = exact").unwrap();
    assert!(cfg.validate().unwrap_err().to_string().contains("N"));
}

#[test]
fn sweep_protocol_cells() {
    let cells = sweep_cells(&[16, 32, 64], &[0.5, 0.25, 0.125], 16, 0.25);
    assert_eq!(cells, vec![(16, 0.5), (32, 0.5), (64, 0.5), (64, 0.25), (64, 0.125)]);
    assert_eq!(sweep_cells(&[], &[], 8, 0.3), vec![(8, 0.3)]);
}

#[test]
fn every_experiment_runs_at_toy_size() {
    for e in Experiment::ALL {
        let mut cfg = RunConfig::new(e);
        cfg.n = 8;
        cfg.samples = 8;
        cfg.t = 0.01;
        cfg.n_ref = 32;
        cfg.n_list = vec![4, 8];
        if e == Experiment::Lattice {
            cfg.n_list = vec![4, 5, 6, 7];
        }
        if e == Experiment::Transport {
            cfg.n_list.clear();
        }
        let dir = tempfile::tempdir().unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let r = run_experiment(&cfg).unwrap_or_else(|err| panic!("{}: {err}", e.name()));
        assert_eq!(r.name, e.name());
        assert!(r.wall_clock_s >= 0.0);
        assert!(r.scalars.iter().all(|s| s.se >= 0.0 || s.se.is_nan()), "{}", e.name());
    }
}
