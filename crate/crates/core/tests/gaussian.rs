use bolab_core::gaussian::{
    alpha_n, read_ensemble, stream_rng, write_ensemble, EnsembleHeader, EnsembleRecord,
};
use bolab_core::stats::mean_se;
use bolab_core::{EnsembleSpec, GaussianMeasure};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn draws_are_reproducible(base in any::<u64>(), i in 0u64..1000, k in 1u32..4) {
        let m = GaussianMeasure::new(k, 12).unwrap();
        let spec = EnsembleSpec::new(1000, base);
        prop_assert_eq!(m.sample(&spec, i).field, m.sample(&spec, i).field);
        prop_assert_ne!(m.sample(&spec, i).field, m.sample(&spec, i + 1).field);
        // the same stream drives every consumer of (base, i)
        let mut a = stream_rng(base, i);
        let mut b = stream_rng(base, i);
        prop_assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn coefficient_decay_is_set_by_k(k in 1u32..4, n in 1usize..6) {
        let m = GaussianMeasure::new(k, 6).unwrap();
        let a = m.sample_with_seed(n as u64);
        let b = GaussianMeasure::new(k + 1, 6).unwrap().sample_with_seed(n as u64);
        let (ca, cb) = (a.field.coeffs()[n], b.field.coeffs()[n]);
        // same Gaussian, one more half power of n in the denominator
        prop_assert!((ca / (n as f64).sqrt() - cb).norm() < 1e-12);
    }
}

#[test]
fn second_moments_match_the_covariance() {
    let m = GaussianMeasure::mu_one(8);
    let spec = EnsembleSpec::new(40_000, 21);
    for j in [1usize, 3, 8] {
        // E |c_j|^2 = j^{-2}
        let v: Vec<f64> = (0..spec.count as u64)
            .map(|i| m.sample(&spec, i).field.coeffs()[j].norm_sqr() * (j * j) as f64)
            .collect();
        let e = mean_se(&v);
        assert!((e.mean - 1.0).abs() < 4.0 * e.se, "j={j}: {} +- {}", e.mean, e.se);
    }
}

#[test]
fn alpha_is_the_mean_half_energy() {
    assert_eq!(alpha_n(1), 2.0);
    assert!((alpha_n(4) - 2.0 * (1.0 + 0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-15);
}

#[test]
fn ensemble_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let m = GaussianMeasure::new(3, 9).unwrap();
    let spec = EnsembleSpec::new(5, 77);
    let records: Vec<EnsembleRecord> = (0..5)
        .map(|i| {
            let s = m.sample(&spec, i);
            EnsembleRecord { sample: i as usize, seed: s.seed, time: 0.25 * i as f64, field: s.field }
        })
        .collect();
    let header = EnsembleHeader { k: 3, n_grid: 9, base_seed: 77, count: 5 };
    write_ensemble(&path, &header, &records).unwrap();
    let (h, back) = read_ensemble(&path).unwrap();
    assert_eq!(h, header);
    assert_eq!(back, records);
}
