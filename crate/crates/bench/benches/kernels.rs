use std::hint::black_box;
use std::time::Duration;

use bolab_bench::{fixture, gaussian_coeffs};
use bolab_core::dynamics::{step_truncated, FlowConfig};
use bolab_core::energies::{modified_e, modified_g};
use bolab_core::spectral::multiply;
use bolab_core::wick::{build_form, form_functional, l2_norm_exact, FormKind};
use bolab_core::SmoothProjector;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("multiply");
    for n in [32, 128, 512] {
        let (a, b) = (fixture(2, n, 0), fixture(2, n, 1));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| bch.iter(|| multiply(black_box(&a), black_box(&b))));
    }
    g.finish();
}

fn flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow_step");
    for n in [16, 32, 64] {
        let u = fixture(2, n, 0);
        let cfg = FlowConfig::new(n, 0.25, 1e-3, 1e-3).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| step_truncated(black_box(&u), &cfg).unwrap())
        });
    }
    g.finish();
}

fn energies(c: &mut Criterion) {
    let u = fixture(3, 64, 0);
    let s = SmoothProjector::new(64, 0.25).unwrap();
    c.bench_function("modified_e/64", |b| b.iter(|| modified_e(black_box(&u), &s)));
    c.bench_function("modified_g/64", |b| b.iter(|| modified_g(black_box(&u), &s)));
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_norm");
    g.sample_size(10);
    for n in [8, 16] {
        let form = build_form(FormKind::QuarticE1, n, 0.25).unwrap();
        g.bench_with_input(BenchmarkId::new("collapse+norm", n), &n, |bch, _| {
            bch.iter(|| l2_norm_exact(&form.collapse()))
        });
    }
    g.finish();
    let mut g = c.benchmark_group("form_functional");
    for kind in [FormKind::QuarticE1, FormKind::SexticG] {
        let z = gaussian_coeffs(64, 0);
        g.bench_function(kind.name(), |b| b.iter(|| form_functional(kind, black_box(&z), 64, 0.2).unwrap()));
    }
    g.finish();
}

criterion_group! {
    name = kernels;
    config = Criterion::default().measurement_time(Duration::from_secs(2)).warm_up_time(Duration::from_millis(500));
    targets = spectral, flow, energies, lattice
}
criterion_main!(kernels);
