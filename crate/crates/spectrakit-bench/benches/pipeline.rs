//! Benchmarks for the hot paths: Gram assembly, the spectral solve,
//! trace-power cumulants, Imhof tail inversion, Lanczos on a grid
//! matrix, and one Monte Carlo replication.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spectrakit::*;

fn gram_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_assembly");
    let cases: [(&str, KernelSpec, BasisFamily); 3] = [
        (
            "cvm_legendre",
            KernelSpec::new(KernelId::CvM).unwrap(),
            BasisFamily::legendre01(),
        ),
        (
            "ebnerkz_hermite",
            KernelSpec::new(KernelId::EbnerKZ).unwrap(),
            BasisFamily::hermite_gauss(1.0).unwrap(),
        ),
        (
            "bhep_d2_tensor",
            KernelSpec::bhep(2).unwrap(),
            BasisFamily::tensor_hermite(1.0, 2).unwrap(),
        ),
    ];
    for (name, kernel, basis) in &cases {
        for n in [10usize, 20] {
            group.bench_with_input(BenchmarkId::new(*name, n), &n, |b, &n| {
                b.iter(|| ritz::gram_matrix(kernel, basis, n, &Default::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn spectral_solve(c: &mut Criterion) {
    let kernel = KernelSpec::new(KernelId::CvM).unwrap();
    let basis = BasisFamily::legendre01();
    let mut group = c.benchmark_group("rr_spectrum");
    for n in [15usize, 30, 60] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| ritz::rr_spectrum(&kernel, &basis, n, &Default::default()).unwrap())
        });
    }
    group.finish();
}

fn cumulant_traces(c: &mut Criterion) {
    let kernel = KernelSpec::bhep(2).unwrap();
    let basis = BasisFamily::tensor_hermite(1.0, 2).unwrap();
    let gram = ritz::gram_matrix(&kernel, &basis, 15, &Default::default()).unwrap();
    c.bench_function("cumulants_trace_powers_bhep_d2_n15", |b| {
        b.iter(|| gram.cumulants())
    });
}

fn imhof_inversion(c: &mut Criterion) {
    let eigs: Vec<f64> = (1..=50).map(|j| 1.0 / (j * j) as f64).collect();
    let model = dist::TailModel::new(eigs).unwrap();
    c.bench_function("imhof_tail_50_eigs", |b| {
        b.iter(|| dist::imhof_tail(&model, 0.5).unwrap())
    });
    c.bench_function("quantile_p95_50_eigs", |b| {
        b.iter(|| dist::quantile(&model, 0.95).unwrap())
    });
}

fn grid_lanczos(c: &mut Criterion) {
    let cfg = alt::GridConfig {
        kernel: KernelSpec::new(KernelId::EbnerKZ).unwrap(),
        weight: BasisFamily::hermite_gauss(1.0).unwrap(),
        a: 4.0,
        m: 300,
        top_m: Some(3),
    };
    c.bench_function("grid_spectrum_m300_top3", |b| {
        b.iter(|| alt::grid_spectrum(&cfg).unwrap())
    });
}

fn mc_replication(c: &mut Criterion) {
    let cfg = alt::McConfig {
        kernel: KernelSpec::new(KernelId::CvM).unwrap(),
        weight: BasisFamily::legendre01(),
        n_samples: 500,
        replications: 1,
        seed: 7,
        top_m: 2,
    };
    c.bench_function("nystrom_mc_n500", |b| {
        b.iter(|| alt::nystrom_mc(&cfg, 0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = gram_assembly, spectral_solve, cumulant_traces, imhof_inversion,
        grid_lanczos, mc_replication
}
criterion_main!(benches);
