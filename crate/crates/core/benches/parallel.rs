use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hydroblow::profile::ProfileSpec;
use hydroblow::scaling_laws::{noisy_blowup_study, noisy_blowup_study_seq};
use hydroblow::scenarios::{sweep, sweep_seq, ScenarioKind, ScenarioSpec};

fn profile_batch(c: &mut Criterion) {
    let spec = ProfileSpec::new(1.0).unwrap();
    let mut g = c.benchmark_group("profile_batch");
    for n in [256usize, 4096] {
        let zs: Vec<f64> = (0..n).map(|i| 1e-6 * 1e8f64.powf(i as f64 / (n - 1) as f64)).collect();
        g.bench_with_input(BenchmarkId::new("seq", n), &zs, |b, zs| b.iter(|| spec.eval_phi_batch_seq(black_box(zs))));
        g.bench_with_input(BenchmarkId::new("par", n), &zs, |b, zs| b.iter(|| spec.eval_phi_batch(black_box(zs))));
    }
    g.finish();
}

fn noise_study(c: &mut Criterion) {
    let ts: Vec<f64> = (0..2000).map(|i| 0.999 * i as f64 / 1999.0).collect();
    let sups: Vec<f64> = ts.iter().map(|t| 1.0 / (1.0 - t)).collect();
    let mut g = c.benchmark_group("noise_study");
    g.bench_function("seq", |b| b.iter(|| noisy_blowup_study_seq(&ts, &sups, 0.01, 200, 1, 0.25, 1.0)));
    g.bench_function("par", |b| b.iter(|| noisy_blowup_study(&ts, &sups, 0.01, 200, 1, 0.25, 1.0)));
    g.finish();
}

fn scenario_sweep(c: &mut Criterion) {
    let specs: Vec<ScenarioSpec> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&l| {
            let s = ScenarioSpec::preset(ScenarioKind::Smooth);
            ScenarioSpec { lambda0: l, grid: s.grid.with_cells(128), ..s }
        })
        .collect();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("seq", |b| b.iter(|| sweep_seq(black_box(&specs))));
    g.bench_function("par", |b| b.iter(|| sweep(black_box(&specs))));
    g.finish();
}

criterion_group!(benches, profile_batch, noise_study, scenario_sweep);
criterion_main!(benches);
