use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use irsim_core::channel::{ChannelModel, ChannelRealization, FadingProfile, Geometry, IrsLayout};
use irsim_core::estimation::{ChannelEstimate, ReflectionPattern, TrainingSetup};
use irsim_core::optimize::{brute_force_optimize, scm_optimize, sdr_optimize};
use irsim_core::RngStream;

fn realization(m: usize) -> ChannelRealization {
    let model = ChannelModel {
        num_subcarriers: 64,
        profile: FadingProfile::default(),
        layout: IrsLayout::with_subsurfaces(12, 12, m).unwrap(),
        geometry: Geometry::default(),
    };
    model
        .realize(&mut RngStream::new(1, m as u64).generator())
        .unwrap()
}

fn optimizers(c: &mut Criterion) {
    let mut group = c.benchmark_group("reflection");
    for m in [4usize, 12, 36] {
        let real = realization(m);
        let truth = ChannelEstimate::from_truth(&real);
        group.bench_with_input(BenchmarkId::new("scm", m), &truth, |b, t| {
            b.iter(|| scm_optimize(black_box(&t.d_cir_hat), black_box(&t.g_cir_hat)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sdr_100", m), &truth, |b, t| {
            let mut rng = RngStream::new(2, 0).generator();
            b.iter(|| {
                sdr_optimize(black_box(&t.d_hat), black_box(&t.g_hat), 100, &mut rng).unwrap()
            })
        });
    }
    let small = ChannelEstimate::from_truth(&realization(4));
    group.bench_function("brute_force_q16_m4", |b| {
        b.iter(|| {
            brute_force_optimize(black_box(&small.d_hat), black_box(&small.g_hat), 16).unwrap()
        })
    });
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimation");
    for m in [12usize, 36] {
        let real = realization(m);
        let setup =
            TrainingSetup::new(64, 64, ReflectionPattern::dft(m).unwrap(), 1e-3, 1e-11, 6).unwrap();
        group.bench_with_input(BenchmarkId::new("dft_pattern_np64", m), &real, |b, r| {
            let mut rng = RngStream::new(3, 0).generator();
            b.iter(|| setup.estimate(black_box(r), &mut rng).unwrap())
        });
    }
    group.bench_function("channel_realization_m12", |b| {
        let model = ChannelModel {
            num_subcarriers: 64,
            profile: FadingProfile::default(),
            layout: IrsLayout::with_subsurfaces(12, 12, 12).unwrap(),
            geometry: Geometry::default(),
        };
        let mut rng = RngStream::new(4, 0).generator();
        b.iter(|| model.realize(&mut rng).unwrap())
    });
    group.finish();
}

criterion_group!(benches, optimizers, estimation);
criterion_main!(benches);
