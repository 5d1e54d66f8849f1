use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use swarmcmp_core::features::{self, FeatureConfig};
use swarmcmp_core::sim::{simulate, RunId};
use swarmcmp_core::similarity::{score, MeasureConfig};
use swarmcmp_core::{Behaviour, FeatureSet, Measure, Setting, SimConfig, SomModel};

fn short_run(behaviour: Behaviour, setting: Setting, replicate: usize) -> swarmcmp_core::Trajectory {
    let cfg = SimConfig { total_steps: 300, transient: 250, ..Default::default() };
    simulate(RunId::new(behaviour, setting, replicate), 7, &cfg).unwrap()
}

fn bench_simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_300_steps");
    group.sample_size(10);
    for behaviour in Behaviour::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(behaviour), &behaviour, |b, &behaviour| {
            b.iter(|| short_run(black_box(behaviour), Setting::Bounded40, 0))
        });
    }
    group.finish();
}

fn bench_features(c: &mut Criterion) {
    let trajectory = short_run(Behaviour::Reynolds, Setting::Bounded40, 0);
    let cfg = FeatureConfig::default();
    let mut group = c.benchmark_group("extract_50_steps");
    for set in FeatureSet::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(set), &set, |b, &set| {
            b.iter(|| features::extract_run(black_box(&trajectory), set, &cfg, 250).unwrap())
        });
    }
    group.finish();
}

fn bench_measures(c: &mut Criterion) {
    let cfg = FeatureConfig::default();
    let a = features::extract_run(&short_run(Behaviour::Vicsek, Setting::Bounded40, 1), FeatureSet::Gomes2013, &cfg, 250)
        .unwrap()
        .0;
    let b = features::extract_run(&short_run(Behaviour::Brownian, Setting::Bounded40, 1), FeatureSet::Gomes2013, &cfg, 250)
        .unwrap()
        .0;
    let mcfg = MeasureConfig::default();
    let mut group = c.benchmark_group("measure_gomes2013");
    for m in Measure::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |bench, &m| {
            bench.iter(|| score(m, black_box(&a), black_box(&b), &mcfg).unwrap())
        });
    }
    group.finish();
}

fn bench_som(c: &mut Criterion) {
    let dim = 600;
    let data: Vec<Vec<f64>> =
        (0..64).map(|i| (0..dim).map(|j| ((i * 31 + j * 17) % 97) as f64 / 97.0).collect()).collect();
    let refs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let mut model = SomModel::init(46, 46, &refs, 1).unwrap();
    c.bench_function("som_bmu_46x46_dim600", |b| b.iter(|| model.bmu(black_box(&data[3])).unwrap()));
    c.bench_function("som_update_46x46_dim600_sigma5", |b| b.iter(|| model.update(black_box(&data[5]), 0.05, 5.0)));
}

criterion_group!(benches, bench_simulation, bench_features, bench_measures, bench_som);
criterion_main!(benches);
