//! Parallel vs sequential replicate fan-out on the hot paths: walk
//! sampling, composed-path sweeps and metric optimization restarts.
//! `cargo bench` runs both modes; building with `--no-default-features`
//! measures the sequential fallback under the parallel API as well.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dlab_core::cadlag::CadlagFn;
use dlab_core::exec::{map_indexed, ExecMode};
use dlab_core::limits::{sample_composition, FamilyKind, Functional, IndexKind, ReferenceLaw, SweepModel};
use dlab_core::processes::{donsker_polygon, IncrementSpec, Seed};
use dlab_core::{distance, DistanceOpts};

const MODES: [(&str, ExecMode); 2] = [
    ("parallel", ExecMode::Parallel),
    ("sequential", ExecMode::Sequential),
];

fn bench_walk_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("walk_batch_512x256");
    let spec = IncrementSpec::rademacher();
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| {
                let terminals = map_indexed(mode, 512, |r| {
                    donsker_polygon(&spec, 256, Seed::new(7).replicate(r as u64))
                        .unwrap()
                        .terminal()
                });
                terminals.iter().sum::<f64>()
            });
        });
    }
    group.finish();
}

fn bench_composition_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("poisson_composition_256x128");
    group.sample_size(20);
    let model = SweepModel {
        family: FamilyKind::DonskerPolygons {
            increments: IncrementSpec::standard_normal(),
        },
        index: IndexKind::Poisson { a: 1.0 },
        reference: ReferenceLaw::StdNormal,
    };
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| {
                let values = map_indexed(mode, 256, |r| {
                    let z = sample_composition(&model, 128, Seed::new(11).replicate(r as u64))
                        .unwrap();
                    Functional::Terminal.apply(&z)
                });
                values.iter().sum::<f64>()
            });
        });
    }
    group.finish();
}

fn bench_distance_restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance_step_pair");
    group.sample_size(20);
    let f = CadlagFn::unit_step(0.4375).unwrap();
    let g = CadlagFn::unit_step(0.5).unwrap();
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            let opts = DistanceOpts {
                exec: mode,
                ..DistanceOpts::default()
            };
            b.iter(|| distance(&f, &g, &opts).upper);
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_walk_batch,
    bench_composition_sweep,
    bench_distance_restarts
);
criterion_main!(benches);
