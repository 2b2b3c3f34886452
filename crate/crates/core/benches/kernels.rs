//! Sequential versus parallel execution of the hot kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isogeom::catalogue::CatalogueSet;
use isogeom::dimension::{
    box_counts, correlation_integral, riesz_energy_with, BoxCountOptions, CorrelationOptions, EnergyOptions,
    RadiusGrid,
};
use isogeom::par::Execution;
use isogeom::RngStream;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn kernels(c: &mut Criterion) {
    let mu = CatalogueSet::Dust8Quarter.sample(20_000, &RngStream::new(1, 1)).unwrap();
    let grid = RadiusGrid::for_measure(&mu, 4.0, 24).unwrap();
    let metric = mu.metric();

    let mut g = c.benchmark_group("correlation_integral");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = CorrelationOptions {
            max_points: Some(5000),
            execution,
            ..CorrelationOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| correlation_integral(&mu, metric, &grid, &opts).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("riesz_energy");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = EnergyOptions {
            max_points: Some(5000),
            execution,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| riesz_energy_with(&mu, 1.2, metric, &opts).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("box_counts");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = BoxCountOptions {
            execution,
            ..BoxCountOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| box_counts(&mu, metric, &grid, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
