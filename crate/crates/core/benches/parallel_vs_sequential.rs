use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unisynth::optimizer::{multi_start, OptimizerConfig};
use unisynth::params::{success_rate_monte_carlo, ClassifyMethod};
use unisynth::skeletons::full_skeleton_with_layers;
use unisynth::{haar_random_unitary, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo_n3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 20), |b| {
            b.iter(|| success_rate_monte_carlo(3, 20, 20_000, 7, ClassifyMethod::Combinatorial, exec).unwrap())
        });
    }
    g.finish();
}

fn rank_estimate(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo_n4_rank");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| success_rate_monte_carlo(4, 64, 32, 7, ClassifyMethod::Numeric, exec).unwrap())
        });
    }
    g.finish();
}

fn starts(c: &mut Criterion) {
    let skeleton = full_skeleton_with_layers(2, 4).unwrap();
    let target = haar_random_unitary(2, &mut ChaCha8Rng::seed_from_u64(3));
    let config = OptimizerConfig::default();
    let mut g = c.benchmark_group("multi_start_n2");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 16), |b| b.iter(|| multi_start(&target, &skeleton, &config, 16, exec)));
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, rank_estimate, starts);
criterion_main!(benches);
