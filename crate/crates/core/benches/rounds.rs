use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maler_core::{DecisionSet, Execution, Learner, MalerLearner, ProblemParams, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gradients(dim: usize, rounds: usize) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..rounds)
        .map(|_| {
            let g = Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
            let n = g.norm().max(1.0);
            g / n
        })
        .collect()
}

fn run(
    params: &ProblemParams,
    set: &Arc<DecisionSet>,
    execution: Execution,
    grads: &[Vector],
) -> f64 {
    let mut l = MalerLearner::new(params, set.clone())
        .unwrap()
        .with_execution(execution);
    let mut acc = 0.0;
    for g in grads {
        acc += l.predict().unwrap()[0];
        l.observe(g).unwrap();
    }
    acc
}

fn maler_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("maler_rounds");
    group.sample_size(10);
    for dim in [10, 50] {
        let rounds = 64;
        let set = Arc::new(DecisionSet::centered_ball(dim, 0.5).unwrap());
        let params = ProblemParams::for_set(1024, 1.0, &set).unwrap();
        let grads = gradients(dim, rounds);
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(label, dim), &dim, |b, _| {
                b.iter(|| black_box(run(&params, &set, exec, &grads)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, maler_rounds);
criterion_main!(benches);
