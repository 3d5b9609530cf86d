use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperlap::synth::{connected_arcs, random_weights};
use hyperlap::{assemble, Execution, OperatorParams, OrientedHypergraph, VertexState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(n: usize, extra: usize) -> OrientedHypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let arcs = connected_arcs(&mut rng, n, extra, 6);
    let w = random_weights(&mut rng, n, arcs.len(), 0.5, 2.0);
    OrientedHypergraph::new(n, arcs, Some(w)).unwrap()
}

fn states(n: usize, count: usize) -> Vec<VertexState> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..count).map(|_| VertexState((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn operators(c: &mut Criterion) {
    let h = instance(100_000, 200_000);
    let params = OperatorParams { alpha: 0.5, gamma: -0.5, epsilon: 1.0, eta: 1.0, ..Default::default() };
    let f = states(h.n_vertices(), 1).pop().unwrap();
    let mut group = c.benchmark_group("operators");
    for (name, exec) in MODES {
        let sys = assemble(&h, params).unwrap().with_execution(exec);
        let g = sys.gradient(&f).unwrap();
        group.bench_function(BenchmarkId::new("gradient", name), |b| b.iter(|| sys.gradient(black_box(&f))));
        group.bench_function(BenchmarkId::new("divergence", name), |b| b.iter(|| sys.divergence(black_box(&g))));
        for p in [1.5, 2.0] {
            group.bench_function(BenchmarkId::new(format!("p_laplacian_p{p}"), name), |b| {
                b.iter(|| sys.p_laplacian(black_box(&f), p, 1e-8))
            });
        }
    }
    group.finish();
}

/// Energies and Rayleigh quotients of a batch of random states on a mid-size
/// instance, one state at a time versus spread over the pool.
fn monte_carlo(c: &mut Criterion) {
    let h = instance(5_000, 10_000);
    let sys = assemble(&h, OperatorParams::default()).unwrap().with_execution(Execution::Sequential);
    let batch = states(h.n_vertices(), 256);
    let stat = |f: &VertexState| sys.energy(f, 2.0).unwrap() + sys.rayleigh_quotient(f, 2.0).unwrap();
    let mut group = c.benchmark_group("monte_carlo");
    group.bench_function("sequential", |b| b.iter(|| batch.iter().map(stat).sum::<f64>()));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        group.bench_function("parallel", |b| b.iter(|| batch.par_iter().map(stat).sum::<f64>()));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = operators, monte_carlo
}
criterion_main!(benches);
