use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ttspectra::construct::{self, AltOptions};
use ttspectra::honeylp::{self, SolveOptions};
use ttspectra::tt::{self, DenseTensor};
use ttspectra::{Execution, Spectrum};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sq(v: &[f64]) -> Spectrum {
    Spectrum::from_squared(v).unwrap()
}

fn brute_force(c: &mut Criterion) {
    let g = sq(&[7.5, 5.0, 0.0, 0.0]);
    let t = sq(&[6.0, 3.5, 2.0, 1.0]);
    let mut group = c.benchmark_group("diagonal_bruteforce");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "r4n2"), |b| {
            b.iter(|| construct::diagonal_witness_bruteforce(&g, &t, 2, exec).unwrap())
        });
    }
    group.finish();
}

fn restarts(c: &mut Criterion) {
    let g = sq(&[10.0, 2.0, 0.5]);
    let t = sq(&[4.0, 3.0, 2.5, 2.0, 1.0]);
    let opts = AltOptions {
        iter_max: 500,
        ..AltOptions::default()
    };
    let mut group = c.benchmark_group("alternating_restarts");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| construct::alternating_svd_restarts(&g, &t, 2, opts, 0, exec).unwrap()));
    }
    group.finish();
}

fn build_tensor(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = vec![4, 2, 2, 4, 3];
    let x = DenseTensor::from_fn(dims.clone(), |_| rng.sample(StandardNormal)).unwrap();
    let s = tt::singular_spectrum(&x).unwrap();
    let mut group = c.benchmark_group("build_tensor");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| construct::build_tensor_from_spectrum_with(&s, &dims, 0, AltOptions::default(), exec).unwrap())
        });
    }
    group.finish();
}

fn min_m(c: &mut Criterion) {
    let g = sq(&[10.0, 2.0, 0.5]);
    let t = sq(&[4.0, 3.0, 2.5, 2.0, 1.0]);
    let mut group = c.benchmark_group("min_feasible_m");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| honeylp::min_feasible_m_with(&g, &t, SolveOptions::default(), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, brute_force, restarts, build_tensor, min_m);
criterion_main!(benches);
