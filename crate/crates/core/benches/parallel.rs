use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dispersio::fourier::{bracket_crosscheck, ModeBracket};
use dispersio::par::Execution;
use dispersio::rat::rat;
use dispersio::solver::{hodograph_solve, linspace, HodographProblem};
use dispersio::{DiffPoly, FrobeniusManifold, Hierarchy};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn hodograph(c: &mut Criterion) {
    let h = Hierarchy::build(FrobeniusManifold::p1(), 2).unwrap();
    let p = HodographProblem::single_time((1, 1), linspace(-1.0, 1.0, 2001), linspace(0.0, 0.2, 21));
    let mut g = c.benchmark_group("hodograph_p1");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| hodograph_solve(&h, &p, exec).unwrap()));
    }
    g.finish();
}

fn commute(c: &mut Criterion) {
    let h = Hierarchy::build(FrobeniusManifold::p1(), 3).unwrap();
    let mut g = c.benchmark_group("commute_p1");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| h.commute_check(3, exec).unwrap()));
    }
    g.finish();
}

fn fourier(c: &mut Criterion) {
    let u = DiffPoly::coord(1, 0);
    let f = &u * &DiffPoly::jet(1, 0, 1).pow(2);
    let q = u.pow(4).scale(&rat(1, 24));
    let br = ModeBracket::scalar();
    let mut g = c.benchmark_group("fourier_crosscheck");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bracket_crosscheck(&f, &q, &br, 12, 4, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hodograph, commute, fourier);
criterion_main!(benches);
