use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use frac_talenti::kernels::{green, martin, t_moment};
use frac_talenti::quadrature::sphere_rule;
use frac_talenti::solver::radial_boundary_value;
use frac_talenti::{BumpSource, ProblemParams, RadialProfile, SolutionHandle};

fn pointwise(c: &mut Criterion) {
    let p = ProblemParams::new(3, 0.5).unwrap();
    let x = [0.1, 0.2, -0.3];
    let y = [-0.4, 0.1, 0.25];
    let theta = [0.0, 0.6, 0.8];
    c.bench_function("green N=3 s=0.5", |b| {
        b.iter(|| green(&p, black_box(&x), black_box(&y)).unwrap())
    });
    let log = ProblemParams::new(1, 0.5).unwrap();
    c.bench_function("green N=1 s=0.5 (log)", |b| {
        b.iter(|| green(&log, black_box(&[0.1]), black_box(&[-0.6])).unwrap())
    });
    c.bench_function("martin N=3 s=0.5", |b| {
        b.iter(|| martin(&p, black_box(&y), black_box(&theta)).unwrap())
    });
    c.bench_function("t_moment N=3 tau=6", |b| {
        b.iter(|| t_moment(3, 6.0, black_box(&x)).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    group.sample_size(20);
    for (n, s) in [(1, 0.25), (2, 0.5), (3, 0.75)] {
        let p = ProblemParams::new(n, s).unwrap();
        let h = SolutionHandle::new(p, RadialProfile::constant(1.0).unwrap()).unwrap();
        let mut x = vec![0.0; n];
        x[0] = 0.4;
        group.bench_function(format!("solve_at torsion N={n} s={s}"), |b| {
            b.iter(|| h.solve_at(black_box(&x), 1e-8).unwrap())
        });
    }
    let p = ProblemParams::new(2, 0.5).unwrap();
    let rule = sphere_rule(2, 32).unwrap();
    group.bench_function("boundary_trace bump N=2 order 32", |b| {
        b.iter(|| {
            let f = BumpSource::new(vec![0.5, 0.0], 0.04, 1.0).unwrap();
            SolutionHandle::new(p, f).unwrap().boundary_trace(&rule, 1e-8).unwrap()
        })
    });
    let f = RadialProfile::parse("0.2:0.3,0.5:1,0.8:0.1,1:0.6").unwrap();
    group.bench_function("radial_boundary_value N=3 s=0.5", |b| {
        b.iter(|| radial_boundary_value(&ProblemParams::new(3, 0.5).unwrap(), black_box(&f)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pointwise, solver);
criterion_main!(benches);
