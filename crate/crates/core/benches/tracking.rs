use criterion::{criterion_group, criterion_main, Criterion};
use eqcover::problem::ProblemSpec;
use eqcover::solver::{build_system, solve_total_degree_with, Execution, ToleranceSet};

fn tracking(c: &mut Criterion) {
    let cases = [
        ("hyperelliptic", ProblemSpec { r: 2, xi: vec![1; 4], ord: vec![-1; 4], b: vec![3, 3], t0: 4, tinf: 0 }),
        ("r3_mixed", ProblemSpec { r: 3, xi: vec![1, 1, 2, 2], ord: vec![-2, -2, 2, -1], b: vec![2, 3], t0: 3, tinf: 0 }),
    ];
    let params = ToleranceSet::default();
    let mut group = c.benchmark_group("total_degree");
    group.sample_size(10);
    for (name, spec) in &cases {
        let sys = build_system(spec, 0).unwrap();
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_function(format!("{name}/{label}"), |b| {
                b.iter(|| solve_total_degree_with(&sys, &params, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, tracking);
criterion_main!(benches);
