use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dsfolio::moments::TriangularFuzzyNumber;
use dsfolio::pipeline;
use dsfolio::portfolio::{solve_aco, AcoParams, Asset, MuSMode, PortfolioParams, PortfolioProblem};
use dsfolio::RunConfig;

fn evidence(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let inducer = pipeline::inducer(&cfg).unwrap();
    c.bench_function("induce_all", |b| b.iter(|| black_box(inducer.induce_all().unwrap())));
}

fn inference(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let base = pipeline::induce_rulebase(&cfg).unwrap();
    let engine = pipeline::engine(&cfg, &base).unwrap();
    c.bench_function("infer_defuzzify", |b| {
        b.iter(|| black_box(engine.evaluate(black_box(&[4.2, 6.1, 7.7, 2.9])).unwrap()))
    });
}

fn colony(c: &mut Criterion) {
    let t = |a, b, c| TriangularFuzzyNumber::new(a, b, c).unwrap();
    let problem = PortfolioProblem::new(
        vec![
            Asset::new("A", t(0.06, 0.10, 0.15), 0.001),
            Asset::new("B", t(0.08, 0.14, 0.24), 0.002),
            Asset::new("C", t(0.00, 0.05, 0.20), 0.003),
            Asset::new("D", t(0.02, 0.07, 0.09), 0.001),
        ],
        PortfolioParams {
            mu_s: MuSMode::Fixed(0.0016),
            ..Default::default()
        },
    )
    .unwrap();
    let params = AcoParams {
        nodes: 500,
        ants: 20,
        iterations: 50,
        lifetime: 10,
        ..Default::default()
    };
    let mut group = c.benchmark_group("aco");
    group.sample_size(10);
    group.bench_function("solve_500x50", |b| b.iter(|| black_box(solve_aco(&problem, &params).unwrap())));
    group.finish();
}

criterion_group!(benches, evidence, inference, colony);
criterion_main!(benches);
