use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphtalk::benchmark::generate_benchmark;
use graphtalk::dialogue::explain_deterministic;
use graphtalk::engine::{execute, fixture};
use graphtalk::eval::{holm_adjust, mcnemar_exact, mcnemar_family, wilson_ci, Z95};
use graphtalk::schema::preset;
use graphtalk::syntax::{parse_query, print_query};
use graphtalk::validate::validate;
use graphtalk_bench::{discordance_family, MARDI_QUERIES};
use std::hint::black_box;

fn syntax(c: &mut Criterion) {
    let mut g = c.benchmark_group("parse");
    for (name, q) in MARDI_QUERIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), q, |b, q| b.iter(|| parse_query(black_box(q)).unwrap()));
    }
    g.finish();
    let ast = parse_query(MARDI_QUERIES[1].1).unwrap();
    c.bench_function("print/top_authors", |b| b.iter(|| print_query(black_box(&ast))));
}

fn validation(c: &mut Criterion) {
    let schema = preset("movie").unwrap();
    let cases: Vec<_> = generate_benchmark(&schema, 7)
        .unwrap()
        .into_iter()
        .map(|c| parse_query(&c.query_text).unwrap())
        .collect();
    c.bench_function("validate/benchmark_90", |b| {
        b.iter(|| {
            for ast in &cases {
                black_box(validate(ast, &schema).unwrap());
            }
        })
    });
    c.bench_function("explain/benchmark_90", |b| {
        b.iter(|| {
            for ast in &cases {
                black_box(explain_deterministic(ast, &schema));
            }
        })
    });
    c.bench_function("benchmark/generate", |b| b.iter(|| generate_benchmark(&schema, black_box(7)).unwrap()));
}

fn execution(c: &mut Criterion) {
    let graph = fixture("mardi").unwrap();
    let mut g = c.benchmark_group("execute");
    for (name, q) in MARDI_QUERIES {
        let ast = parse_query(q).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &ast, |b, ast| b.iter(|| execute(ast, &graph).unwrap()));
    }
    g.finish();
}

fn statistics(c: &mut Criterion) {
    let pairs = discordance_family();
    c.bench_function("stats/wilson", |b| b.iter(|| wilson_ci(black_box(47), black_box(90), Z95).unwrap()));
    c.bench_function("stats/mcnemar_exact", |b| b.iter(|| mcnemar_exact(black_box(31), black_box(58))));
    let raw: Vec<f64> = pairs.iter().map(|p| mcnemar_exact(p.2, p.3)).collect();
    c.bench_function("stats/holm_10", |b| b.iter(|| holm_adjust(black_box(&raw))));
    c.bench_function("stats/mcnemar_family_10", |b| b.iter(|| mcnemar_family(black_box(&pairs))));
}

criterion_group!(benches, syntax, validation, execution, statistics);
criterion_main!(benches);
