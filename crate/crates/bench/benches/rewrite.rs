use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use staticfilter_bench::graph::{node, random_graph};
use staticfilter_bench::{gen_counter, gen_permutation, gen_transitive_closure, Workload};
use staticfilter_core::engine::{FilterConfig, Mode};
use staticfilter_core::eval::{evaluate, EvalOptions};
use staticfilter_core::filter::{auto_theory, Regime};
use staticfilter_core::parser::parse_str;
use staticfilter_core::rewrite::optimize;
use staticfilter_core::Program;

const EXAMPLE: &str = "@output out/1.
r(X,Y,N) :- e(X,Y), N = 0.
r(X,Z,M) :- r(X,Y,N), e(Y,Z), M = N + 1.
out(Y) :- r(X,Y,N), X = a, N <= 5.
";

fn configs(program: &Program) -> Vec<(&'static str, FilterConfig)> {
    let horn = Regime::horn(auto_theory(program));
    vec![
        ("full-prop", FilterConfig::new(Mode::Full, Regime::prop())),
        ("full-horn", FilterConfig::new(Mode::Full, horn.clone())),
        ("casf-prop", FilterConfig::new(Mode::Casf, Regime::prop())),
        ("casf-horn", FilterConfig::new(Mode::Casf, horn)),
    ]
}

fn bench_rewrite(c: &mut Criterion) {
    let mut programs = vec![("example".to_string(), parse_str(EXAMPLE).unwrap())];
    for l in [4, 10, 19] {
        programs.push((format!("counter-{l}"), gen_counter(l).unwrap().program));
    }
    for k in [3, 4] {
        programs.push((format!("permutation-{k}"), gen_permutation(k).unwrap()));
    }
    let edges = random_graph(1_000, 1_000, 12);
    programs.push((
        "tc-1000".into(),
        gen_transitive_closure(&node(0), &edges).program,
    ));

    let mut group = c.benchmark_group("rewrite");
    for (name, program) in &programs {
        for (config_name, config) in configs(program) {
            group.bench_with_input(BenchmarkId::new(config_name, name), program, |b, p| {
                b.iter(|| optimize(p, &config).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    group.sample_size(10);
    let workloads = [
        Workload::Counter { width: 10 },
        Workload::TransitiveClosure {
            nodes: 2_000,
            edges: 2_000,
        },
    ];
    for w in workloads {
        let family = w.build(12).unwrap();
        let config = FilterConfig::new(Mode::Casf, Regime::prop());
        let rewritten = optimize(&family.program, &config).unwrap().rewritten;
        let opts = EvalOptions::default();
        group.bench_function(BenchmarkId::new("original", w.name()), |b| {
            b.iter(|| evaluate(&family.program, &family.facts, &opts).unwrap())
        });
        group.bench_function(BenchmarkId::new("casf-prop", w.name()), |b| {
            b.iter(|| evaluate(&rewritten, &family.facts, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rewrite, bench_eval);
criterion_main!(benches);
