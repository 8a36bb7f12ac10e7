//! Parallel against sequential runs of the two parallel hot paths: solver
//! frontier expansion and per-size oracle search. With the `parallel`
//! feature off both arms are sequential.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nesteq::logic::LogicId;
use nesteq::normalize::to_snf;
use nesteq::oracle::{find_model, Mode, SearchConfig};
use nesteq::par;
use nesteq::preorder_solver::{decide_preorder_succ, SolverConfig};
use nesteq::reductions::{tiling_to_formula, TilingInstance};

fn blocked_tiling() -> TilingInstance {
    let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
    TilingInstance {
        colours: vec!["a".into(), "b".into()],
        c0: "a".into(),
        c1: "b".into(),
        h: vec![pair("a", "a")],
        v: vec![pair("a", "a"), pair("b", "b")],
        n: 1,
    }
}

fn arms() -> [(&'static str, usize); 2] {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    [("sequential", 1), ("parallel", all)]
}

fn solver(c: &mut Criterion) {
    let snf = to_snf(&tiling_to_formula(&blocked_tiling()).unwrap(), LogicId::PreorderSucc).unwrap();
    let mut group = c.benchmark_group("solver_tiling_cap5");
    group.sample_size(10);
    for (name, threads) in arms() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || decide_preorder_succ(&snf, 5, &SolverConfig::default()).unwrap()))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let snf = to_snf(&tiling_to_formula(&blocked_tiling()).unwrap(), LogicId::PreorderSucc).unwrap();
    let mut group = c.benchmark_group("oracle_tiling_upto6");
    group.sample_size(10);
    for (name, threads) in arms() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &threads, |b, &t| {
            b.iter(|| {
                par::with_threads(t, || {
                    find_model(&snf, LogicId::PreorderSucc, 6, Mode::AtMost, &SearchConfig::default()).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, solver, oracle);
criterion_main!(benches);
