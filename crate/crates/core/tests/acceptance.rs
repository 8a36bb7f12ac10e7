//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure. Every bound is recomputed here from its closed form rather
//! than read back from the library.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nesteq::generate::{agreement_corpus, random_model, random_sentence, GenConfig};
use nesteq::logic::{parse_formula, Formula, LogicId, Signature};
use nesteq::normalize::{to_snf, SnfSentence};
use nesteq::oracle::{
    completeness_bound, decide_bounded, find_model, find_model_formula, find_model_sat, FindResult, Mode,
    SearchConfig, Status,
};
use nesteq::preorder_solver::{decide_preorder_succ, SolverConfig};
use nesteq::pumping::{choose_witnesses, replace_class, shrink, Width};
use nesteq::reductions::{
    check_tiling, decode_tiling, run_to_structure, simulate, tcm_to_formula, tiling_to_formula, Config, Op,
    TilingInstance, TwoCounterMachine, COUNTER_PREDICATES,
};
use nesteq::structure::{evaluate, interval_property, validate_structure, Structure, Valuation};

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn holds(s: &Structure, f: &Formula) -> bool {
    evaluate(s, f, &Valuation::default()) == Ok(true)
}

/// `2^(#unary + #binary)` over the common symbols.
fn alphas(sig: &Signature) -> u128 {
    1u128 << (sig.unary.len() + sig.binary.len())
}

/// `max(1, 12^(K+1) · M^(3K+3) · |α|^(K+1))`.
fn closed_form_bound(snf: &SnfSentence) -> u128 {
    let (k, m) = (snf.k, snf.m() as u128);
    let a = alphas(&snf.signature);
    (12u128.pow(k + 1) * m.pow(3 * k + 3) * a.pow(k + 1)).max(1)
}

/// `max(1, 12 · M³ · |α|)`.
fn d_class_bound(snf: &SnfSentence) -> u128 {
    let m = snf.m() as u128;
    (12 * m * m * m * alphas(&snf.signature)).max(1)
}

fn unsat_certification() -> Outcome {
    let f = parse_formula("forall x. exists y. x < y").unwrap();
    let snf = to_snf(&f, LogicId::OrderEq).unwrap();
    let bound = completeness_bound(&snf, LogicId::OrderEq);
    let start = Instant::now();
    let v = decide_bounded(&f, LogicId::OrderEq, 12, &SearchConfig::default()).unwrap();
    let took = start.elapsed();
    verdict(
        bound == Some(12) && closed_form_bound(&snf) == 12 && v.status == Status::UnsatCertified && took < Duration::from_secs(10),
        format!("bound {bound:?}, status {:?} in {took:.2?} (limit 10s)", v.status),
    )
}

struct AgreementRun {
    sentences: usize,
    shape_ok: bool,
    agreed: usize,
    sat: usize,
    took: Duration,
    /// `(max keys seen, closed-form key bound)` per sentence.
    keys: Vec<(usize, u128)>,
}

fn agreement_run() -> &'static AgreementRun {
    static RUN: OnceLock<AgreementRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let corpus = agreement_corpus(2024, 200);
        let mut run = AgreementRun {
            sentences: corpus.len(),
            shape_ok: true,
            agreed: 0,
            sat: 0,
            took: Duration::ZERO,
            keys: Vec::new(),
        };
        for f in &corpus {
            let sig = Signature::of(f);
            let snf = to_snf(f, LogicId::PreorderSucc).unwrap();
            run.shape_ok &= sig.unary.len() <= 2 && sig.binary.len() <= 1 && snf.k <= 2 && snf.m() <= 2;
            let (oracle, _) = find_model(&snf, LogicId::PreorderSucc, 5, Mode::AtMost, &SearchConfig::default()).unwrap();
            let solved = decide_preorder_succ(&snf, 5, &SolverConfig::default()).unwrap();
            let a = matches!(oracle, FindResult::Found(_));
            let b = solved.verdict.status == Status::Sat;
            run.agreed += usize::from(a == b && !matches!(oracle, FindResult::Unknown(_)));
            run.sat += usize::from(a);
            let k = snf.k as u128;
            let key_bound = alphas(&snf.signature) * (1u128 << snf.m()) * (k + 1) * (k + 2) / 2;
            run.keys.push((solved.max_keys, key_bound));
        }
        run.took = start.elapsed();
        run
    })
}

fn oracle_solver_agreement() -> Outcome {
    let r = agreement_run();
    verdict(
        r.sentences >= 200 && r.shape_ok && r.agreed == r.sentences && r.took < Duration::from_secs(15 * 60),
        format!(
            "{}/{} agree ({} sat within 5), shape limits {}, {:.1?} (limit 15 min)",
            r.agreed,
            r.sentences,
            r.sat,
            if r.shape_ok { "hold" } else { "violated" },
            r.took
        ),
    )
}

fn snf_equisatisfiability() -> Outcome {
    let cfg = GenConfig {
        logic: LogicId::RawFo2,
        unary: 2,
        binary: 1,
        k: 0,
        depth: 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut same, mut total, mut sat) = (0, 0, 0);
    let sentences = 120;
    for _ in 0..sentences {
        let f = random_sentence(&mut rng, &cfg, 3);
        let snf = to_snf(&f, LogicId::RawFo2).unwrap();
        for n in 1..=4 {
            let (before, _) = find_model_formula(&f, LogicId::RawFo2, n, Mode::Exact, &SearchConfig::default()).unwrap();
            let (after, _) = find_model(&snf, LogicId::RawFo2, n, Mode::Exact, &SearchConfig::default()).unwrap();
            let decided = !matches!(before, FindResult::Unknown(_)) && !matches!(after, FindResult::Unknown(_));
            let b = matches!(before, FindResult::Found(_));
            same += usize::from(decided && b == matches!(after, FindResult::Found(_)));
            sat += usize::from(b);
            total += 1;
        }
    }
    verdict(same == total, format!("{sentences} sentences, {same}/{total} (sentence, size) pairs identical, {sat} sat"))
}

/// A seeded model of a random sentence lifted to its normal form.
fn seeded_model(seed: u64, logic: LogicId, sizes: std::ops::RangeInclusive<usize>) -> (Structure, SnfSentence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        logic,
        unary: 2,
        binary: 1,
        k: rng.gen_range(1..=2),
        depth: 2,
    };
    let n = rng.gen_range(sizes);
    let width = rng.gen_range(2..=4);
    let skolem = rng.gen_range(1..=2);
    let (s, f) = random_model(&mut rng, &cfg, n, width, skolem, 60);
    let snf = to_snf(&f, logic).unwrap();
    let lifted = snf.lift(&s).unwrap();
    (lifted, snf)
}

/// Class labels at SNF level `k` (level `K+1` is one class).
fn classes(s: &Structure, snf: &SnfSentence, k: u32) -> BTreeSet<usize> {
    (0..s.n)
        .map(|a| if k == snf.k { 0 } else { s.eq.get(k as usize).or(s.pre.get(k as usize)).unwrap()[a] })
        .collect()
}

#[derive(Default)]
struct PumpTally {
    models: usize,
    calls: usize,
    not_models: usize,
    invalid: usize,
    d_over: usize,
    wide: usize,
    shrink_over: usize,
    interval: usize,
    largest_d: usize,
}

fn pump_models(logic: LogicId, seeds: std::ops::Range<u64>, sizes: std::ops::RangeInclusive<usize>) -> PumpTally {
    let mut t = PumpTally::default();
    for seed in seeds {
        let (s, snf) = seeded_model(seed, logic, sizes.clone());
        let f = snf.to_formula();
        assert!(holds(&s, &f), "seed {seed} is not a model");
        t.models += 1;
        t.interval += usize::from(interval_property(&s).is_err());
        let wmap = choose_witnesses(&s, &snf).unwrap();
        for k in 0..=snf.k {
            for class in classes(&s, &snf, k) {
                let (out, plan) = replace_class(&s, &snf, logic, k, class, &wmap).unwrap();
                t.calls += 1;
                t.not_models += usize::from(!holds(&out, &f));
                t.invalid += usize::from(!validate_structure(&out, logic).ok);
                t.d_over += usize::from(plan.d_classes as u128 > d_class_bound(&snf));
                t.wide += usize::from(plan.width == Width::Triple);
                t.interval += usize::from(interval_property(&out).is_err());
                t.largest_d = t.largest_d.max(plan.d_classes);
            }
        }
        let small = shrink(&s, &snf, logic).unwrap();
        t.not_models += usize::from(!holds(&small, &f));
        t.shrink_over += usize::from(small.n as u128 > closed_form_bound(&snf));
        t.interval += usize::from(interval_property(&small).is_err());
    }
    t
}

fn pumping_bound() -> Outcome {
    let t = pump_models(LogicId::OrderEq, 0..50, 40..=80);
    verdict(
        t.models >= 50 && t.not_models == 0 && t.invalid == 0 && t.d_over == 0 && t.shrink_over == 0,
        format!(
            "{} models, {} replacements: {} non-models, {} invalid, {} over the D bound (largest D {} classes, {} at width 3M), {} shrinks over the bound",
            t.models, t.calls, t.not_models, t.invalid, t.d_over, t.largest_d, t.wide, t.shrink_over
        ),
    )
}

fn interval_preservation() -> Outcome {
    let t = pump_models(LogicId::Preorder, 100..150, 20..=40);
    verdict(
        t.models >= 50 && t.interval == 0 && t.not_models == 0,
        format!(
            "{} instances, {} replacements plus shrinks: {} interval violations, {} non-models",
            t.models, t.calls, t.interval, t.not_models
        ),
    )
}

fn tiling_round_trip() -> Outcome {
    let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
    let solvable = TilingInstance {
        colours: vec!["a".into(), "b".into()],
        c0: "a".into(),
        c1: "b".into(),
        h: vec![pair("a", "b")],
        v: vec![pair("a", "a"), pair("b", "b")],
        n: 1,
    };
    let start = Instant::now();
    let snf = to_snf(&tiling_to_formula(&solvable).unwrap(), LogicId::PreorderSucc).unwrap();
    let out = decide_preorder_succ(&snf, 8, &SolverConfig::default()).unwrap();
    let model = out.verdict.model.unwrap_or_else(|| Structure::new(0));
    let decoded = decode_tiling(&model, &solvable);
    let tiled = decoded.as_ref().is_ok_and(|sol| check_tiling(&solvable, sol).is_ok() && sol.rows == [["a", "b"]]);
    let sat_time = start.elapsed();

    let blocked = TilingInstance {
        h: vec![pair("a", "a")],
        ..solvable
    };
    let start = Instant::now();
    let snf = to_snf(&tiling_to_formula(&blocked).unwrap(), LogicId::PreorderSucc).unwrap();
    let (found, stats) = find_model(&snf, LogicId::PreorderSucc, 8, Mode::AtMost, &SearchConfig::default()).unwrap();
    let unsat_time = start.elapsed();
    let none = matches!(found, FindResult::Absent) && stats.sizes_exhausted == (1..=8).collect::<Vec<_>>();
    let limit = Duration::from_secs(60);
    verdict(
        out.verdict.status == Status::Sat && model.n == 2 && tiled && none && sat_time < limit && unsat_time < limit,
        format!(
            "solvable: {:?} with {} elements, decodes to a valid 2x1 tiling: {tiled} ({sat_time:.2?}); blocked: no model to 8: {none} ({unsat_time:.2?})",
            out.verdict.status, model.n
        ),
    )
}

fn machine(states: &[&str], delta: &[(&str, Op, &str)]) -> TwoCounterMachine {
    TwoCounterMachine {
        states: states.iter().map(|s| s.to_string()).collect(),
        initial: states[0].into(),
        final_state: "sF".into(),
        delta: delta.iter().map(|(a, op, b)| (a.to_string(), *op, b.to_string())).collect(),
    }
}

/// Counter values per configuration: `E1`-classes marked `c_i` inside each
/// `E2 ∩ F2` class, in label order.
fn counters(s: &Structure) -> Vec<[usize; 2]> {
    let mut per: std::collections::BTreeMap<(usize, usize), [BTreeSet<usize>; 2]> = Default::default();
    for a in 0..s.n {
        let entry = per.entry((s.eq[1][a], s.feq[1][a])).or_default();
        for (i, c) in COUNTER_PREDICATES.iter().enumerate() {
            if s.unary_holds(c, a) {
                entry[i].insert(s.eq[0][a]);
            }
        }
    }
    per.into_values().map(|[a, b]| [a.len(), b.len()]).collect()
}

fn tcm_soundness() -> Outcome {
    use Op::{Dec, Inc, Zero};
    let halting = [
        machine(&["s0", "sF"], &[("s0", Zero(1), "sF")]),
        machine(&["s0", "s1", "sF"], &[("s0", Inc(1), "s1"), ("s1", Dec(1), "sF")]),
        machine(
            &["s0", "s1", "s2", "sF"],
            &[("s0", Inc(1), "s1"), ("s1", Inc(2), "s2"), ("s2", Inc(1), "sF")],
        ),
        machine(
            &["s0", "s1", "s2", "s3", "sF"],
            &[
                ("s0", Inc(1), "s1"),
                ("s1", Inc(1), "s2"),
                ("s2", Zero(1), "sF"),
                ("s2", Dec(1), "s3"),
                ("s3", Inc(2), "s2"),
            ],
        ),
        machine(
            &["s0", "s1", "s2", "s3", "s4", "sF"],
            &[
                ("s0", Inc(2), "s1"),
                ("s1", Inc(2), "s2"),
                ("s2", Dec(2), "s3"),
                ("s3", Dec(2), "s4"),
                ("s4", Zero(2), "sF"),
            ],
        ),
    ];
    let mut witnesses = 0;
    let mut audits = 0;
    for m in &halting {
        let Some(run) = simulate(m, 1000) else { continue };
        let s = run_to_structure(m, &run).unwrap();
        let f = tcm_to_formula(m).unwrap();
        witnesses += usize::from(validate_structure(&s, LogicId::TwoFamilies).ok && holds(&s, &f));
        let want: Vec<[usize; 2]> = run.iter().map(|c: &Config| [c.c1 as usize, c.c2 as usize]).collect();
        audits += usize::from(counters(&s) == want);
    }
    let looping = [
        machine(&["s0", "sF"], &[("s0", Inc(1), "s0")]),
        machine(
            &["s0", "s1", "s2", "sF"],
            &[("s0", Zero(1), "s1"), ("s1", Inc(1), "s2"), ("s2", Dec(1), "s0")],
        ),
    ];
    let mut refuted = 0;
    for m in &looping {
        let never = simulate(m, 1000).is_none();
        let snf = to_snf(&tcm_to_formula(m).unwrap(), LogicId::TwoFamilies).unwrap();
        let (found, stats) = find_model_sat(&snf, LogicId::TwoFamilies, 6, Mode::AtMost).unwrap();
        refuted += usize::from(never && matches!(found, FindResult::Absent) && stats.sizes_exhausted.len() == 6);
    }
    verdict(
        witnesses == halting.len() && audits == halting.len() && refuted == looping.len(),
        format!(
            "{witnesses}/{} witnesses satisfy the sentence, {audits}/{} counter audits pass, {refuted}/{} non-halting machines have no model up to 6",
            halting.len(),
            halting.len(),
            looping.len()
        ),
    )
}

fn counting_compression() -> Outcome {
    let r = agreement_run();
    let over = r.keys.iter().filter(|(seen, bound)| *seen as u128 > *bound).count();
    let largest = r.keys.iter().map(|(seen, _)| *seen).max().unwrap_or(0);
    verdict(
        over == 0 && r.keys.len() == r.sentences,
        format!("{} solver runs, {over} states over the key bound, largest state {largest} keys", r.keys.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("certified finite unsatisfiability", unsat_certification),
        ("oracle/solver agreement", oracle_solver_agreement),
        ("normal form equisatisfiability per size", snf_equisatisfiability),
        ("pumping bound", pumping_bound),
        ("interval preservation", interval_preservation),
        ("tiling reduction round trip", tiling_round_trip),
        ("counter machine encoding", tcm_soundness),
        ("counting compression bound", counting_compression),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!out.pass);
        println!(
            "{} [{}] {name}: {} ({:.1?})",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
