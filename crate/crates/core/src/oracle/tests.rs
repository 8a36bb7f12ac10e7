use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::generate::{random_sentence, random_snf_shaped, GenConfig};
use crate::logic::parse_formula;

fn snf(text: &str, logic: LogicId) -> SnfSentence {
    to_snf(&parse_formula(text).unwrap(), logic).unwrap()
}

fn budget() -> SearchConfig {
    SearchConfig {
        max_nodes: Some(2_000_000),
        ..SearchConfig::default()
    }
}

fn sound(model: &Structure, f: &Formula, logic: LogicId) {
    let report = validate_structure(model, logic);
    assert!(report.ok, "{:?}", report.failures);
    assert_eq!(evaluate(model, f, &Valuation::default()), Ok(true), "{f}");
}

/// Every labelling of `n` elements by E1 classes, over one unary `P0`.
/// Returns whether some structure satisfies `f`.
fn brute_eq1(f: &Formula, n: usize) -> bool {
    let mut labels = vec![0usize; n];
    loop {
        // restricted growth strings enumerate set partitions once each
        for mask in 0..(1u32 << n) {
            let mut s = Structure::new(n);
            s.eq = vec![labels.clone()];
            let p = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            s.unary.insert("P0".into(), p);
            if evaluate(&s, f, &Valuation::default()) == Ok(true) {
                return true;
            }
        }
        let mut i = n;
        loop {
            if i <= 1 {
                return false;
            }
            i -= 1;
            let cap = labels[..i].iter().max().copied().unwrap_or(0) + 1;
            if labels[i] < cap {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
        }
    }
}

#[test]
fn eq_needs_two_elements() {
    let text = "forall x. exists y. (E1(x,y) & !(x = y))";
    let s = snf(text, LogicId::Eq);
    let cfg = SearchConfig::default();
    let (r1, _) = find_model(&s, LogicId::Eq, 1, Mode::Exact, &cfg).unwrap();
    assert_eq!(r1, FindResult::Absent);
    let (r2, _) = find_model(&s, LogicId::Eq, 2, Mode::Exact, &cfg).unwrap();
    let FindResult::Found(m) = r2 else { panic!("{r2:?}") };
    assert_eq!(m.n, 2);
    assert!(m.same_class(1, 0, 1));
    sound(&s.restore(&m), &parse_formula(text).unwrap(), LogicId::Eq);
}

#[test]
fn strict_order_has_no_finite_endless_chain() {
    let s = snf("forall x. exists y. x < y", LogicId::OrderEq);
    let (r, stats) = find_model(&s, LogicId::OrderEq, 6, Mode::AtMost, &SearchConfig::default()).unwrap();
    assert_eq!(r, FindResult::Absent);
    assert_eq!(stats.sizes_exhausted, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn truth_has_a_singleton_model() {
    let s = snf("true", LogicId::Eq);
    let (r, _) = find_model(&s, LogicId::Eq, 3, Mode::AtMost, &SearchConfig::default()).unwrap();
    let FindResult::Found(m) = r else { panic!("{r:?}") };
    assert_eq!(m.n, 1);
}

#[test]
fn bounds() {
    assert_eq!(completeness_bound(&snf("forall x. exists y. x < y", LogicId::OrderEq), LogicId::OrderEq), Some(12));
    // K=1, M=2, one unary predicate: 144 · 2^6 · 4
    let s = snf(
        "(forall x. exists y. (pre1(x,y) & P(y))) & (forall x. exists y. (pre1(y,x) & !P(y)))",
        LogicId::Preorder,
    );
    assert_eq!((s.k, s.m()), (1, 2));
    assert_eq!(completeness_bound(&s, LogicId::Preorder), Some(36864));
    assert_eq!(completeness_bound(&s, LogicId::PreorderSucc), None);
    // M = 0: universal sentences are closed under substructures
    assert_eq!(completeness_bound(&snf("true", LogicId::Eq), LogicId::Eq), Some(1));
}

#[test]
fn decide_certifies_within_bound() {
    let f = parse_formula("forall x. exists y. x < y").unwrap();
    let v = decide_bounded(&f, LogicId::OrderEq, 12, &SearchConfig::default()).unwrap();
    assert_eq!(v.status, Status::UnsatCertified);
    assert_eq!(v.bound, Some(12));
    let v = decide_bounded(&f, LogicId::OrderEq, 5, &SearchConfig::default()).unwrap();
    assert_eq!(v.status, Status::Unknown);
    let json: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
    assert_eq!(json["status"], "unknown");
}

#[test]
fn decide_returns_original_signature() {
    let text = "exists x. (P(x) & forall y. (E1(x,y) -> (x = y | !P(y)))) & exists x. !P(x)";
    let f = parse_formula(text).unwrap();
    let v = decide_bounded(&f, LogicId::Eq, 4, &SearchConfig::default()).unwrap();
    assert_eq!(v.status, Status::Sat);
    let m = v.model.unwrap();
    assert!(m.unary.keys().all(|p| !p.starts_with('_')));
    sound(&m, &f, LogicId::Eq);
}

#[test]
fn decide_handles_constants() {
    let f = parse_formula("P(@c) & forall x. (P(x) -> x = @c) & exists x. !P(x)").unwrap();
    let v = decide_bounded(&f, LogicId::Eq, 3, &SearchConfig::default()).unwrap();
    assert_eq!(v.status, Status::Sat);
    let m = v.model.unwrap();
    assert_eq!(m.n, 2);
    sound(&m, &f, LogicId::Eq);
}

#[test]
fn refuses_undecidable_and_oversized() {
    let f = parse_formula("true").unwrap();
    assert_eq!(
        decide_bounded(&f, LogicId::TwoFamilies, 3, &SearchConfig::default()),
        Err(OracleError::Undecidable)
    );
    let s = snf("true", LogicId::TwoFamilies);
    assert_eq!(
        find_model(&s, LogicId::TwoFamilies, 9, Mode::Exact, &SearchConfig::default()),
        Err(OracleError::TwoFamiliesCap(9))
    );
    let (r, _) = find_model(&s, LogicId::TwoFamilies, 2, Mode::Exact, &SearchConfig::default()).unwrap();
    assert!(matches!(r, FindResult::Found(_)));
}

#[test]
fn budgets_stop_the_search() {
    let s = snf("(forall x. exists y. (x < y | P(y))) & (exists x. !P(x))", LogicId::OrderEq);
    let cfg = SearchConfig {
        max_nodes: Some(3),
        ..SearchConfig::default()
    };
    let (r, stats) = find_model(&s, LogicId::OrderEq, 6, Mode::Exact, &cfg).unwrap();
    assert_eq!(r, FindResult::Unknown(Stop::Nodes));
    assert!(stats.stopped.is_some());
}

#[test]
fn agrees_with_brute_force_on_eq() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = GenConfig {
        logic: LogicId::Eq,
        unary: 1,
        binary: 0,
        k: 1,
        depth: 2,
    };
    for _ in 0..60 {
        let f = random_sentence(&mut rng, &cfg, 3);
        for n in 1..=3 {
            let expect = brute_eq1(&f, n);
            let (direct, _) = find_model_formula(&f, LogicId::Eq, n, Mode::Exact, &budget()).unwrap();
            assert_eq!(matches!(direct, FindResult::Found(_)), expect, "{f} at {n}");
            let s = to_snf(&f, LogicId::Eq).unwrap();
            let (via_snf, _) = find_model(&s, LogicId::Eq, n, Mode::Exact, &budget()).unwrap();
            assert_eq!(matches!(via_snf, FindResult::Found(_)), expect, "{f} at {n} via SNF");
        }
    }
}

#[test]
fn models_are_sound_across_logics() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for logic in [LogicId::RawFo2, LogicId::Eq, LogicId::OrderEq, LogicId::Preorder, LogicId::PreorderSucc] {
        let k = if logic == LogicId::RawFo2 { 0 } else { 2 };
        let cfg = GenConfig {
            logic,
            unary: 2,
            binary: 1,
            k,
            depth: 2,
        };
        for _ in 0..25 {
            let f = random_sentence(&mut rng, &cfg, 3);
            let (r, _) = find_model_formula(&f, logic, 3, Mode::AtMost, &budget()).unwrap();
            if let FindResult::Found(m) = r {
                sound(&m, &f, logic);
            }
            let s = to_snf(&f, logic).unwrap();
            let (r, _) = find_model(&s, logic, 3, Mode::AtMost, &budget()).unwrap();
            if let FindResult::Found(m) = r {
                sound(&m, &s.to_formula(), logic);
                sound(&s.restore(&m), &f, logic);
            }
        }
    }
}

#[test]
fn exact_and_at_most_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = GenConfig {
        logic: LogicId::Preorder,
        unary: 1,
        binary: 1,
        k: 1,
        depth: 2,
    };
    for _ in 0..200 {
        let f = random_snf_shaped(&mut rng, &cfg, 1);
        let s = to_snf(&f, LogicId::Preorder).unwrap();
        let exact: Vec<bool> = (1..=3)
            .map(|n| {
                let (r, _) = find_model(&s, LogicId::Preorder, n, Mode::Exact, &budget()).unwrap();
                matches!(r, FindResult::Found(_))
            })
            .collect();
        let (r, _) = find_model(&s, LogicId::Preorder, 3, Mode::AtMost, &budget()).unwrap();
        match r {
            FindResult::Found(m) => {
                assert!(exact[m.n - 1], "{f}");
                assert!(!exact[..m.n - 1].iter().any(|b| *b), "{f}: not the smallest");
            }
            other => {
                assert_eq!(other, FindResult::Absent);
                assert!(!exact.iter().any(|b| *b), "{f}");
            }
        }
    }
}

#[test]
fn derived_and_guessed_fresh_predicates_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = GenConfig {
        logic: LogicId::OrderEq,
        unary: 1,
        binary: 0,
        k: 1,
        depth: 2,
    };
    let guessed = SearchConfig {
        derive_fresh: false,
        ..budget()
    };
    for _ in 0..40 {
        let f = random_sentence(&mut rng, &cfg, 3);
        let s = to_snf(&f, LogicId::OrderEq).unwrap();
        for n in 1..=3 {
            let (a, _) = find_model(&s, LogicId::OrderEq, n, Mode::Exact, &budget()).unwrap();
            let (b, _) = find_model(&s, LogicId::OrderEq, n, Mode::Exact, &guessed).unwrap();
            assert_eq!(matches!(a, FindResult::Found(_)), matches!(b, FindResult::Found(_)), "{f} at {n}");
        }
    }
}

#[test]
fn clause_engine_agrees_with_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (logic, k) in [(LogicId::RawFo2, 0), (LogicId::Eq, 2), (LogicId::TwoFamilies, 2)] {
        let cfg = GenConfig {
            logic,
            unary: 2,
            binary: 1,
            k,
            depth: 2,
        };
        for _ in 0..25 {
            let f = random_sentence(&mut rng, &cfg, 3);
            let s = to_snf(&f, logic).unwrap();
            for n in 1..=3 {
                let (dfs, _) = find_model(&s, logic, n, Mode::Exact, &budget()).unwrap();
                let (sat, _) = find_model_sat(&s, logic, n, Mode::Exact).unwrap();
                assert!(!matches!(dfs, FindResult::Unknown(_)), "{f}");
                assert_eq!(matches!(dfs, FindResult::Found(_)), matches!(sat, FindResult::Found(_)), "{f} at {n}");
                if let FindResult::Found(m) = sat {
                    sound(&m, &s.to_formula(), logic);
                    sound(&s.restore(&m), &f, logic);
                }
            }
        }
    }
}

#[test]
fn clause_engine_rejects_ordered_logics() {
    let s = snf("forall x. exists y. x < y", LogicId::OrderEq);
    assert_eq!(
        find_model_sat(&s, LogicId::OrderEq, 2, Mode::Exact).unwrap_err(),
        OracleError::SatUnsupported(LogicId::OrderEq)
    );
    let s = snf("forall x. exists y. E1(x,y)", LogicId::Eq);
    assert!(matches!(find_model_sat(&s, LogicId::Eq, 3, Mode::AtMost).unwrap().0, FindResult::Found(_)));
}
