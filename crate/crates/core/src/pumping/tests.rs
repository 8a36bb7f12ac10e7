use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::generate::{random_model, GenConfig};
use crate::logic::parse_formula;
use crate::normalize::to_snf;
use crate::oracle::completeness_bound;
use crate::structure::{interval_property, two_type_of, validate_structure, OneType, TwoType, TypeLayout};

fn snf(text: &str, logic: LogicId) -> SnfSentence {
    to_snf(&parse_formula(text).unwrap(), logic).unwrap()
}

fn holds(s: &Structure, snf: &SnfSentence) -> bool {
    evaluate(s, &snf.to_formula(), &Valuation::default()) == Ok(true)
}

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

/// A seeded model of a random SNF-shaped sentence, lifted to the SNF.
fn lifted(seed: u64, logic: LogicId, n: usize, k: u32) -> (Structure, SnfSentence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        logic,
        unary: 2,
        binary: 1,
        k,
        depth: 2,
    };
    let width = rng.gen_range(2..=4);
    let (s, f) = random_model(&mut rng, &cfg, n, width, 2, 60);
    let snf = to_snf(&f, logic).unwrap();
    let s = snf.lift(&s).unwrap();
    assert!(holds(&s, &snf), "{f}");
    (s, snf)
}

fn two_types(s: &Structure, snf: &SnfSentence, logic: LogicId) -> BTreeSet<(OneType, OneType, TwoType)> {
    let vocab = snf.vocab();
    let layout = TypeLayout::new(&vocab, logic).unwrap();
    let mut out = BTreeSet::new();
    for a in 0..s.n {
        for b in 0..s.n {
            if a != b {
                out.insert((
                    one_type_of(s, &vocab, a).unwrap(),
                    one_type_of(s, &vocab, b).unwrap(),
                    two_type_of(s, &vocab, &layout, a, b).unwrap(),
                ));
            }
        }
    }
    out
}

/// Every property a replacement promises, checked against the input.
fn audit(s: &Structure, snf: &SnfSentence, logic: LogicId, wmap: &WitnessMap, out: &Structure, p: &ReplacementPlan) {
    assert!(holds(out, snf));
    assert!(validate_structure(out, logic).ok);
    let bound = class_bound(snf.m(), alpha_count(snf), p.width);
    assert!(p.d_classes as u128 <= bound, "{} classes over {bound}", p.d_classes);

    let image = |w: &BTreeSet<usize>| -> BTreeSet<usize> { w.iter().flat_map(|&a| wmap.f.iter().map(move |f| f[a])).collect() };
    assert_eq!(p.w2, image(&p.w1));
    assert_eq!(p.w3, image(&p.w2));
    assert!(p.d.is_subset(&p.c));
    for &a in &p.c {
        let touched = p.w1.contains(&a) || p.w2.contains(&a) || p.w3.contains(&a);
        assert!(!touched || p.d.contains(&a));
        for &b in &p.d {
            if s.same_class(p.level, a, b) {
                assert!(p.d.contains(&a), "D is not closed under the class of {b}");
            }
        }
    }
    let kept: Vec<usize> = (0..s.n).filter(|a| !p.c.contains(a) || p.d.contains(a)).collect();
    assert_eq!(p.kept, kept);
    assert_eq!(out.n, kept.len());

    // types, frame, locality
    assert!(two_types(out, snf, logic).is_subset(&two_types(s, snf, logic)));
    let touched: BTreeSet<(usize, usize)> = p.rewired.iter().flat_map(|&(a, _, c)| [(a, c), (c, a)]).collect();
    for (i, &a) in kept.iter().enumerate() {
        for (j, &b) in kept.iter().enumerate() {
            for level in 1..=s.k() {
                assert_eq!(out.same_class(level, i, j), s.same_class(level, a, b));
                if !s.pre.is_empty() {
                    assert_eq!(out.preceq(level, i, j), s.preceq(level, a, b));
                }
            }
            if touched.contains(&(a, b)) {
                assert!(!s.same_class(p.level, a, b) && (p.w1.contains(&a) || p.w1.contains(&b)));
                continue;
            }
            for r in s.binary.keys() {
                assert_eq!(out.binary_holds(r, i, j), s.binary_holds(r, a, b), "pair ({a},{b}) changed");
            }
        }
    }
}

fn replace_everywhere(s: &Structure, snf: &SnfSentence, logic: LogicId) -> usize {
    let wmap = choose_witnesses(s, snf).unwrap();
    let mut calls = 0;
    for k in 0..=snf.k {
        let classes: BTreeSet<usize> = (0..s.n)
            .map(|a| if k == snf.k { 0 } else { s.eq.get(k as usize).or(s.pre.get(k as usize)).unwrap()[a] })
            .collect();
        for class in classes {
            let (out, p) = replace_class(s, snf, logic, k, class, &wmap).unwrap();
            audit(s, snf, logic, &wmap, &out, &p);
            calls += 1;
        }
    }
    calls
}

#[test]
fn witnesses_in_a_two_element_class() {
    let snf = snf("forall x. exists y. (E1(x,y) & !(x = y))", LogicId::Eq);
    let mut s = Structure::new(2);
    s.eq = vec![vec![0, 0]];
    assert_eq!(choose_witnesses(&s, &snf).unwrap().f, vec![vec![1, 0]]);
    let one = s.restrict(&[0]);
    assert_eq!(choose_witnesses(&one, &snf), Err(PumpError::NoWitness { m: 0, a: 0 }));
}

#[test]
fn witness_maps_hold_on_random_models() {
    for seed in 0..20 {
        let (s, snf) = lifted(seed, LogicId::OrderEq, 12, 1);
        let w = choose_witnesses(&s, &snf).unwrap();
        for (m, psi) in snf.skolem.iter().enumerate() {
            for a in 0..s.n {
                assert_eq!(evaluate(&s, psi, &Valuation::xy(a, w.f[m][a])), Ok(true));
            }
        }
    }
}

#[test]
fn extremal_examples() {
    assert_eq!(extremal(&set(&[1, 3, 4, 5, 9]), 2), set(&[1, 3, 5, 9]));
    assert_eq!(extremal(&set(&[1, 2]), 3), set(&[1, 2]));
    assert_eq!(extremal(&set(&[]), 1), set(&[]));
}

proptest! {
    #[test]
    fn extremal_size(xs in proptest::collection::btree_set(0usize..200, 0..40), r in 0usize..12) {
        let e = extremal(&xs, r);
        prop_assert_eq!(e.len(), xs.len().min(2 * r));
        prop_assert!(e.is_subset(&xs));
        // kept elements are never beaten from both sides by dropped ones
        for x in xs.difference(&e) {
            prop_assert!(e.iter().filter(|y| *y < x).count() >= r);
            prop_assert!(e.iter().filter(|y| *y > x).count() >= r);
        }
    }
}

fn six() -> Structure {
    let mut s = Structure::new(6);
    s.order = true;
    s.eq = vec![vec![0, 0, 1, 1, 2, 2], vec![0, 0, 0, 0, 1, 1]];
    s.unary.insert("P".into(), set(&[0, 2, 3, 5]));
    s
}

#[test]
fn configuration_basics() {
    let s = six();
    for a in 0..6 {
        assert_eq!(same_configuration(&s, a, &[1, 4], &[1, 4], View::Ordered), Ok(true));
    }
    // 1 lacks P, 0 has it
    assert_eq!(same_configuration(&s, 5, &[1], &[0], View::Unordered), Ok(false));
    // 3 and 2 agree on everything relative to 0
    assert_eq!(same_configuration(&s, 0, &[3], &[2], View::Ordered), Ok(true));
    assert_eq!(same_configuration(&s, 0, &[1, 2], &[1], View::Ordered), Err(PumpError::Tuples));
    assert_eq!(same_configuration(&s, 0, &[1, 1], &[2, 3], View::Ordered), Err(PumpError::Tuples));
}

/// The conditions spelled out one by one.
fn direct(s: &Structure, a: usize, bs: &[usize], cs: &[usize], ordered: bool) -> bool {
    bs.iter().zip(cs).all(|(&b, &c)| {
        let p = |x: usize| s.unary_holds("P", x);
        let side = |x: usize| if ordered { a.cmp(&x) } else { (a == x).cmp(&false) };
        p(b) == p(c) && side(b) == side(c) && (1..=2).all(|j| s.same_class(j, a, b) == s.same_class(j, a, c))
    })
}

#[test]
fn configuration_matches_direct_check() {
    let s = six();
    let pairs: Vec<(usize, usize)> = (0..6).flat_map(|x| (0..6).map(move |y| (x, y))).filter(|(x, y)| x != y).collect();
    for a in 0..6 {
        for &(b1, b2) in &pairs {
            for &(c1, c2) in &pairs {
                for (view, ordered) in [(View::Ordered, true), (View::Unordered, false)] {
                    assert_eq!(
                        same_configuration(&s, a, &[b1, b2], &[c1, c2], view),
                        Ok(direct(&s, a, &[b1, b2], &[c1, c2], ordered)),
                        "a={a} bs=({b1},{b2}) cs=({c1},{c2})"
                    );
                }
            }
        }
    }
}

#[test]
fn small_class_is_kept_whole() {
    let snf = snf("forall x. exists y. E1(x,y)", LogicId::OrderEq);
    let mut s = Structure::new(5);
    s.order = true;
    s.eq = vec![vec![0, 0, 1, 1, 1]];
    let wmap = choose_witnesses(&s, &snf).unwrap();
    let (out, p) = replace_class(&s, &snf, LogicId::OrderEq, 0, 1, &wmap).unwrap();
    assert_eq!(p.d, p.c);
    assert!(p.rewired.is_empty());
    assert_eq!(out, s);
}

#[test]
fn preconditions_are_checked() {
    let text = "forall x. exists y. (E1(x,y) & !(x = y))";
    let s = {
        let mut s = Structure::new(2);
        s.eq = vec![vec![0, 1]];
        s
    };
    let eq = snf(text, LogicId::Eq);
    let w = WitnessMap { f: vec![vec![0, 1]] };
    assert_eq!(replace_class(&s, &eq, LogicId::Eq, 0, 0, &w).err(), Some(PumpError::NotAModel));
    assert_eq!(replace_class(&s, &eq, LogicId::Eq, 3, 0, &w).err(), Some(PumpError::Level(3)));
    assert_eq!(
        replace_class(&s, &eq, LogicId::PreorderSucc, 0, 0, &w).err(),
        Some(PumpError::Logic(LogicId::PreorderSucc))
    );
    let mut two = s.clone();
    two.eq = vec![vec![0, 0]];
    assert_eq!(
        replace_class(&two, &eq, LogicId::Eq, 0, 7, &w).err(),
        Some(PumpError::NoClass { level: 1, class: 7 })
    );
    let mut pre = Structure::new(2);
    pre.pre = vec![vec![1, 0]];
    pre.eq = pre.pre.clone();
    let p = snf(text, LogicId::Preorder);
    assert_eq!(replace_class(&pre, &p, LogicId::Preorder, 0, 0, &w).err(), Some(PumpError::NotAligned));
}

#[test]
fn replacements_on_ordered_models() {
    let mut calls = 0;
    for seed in 0..12 {
        let (s, snf) = lifted(100 + seed, LogicId::OrderEq, 40, 1);
        calls += replace_everywhere(&s, &snf, LogicId::OrderEq);
    }
    assert!(calls >= 12);
}

#[test]
fn replacements_on_unordered_models() {
    for seed in 0..8 {
        let (s, snf) = lifted(200 + seed, LogicId::Eq, 30, 2);
        replace_everywhere(&s, &snf, LogicId::Eq);
    }
}

#[test]
fn replacements_keep_intervals() {
    for seed in 0..10 {
        let (s, snf) = lifted(300 + seed, LogicId::Preorder, 30, 2);
        assert_eq!(interval_property(&s), Ok(()));
        let wmap = choose_witnesses(&s, &snf).unwrap();
        for k in 0..=snf.k {
            let (out, _) = replace_class(&s, &snf, LogicId::Preorder, k, 0, &wmap).unwrap();
            assert_eq!(interval_property(&out), Ok(()));
        }
        let small = shrink(&s, &snf, LogicId::Preorder).unwrap();
        assert_eq!(interval_property(&small), Ok(()));
        assert!(holds(&small, &snf));
    }
}

const PAIRS: &str =
    "(forall x. exists y. (E1(x,y) & !(x = y) & (P(x) <-> !P(y)))) & (forall x. exists y. (x < y | y < x))";

/// `base` with the `E_1`-class of element 0 copied `times` times, copies
/// placed after the original and linked to the rest like the original.
fn inflate(base: &Structure, times: usize) -> Structure {
    let class: Vec<usize> = (0..base.n).filter(|&a| base.same_class(1, 0, a)).collect();
    let mut src: Vec<usize> = (0..base.n).collect();
    let mut copy_of = vec![0usize; base.n];
    for t in 1..=times {
        for &a in &class {
            src.push(a);
            copy_of.push(t);
        }
    }
    let n = src.len();
    let mut s = Structure::new(n);
    s.order = base.order;
    let fresh = base.eq[0].iter().max().unwrap() + 1;
    s.eq = vec![(0..n).map(|i| if copy_of[i] == 0 { base.eq[0][src[i]] } else { fresh + copy_of[i] }).collect()];
    for (name, set) in &base.unary {
        s.unary.insert(name.clone(), (0..n).filter(|&i| set.contains(&src[i])).collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (src[i], copy_of[i]));
    s.permute(&order)
}

#[test]
fn shrinking_an_inflated_model() {
    for logic in [LogicId::OrderEq, LogicId::Eq] {
        let text = if logic == LogicId::Eq { PAIRS.split(" & (forall x. exists y. (x < y").next().unwrap() } else { PAIRS };
        let snf = snf(text, logic);
        let mut base = Structure::new(2);
        base.order = logic == LogicId::OrderEq;
        base.eq = vec![vec![0, 0]];
        base.unary.insert("P".into(), set(&[0]));
        let base = snf.lift(&base).unwrap();
        assert!(holds(&base, &snf));
        let big = inflate(&base, 20);
        assert_eq!(big.n, 42);
        assert!(holds(&big, &snf), "inflation broke the model");
        let (small, plans) = shrink_traced(&big, &snf, logic).unwrap();
        assert!(holds(&small, &snf));
        assert!(small.n < big.n);
        assert!(!plans.is_empty());
        assert!(small.n as u128 <= completeness_bound(&snf, logic).unwrap());
        // a fixpoint stays put
        assert_eq!(shrink(&small, &snf, logic).unwrap(), small);
    }
}

#[test]
fn minimal_model_is_unchanged() {
    let snf = snf(PAIRS, LogicId::OrderEq);
    let mut s = Structure::new(2);
    s.order = true;
    s.eq = vec![vec![0, 0]];
    s.unary.insert("P".into(), set(&[1]));
    let s = snf.lift(&s).unwrap();
    assert_eq!(shrink(&s, &snf, LogicId::OrderEq).unwrap(), s);
}

#[test]
fn shrunk_models_respect_the_bound() {
    for seed in 0..6 {
        let (s, snf) = lifted(400 + seed, LogicId::OrderEq, 40, 1);
        let small = shrink(&s, &snf, LogicId::OrderEq).unwrap();
        assert!(holds(&small, &snf));
        assert!(small.n as u128 <= completeness_bound(&snf, LogicId::OrderEq).unwrap());
    }
}

/// One `E_2` class. `E_1` class X holds ten P-elements and three others
/// around them; four P-singletons sit at 50, 110, 120, 130. The element
/// at 100 takes 50 as its witness, and the only P-element below it
/// outside X is 50, which the narrow extremal set drops.
#[test]
fn narrow_extremal_width_can_miss_a_configuration() {
    let values: Vec<usize> = vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 99, 100, 105, 110, 120, 130];
    let n = values.len();
    let mut s = Structure::new(n);
    s.order = true;
    let x = |v: usize| v <= 10 || [99, 100, 105].contains(&v);
    s.eq = vec![(0..n).map(|i| if x(values[i]) { 0 } else { i }).collect()];
    s.unary.insert("P".into(), (0..n).filter(|&i| ![99, 100, 105].contains(&values[i])).collect());
    let snf = snf("forall x. exists y. (!E1(x,y) & P(y))", LogicId::OrderEq);
    let s = snf.lift(&s).unwrap();
    let wmap = choose_witnesses(&s, &snf).unwrap();
    assert_eq!(wmap.f[0][12], 10);
    let (out, p) = replace_class(&s, &snf, LogicId::OrderEq, 1, 0, &wmap).unwrap();
    assert_eq!(p.width, Width::Triple);
    assert!(p.w1.contains(&10));
    audit(&s, &snf, LogicId::OrderEq, &wmap, &out, &p);
}

