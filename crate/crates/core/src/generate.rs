//! Seeded random sentences for test corpora and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::logic::{Formula, LogicId, Rel, Term, Var};
use crate::structure::{evaluate, Structure, Valuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub logic: LogicId,
    pub unary: usize,
    pub binary: usize,
    /// Levels of the special family in use.
    pub k: u32,
    /// Depth of quantifier-free matrices.
    pub depth: u32,
}

pub fn unary_name(i: usize) -> String {
    format!("P{i}")
}

pub fn binary_name(i: usize) -> String {
    format!("R{i}")
}

fn var(v: Var) -> Term {
    Term::Var(v)
}

/// A random atom over `vars`.
pub fn random_atom<R: Rng>(rng: &mut R, cfg: &GenConfig, vars: &[Var]) -> Formula {
    let pick = |rng: &mut R| *vars.choose(rng).expect("at least one variable");
    let mut rels: Vec<Rel> = (0..cfg.binary).map(|i| Rel::Common(binary_name(i))).collect();
    if vars.len() == 2 {
        rels.push(Rel::Equal);
    }
    for k in 1..=cfg.k {
        if cfg.logic != LogicId::RawFo2 {
            rels.push(Rel::Equiv(k));
        }
        if cfg.logic.has_preorders() {
            rels.push(Rel::Pre(k));
        }
        if cfg.logic.has_successors() {
            rels.push(Rel::Succ(k));
        }
        if cfg.logic == LogicId::TwoFamilies {
            rels.push(Rel::Fam(k));
        }
    }
    if cfg.logic.has_order() {
        rels.push(Rel::Less);
    }
    let unary_share = if rels.is_empty() { 1.0 } else { 0.5 };
    if cfg.unary > 0 && (rels.is_empty() || rng.gen_bool(unary_share)) {
        let p = unary_name(rng.gen_range(0..cfg.unary));
        return Formula::unary(&p, var(pick(rng)));
    }
    if rels.is_empty() {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let r = rels.choose(rng).expect("non-empty").clone();
    // Special relations between a variable and itself are constant, so
    // prefer distinct arguments when two variables are available.
    let (a, b) = if vars.len() == 2 && (r.is_special() || r == Rel::Equal || rng.gen_bool(0.7)) {
        if rng.gen_bool(0.5) {
            (Var::X, Var::Y)
        } else {
            (Var::Y, Var::X)
        }
    } else {
        (pick(rng), pick(rng))
    };
    Formula::binary(r, var(a), var(b))
}

/// A random quantifier-free formula over `vars`.
pub fn random_matrix<R: Rng>(rng: &mut R, cfg: &GenConfig, vars: &[Var], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        let a = random_atom(rng, cfg, vars);
        return if rng.gen_bool(0.4) { Formula::not(a) } else { a };
    }
    let l = random_matrix(rng, cfg, vars, depth - 1);
    let r = random_matrix(rng, cfg, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::and(l, r),
        1 => Formula::or(l, r),
        2 => Formula::implies(l, r),
        _ => Formula::not(Formula::and(l, r)),
    }
}

/// `∀x∀y.ψ0 ∧ ⋀_{m<skolem} ∀x∃y.ψ_m` with random matrices.
pub fn random_snf_shaped<R: Rng>(rng: &mut R, cfg: &GenConfig, skolem: usize) -> Formula {
    let xy = [Var::X, Var::Y];
    let head = Formula::forall(
        Var::X,
        Formula::forall(Var::Y, random_matrix(rng, cfg, &xy, cfg.depth)),
    );
    let tail = (0..skolem).map(|_| {
        Formula::forall(Var::X, Formula::exists(Var::Y, random_matrix(rng, cfg, &xy, cfg.depth)))
    });
    Formula::conj(std::iter::once(head).chain(tail).collect::<Vec<_>>())
}

/// A random sentence with nested quantifiers (up to `quantifiers` of them).
pub fn random_sentence<R: Rng>(rng: &mut R, cfg: &GenConfig, quantifiers: u32) -> Formula {
    let v = if rng.gen_bool(0.5) { Var::X } else { Var::Y };
    let body = random_body(rng, cfg, &[v], quantifiers.saturating_sub(1), cfg.depth);
    if rng.gen_bool(0.5) {
        Formula::forall(v, body)
    } else {
        Formula::exists(v, body)
    }
}

fn random_body<R: Rng>(rng: &mut R, cfg: &GenConfig, bound: &[Var], quantifiers: u32, depth: u32) -> Formula {
    if quantifiers > 0 && rng.gen_bool(0.6) {
        let v = if bound.len() == 2 || rng.gen_bool(0.8) {
            bound.last().expect("bound").other()
        } else {
            *bound.last().expect("bound")
        };
        let mut inner: Vec<Var> = bound.to_vec();
        if !inner.contains(&v) {
            inner.push(v);
        }
        let q = random_body(rng, cfg, &inner, quantifiers - 1, depth.saturating_sub(1));
        let q = if rng.gen_bool(0.5) {
            Formula::forall(v, q)
        } else {
            Formula::exists(v, q)
        };
        let side = random_matrix(rng, cfg, bound, depth.saturating_sub(1));
        return match rng.gen_range(0..4) {
            0 => Formula::and(side, q),
            1 => Formula::or(side, q),
            2 => Formula::implies(side, q),
            _ => q,
        };
    }
    random_matrix(rng, cfg, bound, depth)
}

/// Nested class labels for `n` elements and `k` levels: each level splits
/// every class of the level above into up to `width` parts. Labels are
/// compacted in first-occurrence order.
pub fn random_levels<R: Rng>(rng: &mut R, n: usize, k: u32, width: usize) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut above = vec![0usize; n];
    for _ in 0..k {
        let raw: Vec<usize> = above.iter().map(|&l| l * width + rng.gen_range(0..width.max(1))).collect();
        let level = first_occurrence(&raw);
        above = level.clone();
        levels.push(level);
    }
    levels.reverse();
    levels
}

/// A random structure for `logic` over `P0..`, `R0..` with `k` levels.
/// Preorder structures are returned in canonical order.
pub fn random_structure<R: Rng>(rng: &mut R, cfg: &GenConfig, n: usize, width: usize) -> Structure {
    let mut s = Structure::new(n);
    let levels = random_levels(rng, n, cfg.k, width);
    match cfg.logic {
        LogicId::RawFo2 => {}
        LogicId::Preorder | LogicId::PreorderSucc => {
            s.pre = levels;
            s.eq = s.pre.clone();
        }
        LogicId::TwoFamilies => {
            s.eq = levels;
            s.feq = random_levels(rng, n, cfg.k, width);
        }
        LogicId::Eq | LogicId::OrderEq => s.eq = levels,
    }
    s.order = cfg.logic == LogicId::OrderEq;
    for i in 0..cfg.unary {
        let set = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        s.unary.insert(unary_name(i), set);
    }
    for i in 0..cfg.binary {
        let mut set = std::collections::BTreeSet::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(0.5) {
                    set.insert((a, b));
                }
            }
        }
        s.binary.insert(binary_name(i), set);
    }
    if cfg.logic.has_preorders() {
        s = s.canonical();
        for level in &mut s.pre {
            *level = first_occurrence(level);
        }
        s.eq = s.pre.clone();
    }
    s
}

fn first_occurrence(labels: &[usize]) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    labels
        .iter()
        .map(|r| {
            let next = seen.len();
            *seen.entry(*r).or_insert(next)
        })
        .collect()
}

/// A random structure with `n` elements and an SNF-shaped sentence true in
/// it: `psi0` and `skolem` conjuncts are sampled until they hold (at most
/// `tries` samples each; failures fall back to `true`).
pub fn random_model<R: Rng>(
    rng: &mut R,
    cfg: &GenConfig,
    n: usize,
    width: usize,
    skolem: usize,
    tries: usize,
) -> (Structure, Formula) {
    let s = random_structure(rng, cfg, n, width);
    let xy = [Var::X, Var::Y];
    let holds = |f: &Formula| evaluate(&s, f, &Valuation::default()) == Ok(true);
    let sample = |wrap: &dyn Fn(Formula) -> Formula, rng: &mut R| {
        (0..tries)
            .map(|_| wrap(random_matrix(rng, cfg, &xy, cfg.depth)))
            .find(|f| holds(f))
            .unwrap_or(Formula::True)
    };
    let head = sample(&|m| Formula::forall(Var::X, Formula::forall(Var::Y, m)), rng);
    let mut parts = vec![head];
    for _ in 0..skolem {
        parts.push(sample(&|m| Formula::forall(Var::X, Formula::exists(Var::Y, m)), rng));
    }
    (s, Formula::conj(parts))
}


/// Seeded preorder-with-successor sentences with at most two unary
/// symbols, one common binary, `K <= 2` and `M <= 2`. Entry `i` depends
/// only on `seed` and `i`.
pub fn agreement_corpus(seed: u64, count: usize) -> Vec<Formula> {
    (0..count)
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ i as u64);
            let cfg = GenConfig {
                logic: LogicId::PreorderSucc,
                unary: rng.gen_range(1..=2),
                binary: rng.gen_range(0..=1),
                k: rng.gen_range(1..=2),
                depth: 2,
            };
            let skolem = rng.gen_range(1..=2);
            random_snf_shaped(&mut rng, &cfg, skolem)
        })
        .collect()
}
