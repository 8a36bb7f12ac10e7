use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{choose_witnesses, configuration_over, extremal, PumpError, View, WitnessMap};
use crate::logic::LogicId;
use crate::matrix::Vocab;
use crate::normalize::SnfSentence;
use crate::structure::{evaluate, one_type_of, OneType, Structure, Valuation};

/// Extremal width used for the first witness layer: `2M` per 1-type, or
/// `3M` when some witness configuration has no copy within `2M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Width {
    Double,
    Triple,
}

impl Width {
    fn factor(self) -> usize {
        match self {
            Width::Double => 2,
            Width::Triple => 3,
        }
    }
}

/// Most `E_k`-classes a replacement keeps: three witness layers of at most
/// `2·width·M^3·|α|` elements each (at least 1).
pub fn class_bound(m: usize, alphas: u128, width: Width) -> u128 {
    let m = m as u128;
    (6 * width.factor() as u128 * m * m * m * alphas).max(1)
}

/// Element indices refer to the input structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplacementPlan {
    pub level: u32,
    pub class: usize,
    pub width: Width,
    pub c: BTreeSet<usize>,
    pub w1: BTreeSet<usize>,
    pub w2: BTreeSet<usize>,
    pub w3: BTreeSet<usize>,
    pub d: BTreeSet<usize>,
    pub d_classes: usize,
    /// `(A \ C) ∪ D` in increasing order.
    pub kept: Vec<usize>,
    /// `(a, b, c)`: the pair `(a, c)` takes the 2-type of `(a, b)`.
    pub rewired: Vec<(usize, usize, usize)>,
}

/// `E_k` label; `E_0` is identity and levels above the sentence's are one class.
fn label(s: &Structure, top: u32, k: u32, a: usize) -> usize {
    if k == 0 {
        a
    } else if k > top {
        0
    } else if let Some(l) = s.eq.get(k as usize - 1) {
        l[a]
    } else {
        s.pre[k as usize - 1][a]
    }
}

fn aligned(s: &Structure) -> bool {
    s.pre.iter().all(|l| l.windows(2).all(|w| w[0] <= w[1]))
}

fn check_logic(logic: LogicId) -> Result<View, PumpError> {
    match logic {
        LogicId::Eq | LogicId::OrderEq | LogicId::Preorder => Ok(View::of(logic)),
        other => Err(PumpError::Logic(other)),
    }
}

fn is_model(s: &Structure, snf: &SnfSentence) -> Result<bool, PumpError> {
    Ok(evaluate(s, &snf.to_formula(), &Valuation::default())?)
}

struct Ctx<'a> {
    s: &'a Structure,
    top: u32,
    k: u32,
    view: View,
    vocab: Vocab,
    types: Vec<OneType>,
}

impl Ctx<'_> {
    fn same_k(&self, a: usize, b: usize) -> bool {
        label(self.s, self.top, self.k, a) == label(self.s, self.top, self.k, b)
    }

    /// Distinct elements of `w1` matching `bs` around `a`: same 1-type, same
    /// side of `a`, outside the `E_k`-class of `a`. Below `a` the smallest
    /// candidates are taken, above it the largest.
    fn realise(&self, a: usize, bs: &[usize], w1: &BTreeSet<usize>) -> Result<Vec<usize>, PumpError> {
        let mut used = BTreeSet::new();
        let mut cs = Vec::with_capacity(bs.len());
        for &b in bs {
            let ok = |c: &&usize| {
                let c = **c;
                c != a
                    && !used.contains(&c)
                    && self.types[c] == self.types[b]
                    && !self.same_k(a, c)
                    && (self.view == View::Unordered || (c < a) == (b < a))
            };
            let pick = if self.view != View::Unordered && b > a {
                w1.iter().rev().find(ok)
            } else {
                w1.iter().find(ok)
            };
            let c = *pick.ok_or(PumpError::Unrealisable { a, b })?;
            used.insert(c);
            cs.push(c);
        }
        Ok(cs)
    }
}

fn plan(
    ctx: &Ctx,
    class: usize,
    m: usize,
    wmap: &WitnessMap,
    width: Width,
) -> Result<ReplacementPlan, PumpError> {
    let s = ctx.s;
    let k = ctx.k;
    let c: BTreeSet<usize> = (0..s.n).filter(|&a| label(s, ctx.top, k + 1, a) == class).collect();
    if c.is_empty() {
        return Err(PumpError::NoClass { level: k + 1, class });
    }
    // by 1-type, then by E_k-class
    let mut by_type: BTreeMap<OneType, BTreeMap<usize, BTreeSet<usize>>> = BTreeMap::new();
    for &a in &c {
        by_type
            .entry(ctx.types[a])
            .or_default()
            .entry(label(s, ctx.top, k, a))
            .or_default()
            .insert(a);
    }
    // without an order any subset of the right size serves; take the least
    let pick = |set: &BTreeSet<usize>, r: usize| -> BTreeSet<usize> {
        match ctx.view {
            View::Unordered => set.iter().take(2 * r).copied().collect(),
            _ => extremal(set, r),
        }
    };
    let mut w1 = BTreeSet::new();
    for classes in by_type.values() {
        let v_alpha: BTreeSet<usize> = classes.values().flat_map(|e| pick(e, m)).collect();
        w1.extend(pick(&v_alpha, width.factor() * m));
    }
    let image = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
        set.iter().flat_map(|&a| wmap.f.iter().map(move |f| f[a])).collect()
    };
    let w2 = image(&w1);
    let w3 = image(&w2);
    let mut core: BTreeSet<usize> = w1.iter().chain(&w2).chain(&w3).filter(|a| c.contains(a)).copied().collect();
    if core.is_empty() && c.len() == s.n {
        // without Skolem conjuncts nothing forces a class; keep one so the
        // domain stays non-empty
        core.insert(*c.iter().next().expect("non-empty class"));
    }
    let core_labels: BTreeSet<usize> = core.iter().map(|&a| label(s, ctx.top, k, a)).collect();
    let d: BTreeSet<usize> = c
        .iter()
        .filter(|&&a| core_labels.contains(&label(s, ctx.top, k, a)))
        .copied()
        .collect();
    let kept: Vec<usize> = (0..s.n).filter(|a| !c.contains(a) || d.contains(a)).collect();

    let mut rewired = Vec::new();
    for &a in kept.iter().filter(|a| !w1.contains(a) && !w2.contains(a)) {
        let bs: Vec<usize> = wmap
            .of(a)
            .into_iter()
            .filter(|&b| c.contains(&b) && !ctx.same_k(a, b))
            .collect();
        let cs = ctx.realise(a, &bs, &w1)?;
        debug_assert!(configuration_over(s, &ctx.vocab, a, &bs, &cs, ctx.view).unwrap_or(false));
        rewired.extend(bs.into_iter().zip(cs).map(|(b, c)| (a, b, c)));
    }
    Ok(ReplacementPlan {
        level: k,
        class,
        width,
        d_classes: core_labels.len(),
        c,
        w1,
        w2,
        w3,
        d,
        kept,
        rewired,
    })
}

/// Replace the `E_{k+1}`-class `class` (its label at level `k+1`; the whole
/// domain when `k` is the top level) by a union of few of its `E_k`-classes,
/// rewiring 2-types so every element keeps its witnesses. Returns the new
/// model (elements renumbered in increasing order) and the plan.
pub fn replace_class(
    s: &Structure,
    snf: &SnfSentence,
    logic: LogicId,
    k: u32,
    class: usize,
    wmap: &WitnessMap,
) -> Result<(Structure, ReplacementPlan), PumpError> {
    let view = check_logic(logic)?;
    let top = snf.k;
    if k > top || (s.k() < top) {
        return Err(PumpError::Level(k));
    }
    if logic == LogicId::Preorder && !aligned(s) {
        return Err(PumpError::NotAligned);
    }
    if !is_model(s, snf)? {
        return Err(PumpError::NotAModel);
    }
    let vocab = snf.vocab();
    let types = (0..s.n)
        .map(|a| one_type_of(s, &vocab, a))
        .collect::<Result<Vec<_>, _>>()?;
    let ctx = Ctx {
        s,
        top,
        k,
        view,
        vocab,
        types,
    };
    let p = match plan(&ctx, class, snf.m(), wmap, Width::Double) {
        Err(PumpError::Unrealisable { .. }) => plan(&ctx, class, snf.m(), wmap, Width::Triple)?,
        other => other?,
    };
    let mut rewired = s.clone();
    for (name, rel) in rewired.binary.iter_mut() {
        let orig = &s.binary[name];
        for &(a, b, c) in &p.rewired {
            for (pair, from) in [((a, c), (a, b)), ((c, a), (b, a))] {
                if orig.contains(&from) {
                    rel.insert(pair);
                } else {
                    rel.remove(&pair);
                }
            }
        }
    }
    let out = rewired.restrict(&p.kept);
    if !is_model(&out, snf)? {
        return Err(PumpError::Inconsistent);
    }
    Ok((out, p))
}

/// Classes at level `k+1`, in increasing label order.
fn classes(s: &Structure, top: u32, k: u32) -> BTreeSet<usize> {
    (0..s.n).map(|a| label(s, top, k + 1, a)).collect()
}

/// Apply replacements (levels upward, classes by label, restarting after
/// each success) until none removes an element. Preorder structures are
/// put in canonical order first.
pub fn shrink(s: &Structure, snf: &SnfSentence, logic: LogicId) -> Result<Structure, PumpError> {
    shrink_traced(s, snf, logic).map(|(m, _)| m)
}

/// [`shrink`] with the plans that removed elements.
pub fn shrink_traced(
    s: &Structure,
    snf: &SnfSentence,
    logic: LogicId,
) -> Result<(Structure, Vec<ReplacementPlan>), PumpError> {
    check_logic(logic)?;
    let mut cur = if logic == LogicId::Preorder && !aligned(s) {
        s.canonical()
    } else {
        s.clone()
    };
    let mut applied = Vec::new();
    'outer: loop {
        for k in 0..=snf.k {
            for class in classes(&cur, snf.k, k) {
                let wmap = choose_witnesses(&cur, snf)?;
                let (next, p) = replace_class(&cur, snf, logic, k, class, &wmap)?;
                if next.n < cur.n {
                    cur = next;
                    applied.push(p);
                    continue 'outer;
                }
            }
        }
        return Ok((cur, applied));
    }
}
