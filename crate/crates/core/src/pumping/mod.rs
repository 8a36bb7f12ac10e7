//! Small-model machinery: witness functions, extremal subsets, element
//! configurations, replacement of one equivalence class by a few of its
//! subclasses, and iterated shrinking.
//!
//! Orders are read from element indices. Preorder structures are handled
//! through their ordered view: a canonical structure's index order extends
//! `pre_1`, and its equivalences are the induced ones.

mod replace;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use replace::{class_bound, replace_class, shrink, shrink_traced, ReplacementPlan, Width};

use crate::logic::LogicId;
use crate::matrix::Vocab;
use crate::normalize::SnfSentence;
use crate::structure::{evaluate, one_type_of, EvalError, Structure, TypeError, Valuation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PumpError {
    #[error("not a model: element {a} has no witness for conjunct {m}")]
    NoWitness { m: usize, a: usize },
    #[error("not a model: the universal part fails")]
    NotAModel,
    #[error("shrinking is not available for {0}")]
    Logic(LogicId),
    #[error("level {0} is out of range")]
    Level(u32),
    #[error("no class {class} at level {level}")]
    NoClass { level: u32, class: usize },
    #[error("element order does not extend the preorders")]
    NotAligned,
    #[error("tuples differ in length or repeat elements")]
    Tuples,
    #[error("no configuration for element {a} and witness {b} within the replacement witnesses")]
    Unrealisable { a: usize, b: usize },
    #[error("replacement produced a non-model")]
    Inconsistent,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// `f[m][a]`: a witness of `a` for Skolem conjunct `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessMap {
    pub f: Vec<Vec<usize>>,
}

impl WitnessMap {
    pub fn m(&self) -> usize {
        self.f.len()
    }

    /// The distinct witnesses of `a`, by conjunct.
    pub fn of(&self, a: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for f in &self.f {
            if !out.contains(&f[a]) {
                out.push(f[a]);
            }
        }
        out
    }
}

/// Least witnesses. `s` must interpret the SNF signature.
pub fn choose_witnesses(s: &Structure, snf: &SnfSentence) -> Result<WitnessMap, PumpError> {
    let mut f = Vec::with_capacity(snf.m());
    for (m, psi) in snf.skolem.iter().enumerate() {
        let mut row = Vec::with_capacity(s.n);
        for a in 0..s.n {
            let mut found = None;
            for b in 0..s.n {
                if evaluate(s, psi, &Valuation::xy(a, b))? {
                    found = Some(b);
                    break;
                }
            }
            row.push(found.ok_or(PumpError::NoWitness { m, a })?);
        }
        f.push(row);
    }
    Ok(WitnessMap { f })
}

/// `|α| = 2^(#unary + #binary)` over the SNF signature, saturating.
pub fn alpha_count(snf: &SnfSentence) -> u128 {
    2u128.checked_pow(snf.signature.common_rel_count() as u32).unwrap_or(u128::MAX)
}

/// `S` itself when `|S| <= 2r`, else its `r` smallest and `r` largest members.
pub fn extremal(set: &BTreeSet<usize>, r: usize) -> BTreeSet<usize> {
    if set.len() <= 2 * r {
        return set.clone();
    }
    set.iter().take(r).chain(set.iter().rev().take(r)).copied().collect()
}

/// How configurations compare positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    /// Equality only.
    Unordered,
    /// The index order.
    Ordered,
    /// The index order plus successor and predecessor at every level.
    Successor,
}

impl View {
    pub fn of(logic: LogicId) -> View {
        match logic {
            LogicId::OrderEq | LogicId::Preorder => View::Ordered,
            LogicId::PreorderSucc => View::Successor,
            _ => View::Unordered,
        }
    }
}

/// Whether `bs` and `cs` sit the same way around `a`: positionwise equal
/// 1-types, the same position relative to `a`, and the same `E_j` (and for
/// successors, `S_j` both ways) links to `a` at every level.
pub fn same_configuration(s: &Structure, a: usize, bs: &[usize], cs: &[usize], view: View) -> Result<bool, PumpError> {
    configuration_over(s, &Vocab::of_signature(&s.signature()), a, bs, cs, view)
}

/// [`same_configuration`] with 1-types taken over `vocab`.
pub(crate) fn configuration_over(
    s: &Structure,
    vocab: &Vocab,
    a: usize,
    bs: &[usize],
    cs: &[usize],
    view: View,
) -> Result<bool, PumpError> {
    let distinct = |t: &[usize]| t.iter().collect::<BTreeSet<_>>().len() == t.len();
    if bs.len() != cs.len() || !distinct(bs) || !distinct(cs) {
        return Err(PumpError::Tuples);
    }
    for (&b, &c) in bs.iter().zip(cs) {
        if one_type_of(s, vocab, b)? != one_type_of(s, vocab, c)? {
            return Ok(false);
        }
        let position = match view {
            View::Unordered => (a == b) == (a == c),
            View::Ordered | View::Successor => a.cmp(&b) == a.cmp(&c),
        };
        if !position {
            return Ok(false);
        }
        for j in 1..=s.k() {
            if s.same_class(j, a, b) != s.same_class(j, a, c) {
                return Ok(false);
            }
            if view == View::Successor
                && (s.succ(j, a, b) != s.succ(j, a, c) || s.succ(j, b, a) != s.succ(j, c, a))
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
