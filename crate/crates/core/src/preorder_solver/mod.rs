//! Decision procedure for nested total preorders with induced successors.
//!
//! Elements are placed left to right with every preorder aligned with the
//! placement order. Element `j` relates to the newest element `i` through
//! `q_j` (smallest level at which they are equivalent, `K+1` if none) and
//! `p_j` (smallest level at which their classes are consecutive, `q_j` if
//! none). Earlier elements are interchangeable up to
//! `(1-type, witnesses, p, q)`, so a search state is a count per key.

mod bfs;
mod reconstruct;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bfs::{decide_preorder_succ, SolverConfig, SolverOutcome};
pub use reconstruct::reconstruct_model;

use crate::logic::LogicId;
use crate::matrix::{CompileError, Qf};
use crate::normalize::SnfSentence;
use crate::structure::{OneType, OneView, PairView, TwoType, TypeError, TypeLayout};
use crate::typespace::{enumerate_one_types, BetaKey, BetaTable, TypeSpaceError};

/// Largest number of Skolem conjuncts; witness sets are bit masks.
pub const MAX_SKOLEM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub alpha: OneType,
    /// Bit `m` set: conjunct `m` already has a witness.
    pub w: u64,
    pub p: u32,
    pub q: u32,
}

/// Counting function over group keys. Zero counts are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolverState {
    pub counts: BTreeMap<GroupKey, u64>,
    pub i: usize,
    pub last_r: u32,
}

impl SolverState {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// How the members of one earlier group relate to the new element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// The group's key before the `p`/`q` update.
    pub group: GroupKey,
    /// `x` is the group member, `y` the new element.
    pub types: Vec<(TwoType, u64)>,
}

/// One placed element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub r: u32,
    pub alpha: OneType,
    /// One entry per group of the previous state, in key order.
    pub splits: Vec<Split>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub steps: Vec<Step>,
}

impl RunTranscript {
    /// One JSON object per element.
    pub fn to_json_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("step serialises") + "\n")
            .collect()
    }

    pub fn from_json_lines(text: &str) -> Result<RunTranscript, serde_json::Error> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(RunTranscript { steps })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("the solver handles preorders with successors, not {0}")]
    Logic(LogicId),
    #[error("{0} Skolem conjuncts exceed the limit of {MAX_SKOLEM}")]
    TooManySkolem(usize),
    #[error(transparent)]
    TypeSpace(#[from] TypeSpaceError),
    #[error(transparent)]
    Layout(#[from] TypeError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("r = {0} is outside 1..=K+1")]
    BadLevel(u32),
    #[error("1-type violates psi0(x,x)")]
    Psi0Self,
    #[error("expected {expected} splits, got {got}")]
    SplitArity { expected: usize, got: usize },
    #[error("split for group {0} does not match the state")]
    SplitGroup(usize),
    #[error("split for group {group} assigns {got} members, group has {expected}")]
    SplitTotal { group: usize, expected: u64, got: u64 },
    #[error("2-type in split {0} is not in its beta cell")]
    NotInCell(usize),
    #[error("2-type in split {0} violates psi0")]
    Psi0Pair(usize),
    #[error("transcript is empty or leaves a witness missing")]
    NotAccepting,
    #[error("reconstruction inconsistent: {0}")]
    Inconsistent(String),
    #[error("cap must be at least 1")]
    EmptyDomain,
}

/// The `p`/`q` update when a new element opens classes below level `r`.
/// `q` becomes `max(q, r)`; if `q <= r` the old `q` is the new `p`,
/// otherwise successor levels below `r` are lost.
pub fn update_pq(p: u32, q: u32, r: u32) -> (u32, u32) {
    if q <= r {
        (q, r)
    } else {
        (p.max(r), q)
    }
}

/// What a 2-type contributes: witnesses for the earlier element (`wf`) and
/// for the new one (`wb`), with one representative type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Effect {
    pub wf: u64,
    pub wb: u64,
    pub ty: TwoType,
}

/// Compiled sentence, admissible 1-types and memoised β-cells.
pub struct Solver {
    pub(crate) snf: SnfSentence,
    pub(crate) layout: TypeLayout,
    psi0: Qf,
    skolem: Vec<Qf>,
    /// 1-types satisfying `psi0(x,x)`.
    pub(crate) alphas: Vec<OneType>,
    pub(crate) all_alphas: usize,
    table: BetaTable,
    effects: RwLock<HashMap<(BetaKey, bool), Arc<Vec<Effect>>>>,
}

impl Solver {
    pub fn new(snf: &SnfSentence) -> Result<Solver, SolverError> {
        if snf.logic != LogicId::PreorderSucc {
            return Err(SolverError::Logic(snf.logic));
        }
        if snf.m() > MAX_SKOLEM {
            return Err(SolverError::TooManySkolem(snf.m()));
        }
        let vocab = snf.vocab();
        let layout = TypeLayout::new(&vocab, LogicId::PreorderSucc)?;
        let psi0 = Qf::compile(&snf.psi0, &vocab)?;
        let skolem = snf
            .skolem
            .iter()
            .map(|f| Qf::compile(f, &vocab))
            .collect::<Result<Vec<_>, _>>()?;
        let all = enumerate_one_types(&snf.signature)?;
        let all_alphas = all.len();
        let alphas = all
            .into_iter()
            .filter(|a| psi0.holds(&OneView { layout: &layout, ty: *a }, 0, 0))
            .collect();
        Ok(Solver {
            snf: snf.clone(),
            table: BetaTable::new(layout.clone(), LogicId::PreorderSucc),
            layout,
            psi0,
            skolem,
            alphas,
            all_alphas,
            effects: RwLock::new(HashMap::new()),
        })
    }

    pub fn k(&self) -> u32 {
        self.layout.k
    }

    pub fn full(&self) -> u64 {
        mask_below(self.skolem.len())
    }

    /// Largest number of distinct keys a state can hold.
    pub fn key_bound(&self) -> u128 {
        let k = self.k() as u128;
        (self.all_alphas as u128) * (1u128 << self.skolem.len()) * (k + 1) * (k + 2) / 2
    }

    pub(crate) fn self_ok(&self, alpha: OneType) -> bool {
        self.psi0.holds(&OneView { layout: &self.layout, ty: alpha }, 0, 0)
    }

    /// Conjuncts witnessed by the element itself.
    pub(crate) fn self_witnesses(&self, alpha: OneType) -> u64 {
        let view = OneView { layout: &self.layout, ty: alpha };
        self.mask(|q| q.holds(&view, 0, 0))
    }

    fn mask(&self, f: impl Fn(&Qf) -> bool) -> u64 {
        self.skolem
            .iter()
            .enumerate()
            .filter(|(_, q)| f(q))
            .fold(0, |acc, (m, _)| acc | 1 << m)
    }

    pub(crate) fn pair_ok(&self, ty: &TwoType) -> bool {
        let view = PairView { layout: &self.layout, ty };
        self.psi0.holds(&view, 0, 1) && self.psi0.holds(&view, 1, 0)
    }

    /// `(wf, wb)` of a 2-type with `x` the earlier element.
    pub(crate) fn witnesses(&self, ty: &TwoType) -> (u64, u64) {
        let view = PairView { layout: &self.layout, ty };
        (self.mask(|q| q.holds(&view, 0, 1)), self.mask(|q| q.holds(&view, 1, 0)))
    }

    pub(crate) fn cell(&self, key: BetaKey) -> Result<Arc<Vec<TwoType>>, SolverError> {
        Ok(self.table.get(key)?)
    }

    /// Admissible 2-types of a cell up to their witness contribution, in
    /// bit-lexicographic order of the first representative. With `prune`,
    /// effects covered by another effect are dropped: witness sets only grow
    /// and later steps do not read them, so a covered choice never helps.
    pub(crate) fn effects(&self, key: BetaKey, prune: bool) -> Result<Arc<Vec<Effect>>, SolverError> {
        if let Some(e) = self.effects.read().get(&(key, prune)) {
            return Ok(e.clone());
        }
        let mut out: Vec<Effect> = Vec::new();
        for ty in self.cell(key)?.iter().filter(|t| self.pair_ok(t)) {
            let (wf, wb) = self.witnesses(ty);
            if !out.iter().any(|e| e.wf == wf && e.wb == wb) {
                out.push(Effect { wf, wb, ty: *ty });
            }
        }
        if prune {
            let all = out.clone();
            out.retain(|e| {
                !all.iter()
                    .any(|o| (o.wf, o.wb) != (e.wf, e.wb) && e.wf & !o.wf == 0 && e.wb & !o.wb == 0)
            });
        }
        let out = Arc::new(out);
        Ok(self.effects.write().entry((key, prune)).or_insert(out).clone())
    }

    /// Check a guessed step against the rules and apply it.
    pub fn step_state(
        &self,
        st: &SolverState,
        r: u32,
        alpha: OneType,
        splits: &[Split],
    ) -> Result<SolverState, SolverError> {
        if r == 0 || r > self.k() + 1 {
            return Err(SolverError::BadLevel(r));
        }
        if !self.self_ok(alpha) {
            return Err(SolverError::Psi0Self);
        }
        if splits.len() != st.counts.len() {
            return Err(SolverError::SplitArity {
                expected: st.counts.len(),
                got: splits.len(),
            });
        }
        let mut counts = BTreeMap::new();
        let mut w_new = self.self_witnesses(alpha);
        for (g, ((key, &count), split)) in st.counts.iter().zip(splits).enumerate() {
            if split.group != *key {
                return Err(SolverError::SplitGroup(g));
            }
            let got: u64 = split.types.iter().map(|(_, c)| c).sum();
            if got != count {
                return Err(SolverError::SplitTotal {
                    group: g,
                    expected: count,
                    got,
                });
            }
            let (p, q) = update_pq(key.p, key.q, r);
            let cell = self.cell(BetaKey {
                alpha1: key.alpha,
                alpha2: alpha,
                p,
                q,
            })?;
            for (ty, c) in split.types.iter().filter(|(_, c)| *c > 0) {
                if !cell.contains(ty) {
                    return Err(SolverError::NotInCell(g));
                }
                if !self.pair_ok(ty) {
                    return Err(SolverError::Psi0Pair(g));
                }
                let (wf, wb) = self.witnesses(ty);
                w_new |= wb;
                let k = GroupKey {
                    alpha: key.alpha,
                    w: key.w | wf,
                    p,
                    q,
                };
                *counts.entry(k).or_insert(0) += c;
            }
        }
        let own = GroupKey {
            alpha,
            w: w_new,
            p: 1,
            q: 1,
        };
        *counts.entry(own).or_insert(0) += 1;
        Ok(SolverState {
            counts,
            i: st.i + 1,
            last_r: r,
        })
    }

    pub fn accepting(&self, st: &SolverState) -> bool {
        st.i > 0 && st.counts.keys().all(|g| g.w == self.full())
    }
}

fn mask_below(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}
