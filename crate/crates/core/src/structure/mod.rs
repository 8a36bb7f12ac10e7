//! Finite structures. Special relations are stored as per-element labels
//! (class ids for `E_k`, level indices for `pre_k`); common relations are
//! stored extensionally.

mod dense;
mod eval;
mod types;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Signature, SpecialProfile};

pub use dense::Dense;
pub use eval::{evaluate, EvalError, Valuation};
pub use types::{one_type_of, two_type_of, OneType, OneView, PairView, TwoType, TypeError, TypeLayout};
pub use validate::{interval_property, validate_structure, Failure, ValidationReport};

/// A finite structure over the domain `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub n: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub order: bool,
    /// `eq[k-1][a]` is the `E_k` class id of `a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eq: Vec<Vec<usize>>,
    /// `pre[k-1][a]` is the `pre_k` level of `a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pre: Vec<Vec<usize>>,
    /// `feq[k-1][a]` is the `F_k` class id of `a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feq: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unary: BTreeMap<String, BTreeSet<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub binary: BTreeMap<String, BTreeSet<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, usize>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("pre{0} is not interpreted")]
    LevelAbsent(u32),
    #[error("signature is not a subset of the structure's signature")]
    NotSubset,
    #[error("malformed structure JSON: {0}")]
    Json(String),
}

impl Structure {
    pub fn new(n: usize) -> Structure {
        Structure {
            n,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Structure, StructureError> {
        serde_json::from_str(text).map_err(|e| StructureError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure serialises")
    }

    pub fn k(&self) -> u32 {
        self.eq.len().max(self.pre.len()) as u32
    }

    /// `E_k` membership. `k = 0` is identity, `k` beyond the stored levels is
    /// the universal relation.
    pub fn same_class(&self, k: u32, a: usize, b: usize) -> bool {
        if k == 0 {
            return a == b;
        }
        let k = k as usize;
        if let Some(l) = self.eq.get(k - 1) {
            l[a] == l[b]
        } else if let Some(l) = self.pre.get(k - 1) {
            l[a] == l[b]
        } else {
            true
        }
    }

    pub fn same_fam_class(&self, k: u32, a: usize, b: usize) -> bool {
        if k == 0 {
            return a == b;
        }
        self.feq.get(k as usize - 1).is_none_or(|l| l[a] == l[b])
    }

    /// `a pre_k b`.
    pub fn preceq(&self, k: u32, a: usize, b: usize) -> bool {
        let l = &self.pre[k as usize - 1];
        l[a] <= l[b]
    }

    /// `S_k(a, b)`: `b` lies on the level directly above `a`.
    pub fn succ(&self, k: u32, a: usize, b: usize) -> bool {
        let l = &self.pre[k as usize - 1];
        l[b] == l[a] + 1
    }

    pub fn unary_holds(&self, p: &str, a: usize) -> bool {
        self.unary.get(p).is_some_and(|s| s.contains(&a))
    }

    pub fn binary_holds(&self, r: &str, a: usize, b: usize) -> bool {
        self.binary.get(r).is_some_and(|s| s.contains(&(a, b)))
    }

    /// The symbols this structure interprets.
    pub fn signature(&self) -> Signature {
        let k = self.k();
        let special = SpecialProfile {
            order: self.order,
            equiv: (1..=k).collect(),
            pre: (1..=self.pre.len() as u32).collect(),
            succ: (1..=self.pre.len() as u32).collect(),
            fam: (1..=self.feq.len() as u32).collect(),
        };
        Signature {
            unary: self.unary.keys().cloned().collect(),
            binary: self.binary.keys().cloned().collect(),
            constants: self.constants.keys().cloned().collect(),
            special,
            k,
            k_fam: self.feq.len() as u32,
            equality_allowed: true,
        }
    }

    /// Copy of `self` with elements renamed: new element `i` is old `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Structure {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let relabel = |l: &Vec<usize>| perm.iter().map(|&old| l[old]).collect();
        Structure {
            n: self.n,
            order: self.order,
            eq: self.eq.iter().map(relabel).collect(),
            pre: self.pre.iter().map(relabel).collect(),
            feq: self.feq.iter().map(relabel).collect(),
            unary: self
                .unary
                .iter()
                .map(|(p, s)| (p.clone(), s.iter().map(|&a| inv[a]).collect()))
                .collect(),
            binary: self
                .binary
                .iter()
                .map(|(r, s)| (r.clone(), s.iter().map(|&(a, b)| (inv[a], inv[b])).collect()))
                .collect(),
            constants: self.constants.iter().map(|(c, &a)| (c.clone(), inv[a])).collect(),
        }
    }

    /// Sort elements by `(pre_K, …, pre_1)` (stable), which makes preorder
    /// labels aligned with the index order.
    pub fn canonical(&self) -> Structure {
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.sort_by_key(|&a| self.pre.iter().rev().map(|l| l[a]).collect::<Vec<_>>());
        self.permute(&perm)
    }

    /// The induced substructure on `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Structure {
        let mut inv = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            inv[old] = new;
        }
        let relabel = |l: &Vec<usize>| keep.iter().map(|&old| l[old]).collect();
        let mut out = Structure {
            n: keep.len(),
            order: self.order,
            eq: self.eq.iter().map(relabel).collect(),
            pre: self.pre.iter().map(relabel).collect(),
            feq: self.feq.iter().map(relabel).collect(),
            unary: self
                .unary
                .iter()
                .map(|(p, s)| {
                    let s = s.iter().filter(|&&a| inv[a] != usize::MAX).map(|&a| inv[a]);
                    (p.clone(), s.collect())
                })
                .collect(),
            binary: self
                .binary
                .iter()
                .map(|(r, s)| {
                    let s = s
                        .iter()
                        .filter(|&&(a, b)| inv[a] != usize::MAX && inv[b] != usize::MAX)
                        .map(|&(a, b)| (inv[a], inv[b]));
                    (r.clone(), s.collect())
                })
                .collect(),
            constants: self
                .constants
                .iter()
                .filter(|(_, &a)| inv[a] != usize::MAX)
                .map(|(c, &a)| (c.clone(), inv[a]))
                .collect(),
        };
        out.compact_levels();
        out
    }

    /// Renumber preorder levels to be contiguous from 0.
    pub fn compact_levels(&mut self) {
        for l in &mut self.pre {
            let used: BTreeSet<usize> = l.iter().copied().collect();
            let map: BTreeMap<usize, usize> = used.into_iter().enumerate().map(|(i, v)| (v, i)).collect();
            for v in l.iter_mut() {
                *v = map[v];
            }
        }
    }
}

/// Pairs `(a, b)` with `level_k(b) = level_k(a) + 1`.
pub fn induced_successor(s: &Structure, k: u32) -> Result<BTreeSet<(usize, usize)>, StructureError> {
    if k == 0 || k as usize > s.pre.len() {
        return Err(StructureError::LevelAbsent(k));
    }
    let mut out = BTreeSet::new();
    for a in 0..s.n {
        for b in 0..s.n {
            if s.succ(k, a, b) {
                out.insert((a, b));
            }
        }
    }
    Ok(out)
}

/// Drop every interpretation outside `sig`.
pub fn reduct(s: &Structure, sig: &Signature) -> Result<Structure, StructureError> {
    if !sig.is_subset_of(&s.signature()) {
        return Err(StructureError::NotSubset);
    }
    let pre_keep = sig.special.pre.iter().copied().max().unwrap_or(0) as usize;
    if pre_keep > s.pre.len() {
        return Err(StructureError::NotSubset);
    }
    let eq_keep = (sig.k as usize).min(s.eq.len());
    Ok(Structure {
        n: s.n,
        order: sig.special.order,
        eq: s.eq[..eq_keep].to_vec(),
        pre: s.pre[..pre_keep].to_vec(),
        feq: s.feq[..sig.k_fam as usize].to_vec(),
        unary: s
            .unary
            .iter()
            .filter(|(p, _)| sig.unary.contains(*p))
            .map(|(p, v)| (p.clone(), v.clone()))
            .collect(),
        binary: s
            .binary
            .iter()
            .filter(|(r, _)| sig.binary.contains(*r))
            .map(|(r, v)| (r.clone(), v.clone()))
            .collect(),
        constants: s
            .constants
            .iter()
            .filter(|(c, _)| sig.constants.contains(*c))
            .map(|(c, v)| (c.clone(), *v))
            .collect(),
    })
}
