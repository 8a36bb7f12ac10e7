//! Proper 1-types, proper 2-types and the β-table used by the
//! preorder-with-successor solver.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::Serialize;
use thiserror::Error;

use crate::logic::{LogicId, Signature};
use crate::structure::{OneType, TwoType, TypeLayout};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeSpaceError {
    #[error("constants must be eliminated before enumerating types")]
    Constants,
    #[error("{0} common symbols is too many to enumerate 1-types")]
    TooMany(usize),
    #[error("1-type does not fit the layout")]
    MixedSignatures,
    #[error("beta key has p > q")]
    BadKey,
}

/// Largest number of free 1-type bits we enumerate.
pub const MAX_ONE_TYPE_BITS: usize = 20;

/// `E_k(x,y)` holds iff `q <= k`; `S_k(x,y)` holds iff `p <= k < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BetaKey {
    pub alpha1: OneType,
    pub alpha2: OneType,
    pub p: u32,
    pub q: u32,
}

/// All 1-types: special self-loops are forced, so every assignment of the
/// unary and self-loop bits is proper.
pub fn enumerate_one_types(sig: &Signature) -> Result<Vec<OneType>, TypeSpaceError> {
    if !sig.constants.is_empty() {
        return Err(TypeSpaceError::Constants);
    }
    let bits = sig.common_rel_count();
    if bits > MAX_ONE_TYPE_BITS {
        return Err(TypeSpaceError::TooMany(bits));
    }
    Ok((0..1u128 << bits).map(OneType).collect())
}

/// Relative position of two distinct elements in the special relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Config {
    /// Smallest level at which the pair is equivalent; `k + 1` if none.
    q: u32,
    /// `x` below `y` in the order or preorders (irrelevant when `q == 1` for
    /// preorders).
    forward: bool,
    /// Smallest successor level; `q` if none.
    p: u32,
    /// Same for the `F` family.
    q_fam: u32,
}

fn configs(layout: &TypeLayout, logic: LogicId) -> Vec<Config> {
    let k = layout.k;
    let mut out = Vec::new();
    let fam_levels: Vec<u32> = (1..=layout.k_fam + 1).collect();
    for q in 1..=k + 1 {
        let dirs: &[bool] = if layout.order || (layout.pre && q > 1) {
            &[true, false]
        } else {
            &[true]
        };
        for &forward in dirs {
            let ps: Vec<u32> = if layout.succ { (1..=q).collect() } else { vec![q] };
            for &p in &ps {
                for &q_fam in &fam_levels {
                    out.push(Config { q, forward, p, q_fam });
                }
            }
        }
    }
    debug_assert!(logic != LogicId::RawFo2 || out.len() == 1);
    out
}

fn cross_of(layout: &TypeLayout, c: Config) -> u128 {
    let mut v = 0u128;
    let mut set = |i: usize| v |= 1 << i;
    if layout.order {
        set(layout.less_bit(c.forward));
    }
    for k in 1..=layout.k {
        let equiv = c.q <= k;
        if equiv {
            set(layout.equiv_bit(k));
        }
        if layout.pre {
            if equiv || c.forward {
                set(layout.pre_bit(k, true));
            }
            if equiv || !c.forward {
                set(layout.pre_bit(k, false));
            }
        }
        if layout.succ && c.p <= k && k < c.q {
            set(layout.succ_bit(k, c.forward));
        }
    }
    for k in 1..=layout.k_fam {
        if c.q_fam <= k {
            set(layout.fam_bit(k));
        }
    }
    v
}

fn check_alpha(layout: &TypeLayout, a: OneType) -> Result<(), TypeSpaceError> {
    if layout.one_bits() < 128 && a.0 >> layout.one_bits() != 0 {
        return Err(TypeSpaceError::MixedSignatures);
    }
    Ok(())
}

fn with_binaries(layout: &TypeLayout, a1: OneType, a2: OneType, special: u128) -> Vec<TwoType> {
    (0..1u128 << (2 * layout.binary))
        .map(|b| TwoType {
            x: a1,
            y: a2,
            cross: special | b,
        })
        .collect()
}

/// Direction filter for [`enumerate_proper_two_types`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alignment {
    Any,
    /// `x pre_k y` for every `k` (or `x < y` under an order).
    Aligned,
    /// `y pre_k x` for every `k` (or `y < x`).
    AntiAligned,
}

/// Proper 2-types over distinct elements with the given 1-types.
pub fn enumerate_proper_two_types(
    layout: &TypeLayout,
    a1: OneType,
    a2: OneType,
    logic: LogicId,
    align: Alignment,
) -> Result<Vec<TwoType>, TypeSpaceError> {
    check_alpha(layout, a1)?;
    check_alpha(layout, a2)?;
    let mut out = Vec::new();
    for c in configs(layout, logic) {
        let directed = layout.order || (layout.pre && c.q > 1);
        let keep = match align {
            Alignment::Any => true,
            Alignment::Aligned => !directed || c.forward,
            Alignment::AntiAligned => !directed || !c.forward,
        };
        if keep {
            out.extend(with_binaries(layout, a1, a2, cross_of(layout, c)));
        }
    }
    Ok(out)
}

/// Proper 2-types; aligned ones only under preorders with successors.
pub fn enumerate_two_types(
    layout: &TypeLayout,
    a1: OneType,
    a2: OneType,
    logic: LogicId,
) -> Result<Vec<TwoType>, TypeSpaceError> {
    let align = if logic.has_successors() {
        Alignment::Aligned
    } else {
        Alignment::Any
    };
    enumerate_proper_two_types(layout, a1, a2, logic, align)
}

/// Aligned proper 2-types matching `key`. Without successors only `p == q`
/// cells are inhabited.
pub fn beta_cell(layout: &TypeLayout, key: BetaKey, logic: LogicId) -> Result<Vec<TwoType>, TypeSpaceError> {
    if key.p > key.q || key.p == 0 || key.q > layout.k + 1 {
        return Err(TypeSpaceError::BadKey);
    }
    check_alpha(layout, key.alpha1)?;
    check_alpha(layout, key.alpha2)?;
    if !layout.succ && key.p != key.q {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for c in configs(layout, logic) {
        let directed = layout.order || (layout.pre && c.q > 1);
        if c.q == key.q && c.p == key.p && (!directed || c.forward) {
            out.extend(with_binaries(layout, key.alpha1, key.alpha2, cross_of(layout, c)));
        }
    }
    Ok(out)
}

/// Memoised β-cells. Readers share the lock; a miss computes outside it and
/// inserts under the write lock, so results equal plain recomputation.
pub struct BetaTable {
    layout: TypeLayout,
    logic: LogicId,
    cells: RwLock<HashMap<BetaKey, Arc<Vec<TwoType>>>>,
}

impl BetaTable {
    pub fn new(layout: TypeLayout, logic: LogicId) -> BetaTable {
        BetaTable {
            layout,
            logic,
            cells: RwLock::new(HashMap::new()),
        }
    }

    pub fn layout(&self) -> &TypeLayout {
        &self.layout
    }

    pub fn get(&self, key: BetaKey) -> Result<Arc<Vec<TwoType>>, TypeSpaceError> {
        if let Some(c) = self.cells.read().get(&key) {
            return Ok(c.clone());
        }
        let cell = Arc::new(beta_cell(&self.layout, key, self.logic)?);
        Ok(self.cells.write().entry(key).or_insert(cell).clone())
    }

    pub fn len(&self) -> usize {
        self.cells.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
