//! Bounded model finding and the bounded decision wrapper.

mod compiled;
mod sat;
mod search;

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub use compiled::{Cf, Partial};
pub use sat::find_model_sat;
pub use search::Stop;

use crate::logic::{Formula, LogicId};
use crate::matrix::CompileError;
use crate::normalize::{constant_elimination, to_snf, NormalizeError, SnfSentence};
use crate::par;
use crate::structure::{evaluate, validate_structure, Structure, Valuation};
use search::{search_exact, Limits, Outcome, Plan};

/// Largest domain searched for the undecidable two-family logic.
pub const TWO_FAMILIES_HARD_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    AtMost,
}

/// Search budgets. Budgets apply per domain size; the deadline is shared.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub max_nodes: Option<u64>,
    pub max_secs: Option<f64>,
    /// Compute fresh predicates from their definitions instead of guessing.
    pub derive_fresh: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_nodes: None,
            max_secs: None,
            derive_fresh: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub millis: u64,
    /// Domain sizes searched to completion.
    pub sizes_exhausted: Vec<usize>,
    pub stopped: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FindResult {
    Found(Structure),
    /// No model of the requested size(s).
    Absent,
    /// A budget ran out first.
    Unknown(Stop),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("refusing to search {0} elements for the two-family logic (hard cap {TWO_FAMILIES_HARD_CAP})")]
    TwoFamiliesCap(usize),
    #[error("the two-family logic has no decision procedure")]
    Undecidable,
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("the clause engine handles equivalence-only logics, not {0:?}")]
    SatUnsupported(LogicId),
    #[error("clause engine: {0}")]
    Sat(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Sat,
    UnsatCertified,
    Unknown,
}

/// `UnsatCertified` only when the whole completeness bound was searched.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub cap: usize,
    pub bound: Option<u128>,
    pub model: Option<Structure>,
    pub stats: SearchStats,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serialises")
    }
}

fn limits(cfg: &SearchConfig, start: Instant) -> Limits {
    Limits {
        max_nodes: cfg.max_nodes,
        deadline: cfg.max_secs.map(|s| start + Duration::from_secs_f64(s)),
    }
}

fn run(plan: &Plan, sizes: Vec<usize>, cfg: &SearchConfig) -> (FindResult, SearchStats) {
    let start = Instant::now();
    let lim = limits(cfg, start);
    let outcomes = par::map(sizes.clone(), |n| search_exact(plan, n, &lim));
    let mut stats = SearchStats::default();
    let mut result = FindResult::Absent;
    for (n, (out, nodes)) in sizes.into_iter().zip(outcomes) {
        stats.nodes += nodes;
        match out {
            Outcome::Found(s) => {
                if !matches!(result, FindResult::Found(_)) {
                    result = FindResult::Found(s);
                }
            }
            Outcome::Exhausted => stats.sizes_exhausted.push(n),
            Outcome::Stopped(stop) => {
                stats.stopped.get_or_insert_with(|| format!("{stop:?} at size {n}"));
                if matches!(result, FindResult::Absent) {
                    result = FindResult::Unknown(stop);
                }
            }
        }
    }
    stats.millis = start.elapsed().as_millis() as u64;
    (result, stats)
}

fn sizes(n: usize, mode: Mode) -> Vec<usize> {
    match mode {
        Mode::Exact => vec![n],
        Mode::AtMost => (1..=n).collect(),
    }
}

fn check_size(logic: LogicId, n: usize) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::EmptyDomain);
    }
    if logic == LogicId::TwoFamilies && n > TWO_FAMILIES_HARD_CAP {
        return Err(OracleError::TwoFamiliesCap(n));
    }
    Ok(())
}

/// A model of `snf` with `n` elements (or at most `n`: the smallest one).
/// The model interprets the SNF signature, fresh predicates included.
pub fn find_model(
    snf: &SnfSentence,
    logic: LogicId,
    n: usize,
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<(FindResult, SearchStats), OracleError> {
    check_size(logic, n)?;
    let mut snf = snf.clone();
    snf.logic = logic;
    let plan = Plan::from_snf(&snf, cfg.derive_fresh)?;
    Ok(run(&plan, sizes(n, mode), cfg))
}

/// Like [`find_model`] for an arbitrary sentence, evaluated directly
/// without normalisation. Constants are eliminated first.
pub fn find_model_formula(
    f: &Formula,
    logic: LogicId,
    n: usize,
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<(FindResult, SearchStats), OracleError> {
    check_size(logic, n)?;
    let f = constant_elimination(f, true)?;
    let plan = Plan::from_formula(&f, logic)?;
    Ok(run(&plan, sizes(n, mode), cfg))
}

/// `12^(K+1) · M^(3K+3) · |α|^(K+1)` with `|α| = 2^(#unary + #binary)`,
/// at least 1. Absent for logics without an explicit small-model bound.
pub fn completeness_bound(snf: &SnfSentence, logic: LogicId) -> Option<u128> {
    if !matches!(logic, LogicId::RawFo2 | LogicId::Eq | LogicId::OrderEq | LogicId::Preorder) {
        return None;
    }
    let k = snf.k;
    let m = snf.m() as u128;
    let bits = snf.signature.common_rel_count() as u32;
    let pow = |b: u128, e: u32| b.checked_pow(e);
    let alpha = 2u128.checked_pow(bits);
    let bound = pow(12, k + 1)
        .zip(pow(m, 3 * k + 3))
        .zip(alpha.and_then(|a| pow(a, k + 1)))
        .and_then(|((a, b), c)| a.checked_mul(b)?.checked_mul(c))
        .unwrap_or(u128::MAX);
    Some(bound.max(1))
}

/// Normalise, then search sizes `1..=min(cap, bound)`.
pub fn decide_bounded(f: &Formula, logic: LogicId, cap: usize, cfg: &SearchConfig) -> Result<Verdict, OracleError> {
    if cap == 0 {
        return Err(OracleError::EmptyDomain);
    }
    if !logic.is_decidable() {
        return Err(OracleError::Undecidable);
    }
    let snf = to_snf(f, logic)?;
    let bound = completeness_bound(&snf, logic);
    let limit = bound.map_or(cap, |b| (cap as u128).min(b) as usize);
    let (found, stats) = find_model(&snf, logic, limit, Mode::AtMost, cfg)?;
    let (status, model) = match found {
        FindResult::Found(m) => {
            let model = snf.restore(&m);
            debug_assert!(validate_structure(&model, logic).ok);
            debug_assert_eq!(evaluate(&model, f, &Valuation::default()), Ok(true));
            (Status::Sat, Some(model))
        }
        FindResult::Absent if bound.is_some_and(|b| b <= cap as u128) => (Status::UnsatCertified, None),
        _ => (Status::Unknown, None),
    };
    Ok(Verdict {
        status,
        cap,
        bound,
        model,
        stats,
    })
}

#[cfg(test)]
mod tests;
