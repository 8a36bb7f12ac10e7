use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use super::{update_pq, GroupKey, RunTranscript, Solver, SolverError, SolverState, Split, Step};
use crate::normalize::SnfSentence;
use crate::oracle::{SearchStats, Status, Verdict};
use crate::par;
use crate::typespace::BetaKey;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Merge equal states within a level. Off only for debugging.
    pub memoize: bool,
    /// Drop 2-type choices whose witnesses another choice covers.
    pub prune: bool,
    /// Budget on states kept per level.
    pub max_states: Option<usize>,
    pub max_secs: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            memoize: true,
            prune: true,
            max_states: None,
            max_secs: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOutcome {
    pub verdict: Verdict,
    /// Accepting run, for `Sat`.
    pub transcript: Option<RunTranscript>,
    /// Distinct states reached after each element.
    pub states_per_level: Vec<usize>,
    /// Most distinct keys seen in one state.
    pub max_keys: usize,
}

/// Steps are not stored; the transcript recomputes them from the parents.
struct Node {
    state: SolverState,
    parent: usize,
}

struct Partial {
    counts: BTreeMap<GroupKey, u64>,
    wb: u64,
    splits: Vec<Split>,
}

/// All ways to write `total` as `parts` ordered non-negative summands,
/// lexicographically.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    fn go(total: u64, parts: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=total {
            cur.push(c);
            go(total - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Every state one element further, with the step that reaches it. Choices
/// are folded group by group, merging partial results that agree on the
/// keys produced so far and the new element's witnesses.
fn successors(solver: &Solver, st: &SolverState, prune: bool) -> Result<Vec<(SolverState, Step)>, SolverError> {
    let rs: Vec<u32> = if st.i == 0 { vec![1] } else { (1..=solver.k() + 1).collect() };
    let mut out = Vec::new();
    for r in rs {
        for &alpha in &solver.alphas {
            let mut partials = vec![Partial {
                counts: BTreeMap::new(),
                wb: 0,
                splits: Vec::new(),
            }];
            for (key, &count) in &st.counts {
                let (p, q) = update_pq(key.p, key.q, r);
                let effects = solver.effects(
                    BetaKey {
                        alpha1: key.alpha,
                        alpha2: alpha,
                        p,
                        q,
                    },
                    prune,
                )?;
                let comps = compositions(count, effects.len());
                let mut next = Vec::new();
                let mut seen = HashSet::new();
                for part in &partials {
                    for comp in &comps {
                        let mut counts = part.counts.clone();
                        let mut wb = part.wb;
                        let mut types = Vec::new();
                        for (e, &c) in effects.iter().zip(comp).filter(|(_, c)| **c > 0) {
                            let k = GroupKey {
                                alpha: key.alpha,
                                w: key.w | e.wf,
                                p,
                                q,
                            };
                            *counts.entry(k).or_insert(0) += c;
                            wb |= e.wb;
                            types.push((e.ty, c));
                        }
                        if seen.insert((counts.clone(), wb)) {
                            let mut splits = part.splits.clone();
                            splits.push(Split { group: *key, types });
                            next.push(Partial { counts, wb, splits });
                        }
                    }
                }
                partials = next;
                if partials.is_empty() {
                    break;
                }
            }
            for part in partials {
                let mut counts = part.counts;
                let own = GroupKey {
                    alpha,
                    w: solver.self_witnesses(alpha) | part.wb,
                    p: 1,
                    q: 1,
                };
                *counts.entry(own).or_insert(0) += 1;
                let state = SolverState {
                    counts,
                    i: st.i + 1,
                    last_r: r,
                };
                let step = Step {
                    r,
                    alpha,
                    splits: part.splits,
                };
                out.push((state, step));
            }
        }
    }
    Ok(out)
}

fn transcript(solver: &Solver, levels: &[Vec<Node>], mut idx: usize, prune: bool) -> Result<RunTranscript, SolverError> {
    let mut steps = Vec::with_capacity(levels.len() - 1);
    for n in (1..levels.len()).rev() {
        let node = &levels[n][idx];
        let parent = &levels[n - 1][node.parent].state;
        let step = successors(solver, parent, prune)?
            .into_iter()
            .find(|(s, _)| s.counts == node.state.counts)
            .map(|(_, step)| step)
            .ok_or_else(|| SolverError::Inconsistent("lost a step while tracing back".into()))?;
        steps.push(step);
        idx = node.parent;
    }
    steps.reverse();
    Ok(RunTranscript { steps })
}

fn hash_counts(counts: &BTreeMap<GroupKey, u64>) -> u64 {
    let mut h = DefaultHasher::new();
    counts.hash(&mut h);
    h.finish()
}

fn outcome(status: Status, cap: usize, stats: SearchStats, levels: &[Vec<Node>], max_keys: usize) -> SolverOutcome {
    SolverOutcome {
        verdict: Verdict {
            status,
            cap,
            bound: None,
            model: None,
            stats,
        },
        transcript: None,
        states_per_level: levels.iter().skip(1).map(Vec::len).collect(),
        max_keys,
    }
}

/// Breadth-first search over runs of length `1..=cap`. `Sat` carries a
/// model of the sentence the SNF came from; `UnsatCertified` means some
/// length admits no run at all, so no longer run exists either.
pub fn decide_preorder_succ(snf: &SnfSentence, cap: usize, cfg: &SolverConfig) -> Result<SolverOutcome, SolverError> {
    if cap == 0 {
        return Err(SolverError::EmptyDomain);
    }
    let solver = Solver::new(snf)?;
    let start = Instant::now();
    let deadline = cfg.max_secs.map(|s| start + Duration::from_secs_f64(s));
    let bound = solver.key_bound();
    let root = Node {
        state: SolverState::default(),
        parent: 0,
    };
    let mut levels: Vec<Vec<Node>> = vec![vec![root]];
    let mut stats = SearchStats::default();
    let mut max_keys = 0;
    for n in 1..=cap {
        let frontier: Vec<(usize, &SolverState)> = levels[n - 1].iter().map(|nd| &nd.state).enumerate().collect();
        let expanded = par::map(frontier, |(idx, st)| {
            let succ = successors(&solver, st, cfg.prune).map(|v| v.into_iter().map(|(s, _)| s).collect::<Vec<_>>());
            (idx, succ)
        });
        // Hash buckets of indices into `level`; equal counts are compared exactly.
        let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut level: Vec<Node> = Vec::new();
        for (parent, succ) in expanded {
            for state in succ? {
                stats.nodes += 1;
                if cfg.memoize {
                    let bucket = seen.entry(hash_counts(&state.counts)).or_default();
                    if bucket.iter().any(|&j| level[j].state.counts == state.counts) {
                        continue;
                    }
                    bucket.push(level.len());
                }
                max_keys = max_keys.max(state.counts.len());
                assert!(state.counts.len() as u128 <= bound, "state exceeds the key bound");
                level.push(Node { state, parent });
            }
        }
        drop(seen);
        let accept = level.iter().position(|nd| solver.accepting(&nd.state));
        let empty = level.is_empty();
        let over = cfg.max_states.is_some_and(|m| level.len() > m);
        levels.push(level);
        stats.millis = start.elapsed().as_millis() as u64;
        if let Some(idx) = accept {
            let tr = transcript(&solver, &levels, idx, cfg.prune)?;
            let model = super::reconstruct::reconstruct_with(&solver, &tr)?;
            let mut out = outcome(Status::Sat, cap, stats, &levels, max_keys);
            out.verdict.model = Some(snf.restore(&model));
            out.transcript = Some(tr);
            return Ok(out);
        }
        stats.sizes_exhausted.push(n);
        if empty {
            return Ok(outcome(Status::UnsatCertified, cap, stats, &levels, max_keys));
        }
        let late = deadline.is_some_and(|d| Instant::now() > d);
        if (over || late) && n < cap {
            stats.stopped = Some(format!("{} after {n} elements", if over { "state budget" } else { "time" }));
            return Ok(outcome(Status::Unknown, cap, stats, &levels, max_keys));
        }
    }
    Ok(outcome(Status::Unknown, cap, stats, &levels, max_keys))
}
