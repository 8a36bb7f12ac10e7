use std::collections::{BTreeMap, BTreeSet};

use super::{update_pq, GroupKey, RunTranscript, Solver, SolverError, SolverState};
use crate::logic::LogicId;
use crate::normalize::SnfSentence;
use crate::structure::{one_type_of, two_type_of, evaluate, validate_structure, Structure, TwoType, Valuation};

/// The model an accepting run describes, over the SNF signature. Elements
/// follow placement order; every recorded 2-type is re-read from the built
/// structure and must match.
pub fn reconstruct_model(tr: &RunTranscript, snf: &SnfSentence) -> Result<Structure, SolverError> {
    reconstruct_with(&Solver::new(snf)?, tr)
}

/// Class labels per level: element `i` opens new classes at levels below `r_i`.
fn level_labels(rs: &[u32], k: u32) -> Vec<Vec<usize>> {
    (1..=k)
        .map(|level| {
            let mut cur = 0;
            rs.iter()
                .enumerate()
                .map(|(i, &r)| {
                    if i > 0 && r > level {
                        cur += 1;
                    }
                    cur
                })
                .collect()
        })
        .collect()
}

pub(crate) fn reconstruct_with(solver: &Solver, tr: &RunTranscript) -> Result<Structure, SolverError> {
    let n = tr.steps.len();
    if n == 0 {
        return Err(SolverError::NotAccepting);
    }
    let mut state = SolverState::default();
    let mut members: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    let mut pairs: BTreeMap<(usize, usize), TwoType> = BTreeMap::new();
    for (i, step) in tr.steps.iter().enumerate() {
        let next = solver.step_state(&state, step.r, step.alpha, &step.splits)?;
        let mut grouped: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
        for (split, (key, mem)) in step.splits.iter().zip(&members) {
            let (p, q) = update_pq(key.p, key.q, step.r);
            let mut it = mem.iter();
            for (ty, c) in &split.types {
                let (wf, _) = solver.witnesses(ty);
                for _ in 0..*c {
                    let j = *it.next().expect("split totals were checked");
                    pairs.insert((j, i), *ty);
                    let k = GroupKey {
                        alpha: key.alpha,
                        w: key.w | wf,
                        p,
                        q,
                    };
                    grouped.entry(k).or_default().push(j);
                }
            }
        }
        let own = next
            .counts
            .keys()
            .find(|g| g.alpha == step.alpha && g.p == 1 && g.q == 1)
            .copied()
            .expect("the new element has a group");
        grouped.entry(own).or_default().push(i);
        let sizes: BTreeMap<GroupKey, u64> = grouped.iter().map(|(g, m)| (*g, m.len() as u64)).collect();
        if sizes != next.counts {
            return Err(SolverError::Inconsistent(format!("group sizes diverge at element {i}")));
        }
        state = next;
        members = grouped;
    }
    if !solver.accepting(&state) {
        return Err(SolverError::NotAccepting);
    }

    let layout = &solver.layout;
    let vocab = solver.snf.vocab();
    let alphas: Vec<_> = tr.steps.iter().map(|s| s.alpha).collect();
    let rs: Vec<u32> = tr.steps.iter().map(|s| s.r).collect();
    let mut s = Structure::new(n);
    s.pre = level_labels(&rs, layout.k);
    s.eq = s.pre.clone();
    for (u, name) in vocab.unary.iter().enumerate() {
        let set = (0..n).filter(|&a| alphas[a].0 >> layout.unary_bit(u) & 1 == 1).collect();
        s.unary.insert(name.clone(), set);
    }
    for (r, name) in vocab.binary.iter().enumerate() {
        let mut set = BTreeSet::new();
        for (a, alpha) in alphas.iter().enumerate() {
            if alpha.0 >> layout.self_loop_bit(r) & 1 == 1 {
                set.insert((a, a));
            }
        }
        for (&(j, i), ty) in &pairs {
            if ty.cross >> layout.binary_bit(r, true) & 1 == 1 {
                set.insert((j, i));
            }
            if ty.cross >> layout.binary_bit(r, false) & 1 == 1 {
                set.insert((i, j));
            }
        }
        s.binary.insert(name.clone(), set);
    }

    let report = validate_structure(&s, LogicId::PreorderSucc);
    if !report.ok {
        return Err(SolverError::Inconsistent(format!("{:?}", report.failures)));
    }
    for (a, alpha) in alphas.iter().enumerate() {
        if one_type_of(&s, &vocab, a)? != *alpha {
            return Err(SolverError::Inconsistent(format!("1-type of element {a}")));
        }
    }
    for (&(j, i), ty) in &pairs {
        if two_type_of(&s, &vocab, layout, j, i)? != *ty {
            return Err(SolverError::Inconsistent(format!("2-type of pair ({j},{i})")));
        }
    }
    if evaluate(&s, &solver.snf.to_formula(), &Valuation::default()) != Ok(true) {
        return Err(SolverError::Inconsistent("the sentence is false in the built structure".into()));
    }
    Ok(s)
}
