use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{atom, rel, ReductionError};
use crate::logic::{Formula, Rel, Var};
use crate::structure::Structure;

pub const D_E: &str = "dE";
pub const D_F: &str = "dF";
/// Marks for counters 1 and 2.
pub const COUNTER_PREDICATES: [&str; 2] = ["c1", "c2"];

/// Counter operation; the counter is 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Op {
    Inc(u8),
    Dec(u8),
    Zero(u8),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Inc(i) => write!(f, "inc{i}"),
            Op::Dec(i) => write!(f, "dec{i}"),
            Op::Zero(i) => write!(f, "zero{i}"),
        }
    }
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Op, String> {
        let (name, i) = s.split_at(s.len().saturating_sub(1));
        let i = match i {
            "1" => 1,
            "2" => 2,
            _ => return Err(format!("bad counter in {s:?}")),
        };
        match name {
            "inc" => Ok(Op::Inc(i)),
            "dec" => Ok(Op::Dec(i)),
            "zero" | "ifzero" => Ok(Op::Zero(i)),
            _ => Err(format!("bad operation {s:?}")),
        }
    }
}

impl TryFrom<String> for Op {
    type Error = String;

    fn try_from(s: String) -> Result<Op, String> {
        s.parse()
    }
}

impl From<Op> for String {
    fn from(op: Op) -> String {
        op.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCounterMachine {
    pub states: Vec<String>,
    pub initial: String,
    #[serde(rename = "final")]
    pub final_state: String,
    pub delta: Vec<(String, Op, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Config {
    pub state: String,
    pub c1: u64,
    pub c2: u64,
}

impl Config {
    fn counter(&self, i: u8) -> u64 {
        if i == 1 {
            self.c1
        } else {
            self.c2
        }
    }

    fn counter_mut(&mut self, i: u8) -> &mut u64 {
        if i == 1 {
            &mut self.c1
        } else {
            &mut self.c2
        }
    }

    /// The configuration after `op` into `to`, if `op` applies.
    fn apply(&self, op: Op, to: &str) -> Option<Config> {
        let mut next = Config {
            state: to.to_string(),
            ..self.clone()
        };
        match op {
            Op::Inc(i) => *next.counter_mut(i) += 1,
            Op::Dec(i) => {
                if self.counter(i) == 0 {
                    return None;
                }
                *next.counter_mut(i) -= 1;
            }
            Op::Zero(i) => {
                if self.counter(i) != 0 {
                    return None;
                }
            }
        }
        Some(next)
    }
}

pub type Run = Vec<Config>;

impl TwoCounterMachine {
    pub fn from_json(text: &str) -> Result<TwoCounterMachine, ReductionError> {
        let m: TwoCounterMachine = serde_json::from_str(text).map_err(|e| ReductionError::Instance(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("machine serialises")
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let states: BTreeSet<&String> = self.states.iter().collect();
        if states.len() != self.states.len() {
            return Err(ReductionError::Instance("states repeat".into()));
        }
        let named = self.delta.iter().flat_map(|(a, _, b)| [a, b]);
        for s in [&self.initial, &self.final_state].into_iter().chain(named) {
            if !states.contains(s) {
                return Err(ReductionError::Instance(format!("unknown state {s}")));
            }
        }
        Ok(())
    }

    /// Predicate for the `i`-th state.
    pub fn state_name(&self, s: &str) -> String {
        let i = self.states.iter().position(|t| t == s).expect("validated state");
        format!("q{i}")
    }

    /// The operation leading from `a` to `b`, if some transition allows it.
    fn step(&self, a: &Config, b: &Config) -> Option<Op> {
        self.delta
            .iter()
            .filter(|(from, _, to)| *from == a.state && *to == b.state)
            .map(|(_, op, _)| *op)
            .find(|op| a.apply(*op, &b.state).as_ref() == Some(b))
    }

    /// A halting run found by breadth-first search over configurations
    /// with at most `max_steps` transitions; the shortest one.
    pub fn halting_run(&self, max_steps: usize) -> Option<Run> {
        let start = Config {
            state: self.initial.clone(),
            c1: 0,
            c2: 0,
        };
        let mut parent: BTreeMap<Config, Option<Config>> = BTreeMap::new();
        parent.insert(start.clone(), None);
        let mut queue = VecDeque::from([(start, 0)]);
        while let Some((c, depth)) = queue.pop_front() {
            if c.state == self.final_state {
                let mut run = vec![c.clone()];
                while let Some(Some(p)) = parent.get(run.last().expect("non-empty run")) {
                    run.push(p.clone());
                }
                run.reverse();
                return Some(run);
            }
            if depth == max_steps {
                continue;
            }
            for (from, op, to) in &self.delta {
                if *from != c.state {
                    continue;
                }
                if let Some(next) = c.apply(*op, to) {
                    if !parent.contains_key(&next) {
                        parent.insert(next.clone(), Some(c.clone()));
                        queue.push_back((next, depth + 1));
                    }
                }
            }
        }
        None
    }

    /// Checks that `run` starts at the initial configuration, follows
    /// transitions and ends in the final state.
    pub fn check_run(&self, run: &[Config]) -> Result<Vec<Op>, ReductionError> {
        let bad = |m: String| Err(ReductionError::Run(m));
        let Some(first) = run.first() else {
            return bad("empty run".into());
        };
        if (first.state.as_str(), first.c1, first.c2) != (self.initial.as_str(), 0, 0) {
            return bad("does not start at the initial configuration".into());
        }
        if run.last().is_some_and(|c| c.state != self.final_state) {
            return bad("does not end in the final state".into());
        }
        let mut ops = Vec::with_capacity(run.len() - 1);
        for (j, w) in run.windows(2).enumerate() {
            match self.step(&w[0], &w[1]) {
                Some(op) => ops.push(op),
                None => return bad(format!("no transition from configuration {j} to {}", j + 1)),
            }
        }
        Ok(ops)
    }
}

/// Shortest halting run within `max_steps` transitions.
pub fn simulate(m: &TwoCounterMachine, max_steps: usize) -> Option<Run> {
    m.halting_run(max_steps)
}

const X: Var = Var::X;
const Y: Var = Var::Y;

/// Formula builders; `a` is the free variable, the other one is bound.
struct Kit;

impl Kit {
    fn e(k: u32, a: Var, b: Var) -> Formula {
        rel(Rel::Equiv(k), a, b)
    }

    fn f(k: u32, a: Var, b: Var) -> Formula {
        rel(Rel::Fam(k), a, b)
    }

    fn g2(a: Var, b: Var) -> Formula {
        Formula::and(Kit::e(2, a, b), Kit::f(2, a, b))
    }

    fn g1(a: Var, b: Var) -> Formula {
        Formula::or(Kit::e(1, a, b), Kit::f(1, a, b))
    }

    fn t(a: Var, b: Var) -> Formula {
        Formula::or(
            Formula::conj([Kit::e(2, a, b), atom(D_E, a), atom(D_F, b)]),
            Formula::conj([Kit::f(2, a, b), atom(D_F, a), atom(D_E, b)]),
        )
    }

    fn c(i: u8, v: Var) -> Formula {
        atom(COUNTER_PREDICATES[i as usize - 1], v)
    }

    /// `a` has a `t`-successor linked by `G1`.
    fn linked_next(a: Var) -> Formula {
        let b = a.other();
        Formula::exists(b, Formula::and(Kit::t(a, b), Kit::g1(a, b)))
    }

    /// `a` has a `t`-predecessor linked by `G1`.
    fn linked_prev(a: Var) -> Formula {
        let b = a.other();
        Formula::exists(b, Formula::and(Kit::t(b, a), Kit::g1(a, b)))
    }

    fn has_next(a: Var) -> Formula {
        let b = a.other();
        Formula::exists(b, Kit::t(a, b))
    }

    /// Every `c_i` element of the configuration of `a` has a linked successor.
    fn all_next(i: u8, a: Var) -> Formula {
        let b = a.other();
        Formula::forall(
            b,
            Formula::implies(Formula::and(Kit::g2(a, b), Kit::c(i, b)), Kit::linked_next(b)),
        )
    }

    fn all_prev(i: u8, a: Var) -> Formula {
        let b = a.other();
        Formula::forall(
            b,
            Formula::implies(Formula::and(Kit::g2(a, b), Kit::c(i, b)), Kit::linked_prev(b)),
        )
    }

    fn zero(i: u8, a: Var) -> Formula {
        let b = a.other();
        Formula::forall(b, Formula::implies(Kit::g2(a, b), Formula::not(Kit::c(i, b))))
    }

    /// Every successor configuration of `a`'s satisfies `f` at its element.
    fn after(a: Var, f: impl Fn(Var) -> Formula) -> Formula {
        let b = a.other();
        Formula::forall(b, Formula::implies(Kit::t(a, b), f(b)))
    }

    fn same(i: u8, a: Var) -> Formula {
        Formula::and(Kit::all_next(i, a), Kit::after(a, |b| Kit::all_prev(i, b)))
    }

    fn incr(i: u8, a: Var) -> Formula {
        Formula::and(Kit::all_next(i, a), Kit::after(a, |b| Formula::not(Kit::all_prev(i, b))))
    }

    fn decr(i: u8, a: Var) -> Formula {
        Formula::and(Formula::not(Kit::all_next(i, a)), Kit::after(a, |b| Kit::all_prev(i, b)))
    }

    fn effect(op: Op, a: Var) -> Formula {
        let other = |i: u8| 3 - i;
        match op {
            Op::Inc(i) => Formula::and(Kit::incr(i, a), Kit::same(other(i), a)),
            Op::Dec(i) => Formula::and(Kit::decr(i, a), Kit::same(other(i), a)),
            Op::Zero(i) => Formula::conj([Kit::zero(i, a), Kit::same(i, a), Kit::same(other(i), a)]),
        }
    }
}

/// Sentence whose finite models encode halting runs: configurations are
/// `E2 ∩ F2` classes alternating between `dE` and `dF`, counter values are
/// numbers of `E1`-classes marked `c1`/`c2` inside a configuration, and
/// counter tokens travel along `E1` (from a `dE`-configuration) or `F1`
/// (from a `dF`-configuration). Equality-free and constant-free.
pub fn tcm_to_formula(m: &TwoCounterMachine) -> Result<Formula, ReductionError> {
    m.validate()?;
    let fa = |f| Formula::forall(X, f);
    let fa2 = |f| Formula::forall(X, Formula::forall(Y, f));
    let d = |alpha: &str, v| atom(alpha, v);
    let states: Vec<String> = m.states.iter().map(|s| m.state_name(s)).collect();
    let mut parts = vec![
        fa(Formula::iff(d(D_E, X), Formula::not(d(D_F, X)))),
        fa2(Formula::implies(Kit::g2(X, Y), Formula::iff(d(D_E, X), d(D_E, Y)))),
    ];
    for alpha in [D_E, D_F] {
        parts.push(fa2(Formula::implies(
            Formula::conj([Kit::e(2, X, Y), d(alpha, X), d(alpha, Y)]),
            Kit::f(2, X, Y),
        )));
    }
    for alpha in [D_E, D_F] {
        parts.push(fa2(Formula::implies(
            Formula::conj([Kit::f(2, X, Y), d(alpha, X), d(alpha, Y)]),
            Kit::e(2, X, Y),
        )));
    }
    parts.push(fa(Formula::disj(states.iter().map(|s| {
        let others = states.iter().filter(|o| *o != s).map(|o| Formula::not(atom(o, Y)));
        Formula::forall(
            Y,
            Formula::implies(Kit::g2(X, Y), Formula::conj(std::iter::once(atom(s, Y)).chain(others))),
        )
    }))));
    parts.push(fa2(Formula::implies(
        Formula::and(Kit::g2(X, Y), Kit::g1(X, Y)),
        Formula::and(Kit::e(1, X, Y), Kit::f(1, X, Y)),
    )));
    parts.push(fa(Formula::or(Formula::not(Kit::c(1, X)), Formula::not(Kit::c(2, X)))));
    for i in 1..=2 {
        parts.push(fa2(Formula::implies(Formula::and(Kit::g1(X, Y), Kit::c(i, X)), Kit::c(i, Y))));
    }
    for i in 1..=2 {
        parts.push(fa2(Formula::implies(
            Formula::conj([
                Kit::g2(X, Y),
                Kit::c(i, X),
                Kit::c(i, Y),
                Formula::not(Kit::linked_prev(X)),
                Formula::not(Kit::linked_prev(Y)),
            ]),
            Kit::e(1, X, Y),
        )));
    }
    // decrease by at most one per step; a last configuration takes no step
    for i in 1..=2 {
        parts.push(fa2(Formula::implies(
            Formula::conj([
                Kit::g2(X, Y),
                Kit::c(i, X),
                Kit::c(i, Y),
                Formula::not(Kit::linked_next(X)),
                Formula::not(Kit::linked_next(Y)),
                Kit::has_next(X),
            ]),
            Kit::e(1, X, Y),
        )));
    }
    for s in &m.states {
        if *s == m.final_state {
            continue;
        }
        let moves = m.delta.iter().filter(|(from, _, _)| from == s).map(|(_, op, to)| {
            let target = atom(&m.state_name(to), Y);
            Formula::and(
                Formula::exists(Y, Formula::and(Kit::t(X, Y), target)),
                Kit::effect(*op, X),
            )
        });
        parts.push(fa(Formula::implies(atom(&m.state_name(s), X), Formula::disj(moves))));
    }
    parts.push(Formula::exists(
        X,
        Formula::conj([
            d(D_E, X),
            atom(&m.state_name(&m.initial), X),
            Kit::zero(1, X),
            Kit::zero(2, X),
            Formula::not(Formula::exists(Y, Kit::t(Y, X))),
        ]),
    ));
    Ok(Formula::conj(parts))
}

fn first_occurrence<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// The model of a halting run: configuration `j` is one `E2 ∩ F2` class,
/// `dE` for even `j`; configurations `2m, 2m+1` share an `E2`-class and
/// `2m+1, 2m+2` an `F2`-class. Each counter unit is a token alive over an
/// interval of configurations (increments open one, decrements close the
/// latest), with one element per configuration it is alive in. A
/// configuration without tokens gets one unmarked element.
pub fn run_to_structure(m: &TwoCounterMachine, run: &[Config]) -> Result<Structure, ReductionError> {
    m.validate()?;
    let ops = m.check_run(run)?;
    // (counter, first, last) per token
    let mut tokens: Vec<(u8, usize, usize)> = Vec::new();
    let mut live: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let end = run.len() - 1;
    for (j, op) in ops.iter().enumerate() {
        match *op {
            Op::Inc(i) => {
                live[i as usize - 1].push(tokens.len());
                tokens.push((i, j + 1, end));
            }
            Op::Dec(i) => {
                let tok = live[i as usize - 1].pop().expect("checked run");
                tokens[tok].2 = j;
            }
            Op::Zero(_) => {}
        }
    }
    // element keys: (configuration, Some(token)) or (configuration, None)
    let mut elems: Vec<(usize, Option<usize>)> = Vec::new();
    for j in 0..run.len() {
        let here: Vec<usize> = (0..tokens.len()).filter(|&t| tokens[t].1 <= j && j <= tokens[t].2).collect();
        if here.is_empty() {
            elems.push((j, None));
        }
        elems.extend(here.into_iter().map(|t| (j, Some(t))));
    }
    let n = elems.len();
    let e2: Vec<usize> = elems.iter().map(|&(j, _)| j / 2).collect();
    let f2: Vec<usize> = elems.iter().map(|&(j, _)| (j + 1) / 2).collect();
    // tokens link to the next configuration by E1 from even ones, by F1 from odd ones
    let key = |idx: usize, class: usize| match elems[idx].1 {
        Some(t) => (class, Some(t), 0),
        None => (class, None, elems[idx].0),
    };
    let e1: Vec<_> = (0..n).map(|a| key(a, e2[a])).collect();
    let f1: Vec<_> = (0..n).map(|a| key(a, f2[a])).collect();
    let mut s = Structure::new(n);
    s.eq = vec![first_occurrence(&e1), first_occurrence(&e2)];
    s.feq = vec![first_occurrence(&f1), first_occurrence(&f2)];
    let pick = |f: &dyn Fn(usize) -> bool| -> BTreeSet<usize> { (0..n).filter(|&a| f(a)).collect() };
    s.unary.insert(D_E.into(), pick(&|a| elems[a].0 % 2 == 0));
    s.unary.insert(D_F.into(), pick(&|a| elems[a].0 % 2 == 1));
    for (i, name) in COUNTER_PREDICATES.iter().enumerate() {
        let set = pick(&|a| elems[a].1.is_some_and(|t| tokens[t].0 as usize == i + 1));
        s.unary.insert(name.to_string(), set);
    }
    for st in &m.states {
        s.unary.insert(m.state_name(st), pick(&|a| run[elems[a].0].state == *st));
    }
    Ok(s)
}
