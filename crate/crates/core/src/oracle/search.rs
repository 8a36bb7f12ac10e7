//! Backtracking model search over one domain size.
//!
//! Elements are filled in index order: first their special labels, then
//! their unary atoms, then the binary atoms linking them to earlier
//! elements. Constraints are evaluated in Kleene logic after every decision,
//! so a constraint is refuted as soon as the decided part of the structure
//! falsifies it. Fresh predicates with a known definition can be computed
//! instead of guessed.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::time::Instant;

use super::compiled::{bind, eval, Cf, Partial};
use crate::logic::{Formula, LogicId, Var};
use crate::matrix::{CompileError, Lit, LitKind, Tri, Vocab};
use crate::normalize::SnfSentence;
use crate::structure::Structure;

pub(crate) enum Constraint {
    /// `∀x∀y.body`; flags record which variables occur free.
    Universal { body: Cf, x: bool, y: bool },
    /// `∀x∃y.body`.
    Skolem { body: Cf },
    /// Any other closed conjunct.
    Closed(Cf),
}

/// Labels of one family of nested equivalences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LabelMode {
    /// Classes are index intervals; element `i` picks the first level at
    /// which it joins the class of `i - 1`.
    Interval,
    /// Restricted-growth class ids, decided from the top level down.
    Growth,
}

pub(crate) struct Plan {
    pub(crate) logic: LogicId,
    pub(crate) vocab: Vocab,
    pub(crate) k: u32,
    pub(crate) k_fam: u32,
    e_mode: LabelMode,
    /// Definitions (free variable `x`) of computed unary predicates.
    derived: Vec<Option<Cf>>,
    pub(crate) constraints: Vec<Constraint>,
}

fn orient(f: &Formula, outer: Var) -> Formula {
    if outer == Var::Y {
        f.swap_vars()
    } else {
        f.clone()
    }
}

impl Plan {
    fn new(logic: LogicId, vocab: Vocab, k: u32, k_fam: u32) -> Plan {
        let derived = vec![None; vocab.unary.len()];
        Plan {
            logic,
            e_mode: if logic == LogicId::OrderEq {
                LabelMode::Growth
            } else {
                LabelMode::Interval
            },
            vocab,
            k,
            k_fam,
            derived,
            constraints: Vec::new(),
        }
    }

    fn universal(&mut self, body: &Formula) -> Result<(), CompileError> {
        let free = body.free_vars();
        self.constraints.push(Constraint::Universal {
            body: Cf::compile(body, &self.vocab)?,
            x: free.contains(&Var::X),
            y: free.contains(&Var::Y),
        });
        Ok(())
    }

    /// Search plan for an SNF sentence. With `derive`, fresh predicates
    /// whose definitions are known are computed rather than searched.
    pub fn from_snf(snf: &SnfSentence, derive: bool) -> Result<Plan, CompileError> {
        let vocab = snf.vocab();
        let mut plan = Plan::new(snf.logic, vocab, snf.k, snf.signature.k_fam);
        for c in snf.psi0.conjuncts() {
            plan.universal(c)?;
        }
        for s in &snf.skolem {
            plan.constraints.push(Constraint::Skolem {
                body: Cf::compile(s, &plan.vocab)?,
            });
        }
        if derive {
            for (name, def) in &snf.provenance {
                if let (Some(i), Ok(cf)) = (plan.vocab.unary_index(name), Cf::compile(def, &plan.vocab)) {
                    plan.derived[i as usize] = Some(cf);
                }
            }
        }
        Ok(plan)
    }

    /// Search plan for an arbitrary constant-free sentence.
    pub fn from_formula(f: &Formula, logic: LogicId) -> Result<Plan, CompileError> {
        let sig = crate::logic::Signature::of(f);
        let mut plan = Plan::new(logic, Vocab::of_signature(&sig), sig.k, sig.k_fam);
        for c in f.conjuncts() {
            match c {
                Formula::Forall(v, inner) => match inner.as_ref() {
                    Formula::Forall(w, body) if w != v => plan.universal(&orient(body, *v))?,
                    Formula::Exists(w, body) if w != v => {
                        let body = Cf::compile(&orient(body, *v), &plan.vocab)?;
                        plan.constraints.push(Constraint::Skolem { body });
                    }
                    body if body.free_vars().iter().all(|u| u == v) => plan.universal(&orient(body, *v))?,
                    _ => plan.constraints.push(Constraint::Closed(Cf::compile(c, &plan.vocab)?)),
                },
                _ => plan.constraints.push(Constraint::Closed(Cf::compile(c, &plan.vocab)?)),
            }
        }
        Ok(plan)
    }

    fn has_derived(&self) -> bool {
        self.derived.iter().any(Option::is_some)
    }

    fn has_closed(&self) -> bool {
        self.constraints.iter().any(|c| matches!(c, Constraint::Closed(_)))
    }

    /// Elements `i-1` and `i` may be swapped by an automorphism of the
    /// special relations whenever they share an `E_1` class.
    fn symmetric(&self) -> bool {
        !matches!(self.logic, LogicId::OrderEq | LogicId::TwoFamilies)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    /// Interval labels of element `i`.
    Interval(usize),
    /// Growth label of `(family, level, element)`; family 0 is `E`, 1 is `F`.
    Growth(u8, u32, usize),
    Unary(u32, usize),
    Binary(u32, usize, usize),
}

impl Slot {
    fn element(self) -> usize {
        match self {
            Slot::Interval(i) | Slot::Growth(_, _, i) | Slot::Unary(_, i) => i,
            Slot::Binary(_, a, b) => a.max(b),
        }
    }
}

/// Why a search stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    Nodes,
    Time,
}

pub(crate) enum Outcome {
    Found(Structure),
    Exhausted,
    Stopped(Stop),
}

pub(crate) struct Limits {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

struct Search<'p> {
    plan: &'p Plan,
    n: usize,
    slots: Vec<Slot>,
    /// Slot index after which element `i` is complete.
    block_end: Vec<bool>,
    /// Slot index at which element `i`'s searched unary atoms are complete.
    code_end: Vec<Option<usize>>,
    searched_unary: Vec<u32>,
    unary: Vec<Tri>,
    binary: Vec<Tri>,
    e: Vec<Vec<Option<usize>>>,
    f: Vec<Vec<Option<usize>>>,
    generation: u64,
    cache: RefCell<Vec<(u64, Tri)>>,
    nodes: u64,
    limits: &'p Limits,
}

impl Partial for Search<'_> {
    fn size(&self) -> usize {
        self.n
    }

    fn atom(&self, lit: &Lit, env: [usize; 2]) -> Tri {
        let (a, b) = bind(lit, env);
        let n = self.n;
        let labels = |fam: &Vec<Vec<Option<usize>>>, k: u32, top: u32| -> Tri {
            if a == b || k > top {
                return Tri::True;
            }
            match (fam[k as usize - 1][a], fam[k as usize - 1][b]) {
                (Some(u), Some(v)) => Tri::from_bool(u == v),
                _ => Tri::Unknown,
            }
        };
        match lit.kind {
            LitKind::Unary(p) => {
                if self.plan.derived[p as usize].is_some() {
                    self.derived(p, a)
                } else {
                    self.unary[p as usize * n + a]
                }
            }
            LitKind::Binary(r) => self.binary[(r as usize * n + a) * n + b],
            LitKind::Less => Tri::from_bool(a < b),
            LitKind::Equal => Tri::from_bool(a == b),
            LitKind::Equiv(k) => labels(&self.e, k, self.plan.k),
            LitKind::Fam(k) => labels(&self.f, k, self.plan.k_fam),
            LitKind::Pre(k) | LitKind::Succ(k) => {
                let succ = matches!(lit.kind, LitKind::Succ(_));
                if k > self.plan.k {
                    return Tri::from_bool(!succ);
                }
                match (self.e[k as usize - 1][a], self.e[k as usize - 1][b]) {
                    (Some(u), Some(v)) if succ => Tri::from_bool(v == u + 1),
                    (Some(u), Some(v)) => Tri::from_bool(u <= v),
                    _ => Tri::Unknown,
                }
            }
        }
    }
}

impl<'p> Search<'p> {
    fn new(plan: &'p Plan, n: usize, limits: &'p Limits) -> Search<'p> {
        let mut searched_unary: Vec<u32> = (0..plan.vocab.unary.len() as u32)
            .filter(|&p| plan.derived[p as usize].is_none())
            .collect();
        // Symbols of the input before fresh ones.
        searched_unary.sort_by_key(|&p| (plan.vocab.unary[p as usize].starts_with('_'), p));
        let nb = plan.vocab.binary.len() as u32;
        let mut slots = Vec::new();
        let mut block_end = Vec::new();
        let mut code_end = vec![None; n];
        for i in 0..n {
            if plan.k > 0 {
                match plan.e_mode {
                    LabelMode::Interval => slots.push(Slot::Interval(i)),
                    LabelMode::Growth => slots.extend((1..=plan.k).rev().map(|k| Slot::Growth(0, k, i))),
                }
            }
            slots.extend((1..=plan.k_fam).rev().map(|k| Slot::Growth(1, k, i)));
            slots.extend(searched_unary.iter().map(|&p| Slot::Unary(p, i)));
            if !searched_unary.is_empty() {
                code_end[i] = Some(slots.len() - 1);
            }
            for r in 0..nb {
                slots.push(Slot::Binary(r, i, i));
                for j in 0..i {
                    slots.push(Slot::Binary(r, j, i));
                    slots.push(Slot::Binary(r, i, j));
                }
            }
            block_end.resize(slots.len(), false);
            if let Some(last) = block_end.last_mut() {
                *last = true;
            }
        }
        let nu = plan.vocab.unary.len();
        Search {
            plan,
            n,
            slots,
            block_end,
            code_end,
            searched_unary,
            unary: vec![Tri::Unknown; nu * n],
            binary: vec![Tri::Unknown; nb as usize * n * n],
            e: vec![vec![None; n]; plan.k as usize],
            f: vec![vec![None; n]; plan.k_fam as usize],
            generation: 0,
            cache: RefCell::new(vec![(u64::MAX, Tri::Unknown); nu * n]),
            nodes: 0,
            limits,
        }
    }

    fn derived(&self, p: u32, a: usize) -> Tri {
        let ix = p as usize * self.n + a;
        if let Some(&(g, v)) = self.cache.borrow().get(ix) {
            if g == self.generation {
                return v;
            }
        }
        let def = self.plan.derived[p as usize].as_ref().expect("derived predicate");
        let v = eval(def, self, [a, a]);
        self.cache.borrow_mut()[ix] = (self.generation, v);
        v
    }

    fn growth_candidates(&self, fam: u8, k: u32, i: usize) -> Vec<usize> {
        let (labels, top) = if fam == 0 {
            (&self.e, self.plan.k)
        } else {
            (&self.f, self.plan.k_fam)
        };
        let count = |lvl: u32| {
            labels[lvl as usize - 1][..i]
                .iter()
                .map(|l| l.expect("earlier elements are labelled") + 1)
                .max()
                .unwrap_or(0)
        };
        let fresh = count(k);
        if k == top {
            return (0..=fresh).collect();
        }
        let parent = labels[k as usize][i].expect("parent level decided first");
        if parent == count(k + 1) {
            return vec![fresh];
        }
        let mut out: BTreeSet<usize> = (0..i)
            .filter(|&a| labels[k as usize][a] == Some(parent))
            .map(|a| labels[k as usize - 1][a].expect("labelled"))
            .collect();
        out.insert(fresh);
        out.into_iter().collect()
    }

    fn domain(&self, slot: Slot) -> Vec<usize> {
        match slot {
            Slot::Interval(0) => vec![0],
            Slot::Interval(_) => (1..=self.plan.k as usize + 1).collect(),
            Slot::Growth(fam, k, i) => self.growth_candidates(fam, k, i),
            Slot::Unary(..) | Slot::Binary(..) => vec![0, 1],
        }
    }

    fn set(&mut self, slot: Slot, value: Option<usize>) {
        let n = self.n;
        let tri = |v: Option<usize>| v.map_or(Tri::Unknown, |v| Tri::from_bool(v == 1));
        match slot {
            Slot::Interval(i) => {
                for k in 0..self.plan.k as usize {
                    self.e[k][i] = value.map(|r| if i == 0 { 0 } else {
                        self.e[k][i - 1].expect("previous element labelled") + (r > k + 1) as usize
                    });
                }
            }
            Slot::Growth(0, k, i) => self.e[k as usize - 1][i] = value,
            Slot::Growth(_, k, i) => self.f[k as usize - 1][i] = value,
            Slot::Unary(p, a) => self.unary[p as usize * n + a] = tri(value),
            Slot::Binary(r, a, b) => self.binary[(r as usize * n + a) * n + b] = tri(value),
        }
        self.generation += 1;
    }

    fn universal_false(&self, body: &Cf, x: bool, y: bool, a: usize, b: usize) -> bool {
        let (a, b) = match (x, y) {
            (true, true) => (a, b),
            (true, false) => (a, a),
            (false, true) => (b, b),
            (false, false) => (0, 0),
        };
        eval(body, self, [a, b]) == Tri::False
    }

    fn skolem_false(&self, body: &Cf, a: usize) -> bool {
        (0..self.n).all(|b| eval(body, self, [a, b]) == Tri::False)
    }

    /// Constraint instances that the decision at `slot` can affect.
    fn refuted_locally(&self, slot: Slot) -> bool {
        let n = self.n;
        for c in &self.plan.constraints {
            let hit = match (c, slot) {
                (Constraint::Universal { body, x, y }, Slot::Binary(_, a, b)) if a != b => {
                    self.universal_false(body, *x, *y, a, b) || self.universal_false(body, *x, *y, b, a)
                }
                (Constraint::Universal { body, x, y }, s) => {
                    let i = s.element();
                    (0..n).any(|j| self.universal_false(body, *x, *y, i, j) || self.universal_false(body, *x, *y, j, i))
                }
                (Constraint::Skolem { body }, Slot::Binary(_, a, b)) => {
                    self.skolem_false(body, a) || (a != b && self.skolem_false(body, b))
                }
                (Constraint::Skolem { body }, _) => (0..n).any(|a| self.skolem_false(body, a)),
                (Constraint::Closed(_), _) => false,
            };
            if hit {
                return true;
            }
        }
        false
    }

    fn refuted_globally(&self) -> bool {
        let n = self.n;
        self.plan.constraints.iter().any(|c| match c {
            Constraint::Universal { body, x, y } => {
                (0..n).any(|a| (0..n).any(|b| self.universal_false(body, *x, *y, a, b)))
            }
            Constraint::Skolem { body } => (0..n).any(|a| self.skolem_false(body, a)),
            Constraint::Closed(cf) => eval(cf, self, [0, 0]) == Tri::False,
        })
    }

    fn code(&self, i: usize) -> Vec<Tri> {
        self.searched_unary
            .iter()
            .map(|&p| self.unary[p as usize * self.n + i])
            .collect()
    }

    /// Within an `E_1` class (or the whole domain when there are no
    /// levels), unary codes are non-decreasing.
    fn symmetry_ok(&self, idx: usize) -> bool {
        let i = self.slots[idx].element();
        if i == 0 || !self.plan.symmetric() || self.code_end[i] != Some(idx) {
            return true;
        }
        if self.plan.k > 0 && self.e[0][i] != self.e[0][i - 1] {
            return true;
        }
        let key = |t: Tri| t == Tri::True;
        let prev: Vec<bool> = self.code(i - 1).into_iter().map(key).collect();
        let cur: Vec<bool> = self.code(i).into_iter().map(key).collect();
        prev <= cur
    }

    fn all_true(&self) -> bool {
        let n = self.n;
        self.plan.constraints.iter().all(|c| match c {
            Constraint::Universal { body, .. } => {
                (0..n).all(|a| (0..n).all(|b| eval(body, self, [a, b]) == Tri::True))
            }
            Constraint::Skolem { body } => {
                (0..n).all(|a| (0..n).any(|b| eval(body, self, [a, b]) == Tri::True))
            }
            Constraint::Closed(cf) => eval(cf, self, [0, 0]) == Tri::True,
        })
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.nodes += 1;
        if self.limits.max_nodes.is_some_and(|m| self.nodes > m) {
            return Err(Stop::Nodes);
        }
        if self.nodes % 1024 == 0 && self.limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Stop::Time);
        }
        Ok(())
    }

    fn dfs(&mut self, idx: usize) -> Result<bool, Stop> {
        if idx == self.slots.len() {
            return Ok(self.all_true());
        }
        self.tick()?;
        let slot = self.slots[idx];
        let check_all = self.block_end[idx] && (self.plan.has_derived() || self.plan.has_closed());
        for v in self.domain(slot) {
            self.set(slot, Some(v));
            if self.symmetry_ok(idx)
                && !self.refuted_locally(slot)
                && !(check_all && self.refuted_globally())
                && self.dfs(idx + 1)?
            {
                return Ok(true);
            }
        }
        self.set(slot, None);
        Ok(false)
    }

    fn structure(&self) -> Structure {
        let n = self.n;
        let plan = self.plan;
        let mut s = Structure::new(n);
        let e: Vec<Vec<usize>> = self.e.iter().map(|l| l.iter().map(|v| v.expect("complete")).collect()).collect();
        match plan.logic {
            LogicId::OrderEq => {
                s.order = true;
                s.eq = e;
            }
            LogicId::Preorder | LogicId::PreorderSucc => {
                s.pre = e.clone();
                s.eq = e;
            }
            _ => s.eq = e,
        }
        s.feq = self.f.iter().map(|l| l.iter().map(|v| v.expect("complete")).collect()).collect();
        for (p, name) in plan.vocab.unary.iter().enumerate() {
            let set = (0..n)
                .filter(|&a| {
                    let lit = Lit {
                        kind: LitKind::Unary(p as u32),
                        args: (Var::X, Var::X),
                    };
                    self.atom(&lit, [a, a]) == Tri::True
                })
                .collect();
            s.unary.insert(name.clone(), set);
        }
        for (r, name) in plan.vocab.binary.iter().enumerate() {
            let set = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| self.binary[(r * n + a) * n + b] == Tri::True)
                .collect();
            s.binary.insert(name.clone(), set);
        }
        s
    }
}

/// Search for a model with exactly `n` elements. Returns the node count.
pub(crate) fn search_exact(plan: &Plan, n: usize, limits: &Limits) -> (Outcome, u64) {
    let mut s = Search::new(plan, n, limits);
    let out = match s.dfs(0) {
        Ok(true) => Outcome::Found(s.structure()),
        Ok(false) => Outcome::Exhausted,
        Err(stop) => Outcome::Stopped(stop),
    };
    (out, s.nodes)
}
