//! Scott normal form and constant elimination.
//!
//! Every quantified subformula that does not fit the top-level shapes
//! `∀x∀y.ψ`, `∀x∃y.ψ`, `∃v.ψ`, `∀v.ψ` is named by a fresh unary predicate
//! `_d<i>` with a two-way definition, so the output is equisatisfiable over
//! every domain size.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::logic::{analyze, Atom, Formula, LogicId, Rel, Signature, Term, Var, Violation};
use crate::matrix::Vocab;
use crate::structure::{evaluate, EvalError, Structure, Valuation};

/// `∀x∀y.psi0 ∧ ⋀_m ∀x∃y.skolem[m]`, all matrices quantifier-free and
/// constant-free over `x`, `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct SnfSentence {
    pub logic: LogicId,
    pub psi0: Formula,
    pub skolem: Vec<Formula>,
    /// Levels of the E/pre/S family, numbered `1..=k`.
    pub k: u32,
    /// Original index of each renumbered level (`levels[k-1]`), per family.
    pub levels: Vec<u32>,
    pub fam_levels: Vec<u32>,
    pub signature: Signature,
    /// Fresh symbol to the subformula it names (in definition order).
    pub provenance: Vec<(String, Formula)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("sentence is not conformant: {}", .0.iter().map(|v| format!("{} at {}", v.rule, v.location)).collect::<Vec<_>>().join("; "))]
    NonConformant(Vec<Violation>),
    #[error("constants need equality")]
    ConstantsWithoutEquality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub input: usize,
    pub output: usize,
    pub fresh: usize,
}

impl SnfSentence {
    pub fn m(&self) -> usize {
        self.skolem.len()
    }

    pub fn to_formula(&self) -> Formula {
        let head = Formula::forall(Var::X, Formula::forall(Var::Y, self.psi0.clone()));
        let tail = self
            .skolem
            .iter()
            .map(|s| Formula::forall(Var::X, Formula::exists(Var::Y, s.clone())));
        Formula::conj(std::iter::once(head).chain(tail))
    }

    pub fn vocab(&self) -> Vocab {
        Vocab::of_signature(&self.signature)
    }

    pub fn size_report(&self, input: &Formula) -> SizeReport {
        SizeReport {
            input: input.size(),
            output: self.to_formula().size(),
            fresh: self.provenance.len(),
        }
    }

    /// A model of the input sentence as a model of the SNF: keep the used
    /// levels (renumbered) and interpret the fresh predicates. Constants
    /// are not carried over.
    pub fn lift(&self, s: &Structure) -> Result<Structure, EvalError> {
        let pick = |labels: &Vec<Vec<usize>>, used: &[u32]| -> Vec<Vec<usize>> {
            if labels.is_empty() {
                return Vec::new();
            }
            used.iter().map(|&j| labels[j as usize - 1].clone()).collect()
        };
        let mut t = s.clone();
        t.eq = pick(&s.eq, &self.levels);
        t.pre = pick(&s.pre, &self.levels);
        t.feq = pick(&s.feq, &self.fam_levels);
        self.expand(&t)
    }

    /// Interpret the fresh predicates of `s` by their definitions. `s` must
    /// interpret the original (renumbered) signature.
    pub fn expand(&self, s: &Structure) -> Result<Structure, EvalError> {
        let mut out = s.clone();
        for (name, def) in &self.provenance {
            let mut set = BTreeSet::new();
            for a in 0..s.n {
                if evaluate(&out, def, &Valuation::x(a))? {
                    set.insert(a);
                }
            }
            out.unary.insert(name.clone(), set);
        }
        Ok(out)
    }
}

/// Label vectors for original levels `1..=max(used)`: level `j` takes the
/// labels of the first used level at or above `j`.
fn spread_levels(used: &[u32], labels: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let top = used.last().copied().unwrap_or(0);
    (1..=top)
        .map(|j| {
            let k = used.iter().position(|&u| u >= j).expect("j is at most the top level");
            labels[k].clone()
        })
        .collect()
}

impl SnfSentence {
    /// Turn a model of the SNF into a model of the input sentence: drop
    /// fresh predicates, read constants back, restore level indices.
    pub fn restore(&self, model: &Structure) -> Structure {
        let mut s = model.clone();
        for (name, def) in &self.provenance {
            if let Some(set) = s.unary.remove(name) {
                if let Formula::Atom(Atom::Binary(Rel::Equal, _, Term::Const(c))) = def {
                    if let Some(&a) = set.iter().next() {
                        s.constants.insert(c.clone(), a);
                    }
                }
            }
        }
        if !s.pre.is_empty() {
            s.pre = spread_levels(&self.levels, &s.pre);
        }
        if !s.eq.is_empty() {
            s.eq = spread_levels(&self.levels, &s.eq);
        }
        if !s.feq.is_empty() {
            s.feq = spread_levels(&self.fam_levels, &s.feq);
        }
        s
    }
}

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn name(&mut self) -> String {
        loop {
            let n = format!("_d{}", self.next);
            self.next += 1;
            if self.taken.insert(n.clone()) {
                return n;
            }
        }
    }
}

struct Builder {
    fresh: Fresh,
    psi0: Vec<Formula>,
    skolem: Vec<Formula>,
    provenance: Vec<(String, Formula)>,
}

fn var(v: Var) -> Term {
    Term::Var(v)
}

/// Put a formula whose variable `v` plays the role of `y` into `(x, y)` form.
fn orient(f: Formula, y_role: Var) -> Formula {
    if y_role == Var::X {
        f.swap_vars()
    } else {
        f
    }
}

impl Builder {
    /// Replace every quantified subformula of `f` by a fresh atom. `bound`
    /// lists the variables bound around `f`; it is never empty.
    fn lift(&mut self, f: &Formula, bound: &BTreeSet<Var>) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(a) => Formula::not(self.lift(a, bound)),
            Formula::And(a, b) => Formula::and(self.lift(a, bound), self.lift(b, bound)),
            Formula::Or(a, b) => Formula::or(self.lift(a, bound), self.lift(b, bound)),
            Formula::Implies(a, b) => Formula::implies(self.lift(a, bound), self.lift(b, bound)),
            Formula::Iff(a, b) => Formula::iff(self.lift(a, bound), self.lift(b, bound)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut inner = bound.clone();
                inner.insert(*v);
                let body = self.lift(body, &inner);
                let u = v.other();
                let arg = if body.free_vars().contains(&u) || bound.contains(&u) {
                    u
                } else {
                    *v
                };
                let chi = orient(body, *v);
                let p = self.fresh.name();
                let px = Formula::unary(&p, var(Var::X));
                let exists = matches!(f, Formula::Exists(..));
                let def = if exists {
                    self.psi0.push(Formula::implies(chi.clone(), px.clone()));
                    self.skolem.push(Formula::or(Formula::not(px), chi.clone()));
                    Formula::exists(Var::Y, chi)
                } else {
                    self.psi0.push(Formula::implies(px.clone(), chi.clone()));
                    self.skolem.push(Formula::or(px, Formula::not(chi.clone())));
                    Formula::forall(Var::Y, chi)
                };
                self.provenance.push((p.clone(), def));
                Formula::unary(&p, var(arg))
            }
        }
    }

    fn conjunct(&mut self, c: &Formula) {
        let both = |v: Var| -> BTreeSet<Var> { [v, v.other()].into_iter().collect() };
        match c {
            Formula::Forall(v, inner) => match inner.as_ref() {
                Formula::Forall(w, body) | Formula::Exists(w, body) if w != v => {
                    let body = orient(self.lift(body, &both(*v)), *w);
                    if matches!(inner.as_ref(), Formula::Forall(..)) {
                        self.psi0.push(body);
                    } else {
                        self.skolem.push(body);
                    }
                }
                body => {
                    let body = self.lift(body, &[*v].into_iter().collect());
                    self.psi0.push(orient(body, v.other()));
                }
            },
            Formula::Exists(v, body) => {
                let body = self.lift(body, &[*v].into_iter().collect());
                self.skolem.push(orient(body, *v));
            }
            // A closed combination is read as `∀x` of itself.
            other => {
                let body = self.lift(other, &[Var::X].into_iter().collect());
                self.psi0.push(body);
            }
        }
    }
}

/// Map the used levels of each special family to `1..`, keeping order.
/// Returns the original indices of the renumbered levels.
fn renumber_levels(f: &Formula) -> (Formula, Vec<u32>, Vec<u32>) {
    let mut main = BTreeSet::new();
    let mut fam = BTreeSet::new();
    f.for_each_atom(&mut |a| {
        if let Atom::Binary(r, _, _) = a {
            match r {
                Rel::Equiv(k) | Rel::Pre(k) | Rel::Succ(k) => {
                    main.insert(*k);
                }
                Rel::Fam(k) => {
                    fam.insert(*k);
                }
                _ => {}
            }
        }
    });
    let index = |set: &BTreeSet<u32>| -> BTreeMap<u32, u32> {
        set.iter().enumerate().map(|(i, &k)| (k, i as u32 + 1)).collect()
    };
    let (mi, fi) = (index(&main), index(&fam));
    let out = f.map_atoms(&|a| {
        Formula::Atom(match a {
            Atom::Binary(r, s, t) => {
                let r = match r {
                    Rel::Equiv(k) => Rel::Equiv(mi[k]),
                    Rel::Pre(k) => Rel::Pre(mi[k]),
                    Rel::Succ(k) => Rel::Succ(mi[k]),
                    Rel::Fam(k) => Rel::Fam(fi[k]),
                    other => other.clone(),
                };
                Atom::Binary(r, s.clone(), t.clone())
            }
            other => other.clone(),
        })
    });
    (out, main.into_iter().collect(), fam.into_iter().collect())
}

fn const_pred(c: &str) -> String {
    format!("_const_{c}")
}

/// Replace each constant `c` by a fresh predicate holding of exactly one
/// element. Constant-free input is returned unchanged.
pub fn constant_elimination(f: &Formula, equality: bool) -> Result<Formula, NormalizeError> {
    let constants = Signature::of(f).constants;
    if constants.is_empty() {
        return Ok(f.clone());
    }
    if !equality {
        return Err(NormalizeError::ConstantsWithoutEquality);
    }
    let body = f.map_atoms(&|a| {
        let consts: Vec<&String> = a
            .terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(c),
                Term::Var(_) => None,
            })
            .collect();
        if consts.is_empty() {
            return Formula::Atom(a.clone());
        }
        // Variables still free in the atom must not be captured.
        let used: BTreeSet<Var> = a.terms().into_iter().filter_map(Term::var).collect();
        let mut spare = [Var::X, Var::Y].into_iter().filter(|v| !used.contains(v));
        let mut assign: BTreeMap<&String, Var> = BTreeMap::new();
        for c in &consts {
            if !assign.contains_key(*c) {
                assign.insert(*c, spare.next().expect("binary atoms have two slots"));
            }
        }
        let sub = |t: &Term| match t {
            Term::Const(c) => Term::Var(assign[c]),
            other => other.clone(),
        };
        let mut out = Formula::Atom(match a {
            Atom::Unary(p, t) => Atom::Unary(p.clone(), sub(t)),
            Atom::Binary(r, s, t) => Atom::Binary(r.clone(), sub(s), sub(t)),
        });
        for (c, v) in assign.iter().rev() {
            out = Formula::forall(*v, Formula::implies(Formula::unary(&const_pred(c), var(*v)), out));
        }
        out
    });
    let mut parts = vec![body];
    for c in &constants {
        let p = const_pred(c);
        parts.push(Formula::exists(Var::X, Formula::unary(&p, var(Var::X))));
        parts.push(Formula::forall(
            Var::X,
            Formula::forall(
                Var::Y,
                Formula::implies(
                    Formula::and(Formula::unary(&p, var(Var::X)), Formula::unary(&p, var(Var::Y))),
                    Formula::binary(Rel::Equal, var(Var::X), var(Var::Y)),
                ),
            ),
        ));
    }
    Ok(Formula::conj(parts))
}

/// Scott normal form of a conformant sentence.
pub fn to_snf(f: &Formula, logic: LogicId) -> Result<SnfSentence, NormalizeError> {
    let report = analyze(f, logic);
    if !report.conformant {
        return Err(NormalizeError::NonConformant(report.violations));
    }
    let original = report.signature;
    let f = constant_elimination(f, original.equality_allowed)?;
    let (f, levels, fam_levels) = renumber_levels(&f);
    let k = levels.len() as u32;
    let mut taken: BTreeSet<String> = Signature::of(&f).unary;
    taken.extend(original.binary.iter().cloned());
    let mut b = Builder {
        fresh: Fresh { taken, next: 0 },
        psi0: Vec::new(),
        skolem: Vec::new(),
        provenance: Vec::new(),
    };
    for c in f.conjuncts() {
        b.conjunct(c);
    }
    for c in &original.constants {
        let p = const_pred(c);
        let def = Formula::binary(Rel::Equal, var(Var::X), Term::Const(c.clone()));
        b.provenance.insert(0, (p, def));
    }
    let psi0 = Formula::conj(b.psi0);
    let mut snf = SnfSentence {
        logic,
        psi0,
        skolem: b.skolem,
        k,
        levels,
        fam_levels,
        signature: Signature::default(),
        provenance: b.provenance,
    };
    let mut sig = Signature::of(&snf.to_formula());
    sig.unary.extend(original.unary.iter().cloned());
    sig.binary.extend(original.binary.iter().cloned());
    sig.k = k;
    sig.k_fam = snf.fam_levels.len() as u32;
    snf.signature = sig;
    Ok(snf)
}
