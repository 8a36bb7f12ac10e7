use std::collections::BTreeSet;
use std::fmt;

/// One of the two variables of the fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(String),
}

impl Term {
    pub fn var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }

    fn swap_vars(&self) -> Term {
        match self {
            Term::Var(v) => Term::Var(v.other()),
            c => c.clone(),
        }
    }
}

/// Binary relation symbols, common or special.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Common(String),
    Less,
    Equal,
    /// `E<k>`: the k-th nested equivalence.
    Equiv(u32),
    /// `pre<k>`: the k-th nested total preorder.
    Pre(u32),
    /// `S<k>`: the induced successor of `pre<k>`.
    Succ(u32),
    /// `F<k>`: the second family of nested equivalences.
    Fam(u32),
}

impl Rel {
    pub fn is_special(&self) -> bool {
        !matches!(self, Rel::Common(_) | Rel::Equal)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Unary(String, Term),
    Binary(Rel, Term, Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Unary(_, t) => vec![t],
            Atom::Binary(_, a, b) => vec![a, b],
        }
    }

    fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Unary(p, t) => Atom::Unary(p.clone(), f(t)),
            Atom::Binary(r, a, b) => Atom::Binary(r.clone(), f(a), f(b)),
        }
    }
}

/// A formula of two-variable first-order logic with special symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

// Builders. These keep generator code readable.
impl Formula {
    pub fn unary(p: &str, t: Term) -> Formula {
        Formula::Atom(Atom::Unary(p.to_string(), t))
    }

    pub fn binary(r: Rel, a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Binary(r, a, b))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &BTreeSet::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>, bound: &BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for t in a.terms() {
                    if let Some(v) = t.var() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Formula::Not(a) => a.collect_free(out, bound),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let mut inner = bound.clone();
                inner.insert(*v);
                a.collect_free(out, &inner);
            }
        }
    }

    /// Rename x to y and y to x everywhere, bound occurrences included.
    pub fn swap_vars(&self) -> Formula {
        self.map_atoms_and_vars(&|a| a.map_terms(Term::swap_vars), &Var::other)
    }

    /// Substitute a variable (free occurrences only) by another variable.
    /// Used for formulas that mention a single variable.
    pub fn rename_free(&self, from: Var, to: Var) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.map_terms(|t| match t {
                Term::Var(v) if *v == from => Term::Var(to),
                other => other.clone(),
            })),
            Formula::Not(a) => Formula::not(a.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::Iff(a, b) => Formula::iff(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Forall(v, _) | Formula::Exists(v, _) if *v == from => self.clone(),
            Formula::Forall(v, a) => Formula::forall(*v, a.rename_free(from, to)),
            Formula::Exists(v, a) => Formula::exists(*v, a.rename_free(from, to)),
        }
    }

    fn map_atoms_and_vars(&self, fa: &dyn Fn(&Atom) -> Atom, fv: &dyn Fn(Var) -> Var) -> Formula {
        let rec = |f: &Formula| f.map_atoms_and_vars(fa, fv);
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(fa(a)),
            Formula::Not(a) => Formula::not(rec(a)),
            Formula::And(a, b) => Formula::and(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::implies(rec(a), rec(b)),
            Formula::Iff(a, b) => Formula::iff(rec(a), rec(b)),
            Formula::Forall(v, a) => Formula::forall(fv(*v), rec(a)),
            Formula::Exists(v, a) => Formula::exists(fv(*v), rec(a)),
        }
    }

    /// Apply `f` to every atom.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Formula) -> Formula {
        let rec = |g: &Formula| g.map_atoms(f);
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(a) => Formula::not(rec(a)),
            Formula::And(a, b) => Formula::and(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::implies(rec(a), rec(b)),
            Formula::Iff(a, b) => Formula::iff(rec(a), rec(b)),
            Formula::Forall(v, a) => Formula::forall(*v, rec(a)),
            Formula::Exists(v, a) => Formula::exists(*v, rec(a)),
        }
    }

    /// Visit every atom.
    pub fn for_each_atom(&self, f: &mut dyn FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(a) => a.for_each_atom(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.for_each_atom(f),
        }
    }

    /// Number of symbol occurrences (connectives, quantifiers, relation
    /// symbols and terms each count one).
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Atom(a) => 1 + a.terms().len(),
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) => 2 + a.size(),
        }
    }

    /// Flatten nested top-level conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Formula::True => {}
                other => out.push(other),
            }
        }
        out
    }
}

/// The logics handled by the workbench.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicId {
    /// Plain FO² with equality and constants.
    RawFo2,
    /// Nested equivalences `E1 ⊆ E2 ⊆ …`.
    Eq,
    /// Strict linear order plus nested equivalences.
    OrderEq,
    /// Nested total preorders (with their induced equivalences).
    Preorder,
    /// Nested total preorders with induced successors.
    PreorderSucc,
    /// Two independent nested pairs `E1 ⊆ E2`, `F1 ⊆ F2`. Generation and
    /// validation only; finite satisfiability is undecidable here.
    TwoFamilies,
}

impl LogicId {
    pub const ALL: [LogicId; 6] = [
        LogicId::RawFo2,
        LogicId::Eq,
        LogicId::OrderEq,
        LogicId::Preorder,
        LogicId::PreorderSucc,
        LogicId::TwoFamilies,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            LogicId::RawFo2 => "raw",
            LogicId::Eq => "eq",
            LogicId::OrderEq => "order-eq",
            LogicId::Preorder => "preorder",
            LogicId::PreorderSucc => "preorder-succ",
            LogicId::TwoFamilies => "two-families",
        }
    }

    pub fn from_cli_name(s: &str) -> Option<LogicId> {
        LogicId::ALL.into_iter().find(|l| l.cli_name() == s)
    }

    pub fn allows(self, rel: &Rel) -> bool {
        match rel {
            Rel::Common(_) | Rel::Equal => true,
            Rel::Less => self == LogicId::OrderEq,
            Rel::Equiv(k) => match self {
                LogicId::RawFo2 => false,
                LogicId::TwoFamilies => *k <= 2,
                _ => true,
            },
            Rel::Pre(_) => matches!(self, LogicId::Preorder | LogicId::PreorderSucc),
            Rel::Succ(_) => self == LogicId::PreorderSucc,
            Rel::Fam(k) => self == LogicId::TwoFamilies && *k <= 2,
        }
    }

    pub fn has_order(self) -> bool {
        self == LogicId::OrderEq
    }

    pub fn has_preorders(self) -> bool {
        matches!(self, LogicId::Preorder | LogicId::PreorderSucc)
    }

    pub fn has_successors(self) -> bool {
        self == LogicId::PreorderSucc
    }

    pub fn is_decidable(self) -> bool {
        self != LogicId::TwoFamilies
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// Which special symbols a signature uses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SpecialProfile {
    pub order: bool,
    pub equiv: BTreeSet<u32>,
    pub pre: BTreeSet<u32>,
    pub succ: BTreeSet<u32>,
    pub fam: BTreeSet<u32>,
}

impl SpecialProfile {
    /// Add the symbols implied by the ones present: `S_k` needs `pre_k`,
    /// and `pre_k` induces `E_k`.
    pub fn closed(mut self) -> SpecialProfile {
        let succ: Vec<u32> = self.succ.iter().copied().collect();
        self.pre.extend(succ);
        let pre: Vec<u32> = self.pre.iter().copied().collect();
        self.equiv.extend(pre);
        self
    }

    pub fn is_empty(&self) -> bool {
        !self.order
            && self.equiv.is_empty()
            && self.pre.is_empty()
            && self.succ.is_empty()
            && self.fam.is_empty()
    }
}

/// Symbols of a formula, split into common and special parts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub unary: BTreeSet<String>,
    pub binary: BTreeSet<String>,
    pub constants: BTreeSet<String>,
    pub special: SpecialProfile,
    /// Number of nested levels (largest level index of the E/pre/S family).
    pub k: u32,
    /// Number of levels of the F family.
    pub k_fam: u32,
    pub equality_allowed: bool,
}

impl Signature {
    /// Collect the signature of a formula. Arity clashes are not detected
    /// here; see [`crate::logic::analyze`].
    pub fn of(f: &Formula) -> Signature {
        let mut sig = Signature {
            equality_allowed: true,
            ..Default::default()
        };
        f.for_each_atom(&mut |a| {
            for t in a.terms() {
                if let Term::Const(c) = t {
                    sig.constants.insert(c.clone());
                }
            }
            match a {
                Atom::Unary(p, _) => {
                    sig.unary.insert(p.clone());
                }
                Atom::Binary(r, _, _) => match r {
                    Rel::Common(p) => {
                        sig.binary.insert(p.clone());
                    }
                    Rel::Equal => {}
                    Rel::Less => sig.special.order = true,
                    Rel::Equiv(k) => {
                        sig.special.equiv.insert(*k);
                    }
                    Rel::Pre(k) => {
                        sig.special.pre.insert(*k);
                    }
                    Rel::Succ(k) => {
                        sig.special.succ.insert(*k);
                    }
                    Rel::Fam(k) => {
                        sig.special.fam.insert(*k);
                    }
                },
            }
        });
        sig.special = sig.special.closed();
        sig.k = sig.special.equiv.iter().copied().max().unwrap_or(0);
        sig.k_fam = sig.special.fam.iter().copied().max().unwrap_or(0);
        sig
    }

    /// Number of common relation symbols, i.e. the exponent of the 1-type count.
    pub fn common_rel_count(&self) -> usize {
        self.unary.len() + self.binary.len()
    }

    pub fn is_subset_of(&self, other: &Signature) -> bool {
        self.unary.is_subset(&other.unary)
            && self.binary.is_subset(&other.binary)
            && self.constants.is_subset(&other.constants)
            && (!self.special.order || other.special.order)
            && self.k <= other.k
            && self.k_fam <= other.k_fam
    }
}
