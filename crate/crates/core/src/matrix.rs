//! Compiled quantifier-free formulas over `x`, `y` with three-valued
//! evaluation. Every search procedure in the crate evaluates these instead
//! of walking [`Formula`] trees with string symbols.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{Atom, Formula, Rel, Signature, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    pub fn not(self) -> Tri {
        match self {
            Tri::False => Tri::True,
            Tri::True => Tri::False,
            Tri::Unknown => Tri::Unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

/// Dense symbol numbering for a signature.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
    unary_ix: BTreeMap<String, u32>,
    binary_ix: BTreeMap<String, u32>,
    /// Levels of the E/pre/S family.
    pub k: u32,
    pub k_fam: u32,
}

impl Vocab {
    pub fn new(unary: Vec<String>, binary: Vec<String>, k: u32, k_fam: u32) -> Vocab {
        let unary_ix = unary.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let binary_ix = binary.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        Vocab {
            unary,
            binary,
            unary_ix,
            binary_ix,
            k,
            k_fam,
        }
    }

    pub fn of_signature(sig: &Signature) -> Vocab {
        Vocab::new(
            sig.unary.iter().cloned().collect(),
            sig.binary.iter().cloned().collect(),
            sig.k,
            sig.k_fam,
        )
    }

    pub fn unary_index(&self, name: &str) -> Option<u32> {
        self.unary_ix.get(name).copied()
    }

    pub fn binary_index(&self, name: &str) -> Option<u32> {
        self.binary_ix.get(name).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LitKind {
    Unary(u32),
    Binary(u32),
    Less,
    Equal,
    Equiv(u32),
    Pre(u32),
    Succ(u32),
    Fam(u32),
}

/// An atom applied to variables. Unary atoms use only `args.0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub kind: LitKind,
    pub args: (Var, Var),
}

impl Lit {
    /// Bind `x := a`, `y := b`.
    pub fn bind(&self, a: usize, b: usize) -> (usize, usize) {
        let pick = |v: Var| if v == Var::X { a } else { b };
        (pick(self.args.0), pick(self.args.1))
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self.kind {
            LitKind::Unary(_) => self.args.0 == v,
            _ => self.args.0 == v || self.args.1 == v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Qf {
    Const(bool),
    Lit(Lit),
    Not(Box<Qf>),
    And(Vec<Qf>),
    Or(Vec<Qf>),
    Iff(Box<Qf>, Box<Qf>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula is not quantifier-free")]
    Quantified,
    #[error("constant @{0} in matrix")]
    Constant(String),
    #[error("symbol {0} missing from vocabulary")]
    UnknownSymbol(String),
}

/// Atom truth values supplied by a (partial) interpretation.
pub trait Interp {
    fn lit(&self, kind: LitKind, a: usize, b: usize) -> Tri;
}

impl Qf {
    pub fn compile(f: &Formula, vocab: &Vocab) -> Result<Qf, CompileError> {
        Ok(match f {
            Formula::True => Qf::Const(true),
            Formula::False => Qf::Const(false),
            Formula::Atom(a) => Qf::Lit(compile_atom(a, vocab)?),
            Formula::Not(a) => Qf::Not(Box::new(Qf::compile(a, vocab)?)),
            Formula::And(..) => {
                let mut parts = Vec::new();
                flatten(f, &mut parts, true);
                Qf::And(parts.into_iter().map(|p| Qf::compile(p, vocab)).collect::<Result<_, _>>()?)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                flatten(f, &mut parts, false);
                Qf::Or(parts.into_iter().map(|p| Qf::compile(p, vocab)).collect::<Result<_, _>>()?)
            }
            Formula::Implies(a, b) => Qf::Or(vec![
                Qf::Not(Box::new(Qf::compile(a, vocab)?)),
                Qf::compile(b, vocab)?,
            ]),
            Formula::Iff(a, b) => Qf::Iff(
                Box::new(Qf::compile(a, vocab)?),
                Box::new(Qf::compile(b, vocab)?),
            ),
            Formula::Forall(..) | Formula::Exists(..) => return Err(CompileError::Quantified),
        })
    }

    pub fn eval<I: Interp + ?Sized>(&self, interp: &I, a: usize, b: usize) -> Tri {
        match self {
            Qf::Const(c) => Tri::from_bool(*c),
            Qf::Lit(l) => {
                let (u, v) = l.bind(a, b);
                interp.lit(l.kind, u, v)
            }
            Qf::Not(q) => q.eval(interp, a, b).not(),
            Qf::And(qs) => {
                let mut out = Tri::True;
                for q in qs {
                    match q.eval(interp, a, b) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
            Qf::Or(qs) => {
                let mut out = Tri::False;
                for q in qs {
                    match q.eval(interp, a, b) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                out
            }
            Qf::Iff(p, q) => match (p.eval(interp, a, b), q.eval(interp, a, b)) {
                (Tri::Unknown, _) | (_, Tri::Unknown) => Tri::Unknown,
                (l, r) => Tri::from_bool(l == r),
            },
        }
    }

    /// Two-valued evaluation; unknown atoms count as false.
    pub fn holds<I: Interp + ?Sized>(&self, interp: &I, a: usize, b: usize) -> bool {
        self.eval(interp, a, b) == Tri::True
    }

    pub fn for_each_lit(&self, f: &mut dyn FnMut(&Lit)) {
        match self {
            Qf::Const(_) => {}
            Qf::Lit(l) => f(l),
            Qf::Not(q) => q.for_each_lit(f),
            Qf::And(qs) | Qf::Or(qs) => qs.iter().for_each(|q| q.for_each_lit(f)),
            Qf::Iff(p, q) => {
                p.for_each_lit(f);
                q.for_each_lit(f);
            }
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        let mut hit = false;
        self.for_each_lit(&mut |l| hit |= l.mentions(v));
        hit
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct).
    pub fn into_conjuncts(self) -> Vec<Qf> {
        match self {
            Qf::And(qs) => qs.into_iter().flat_map(Qf::into_conjuncts).collect(),
            Qf::Const(true) => Vec::new(),
            other => vec![other],
        }
    }
}

fn flatten<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>, conj: bool) {
    match (f, conj) {
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            flatten(a, out, conj);
            flatten(b, out, conj);
        }
        _ => out.push(f),
    }
}

fn term_var(t: &Term) -> Result<Var, CompileError> {
    match t {
        Term::Var(v) => Ok(*v),
        Term::Const(c) => Err(CompileError::Constant(c.clone())),
    }
}

/// Compile a constant-free atom.
pub fn compile_atom(a: &Atom, vocab: &Vocab) -> Result<Lit, CompileError> {
    Ok(match a {
        Atom::Unary(p, t) => {
            let v = term_var(t)?;
            let ix = vocab
                .unary_index(p)
                .ok_or_else(|| CompileError::UnknownSymbol(p.clone()))?;
            Lit {
                kind: LitKind::Unary(ix),
                args: (v, v),
            }
        }
        Atom::Binary(r, s, t) => {
            let args = (term_var(s)?, term_var(t)?);
            let kind = match r {
                Rel::Common(p) => LitKind::Binary(
                    vocab
                        .binary_index(p)
                        .ok_or_else(|| CompileError::UnknownSymbol(p.clone()))?,
                ),
                Rel::Less => LitKind::Less,
                Rel::Equal => LitKind::Equal,
                Rel::Equiv(k) => LitKind::Equiv(*k),
                Rel::Pre(k) => LitKind::Pre(*k),
                Rel::Succ(k) => LitKind::Succ(*k),
                Rel::Fam(k) => LitKind::Fam(*k),
            };
            Lit { kind, args }
        }
    })
}
