use crate::logic::{Formula, Var};
use crate::matrix::{compile_atom, CompileError, Lit, Tri, Vocab};

/// A compiled formula, quantifiers included.
#[derive(Clone, Debug)]
pub enum Cf {
    Const(bool),
    Lit(Lit),
    Not(Box<Cf>),
    And(Vec<Cf>),
    Or(Vec<Cf>),
    Iff(Box<Cf>, Box<Cf>),
    Forall(Var, Box<Cf>),
    Exists(Var, Box<Cf>),
}

impl Cf {
    pub fn compile(f: &Formula, vocab: &Vocab) -> Result<Cf, CompileError> {
        let rec = |g: &Formula| Cf::compile(g, vocab);
        Ok(match f {
            Formula::True => Cf::Const(true),
            Formula::False => Cf::Const(false),
            Formula::Atom(a) => Cf::Lit(compile_atom(a, vocab)?),
            Formula::Not(a) => Cf::Not(Box::new(rec(a)?)),
            Formula::And(a, b) => Cf::And(vec![rec(a)?, rec(b)?]),
            Formula::Or(a, b) => Cf::Or(vec![rec(a)?, rec(b)?]),
            Formula::Implies(a, b) => Cf::Or(vec![Cf::Not(Box::new(rec(a)?)), rec(b)?]),
            Formula::Iff(a, b) => Cf::Iff(Box::new(rec(a)?), Box::new(rec(b)?)),
            Formula::Forall(v, a) => Cf::Forall(*v, Box::new(rec(a)?)),
            Formula::Exists(v, a) => Cf::Exists(*v, Box::new(rec(a)?)),
        })
    }
}

/// Atom values and domain size for Kleene evaluation of [`Cf`].
pub trait Partial {
    fn size(&self) -> usize;
    fn atom(&self, lit: &Lit, env: [usize; 2]) -> Tri;
}

fn slot(v: Var) -> usize {
    match v {
        Var::X => 0,
        Var::Y => 1,
    }
}

pub fn eval<P: Partial + ?Sized>(cf: &Cf, p: &P, env: [usize; 2]) -> Tri {
    match cf {
        Cf::Const(b) => Tri::from_bool(*b),
        Cf::Lit(l) => p.atom(l, env),
        Cf::Not(a) => eval(a, p, env).not(),
        Cf::And(xs) => {
            let mut out = Tri::True;
            for x in xs {
                match eval(x, p, env) {
                    Tri::False => return Tri::False,
                    Tri::Unknown => out = Tri::Unknown,
                    Tri::True => {}
                }
            }
            out
        }
        Cf::Or(xs) => {
            let mut out = Tri::False;
            for x in xs {
                match eval(x, p, env) {
                    Tri::True => return Tri::True,
                    Tri::Unknown => out = Tri::Unknown,
                    Tri::False => {}
                }
            }
            out
        }
        Cf::Iff(a, b) => match (eval(a, p, env), eval(b, p, env)) {
            (Tri::Unknown, _) | (_, Tri::Unknown) => Tri::Unknown,
            (l, r) => Tri::from_bool(l == r),
        },
        Cf::Forall(v, a) => {
            let mut out = Tri::True;
            for e in 0..p.size() {
                let mut env = env;
                env[slot(*v)] = e;
                match eval(a, p, env) {
                    Tri::False => return Tri::False,
                    Tri::Unknown => out = Tri::Unknown,
                    Tri::True => {}
                }
            }
            out
        }
        Cf::Exists(v, a) => {
            let mut out = Tri::False;
            for e in 0..p.size() {
                let mut env = env;
                env[slot(*v)] = e;
                match eval(a, p, env) {
                    Tri::True => return Tri::True,
                    Tri::Unknown => out = Tri::Unknown,
                    Tri::False => {}
                }
            }
            out
        }
    }
}

/// Resolve the arguments of a literal under `env`.
pub fn bind(l: &Lit, env: [usize; 2]) -> (usize, usize) {
    (env[slot(l.args.0)], env[slot(l.args.1)])
}
