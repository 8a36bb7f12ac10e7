use thiserror::Error;

use super::Structure;
use crate::logic::{Atom, Formula, Rel, Term, Var};

/// Assignment of the two variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    pub x: Option<usize>,
    pub y: Option<usize>,
}

impl Valuation {
    pub fn x(a: usize) -> Valuation {
        Valuation { x: Some(a), y: None }
    }

    pub fn xy(a: usize, b: usize) -> Valuation {
        Valuation {
            x: Some(a),
            y: Some(b),
        }
    }

    fn get(&self, v: Var) -> Option<usize> {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
        }
    }

    fn with(mut self, v: Var, a: usize) -> Valuation {
        match v {
            Var::X => self.x = Some(a),
            Var::Y => self.y = Some(a),
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {} is unassigned", .0.name())]
    Unassigned(Var),
    #[error("symbol {0} is not interpreted")]
    AbsentSymbol(String),
}

fn term(s: &Structure, t: &Term, v: &Valuation) -> Result<usize, EvalError> {
    match t {
        Term::Var(x) => v.get(*x).ok_or(EvalError::Unassigned(*x)),
        Term::Const(c) => s
            .constants
            .get(c)
            .copied()
            .ok_or_else(|| EvalError::AbsentSymbol(format!("@{c}"))),
    }
}

fn atom(s: &Structure, a: &Atom, v: &Valuation) -> Result<bool, EvalError> {
    match a {
        Atom::Unary(p, t) => {
            let e = term(s, t, v)?;
            let set = s.unary.get(p).ok_or_else(|| EvalError::AbsentSymbol(p.clone()))?;
            Ok(set.contains(&e))
        }
        Atom::Binary(r, t1, t2) => {
            let (a, b) = (term(s, t1, v)?, term(s, t2, v)?);
            let absent = |name: String| Err(EvalError::AbsentSymbol(name));
            match r {
                Rel::Common(p) => match s.binary.get(p) {
                    Some(set) => Ok(set.contains(&(a, b))),
                    None => absent(p.clone()),
                },
                Rel::Equal => Ok(a == b),
                Rel::Less if s.order => Ok(a < b),
                Rel::Less => absent("<".into()),
                Rel::Equiv(k) if *k as usize <= s.k() as usize => Ok(s.same_class(*k, a, b)),
                Rel::Equiv(k) => absent(format!("E{k}")),
                Rel::Pre(k) if *k as usize <= s.pre.len() => Ok(s.preceq(*k, a, b)),
                Rel::Pre(k) => absent(format!("pre{k}")),
                Rel::Succ(k) if *k as usize <= s.pre.len() => Ok(s.succ(*k, a, b)),
                Rel::Succ(k) => absent(format!("S{k}")),
                Rel::Fam(k) if *k as usize <= s.feq.len() => Ok(s.same_fam_class(*k, a, b)),
                Rel::Fam(k) => absent(format!("F{k}")),
            }
        }
    }
}

/// Tarskian truth of `f` in `s` under `v`.
pub fn evaluate(s: &Structure, f: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => atom(s, a, v)?,
        Formula::Not(a) => !evaluate(s, a, v)?,
        Formula::And(a, b) => evaluate(s, a, v)? && evaluate(s, b, v)?,
        Formula::Or(a, b) => evaluate(s, a, v)? || evaluate(s, b, v)?,
        Formula::Implies(a, b) => !evaluate(s, a, v)? || evaluate(s, b, v)?,
        Formula::Iff(a, b) => evaluate(s, a, v)? == evaluate(s, b, v)?,
        Formula::Forall(x, a) => {
            for e in 0..s.n {
                if !evaluate(s, a, &v.with(*x, e))? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Exists(x, a) => {
            for e in 0..s.n {
                if evaluate(s, a, &v.with(*x, e))? {
                    return Ok(true);
                }
            }
            false
        }
    })
}
