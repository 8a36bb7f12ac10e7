use std::fmt;

use super::ast::{Atom, Formula, Rel, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v.name()),
            Term::Const(c) => write!(f, "@{c}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Unary(p, t) => write!(f, "{p}({t})"),
            Atom::Binary(r, a, b) => match r {
                Rel::Common(p) => write!(f, "{p}({a},{b})"),
                Rel::Less => write!(f, "{a} < {b}"),
                Rel::Equal => write!(f, "{a} = {b}"),
                Rel::Equiv(k) => write!(f, "E{k}({a},{b})"),
                Rel::Pre(k) => write!(f, "pre{k}({a},{b})"),
                Rel::Succ(k) => write!(f, "S{k}({a},{b})"),
                Rel::Fam(k) => write!(f, "F{k}({a},{b})"),
            },
        }
    }
}

// Binding strength; larger binds tighter.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        Formula::Forall(..) | Formula::Exists(..) => 0,
        _ => 6,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Canonical rendering: quantifier operands of connectives are always
/// parenthesised, other operands only where precedence requires it.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                f.write_str("!")?;
                write_operand(f, a, prec(a) < prec(self))
            }
            Formula::Forall(v, a) => write!(f, "forall {}. {a}", v.name()),
            Formula::Exists(v, a) => write!(f, "exists {}. {a}", v.name()),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                let op = match self {
                    Formula::And(..) => "&",
                    Formula::Or(..) => "|",
                    _ => "<->",
                };
                let p = prec(self);
                write_operand(f, a, prec(a) < p)?;
                write!(f, " {op} ")?;
                write_operand(f, b, prec(b) <= p)
            }
            Formula::Implies(a, b) => {
                let p = prec(self);
                write_operand(f, a, prec(a) <= p)?;
                f.write_str(" -> ")?;
                write_operand(f, b, prec(b) < p)
            }
        }
    }
}

/// Render a formula in the canonical ASCII syntax.
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}
