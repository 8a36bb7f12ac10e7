use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::{Atom, Formula, LogicId, Rel, Signature, Var};

/// Position of a node: child indices from the root (`""` is the root).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AstPath(pub Vec<u8>);

impl fmt::Display for AstPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "/{}", parts.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: AstPath,
    pub rule: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FragmentFlags {
    pub constant_free: bool,
    pub equality_free: bool,
    pub monadic_common: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntaxReport {
    pub signature: Signature,
    pub conformant: bool,
    pub violations: Vec<Violation>,
    pub fragment_flags: FragmentFlags,
}

fn rel_name(r: &Rel) -> String {
    match r {
        Rel::Common(p) => p.clone(),
        Rel::Less => "<".into(),
        Rel::Equal => "=".into(),
        Rel::Equiv(k) => format!("E{k}"),
        Rel::Pre(k) => format!("pre{k}"),
        Rel::Succ(k) => format!("S{k}"),
        Rel::Fam(k) => format!("F{k}"),
    }
}

fn looks_special(name: &str) -> bool {
    ["pre", "E", "S", "F"].iter().any(|p| {
        name.strip_prefix(p)
            .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
    })
}

struct Walker {
    logic: LogicId,
    violations: Vec<Violation>,
    arity: BTreeMap<String, usize>,
    equality: bool,
}

impl Walker {
    fn visit(&mut self, f: &Formula, path: &mut Vec<u8>, bound: &BTreeSet<Var>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => self.atom(a, path, bound),
            Formula::Not(a) => self.child(a, 0, path, bound),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.child(a, 0, path, bound);
                self.child(b, 1, path, bound);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let mut inner = bound.clone();
                inner.insert(*v);
                self.child(a, 0, path, &inner);
            }
        }
    }

    fn child(&mut self, f: &Formula, i: u8, path: &mut Vec<u8>, bound: &BTreeSet<Var>) {
        path.push(i);
        self.visit(f, path, bound);
        path.pop();
    }

    fn report(&mut self, path: &[u8], rule: String) {
        self.violations.push(Violation {
            location: AstPath(path.to_vec()),
            rule,
        });
    }

    fn atom(&mut self, a: &Atom, path: &[u8], bound: &BTreeSet<Var>) {
        for t in a.terms() {
            if let Some(v) = t.var() {
                if !bound.contains(&v) {
                    self.report(path, format!("free variable {}", v.name()));
                }
            }
        }
        let (name, arity) = match a {
            Atom::Unary(p, _) => (Some(p.clone()), 1),
            Atom::Binary(Rel::Common(p), _, _) => (Some(p.clone()), 2),
            Atom::Binary(r, _, _) => {
                if *r == Rel::Equal {
                    self.equality = true;
                }
                if !self.logic.allows(r) {
                    let rule = format!("{} not in profile", rel_name(r));
                    self.report(path, rule);
                }
                (None, 2)
            }
        };
        if let Some(name) = name {
            if looks_special(&name) || name == "x" || name == "y" {
                self.report(path, format!("common symbol {name} clashes with reserved syntax"));
            }
            let expected = *self.arity.entry(name.clone()).or_insert(arity);
            if expected != arity {
                self.report(path, format!("{name} used with arity {arity} and {expected}"));
            }
        }
    }
}

/// Report signature, conformance with `logic` and fragment flags. Never fails.
pub fn analyze(f: &Formula, logic: LogicId) -> SyntaxReport {
    let mut w = Walker {
        logic,
        violations: Vec::new(),
        arity: BTreeMap::new(),
        equality: false,
    };
    w.visit(f, &mut Vec::new(), &BTreeSet::new());
    let signature = Signature::of(f);
    let fragment_flags = FragmentFlags {
        constant_free: signature.constants.is_empty(),
        equality_free: !w.equality,
        monadic_common: signature.binary.is_empty(),
    };
    SyntaxReport {
        signature,
        conformant: w.violations.is_empty(),
        violations: w.violations,
        fragment_flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn successor_outside_profile() {
        let f = parse_formula("forall x. exists y. S1(x,y)").unwrap();
        let r = analyze(&f, LogicId::Preorder);
        assert!(!r.conformant);
        assert_eq!(r.violations[0].rule, "S1 not in profile");
        assert_eq!(r.violations[0].location, AstPath(vec![0, 0]));
        assert!(analyze(&f, LogicId::PreorderSucc).conformant);
    }

    #[test]
    fn variable_reuse_is_conformant() {
        let f = parse_formula("forall x. forall y. forall x. P(x)").unwrap();
        assert!(analyze(&f, LogicId::RawFo2).conformant);
    }

    #[test]
    fn free_variables_and_arity_clash() {
        let f = Formula::and(
            Formula::unary("R", crate::logic::Term::Var(Var::X)),
            Formula::binary(
                Rel::Common("R".into()),
                crate::logic::Term::Var(Var::X),
                crate::logic::Term::Var(Var::X),
            ),
        );
        let r = analyze(&f, LogicId::RawFo2);
        assert!(!r.conformant);
        assert!(r.violations.iter().any(|v| v.rule.contains("arity")));
        assert!(r.violations.iter().any(|v| v.rule.contains("free variable")));
    }

    #[test]
    fn fragment_flags() {
        let f = parse_formula("forall x. forall y. x = y | R(x,@c)").unwrap();
        let r = analyze(&f, LogicId::RawFo2);
        assert_eq!(
            r.fragment_flags,
            FragmentFlags {
                constant_free: false,
                equality_free: false,
                monadic_common: false
            }
        );
        let f = parse_formula("forall x. E1(x,x) & F2(x,x)").unwrap();
        let r = analyze(&f, LogicId::TwoFamilies);
        assert!(r.conformant);
        assert!(!analyze(&parse_formula("forall x. E3(x,x)").unwrap(), LogicId::TwoFamilies).conformant);
        assert!(!analyze(&f, LogicId::Eq).conformant);
    }

    #[test]
    fn order_only_in_order_eq() {
        let f = parse_formula("forall x. forall y. x < y | y < x | x = y").unwrap();
        assert!(analyze(&f, LogicId::OrderEq).conformant);
        assert!(!analyze(&f, LogicId::Preorder).conformant);
    }
}
