//! Signatures, formulas, parsing, printing and fragment validation.

mod analyze;
mod ast;
mod parse;
mod render;

pub use analyze::{analyze, AstPath, FragmentFlags, SyntaxReport, Violation};
pub use ast::{Atom, Formula, LogicId, Rel, Signature, SpecialProfile, Term, Var};
pub use parse::{parse_formula, ParseError, ParseErrorKind};
pub use render::render_formula;
