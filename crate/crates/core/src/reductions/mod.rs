//! Hardness-reduction generators with witness encoders and decoders:
//! corridor tiling into one total preorder with its successor, and
//! two-counter machines into two independent nested pairs.

mod tcm;
mod tiling;

use thiserror::Error;

use crate::logic::{Formula, Rel, Term, Var};
use crate::structure::EvalError;

pub use tcm::{
    run_to_structure, simulate, tcm_to_formula, Config, Op, Run, TwoCounterMachine, COUNTER_PREDICATES, D_E, D_F,
};
pub use tiling::{
    bit_name, check_tiling, colour_name, decode_tiling, solution_to_structure, solve_tiling, tiling_to_formula,
    TilingInstance, TilingSolution, TilingViolation,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("malformed instance: {0}")]
    Instance(String),
    #[error("the structure is not a model of the generated sentence")]
    NotAModel,
    #[error("element {0} carries {1} colours")]
    Colour(usize, usize),
    #[error("row {row}, column {col}: {problem}")]
    Cell { row: usize, col: usize, problem: String },
    #[error("decoded grid is not a tiling: {0}")]
    Tiling(TilingViolation),
    #[error("invalid run: {0}")]
    Run(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn atom(p: &str, v: Var) -> Formula {
    Formula::unary(p, Term::Var(v))
}

fn rel(r: Rel, a: Var, b: Var) -> Formula {
    Formula::binary(r, Term::Var(a), Term::Var(b))
}
