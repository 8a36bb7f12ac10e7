//! Finite-satisfiability workbench for two-variable first-order logic over
//! nested equivalence relations and nested total preorders.

pub mod generate;
pub mod logic;
pub mod matrix;
pub mod normalize;
pub mod oracle;
pub mod par;
pub mod pumping;
pub mod reductions;
pub mod preorder_solver;
pub mod structure;
pub mod typespace;
