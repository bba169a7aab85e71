//! Weight conditions `B1`–`B6`, case dispatch and best-constant brackets.

mod bquant;
mod bracket;
mod exponents;
mod report;
mod sup;

pub use bquant::{eval_b1, eval_b2, eval_b3, eval_b4, eval_b5, eval_b6, inner_tail, B6Reading};
pub use bracket::bracket_constant;
pub use exponents::{conjugate, CaseId, ExponentSystem};
pub use report::{eval_report, eval_report_line, ConditionReport};
pub use sup::{sup_over_t, Supremum, EDGE_SLOPE, SUP_GRID_MAX, SUP_GRID_MIN, SUP_GRID_NODES};
