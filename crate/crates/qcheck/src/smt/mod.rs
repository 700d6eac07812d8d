//! SMT-LIB terms, scripts and the external solver process.

mod script;
mod solver;
mod term;

pub use script::SmtScript;
pub use solver::{
    resolve_solver_command, ProcessSolver, SatResult, SmtError, Solver, DEFAULT_SOLVER, DEFAULT_TIMEOUT, SOLVER_ENV,
};
pub use term::{parse_decimal, ArithOp, CmpOp, Quantifier, SmtTerm, Sort};
