//! Independent checks: an explicit finite-difference solver that shares no
//! evolution code with [`crate::solvers`], field comparison norms and Monte
//! Carlo convergence studies.

pub mod compare;
pub mod convergence;
pub mod fd;

pub use compare::{compare_fields, compare_values, ErrorReport, REPORT_HEADER};
pub use convergence::{mc_convergence_study, ConvergenceRow, ConvergenceStudy};
pub use fd::{solve_fd, Boundary, FdOperator, SteppingMode, SteppingScheme};
