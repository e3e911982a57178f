//! Numerical certification of the bounds, decomposition, limits and risk
//! results by brute force and independent reference formulas.

pub mod asym;
pub mod bounds;
pub mod draws;
pub mod fd;
pub mod grid;
pub mod limits;
pub mod oracle;
pub mod risk;
pub mod suites;

pub use asym::{asym_condition_check, AsymReport};
pub use bounds::{bound_constants, bound_gap_vs_m, bound_search, bound_search_with, BoundReport, GapEntry, SearchOptions};
pub use fd::{finite_diff_grad, relative_error};
pub use limits::{limit_convergence_probe, LimitKind, LimitTable};
pub use risk::{risk_bound_enumeration, RiskGaps, RiskInstance};
pub use suites::{run_suite, run_suites, Claim, Suite, SuiteReport, VerifyOptions, VerifyReport};
