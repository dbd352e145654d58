//! Numerical verification of the count by homotopy continuation.

mod filter;
mod homotopy;
mod linalg;
mod params;
mod system;
mod verify;

pub use filter::{filter_solutions, AcceptedCover, FilterOutcome, RejectionCounts};
pub use homotopy::{solve_total_degree, solve_total_degree_with, PathResult, PathStats, PathStatus, SolveOutcome};
pub use params::{Execution, Precision, ToleranceSet, ENV_OVERRIDES};
pub use system::{build_system, build_system_unchecked, sample_lambda, trial_seed, Block, BlockKind, PolySystem, C64};
pub use verify::{verify_count, verify_count_with, verify_trial, Verdict, VerifyReport};
