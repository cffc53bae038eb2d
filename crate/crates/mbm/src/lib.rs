//! Barrier-type solver for continuous constrained multiobjective problems.
//!
//! The method replaces a constrained vector-valued minimization by a sequence
//! of unconstrained scalar subproblems: a monotone scalarizing map is applied
//! to the objectives plus a shrinking positive multiple of a vector-valued
//! interior penalty. Iterates stay strictly feasible throughout; with a
//! weakly increasing scalarizer the limit points are weak Pareto optimal, and
//! with a strongly increasing one they are Pareto optimal.
//!
//! The pieces:
//!
//! - [`problem`]: problem definition and built-in test instances;
//! - [`barrier`]: vector-valued inverse and log interior penalties;
//! - [`auxiliary`]: the scalarizer catalog and a monotonicity verifier;
//! - [`inner`]: the strictly feasible scalar subproblem engine;
//! - [`driver`]: the outer penalty-continuation loop, weight recovery and
//!   Pareto-front sweeps over scalarizer families;
//! - [`oracle`]: grid-based nondominance checks and the weighted-sum baseline.

pub mod auxiliary;
pub mod barrier;
pub mod driver;
pub mod error;
pub mod inner;
pub mod oracle;
pub mod problem;

mod util;

pub use auxiliary::{
    verify_monotonicity, AuxKind, AuxiliaryFunction, Counterexample, MonotonicityReport,
    Monotonicity, PerturbationCase,
};
pub use barrier::{estimate_log_shift, Barrier, BarrierKind};
pub use driver::{
    check_phi_monotone_trace, local_mbm_run, mbm_run, mbm_run_observed, pareto_sweep,
    FamilyMember, MbmConfig, MbmMode, PenaltySchedule, RecoveredWeights, RunStatus, RunTrace,
    StartStrategy, SweepEntry, TraceRow,
};
pub use driver::recover_weights;
pub use error::{MbmError, Result};
pub use inner::{
    minimize, BoxBounds, CompositeObjective, InnerMethod, InnerResult, InnerSolverConfig,
    InnerTermination, Observer,
};
pub use oracle::{
    brute_force_nondominated, classify_point, dominates, weighting_failure_fraction,
    weighting_method_solve, weighting_method_solve_observed, Classification, Grid,
    WeightingOutcome, WeightingResult,
};
pub use problem::{
    default_fd_step, disk2d, ex51, ex52, finite_difference_jacobian, is_strictly_feasible,
    registry_get, registry_names, Problem, ProblemInstance,
};
