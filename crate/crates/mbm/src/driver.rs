//! Outer penalty-continuation loop, in global and box-restricted variants.
//!
//! Each outer iteration k solves the scalar subproblem with penalty `tau_k`
//! (a strictly decreasing positive sequence tending to zero), warm-started at
//! the previous iterate. Warm starting plus the descent-only inner solver
//! makes the recorded scalarized values nonincreasing: the new subproblem at
//! the old iterate is already no worse than the old subproblem there, because
//! the barrier is nonnegative and the scalarizer is monotone.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::auxiliary::{AuxKind, AuxiliaryFunction, Monotonicity};
use crate::barrier::Barrier;
use crate::error::{MbmError, Result};
use crate::inner::{
    minimize, BoxBounds, CompositeObjective, InnerResult, InnerSolverConfig, InnerTermination,
    Observer,
};
use crate::problem::{is_strictly_feasible, Problem};
use crate::util::{norm2, norm_inf_diff, project_simplex};

/// Positive penalty sequences, strictly decreasing to zero.
#[derive(Clone, Debug, PartialEq)]
pub enum PenaltySchedule {
    /// `initial * ratio^k`
    Geometric { initial: f64, ratio: f64 },
    /// `initial / (k + 1)`
    Harmonic { initial: f64 },
}

impl PenaltySchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            PenaltySchedule::Geometric { initial, ratio } => {
                if !(*initial > 0.0) {
                    return Err(MbmError::Config(format!(
                        "schedule initial value must be positive, got {initial}"
                    )));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(MbmError::Config(format!(
                        "geometric ratio must lie in (0, 1), got {ratio}"
                    )));
                }
            }
            PenaltySchedule::Harmonic { initial } => {
                if !(*initial > 0.0) {
                    return Err(MbmError::Config(format!(
                        "schedule initial value must be positive, got {initial}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Penalty at zero-based index k.
    pub fn value(&self, k: usize) -> f64 {
        match self {
            PenaltySchedule::Geometric { initial, ratio } => initial * ratio.powi(k as i32),
            PenaltySchedule::Harmonic { initial } => initial / (k as f64 + 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbmMode {
    /// Any monotone scalarizer; limits are weak Pareto optimal.
    Weak,
    /// Requires a strongly increasing scalarizer; limits are Pareto optimal.
    Strong,
}

#[derive(Clone, Debug)]
pub struct MbmConfig {
    pub mode: MbmMode,
    pub schedule: PenaltySchedule,
    pub outer_iterations: usize,
    /// Stop once the outer step is below this and the penalty is below
    /// `penalty_stop`.
    pub outer_tolerance: f64,
    pub penalty_stop: f64,
    pub local_bounds: Option<BoxBounds>,
    pub inner: InnerSolverConfig,
    pub recover_weights: bool,
    /// Start each subproblem at the previous iterate (default) instead of the
    /// original start point.
    pub warm_start: bool,
}

impl Default for MbmConfig {
    fn default() -> Self {
        MbmConfig {
            mode: MbmMode::Weak,
            schedule: PenaltySchedule::Geometric {
                initial: 1.0,
                ratio: 0.5,
            },
            outer_iterations: 50,
            outer_tolerance: 1e-9,
            penalty_stop: 1e-8,
            local_bounds: None,
            inner: InnerSolverConfig::default(),
            recover_weights: false,
        warm_start: true,
        }
    }
}

/// Scalarization weights implicit in a max-type subproblem solution.
#[derive(Clone, Debug)]
pub struct RecoveredWeights {
    /// Nonnegative weights summing to one; zero off the active set.
    pub weights: Vec<f64>,
    /// Indices whose penalized (and shifted) objective attains the maximum.
    pub active_set: Vec<usize>,
    /// Euclidean norm of the weighted combination of composite gradients.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    /// One-based outer iteration.
    pub iteration: usize,
    pub penalty: f64,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub barrier_values: Vec<f64>,
    /// Scalarized penalized value at `x`.
    pub phi_value: f64,
    pub inner_iterations: usize,
    pub inner_termination: InnerTermination,
    pub weights: Option<RecoveredWeights>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Converged,
    OuterBudgetExhausted,
    InnerFailure(String),
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn final_x(&self) -> Option<&[f64]> {
        self.rows.last().map(|r| r.x.as_slice())
    }

    /// Estimate of the limiting scalarized value: the last recorded one.
    pub fn phi_limit_estimate(&self) -> Option<f64> {
        self.rows.last().map(|r| r.phi_value)
    }
}

fn validate_config(phi: &AuxiliaryFunction, config: &MbmConfig) -> Result<()> {
    config.schedule.validate()?;
    config.inner.validate()?;
    if config.outer_iterations == 0 {
        return Err(MbmError::Config("outer_iterations must be positive".to_string()));
    }
    if !(config.outer_tolerance > 0.0) {
        return Err(MbmError::Config("outer_tolerance must be positive".to_string()));
    }
    if !(config.penalty_stop > 0.0) {
        return Err(MbmError::Config("penalty_stop must be positive".to_string()));
    }
    if config.mode == MbmMode::Strong && phi.monotonicity() != Monotonicity::SIncreasing {
        return Err(MbmError::Config(
            "strong mode requires a strongly increasing scalarizer".to_string(),
        ));
    }
    if config.recover_weights
        && !matches!(phi.kind(), AuxKind::Max | AuxKind::ShiftedMax(_))
    {
        return Err(MbmError::Config(
            "weight recovery is defined for max-type scalarizers only".to_string(),
        ));
    }
    Ok(())
}

/// Runs the outer loop. See [`local_mbm_run`] for the box-restricted variant;
/// when `config.local_bounds` is set this honors it.
pub fn mbm_run(
    problem: &Problem,
    barrier: &Barrier,
    phi: &AuxiliaryFunction,
    x0: &[f64],
    config: &MbmConfig,
) -> Result<RunTrace> {
    mbm_run_observed(problem, barrier, phi, x0, config, None)
}

/// Box-restricted variant: subproblems are minimized over the strict interior
/// intersected with the interior of `config.local_bounds` (required here).
pub fn local_mbm_run(
    problem: &Problem,
    barrier: &Barrier,
    phi: &AuxiliaryFunction,
    x0: &[f64],
    config: &MbmConfig,
) -> Result<RunTrace> {
    if config.local_bounds.is_none() {
        return Err(MbmError::Config(
            "local run requires box bounds in the configuration".to_string(),
        ));
    }
    mbm_run_observed(problem, barrier, phi, x0, config, None)
}

/// [`mbm_run`] with an inner-solver observer threaded through every
/// subproblem solve.
pub fn mbm_run_observed(
    problem: &Problem,
    barrier: &Barrier,
    phi: &AuxiliaryFunction,
    x0: &[f64],
    config: &MbmConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<RunTrace> {
    validate_config(phi, config)?;
    if x0.len() != problem.decision_dim() {
        return Err(MbmError::DimensionMismatch {
            expected: problem.decision_dim(),
            got: x0.len(),
        });
    }
    if !is_strictly_feasible(problem, x0)? {
        return Err(MbmError::Precondition(
            "outer loop started at a point that is not strictly feasible".to_string(),
        ));
    }
    if let Some(bounds) = &config.local_bounds {
        if !bounds.strictly_inside(x0) {
            return Err(MbmError::Precondition(
                "outer loop started outside the box interior".to_string(),
            ));
        }
    }

    let mut rows: Vec<TraceRow> = Vec::new();
    let mut x = x0.to_vec();
    let mut status = None;

    for k in 1..=config.outer_iterations {
        let penalty = config.schedule.value(k - 1);
        let composite = CompositeObjective::new(
            problem.clone(),
            barrier.clone(),
            phi.clone(),
            penalty,
            config.local_bounds.clone(),
        )?;
        let start = if config.warm_start {
            x.clone()
        } else {
            x0.to_vec()
        };
        let obs: Option<Observer<'_>> = match observer.as_mut() {
            Some(o) => Some(&mut **o),
            None => None,
        };
        let inner: InnerResult = match minimize(&composite, &start, &config.inner, obs) {
            Ok(result) => result,
            Err(err) => {
                status = Some(RunStatus::InnerFailure(err.to_string()));
                break;
            }
        };
        if inner.termination == InnerTermination::Diverged {
            status = Some(RunStatus::InnerFailure(format!(
                "unbounded subproblem at outer iteration {k} (value {})",
                inner.value
            )));
            break;
        }

        let previous = std::mem::replace(&mut x, inner.x);
        let objectives = problem.objectives(&x);
        let barrier_values = barrier.evaluate(&x)?;
        let phi_value = composite.value(&x);
        let weights = if config.recover_weights {
            Some(recover_weights(problem, barrier, phi, &x, penalty, None)?)
        } else {
            None
        };
        rows.push(TraceRow {
            iteration: k,
            penalty,
            x: x.clone(),
            objectives,
            barrier_values,
            phi_value,
            inner_iterations: inner.iterations,
            inner_termination: inner.termination,
            weights,
        });

        let step = norm_inf_diff(&x, &previous);
        if step < config.outer_tolerance && penalty < config.penalty_stop {
            status = Some(RunStatus::Converged);
            break;
        }
    }

    Ok(RunTrace {
        rows,
        status: status.unwrap_or(RunStatus::OuterBudgetExhausted),
    })
}

/// Solves the small constrained least-squares problem for the weights that
/// make the active composite gradients cancel: minimize the norm of the
/// weighted gradient combination over the simplex supported on the active
/// set. `tie_tolerance` defaults to `1e-6 * (1 + |max score|)`.
pub fn recover_weights(
    problem: &Problem,
    barrier: &Barrier,
    phi: &AuxiliaryFunction,
    x: &[f64],
    penalty: f64,
    tie_tolerance: Option<f64>,
) -> Result<RecoveredWeights> {
    let offsets: Option<&[f64]> = match phi.kind() {
        AuxKind::Max => None,
        AuxKind::ShiftedMax(offsets) => Some(offsets),
        _ => {
            return Err(MbmError::Config(
                "weight recovery is defined for max-type scalarizers only".to_string(),
            ))
        }
    };
    if !is_strictly_feasible(problem, x)? {
        return Err(MbmError::Precondition(
            "weight recovery requires a strictly feasible point".to_string(),
        ));
    }
    let m = problem.objective_count();
    let f = problem.objectives(x);
    let b = barrier.evaluate(x)?;
    let scores: Vec<f64> = (0..m)
        .map(|i| f[i] + penalty * b[i] + offsets.map_or(0.0, |w| w[i]))
        .collect();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = tie_tolerance.unwrap_or_else(|| 1e-6 * (1.0 + top.abs()));
    let active: Vec<usize> = (0..m).filter(|&i| scores[i] >= top - tolerance).collect();

    let jf = problem.objective_jacobian(x);
    let jb = barrier.jacobian(x)?;
    let n = problem.decision_dim();
    let directions: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            (0..n)
                .map(|j| jf[i][j] + penalty * jb[i][j])
                .collect::<Vec<f64>>()
        })
        .collect();

    let weights_active = simplex_least_squares(&directions);
    let mut combined = vec![0.0; n];
    for (w, d) in weights_active.iter().zip(&directions) {
        for (c, &dj) in combined.iter_mut().zip(d) {
            *c += w * dj;
        }
    }
    let mut weights = vec![0.0; m];
    for (&i, &w) in active.iter().zip(&weights_active) {
        weights[i] = w;
    }
    Ok(RecoveredWeights {
        weights,
        active_set: active,
        residual: norm2(&combined),
    })
}

/// Projected-gradient minimization of |sum_i a_i d_i|^2 over the simplex.
fn simplex_least_squares(directions: &[Vec<f64>]) -> Vec<f64> {
    let k = directions.len();
    if k == 1 {
        return vec![1.0];
    }
    let gram: Vec<Vec<f64>> = directions
        .iter()
        .map(|a| directions.iter().map(|b| crate::util::dot(a, b)).collect())
        .collect();
    let lipschitz = gram
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut alpha = vec![1.0 / k as f64; k];
    for _ in 0..2000 {
        let gradient: Vec<f64> = gram
            .iter()
            .map(|row| crate::util::dot(row, &alpha))
            .collect();
        let stepped: Vec<f64> = alpha
            .iter()
            .zip(&gradient)
            .map(|(a, g)| a - g / lipschitz)
            .collect();
        let next = project_simplex(&stepped);
        let moved = norm_inf_diff(&next, &alpha);
        alpha = next;
        if moved < 1e-16 {
            break;
        }
    }
    alpha
}

/// True iff the recorded scalarized values are nonincreasing up to `slack`.
pub fn check_phi_monotone_trace(trace: &RunTrace, slack: f64) -> bool {
    trace
        .rows
        .windows(2)
        .all(|w| w[1].phi_value <= w[0].phi_value + slack)
}

/// One member of a scalarizer family, labeled by its free parameters.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub label: Vec<f64>,
    pub phi: AuxiliaryFunction,
}

/// How sweep members pick their start point.
#[derive(Clone, Debug)]
pub enum StartStrategy {
    /// Every member starts from the same point.
    Fixed(Vec<f64>),
    /// Members run in order, each starting from the previous member's final
    /// iterate (the first uses the given point). Forces sequential execution.
    Chained(Vec<f64>),
}

#[derive(Debug)]
pub struct SweepEntry {
    pub label: Vec<f64>,
    pub outcome: Result<RunTrace>,
}

/// Runs the outer loop once per family member and collects the results in
/// family order. Failed members are reported in place, never dropped.
/// Independent members may run on up to `workers` threads.
pub fn pareto_sweep(
    problem: &Problem,
    barrier: &Barrier,
    family: &[FamilyMember],
    config: &MbmConfig,
    start: &StartStrategy,
    workers: usize,
) -> Result<Vec<SweepEntry>> {
    if family.is_empty() {
        return Err(MbmError::Config("scalarizer family is empty".to_string()));
    }
    match start {
        StartStrategy::Chained(x0) => {
            let mut entries = Vec::with_capacity(family.len());
            let mut current = x0.clone();
            for member in family {
                let outcome = mbm_run(problem, barrier, &member.phi, &current, config);
                if let Ok(trace) = &outcome {
                    if let Some(x) = trace.final_x() {
                        current = x.to_vec();
                    }
                }
                entries.push(SweepEntry {
                    label: member.label.clone(),
                    outcome,
                });
            }
            Ok(entries)
        }
        StartStrategy::Fixed(x0) => {
            let workers = workers.max(1).min(family.len());
            if workers == 1 {
                return Ok(family
                    .iter()
                    .map(|member| SweepEntry {
                        label: member.label.clone(),
                        outcome: mbm_run(problem, barrier, &member.phi, x0, config),
                    })
                    .collect());
            }
            let next = AtomicUsize::new(0);
            let slots: Mutex<Vec<Option<SweepEntry>>> =
                Mutex::new((0..family.len()).map(|_| None).collect());
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let index = next.fetch_add(1, Ordering::SeqCst);
                        if index >= family.len() {
                            break;
                        }
                        let member = &family[index];
                        let outcome = mbm_run(problem, barrier, &member.phi, x0, config);
                        let entry = SweepEntry {
                            label: member.label.clone(),
                            outcome,
                        };
                        slots.lock().expect("sweep worker panicked")[index] = Some(entry);
                    });
                }
            });
            let entries: Vec<SweepEntry> = slots
                .into_inner()
                .expect("sweep worker panicked")
                .into_iter()
                .map(|slot| slot.expect("every member was processed"))
                .collect();
            Ok(entries)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{disk2d, ex51, ex52};

    fn harmonic_config(outer: usize) -> MbmConfig {
        MbmConfig {
            schedule: PenaltySchedule::Harmonic { initial: 1.0 },
            outer_iterations: outer,
            ..MbmConfig::default()
        }
    }

    #[test]
    fn schedule_values_and_validation() {
        let geometric = PenaltySchedule::Geometric {
            initial: 1.0,
            ratio: 0.5,
        };
        assert_eq!(geometric.value(0), 1.0);
        assert_eq!(geometric.value(3), 0.125);
        let harmonic = PenaltySchedule::Harmonic { initial: 1.0 };
        assert_eq!(harmonic.value(0), 1.0);
        assert_eq!(harmonic.value(99), 0.01);

        assert!(PenaltySchedule::Geometric {
            initial: -1.0,
            ratio: 0.5
        }
        .validate()
        .is_err());
        assert!(PenaltySchedule::Geometric {
            initial: 1.0,
            ratio: 1.0
        }
        .validate()
        .is_err());
        assert!(PenaltySchedule::Harmonic { initial: 0.0 }.validate().is_err());
    }

    #[test]
    fn iterates_follow_inverse_square_root_law() {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::max();
        let trace = mbm_run(&inst.problem, &barrier, &phi, &[2.0], &harmonic_config(10)).unwrap();
        assert_eq!(trace.rows.len(), 10);
        for row in &trace.rows {
            let target = (row.iteration as f64).powf(-0.5);
            assert!(
                (row.x[0] - target).abs() < 1e-4,
                "k = {}: {} vs {target}",
                row.iteration,
                row.x[0]
            );
        }
    }

    #[test]
    fn shifted_max_run_converges_to_zero() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::shifted_max(vec![0.0, 0.0]).unwrap();
        let config = MbmConfig {
            outer_iterations: 40,
            ..MbmConfig::default()
        };
        let trace = mbm_run(&inst.problem, &barrier, &phi, &[-1.0], &config).unwrap();
        assert_eq!(trace.status, RunStatus::Converged);
        assert!(trace.final_x().unwrap()[0].abs() < 1e-3);
    }

    #[test]
    fn infeasible_start_is_precondition_error() {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::max();
        assert!(matches!(
            mbm_run(&inst.problem, &barrier, &phi, &[-1.0], &harmonic_config(5)),
            Err(MbmError::Precondition(_))
        ));
    }

    #[test]
    fn strong_mode_rejects_weakly_increasing_scalarizer() {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::max();
        let config = MbmConfig {
            mode: MbmMode::Strong,
            ..harmonic_config(5)
        };
        assert!(matches!(
            mbm_run(&inst.problem, &barrier, &phi, &[2.0], &config),
            Err(MbmError::Config(_))
        ));
    }

    fn local_config(lower: f64, upper: f64) -> MbmConfig {
        MbmConfig {
            outer_iterations: 40,
            local_bounds: Some(BoxBounds::new(vec![lower], vec![upper]).unwrap()),
            ..MbmConfig::default()
        }
    }

    #[test]
    fn local_runs_select_front_points() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);

        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        let trace =
            local_mbm_run(&inst.problem, &barrier, &phi, &[0.4], &local_config(0.2, 0.8)).unwrap();
        assert!((trace.final_x().unwrap()[0] - 0.5).abs() < 1e-3);

        let phi = AuxiliaryFunction::shifted_max(vec![-2.0, 0.0]).unwrap();
        let trace =
            local_mbm_run(&inst.problem, &barrier, &phi, &[0.9], &local_config(0.7, 1.3)).unwrap();
        assert!((trace.final_x().unwrap()[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn local_run_requires_bounds() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::max();
        assert!(matches!(
            local_mbm_run(&inst.problem, &barrier, &phi, &[0.4], &MbmConfig::default()),
            Err(MbmError::Config(_))
        ));
    }

    #[test]
    fn recover_weights_single_objective() {
        let problem = Problem::new(1, 1, 1, |x: &[f64]| vec![x[0] * x[0]], |x: &[f64]| {
            vec![-x[0] - 10.0]
        })
        .with_objective_jacobian(|x: &[f64]| vec![vec![2.0 * x[0]]])
        .with_constraint_jacobian(|_x| vec![vec![-1.0]]);
        let barrier = Barrier::inverse_summed_replicated(&problem);
        let recovered = recover_weights(
            &problem,
            &barrier,
            &AuxiliaryFunction::max(),
            &[3.0],
            1e-9,
            None,
        )
        .unwrap();
        assert_eq!(recovered.weights, vec![1.0]);
        assert_eq!(recovered.active_set, vec![0]);
        // gradient of x^2 at 3 dominates the tiny barrier term
        assert!((recovered.residual - 6.0).abs() < 1e-6);
    }

    #[test]
    fn recover_weights_balanced_tie() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        let recovered =
            recover_weights(&inst.problem, &barrier, &phi, &[0.5], 1e-9, None).unwrap();
        assert_eq!(recovered.active_set, vec![0, 1]);
        assert!((recovered.weights[0] - 0.5).abs() < 0.02, "{recovered:?}");
        assert!((recovered.weights[1] - 0.5).abs() < 0.02);
        assert!(recovered.residual < 1e-6);
    }

    #[test]
    fn recover_weights_far_from_stationarity_reports_residual() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let recovered = recover_weights(
            &inst.problem,
            &barrier,
            &AuxiliaryFunction::max(),
            &[2.5],
            1e-9,
            None,
        )
        .unwrap();
        assert!(recovered.residual > 0.1);
    }

    #[test]
    fn recover_weights_rejects_smooth_scalarizers() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::sum_arctan();
        assert!(matches!(
            recover_weights(&inst.problem, &barrier, &phi, &[0.5], 1e-9, None),
            Err(MbmError::Config(_))
        ));
    }

    #[test]
    fn monotone_trace_check() {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::max();
        let mut trace =
            mbm_run(&inst.problem, &barrier, &phi, &[2.0], &harmonic_config(8)).unwrap();
        assert!(check_phi_monotone_trace(&trace, 1e-8));

        trace.rows[3].phi_value += 1.0;
        assert!(!check_phi_monotone_trace(&trace, 1e-8));

        trace.rows.truncate(1);
        assert!(check_phi_monotone_trace(&trace, 1e-8));
    }

    #[test]
    fn sweep_single_member_matches_direct_run() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        let config = MbmConfig {
            outer_iterations: 40,
            ..MbmConfig::default()
        };
        let family = vec![FamilyMember {
            label: vec![-1.0],
            phi: phi.clone(),
        }];
        let entries = pareto_sweep(
            &inst.problem,
            &barrier,
            &family,
            &config,
            &StartStrategy::Fixed(vec![0.25]),
            1,
        )
        .unwrap();
        let direct = mbm_run(&inst.problem, &barrier, &phi, &[0.25], &config).unwrap();
        let swept = entries[0].outcome.as_ref().unwrap();
        assert_eq!(swept.final_x(), direct.final_x());
        assert_eq!(swept.rows.len(), direct.rows.len());
    }

    #[test]
    fn sweep_ordering_is_stable_under_parallelism() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let config = MbmConfig {
            outer_iterations: 30,
            ..MbmConfig::default()
        };
        let family: Vec<FamilyMember> = (0..6)
            .map(|i| {
                let alpha = -0.3 * i as f64;
                FamilyMember {
                    label: vec![alpha],
                    phi: AuxiliaryFunction::shifted_max(vec![alpha, 0.0]).unwrap(),
                }
            })
            .collect();
        let sequential = pareto_sweep(
            &inst.problem,
            &barrier,
            &family,
            &config,
            &StartStrategy::Fixed(vec![0.25]),
            1,
        )
        .unwrap();
        let parallel = pareto_sweep(
            &inst.problem,
            &barrier,
            &family,
            &config,
            &StartStrategy::Fixed(vec![0.25]),
            4,
        )
        .unwrap();
        for (a, b) in sequential.iter().zip(&parallel) {
            assert_eq!(a.label, b.label);
            assert_eq!(
                a.outcome.as_ref().unwrap().final_x(),
                b.outcome.as_ref().unwrap().final_x()
            );
        }
    }

    #[test]
    fn sweep_rejects_empty_family() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        assert!(matches!(
            pareto_sweep(
                &inst.problem,
                &barrier,
                &[],
                &MbmConfig::default(),
                &StartStrategy::Fixed(vec![0.25]),
                1
            ),
            Err(MbmError::Config(_))
        ));
    }

    #[test]
    fn cold_start_still_converges() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        let config = MbmConfig {
            outer_iterations: 40,
            warm_start: false,
            ..MbmConfig::default()
        };
        let trace = mbm_run(&inst.problem, &barrier, &phi, &[-1.0], &config).unwrap();
        assert_eq!(trace.status, RunStatus::Converged);
        assert!((trace.final_x().unwrap()[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn chained_sweep_reuses_previous_finals() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let config = MbmConfig {
            outer_iterations: 30,
            ..MbmConfig::default()
        };
        let family: Vec<FamilyMember> = [-1.2, -1.0, -0.8]
            .iter()
            .map(|&alpha| FamilyMember {
                label: vec![alpha],
                phi: AuxiliaryFunction::shifted_max(vec![alpha, 0.0]).unwrap(),
            })
            .collect();
        let entries = pareto_sweep(
            &inst.problem,
            &barrier,
            &family,
            &config,
            &StartStrategy::Chained(vec![0.25]),
            4,
        )
        .unwrap();
        assert_eq!(entries.len(), 3);
        for (entry, alpha) in entries.iter().zip([-1.2, -1.0, -0.8]) {
            let trace = entry.outcome.as_ref().unwrap();
            assert!(
                (trace.final_x().unwrap()[0] - (-alpha / 2.0)).abs() < 1e-3,
                "alpha {alpha}"
            );
        }
    }

    #[test]
    fn identical_runs_produce_identical_traces() {
        let inst = disk2d();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::weighted_sum(vec![0.4, 0.6]).unwrap();
        let config = MbmConfig {
            mode: MbmMode::Strong,
            outer_iterations: 20,
            ..MbmConfig::default()
        };
        let a = mbm_run(&inst.problem, &barrier, &phi, &[0.1, -0.2], &config).unwrap();
        let b = mbm_run(&inst.problem, &barrier, &phi, &[0.1, -0.2], &config).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.x, rb.x);
            assert_eq!(ra.phi_value, rb.phi_value);
            assert_eq!(ra.inner_iterations, rb.inner_iterations);
        }
    }

    #[test]
    fn unbounded_composite_reports_inner_failure() {
        // single objective decreasing without bound, constraint never active
        let problem = Problem::new(1, 1, 1, |x: &[f64]| vec![-x[0]], |x: &[f64]| {
            vec![-x[0] - 1e9]
        });
        let barrier = Barrier::inverse_summed_replicated(&problem);
        let phi = AuxiliaryFunction::max();
        let trace = mbm_run(&problem, &barrier, &phi, &[0.0], &harmonic_config(5)).unwrap();
        assert!(matches!(trace.status, RunStatus::InnerFailure(_)));
    }
}
