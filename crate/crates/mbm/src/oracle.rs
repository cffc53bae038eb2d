//! Verification machinery independent of the solver path.
//!
//! A lattice over a box, restricted to the feasible set, supports two checks:
//! brute-force extraction of the nondominated grid points and classification
//! of a candidate point against the grid. A weighted-sum baseline solver is
//! also here; it is the method the barrier approach is measured against.

use crate::auxiliary::AuxiliaryFunction;
use crate::barrier::Barrier;
use crate::error::{MbmError, Result};
use crate::inner::{
    minimize, CompositeObjective, InnerMethod, InnerSolverConfig, InnerTermination,
    DIVERGENCE_VALUE,
};
use crate::problem::Problem;
use crate::util::dot;

pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// Fixed barrier weight used by the weighting baseline; small enough to leave
/// minimizers away from the boundary essentially untouched.
const WEIGHTING_PENALTY: f64 = 1e-8;

/// Evaluation lattice over a closed box.
#[derive(Clone, Debug)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
    total: usize,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        Grid::with_cap(lower, upper, counts, DEFAULT_GRID_CAP)
    }

    pub fn with_cap(
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
        cap: usize,
    ) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(MbmError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len().max(counts.len()),
            });
        }
        if lower.is_empty() {
            return Err(MbmError::Input("grid needs at least one dimension".to_string()));
        }
        let mut total: usize = 1;
        for (j, ((&lo, &hi), &count)) in lower.iter().zip(&upper).zip(&counts).enumerate() {
            if count == 0 {
                return Err(MbmError::Config(format!(
                    "grid count must be positive in dimension {j}"
                )));
            }
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(MbmError::Config(format!(
                    "invalid grid bounds in dimension {j}: [{lo}, {hi}]"
                )));
            }
            if count > 1 && lo == hi {
                return Err(MbmError::Config(format!(
                    "grid bounds collapse in dimension {j} but count is {count}"
                )));
            }
            total = total
                .checked_mul(count)
                .ok_or_else(|| MbmError::Config("grid size overflows".to_string()))?;
        }
        if total > cap {
            return Err(MbmError::Config(format!(
                "grid has {total} points, exceeding the cap of {cap}"
            )));
        }
        Ok(Grid {
            lower,
            upper,
            counts,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn total_points(&self) -> usize {
        self.total
    }

    /// Lattice point by flat index, last dimension fastest.
    pub fn point(&self, index: usize) -> Vec<f64> {
        debug_assert!(index < self.total);
        let mut remainder = index;
        let mut x = vec![0.0; self.dim()];
        for j in (0..self.dim()).rev() {
            let count = self.counts[j];
            let i = remainder % count;
            remainder /= count;
            x[j] = if count == 1 {
                self.lower[j]
            } else {
                self.lower[j] + (self.upper[j] - self.lower[j]) * i as f64 / (count - 1) as f64
            };
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.total).map(|i| self.point(i))
    }
}

/// `a` dominates `b` in the Pareto sense.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Feasible grid points (boundary included) not dominated by any other
/// feasible grid point.
pub fn brute_force_nondominated(problem: &Problem, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    if grid.dim() != problem.decision_dim() {
        return Err(MbmError::DimensionMismatch {
            expected: problem.decision_dim(),
            got: grid.dim(),
        });
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for x in grid.points() {
        if problem.constraints(&x).iter().all(|&gi| gi <= 0.0) {
            values.push(problem.objectives(&x));
            points.push(x);
        }
    }
    let keep = if problem.objective_count() == 2 {
        nondominated_flags_biobjective(&values)
    } else {
        nondominated_flags_generic(&values)
    };
    Ok(points
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect())
}

/// Plane-sweep dominance filter for two objectives.
fn nondominated_flags_biobjective(values: &[Vec<f64>]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a][0]
            .partial_cmp(&values[b][0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                values[a][1]
                    .partial_cmp(&values[b][1])
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let mut keep = vec![false; values.len()];
    let mut best_second = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        // group of equal first objectives
        let mut j = i;
        while j < order.len() && values[order[j]][0] == values[order[i]][0] {
            j += 1;
        }
        let group_min = values[order[i]][1];
        for &idx in &order[i..j] {
            keep[idx] = values[idx][1] == group_min && group_min < best_second;
        }
        best_second = best_second.min(group_min);
        i = j;
    }
    keep
}

fn nondominated_flags_generic(values: &[Vec<f64>]) -> Vec<bool> {
    (0..values.len())
        .map(|i| {
            !values
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dominates(other, &values[i]))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// No feasible grid point improves one objective by more than `tol`
    /// without worsening another by more than `tol`.
    ApproxPareto,
    /// Not dominated with margin, but some grid point trades a > `tol`
    /// improvement in one objective against <= `tol` worsening elsewhere.
    ApproxWeakParetoOnly,
    /// Some feasible grid point improves every objective by more than `tol`.
    Dominated,
}

/// Classifies a feasible candidate against the feasible grid points.
pub fn classify_point(
    problem: &Problem,
    x: &[f64],
    grid: &Grid,
    tol: f64,
) -> Result<Classification> {
    if x.len() != problem.decision_dim() {
        return Err(MbmError::DimensionMismatch {
            expected: problem.decision_dim(),
            got: x.len(),
        });
    }
    if !problem.constraints(x).iter().all(|&gi| gi <= 0.0) {
        return Err(MbmError::Precondition(
            "classification requires a feasible candidate".to_string(),
        ));
    }
    let fx = problem.objectives(x);
    let mut weak_witness = false;
    for y in grid.points() {
        if !problem.constraints(&y).iter().all(|&gi| gi <= 0.0) {
            continue;
        }
        let fy = problem.objectives(&y);
        if fy.iter().zip(&fx).all(|(a, b)| *a < b - tol) {
            return Ok(Classification::Dominated);
        }
        if !weak_witness
            && fy.iter().zip(&fx).all(|(a, b)| *a <= b + tol)
            && fy.iter().zip(&fx).any(|(a, b)| *a < b - tol)
        {
            weak_witness = true;
        }
    }
    Ok(if weak_witness {
        Classification::ApproxWeakParetoOnly
    } else {
        Classification::ApproxPareto
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightingOutcome {
    Minimizer(Vec<f64>),
    Unbounded,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct WeightingResult {
    pub weights: Vec<f64>,
    pub outcome: WeightingOutcome,
}

/// Minimizes the convex combination of the objectives over the feasible set:
/// the scalarized problem gets a tiny fixed inverse barrier so every trial
/// point stays feasible, and the simplex search expands geometrically, so an
/// unbounded combination is detected by runaway iterates or values.
pub fn weighting_method_solve(
    problem: &Problem,
    weights: &[f64],
    x_start: &[f64],
    budget: usize,
) -> Result<WeightingResult> {
    weighting_method_solve_observed(problem, weights, x_start, budget, None)
}

/// [`weighting_method_solve`] with an inner-solver observer.
pub fn weighting_method_solve_observed(
    problem: &Problem,
    weights: &[f64],
    x_start: &[f64],
    budget: usize,
    observer: Option<crate::inner::Observer<'_>>,
) -> Result<WeightingResult> {
    let m = problem.objective_count();
    if weights.len() != m {
        return Err(MbmError::Input(format!(
            "expected {m} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(MbmError::Input(format!(
            "weights must be nonnegative and sum to one, got {weights:?}"
        )));
    }
    if budget == 0 {
        return Err(MbmError::Input("budget must be positive".to_string()));
    }

    let scalarized = scalarize(problem, weights);
    let barrier = Barrier::inverse_summed_replicated(&scalarized);
    let composite = CompositeObjective::new(
        scalarized,
        barrier,
        AuxiliaryFunction::max(),
        WEIGHTING_PENALTY,
        None,
    )?;
    let start_value = composite.value(x_start);
    let config = InnerSolverConfig {
        method: InnerMethod::NelderMead,
        max_iterations: budget,
        ..InnerSolverConfig::default()
    };
    let result = minimize(&composite, x_start, &config, observer)?;
    let outcome = match result.termination {
        InnerTermination::Diverged => {
            // Runaway iterates with hardly any decrease (a flat direction) are
            // inconclusive rather than evidence of unboundedness.
            let decrease = start_value - result.value;
            if result.value <= DIVERGENCE_VALUE || decrease > 1e6 * (1.0 + start_value.abs()) {
                WeightingOutcome::Unbounded
            } else {
                WeightingOutcome::BudgetExhausted
            }
        }
        InnerTermination::MaxIterations => WeightingOutcome::BudgetExhausted,
        InnerTermination::StepTolerance | InnerTermination::ValueTolerance => {
            WeightingOutcome::Minimizer(result.x)
        }
    };
    Ok(WeightingResult {
        weights: weights.to_vec(),
        outcome,
    })
}

/// Single-objective view of the problem under fixed weights.
fn scalarize(problem: &Problem, weights: &[f64]) -> Problem {
    let w = weights.to_vec();
    let f = problem.objective_fn_arc();
    let g = problem.constraint_fn_arc();
    let mut scalarized = Problem::new(
        problem.decision_dim(),
        1,
        problem.constraint_count(),
        move |x: &[f64]| vec![dot(&f(x), &w)],
        move |x: &[f64]| g(x),
    );
    if let Some(jf) = problem.objective_jacobian_arc() {
        let w = weights.to_vec();
        let n = problem.decision_dim();
        scalarized = scalarized.with_objective_jacobian(move |x: &[f64]| {
            let rows = jf(x);
            let combined: Vec<f64> = (0..n)
                .map(|j| rows.iter().zip(&w).map(|(row, wi)| wi * row[j]).sum())
                .collect();
            vec![combined]
        });
    }
    if let Some(jg) = problem.constraint_jacobian_arc() {
        scalarized = scalarized.with_constraint_jacobian(move |x: &[f64]| jg(x));
    }
    scalarized
}

/// Fraction of a uniform weight grid on `[0, 1]` whose scalarized problem is
/// unbounded. Defined for biobjective problems.
pub fn weighting_failure_fraction(
    problem: &Problem,
    weight_grid: usize,
    x_start: &[f64],
    budget: usize,
) -> Result<f64> {
    if problem.objective_count() != 2 {
        return Err(MbmError::Capability(
            "the weighting sweep is defined for biobjective problems".to_string(),
        ));
    }
    if weight_grid < 2 {
        return Err(MbmError::Input("weight grid needs at least two points".to_string()));
    }
    let mut unbounded = 0;
    for i in 0..weight_grid {
        let w1 = i as f64 / (weight_grid - 1) as f64;
        let result = weighting_method_solve(problem, &[w1, 1.0 - w1], x_start, budget)?;
        if result.outcome == WeightingOutcome::Unbounded {
            unbounded += 1;
        }
    }
    Ok(unbounded as f64 / weight_grid as f64)
}
