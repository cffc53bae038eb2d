//! Constrained multiobjective problem definition and the built-in instance registry.
//!
//! A [`Problem`] bundles the objective map `f : R^n -> R^m`, the inequality
//! constraints `g : R^n -> R^p` defining the feasible set `{x : g(x) <= 0}`,
//! optional analytic Jacobians, and an optional strictly feasible start point.
//! Everything is immutable after construction and cheap to clone (evaluators
//! are shared behind `Arc`), so instances can be used from several solves at
//! once as long as the evaluators are reentrant.

use std::sync::Arc;

use crate::error::{MbmError, Result};
use crate::util::norm_inf;

pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// A continuous multiobjective problem `min f(x) s.t. g(x) <= 0`.
///
/// Only inequality constraints are representable; the feasible set is always
/// `D = {x : g(x) <= 0}` with strict interior `{x : g(x) < 0}`.
#[derive(Clone)]
pub struct Problem {
    n: usize,
    m: usize,
    p: usize,
    objective_fn: VectorFn,
    constraint_fn: VectorFn,
    objective_jacobian_fn: Option<MatrixFn>,
    constraint_jacobian_fn: Option<MatrixFn>,
    start: Option<Vec<f64>>,
}

impl Problem {
    /// Builds a problem from its dimensions and evaluators. Evaluators must be
    /// deterministic and total on `R^n`.
    pub fn new<F, G>(n: usize, m: usize, p: usize, objective: F, constraints: G) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Problem {
            n,
            m,
            p,
            objective_fn: Arc::new(objective),
            constraint_fn: Arc::new(constraints),
            objective_jacobian_fn: None,
            constraint_jacobian_fn: None,
            start: None,
        }
    }

    pub fn with_objective_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        self.objective_jacobian_fn = Some(Arc::new(jacobian));
        self
    }

    pub fn with_constraint_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        self.constraint_jacobian_fn = Some(Arc::new(jacobian));
        self
    }

    /// Attaches a strictly feasible start point. Fails if the point has the
    /// wrong dimension or any constraint is not strictly negative there.
    pub fn with_start(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.n {
            return Err(MbmError::DimensionMismatch {
                expected: self.n,
                got: x0.len(),
            });
        }
        let g = self.constraints(&x0);
        if g.len() != self.p {
            return Err(MbmError::DimensionMismatch {
                expected: self.p,
                got: g.len(),
            });
        }
        if !g.iter().all(|&gi| gi < 0.0) {
            return Err(MbmError::Precondition(format!(
                "start point is not strictly feasible: g = {g:?}"
            )));
        }
        let f = self.objectives(&x0);
        if f.len() != self.m {
            return Err(MbmError::DimensionMismatch {
                expected: self.m,
                got: f.len(),
            });
        }
        self.start = Some(x0);
        Ok(self)
    }

    pub fn decision_dim(&self) -> usize {
        self.n
    }

    pub fn objective_count(&self) -> usize {
        self.m
    }

    pub fn constraint_count(&self) -> usize {
        self.p
    }

    pub fn objectives(&self, x: &[f64]) -> Vec<f64> {
        (self.objective_fn)(x)
    }

    pub fn constraints(&self, x: &[f64]) -> Vec<f64> {
        (self.constraint_fn)(x)
    }

    pub fn has_objective_jacobian(&self) -> bool {
        self.objective_jacobian_fn.is_some()
    }

    pub fn has_constraint_jacobian(&self) -> bool {
        self.constraint_jacobian_fn.is_some()
    }

    /// Analytic objective Jacobian when present, otherwise central differences.
    pub fn objective_jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.objective_jacobian_fn {
            Some(j) => j(x),
            None => {
                let f = self.objective_fn.clone();
                finite_difference_jacobian(move |y| f(y), x, default_fd_step(x))
            }
        }
    }

    /// Analytic constraint Jacobian when present, otherwise central differences.
    pub fn constraint_jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.constraint_jacobian_fn {
            Some(j) => j(x),
            None => {
                let g = self.constraint_fn.clone();
                finite_difference_jacobian(move |y| g(y), x, default_fd_step(x))
            }
        }
    }

    pub fn start(&self) -> Option<&[f64]> {
        self.start.as_deref()
    }

    pub(crate) fn constraint_fn_arc(&self) -> VectorFn {
        self.constraint_fn.clone()
    }

    pub(crate) fn constraint_jacobian_arc(&self) -> Option<MatrixFn> {
        self.constraint_jacobian_fn.clone()
    }

    pub(crate) fn objective_fn_arc(&self) -> VectorFn {
        self.objective_fn.clone()
    }

    pub(crate) fn objective_jacobian_arc(&self) -> Option<MatrixFn> {
        self.objective_jacobian_fn.clone()
    }
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("p", &self.p)
            .field("start", &self.start)
            .finish()
    }
}

/// True iff every constraint is strictly negative at `x`.
pub fn is_strictly_feasible(problem: &Problem, x: &[f64]) -> Result<bool> {
    if x.len() != problem.decision_dim() {
        return Err(MbmError::DimensionMismatch {
            expected: problem.decision_dim(),
            got: x.len(),
        });
    }
    Ok(problem.constraints(x).iter().all(|&gi| gi < 0.0))
}

/// Step size for central differences: `1e-6 * max(1, |x|_inf)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-6 * norm_inf(x).max(1.0)
}

/// Central-difference Jacobian of an arbitrary vector evaluator.
///
/// Entry `(i, j)` is `(F_i(x + h e_j) - F_i(x - h e_j)) / (2h)`.
pub fn finite_difference_jacobian<F>(evaluator: F, x: &[f64], h: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = x.len();
    let rows = evaluator(x).len();
    let mut jac = vec![vec![0.0; n]; rows];
    for j in 0..n {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = evaluator(&plus);
        let fm = evaluator(&minus);
        for i in 0..rows {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// A named registry entry, bundling the problem with test-side metadata.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub name: String,
    pub problem: Problem,
    /// Human-readable description of the known optimal set, when one exists.
    pub known_solution: Option<String>,
    /// Bounds of the default verification grid for this instance. Also a
    /// reasonable sampling box for randomized tests.
    pub grid_bounds: (Vec<f64>, Vec<f64>),
}

/// Names of the built-in instances, sorted.
pub fn registry_names() -> &'static [&'static str] {
    &["disk2d", "ex51", "ex52"]
}

/// Looks up a built-in instance by name.
pub fn registry_get(name: &str) -> Result<ProblemInstance> {
    match name {
        "ex51" => Ok(ex51(9.0)),
        "ex52" => Ok(ex52()),
        "disk2d" => Ok(disk2d()),
        _ => Err(MbmError::UnknownProblem {
            name: name.to_string(),
            available: registry_names().join(", "),
        }),
    }
}

/// Scalar problem with objectives `(t, -a t)` on `t >= 0`.
///
/// Every feasible point is Pareto optimal, yet the weighted-sum baseline is
/// unbounded for all weights `alpha_1 < a / (1 + a)`. The barrier composite
/// with a max scalarizer and penalty `tau` has its minimizer at `sqrt(tau)`.
pub fn ex51(a: f64) -> ProblemInstance {
    let problem = Problem::new(
        1,
        2,
        1,
        move |x: &[f64]| vec![x[0], -a * x[0]],
        |x: &[f64]| vec![-x[0]],
    )
    .with_objective_jacobian(move |_x: &[f64]| vec![vec![1.0], vec![-a]])
    .with_constraint_jacobian(|_x: &[f64]| vec![vec![-1.0]])
    .with_start(vec![2.0])
    .expect("built-in start is strictly feasible");
    ProblemInstance {
        name: "ex51".to_string(),
        problem,
        known_solution: Some(
            "all of [0, +inf) is Pareto optimal; the barrier iterate with penalty tau sits at sqrt(tau)"
                .to_string(),
        ),
        grid_bounds: (vec![0.0], vec![10.0]),
    }
}

/// Scalar problem with objectives `(t^2 + 1, t^2 - 2t + 1)` on `t >= -2`.
///
/// The Pareto set is the interval `[0, 1]`; shifted-max scalarizers with
/// offset `(alpha, 0)` select the point `-alpha / 2` of that interval.
pub fn ex52() -> ProblemInstance {
    let problem = Problem::new(
        1,
        2,
        1,
        |x: &[f64]| {
            let t = x[0];
            vec![t * t + 1.0, t * t - 2.0 * t + 1.0]
        },
        |x: &[f64]| vec![-x[0] - 2.0],
    )
    .with_objective_jacobian(|x: &[f64]| vec![vec![2.0 * x[0]], vec![2.0 * x[0] - 2.0]])
    .with_constraint_jacobian(|_x: &[f64]| vec![vec![-1.0]])
    .with_start(vec![-1.0])
    .expect("built-in start is strictly feasible");
    ProblemInstance {
        name: "ex52".to_string(),
        problem,
        known_solution: Some("the Pareto set is [0, 1]".to_string()),
        grid_bounds: (vec![-2.0], vec![3.0]),
    }
}

/// Two-variable problem minimizing the coordinates over the unit disk.
///
/// The Pareto set is the arc `{x : |x| = 1, x <= 0}`.
pub fn disk2d() -> ProblemInstance {
    let problem = Problem::new(
        2,
        2,
        1,
        |x: &[f64]| vec![x[0], x[1]],
        |x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 1.0],
    )
    .with_objective_jacobian(|_x: &[f64]| vec![vec![1.0, 0.0], vec![0.0, 1.0]])
    .with_constraint_jacobian(|x: &[f64]| vec![vec![2.0 * x[0], 2.0 * x[1]]])
    .with_start(vec![0.0, 0.0])
    .expect("built-in start is strictly feasible");
    ProblemInstance {
        name: "disk2d".to_string(),
        problem,
        known_solution: Some("the Pareto set is the third-quadrant arc of the unit circle".to_string()),
        grid_bounds: (vec![-1.5, -1.5], vec![1.5, 1.5]),
    }
}
