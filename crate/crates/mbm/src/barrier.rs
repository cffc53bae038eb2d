//! Vector-valued interior penalties for the feasible set.
//!
//! A [`Barrier`] maps strictly feasible points to a nonnegative vector in
//! objective space, with at least one component blowing up along any interior
//! sequence on which some constraint tends to zero. Four constructions are
//! provided: inverse penalties assigned one-per-objective, the summed inverse
//! replicated across all objectives, inverse penalties grouped by an explicit
//! partition of the constraints, and a replicated log penalty shifted by a
//! caller-supplied constant.

use crate::error::{MbmError, Result};
use crate::problem::{finite_difference_jacobian, default_fd_step, MatrixFn, Problem, VectorFn};

#[derive(Clone, Debug, PartialEq)]
pub enum BarrierKind {
    /// `B_i = 1 / (-g_i)` for `i < p`, zero padding beyond. Needs `p <= m`.
    InverseAssigned,
    /// Every component equals `sum_i 1 / (-g_i)`. Valid for any `p`, `m`.
    InverseSummedReplicated,
    /// `B_j = sum_{i in group j} 1 / (-g_i)`; empty groups contribute zero.
    InverseGrouped(Vec<Vec<usize>>),
    /// Every component equals `-sum_i log(-g_i) - shift`.
    LogReplicatedShifted(f64),
}

/// An interior penalty bound to one problem's constraints.
#[derive(Clone)]
pub struct Barrier {
    kind: BarrierKind,
    n: usize,
    m: usize,
    p: usize,
    constraints: VectorFn,
    constraint_jacobian: Option<MatrixFn>,
}

impl Barrier {
    fn bind(problem: &Problem, kind: BarrierKind) -> Barrier {
        Barrier {
            kind,
            n: problem.decision_dim(),
            m: problem.objective_count(),
            p: problem.constraint_count(),
            constraints: problem.constraint_fn_arc(),
            constraint_jacobian: problem.constraint_jacobian_arc(),
        }
    }

    /// One inverse penalty per constraint, assigned to the first `p`
    /// objectives. Requires `p <= m`.
    pub fn inverse_assigned(problem: &Problem) -> Result<Barrier> {
        if problem.constraint_count() > problem.objective_count() {
            return Err(MbmError::Config(format!(
                "inverse-assigned barrier needs p <= m (got p = {}, m = {}); \
                 use the grouped or summed-replicated kinds instead",
                problem.constraint_count(),
                problem.objective_count()
            )));
        }
        Ok(Barrier::bind(problem, BarrierKind::InverseAssigned))
    }

    /// The summed inverse penalty replicated across every objective.
    pub fn inverse_summed_replicated(problem: &Problem) -> Barrier {
        Barrier::bind(problem, BarrierKind::InverseSummedReplicated)
    }

    /// Inverse penalties grouped by `groups`, a partition of the constraint
    /// indices `0..p` into `m` possibly-empty groups.
    pub fn inverse_grouped(problem: &Problem, groups: Vec<Vec<usize>>) -> Result<Barrier> {
        let (m, p) = (problem.objective_count(), problem.constraint_count());
        if groups.len() != m {
            return Err(MbmError::Config(format!(
                "grouping must have one group per objective (got {} groups for m = {m})",
                groups.len()
            )));
        }
        let mut seen = vec![false; p];
        for group in &groups {
            for &i in group {
                if i >= p {
                    return Err(MbmError::Config(format!(
                        "constraint index {i} out of range (p = {p})"
                    )));
                }
                if seen[i] {
                    return Err(MbmError::Config(format!(
                        "constraint index {i} appears in more than one group"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(MbmError::Config(format!(
                "constraint index {missing} is not covered by any group"
            )));
        }
        Ok(Barrier::bind(problem, BarrierKind::InverseGrouped(groups)))
    }

    /// Replicated log penalty, shifted down by `shift` so a well-chosen shift
    /// makes it nonnegative on the region of interest.
    pub fn log_replicated_shifted(problem: &Problem, shift: f64) -> Barrier {
        Barrier::bind(problem, BarrierKind::LogReplicatedShifted(shift))
    }

    pub fn kind(&self) -> &BarrierKind {
        &self.kind
    }

    pub fn objective_count(&self) -> usize {
        self.m
    }

    pub fn constraint_count(&self) -> usize {
        self.p
    }

    /// Evaluates the barrier at a strictly feasible point. Components may
    /// saturate to `+inf` when a constraint margin underflows; points outside
    /// the strict interior are a domain error.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(MbmError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let g = (self.constraints)(x);
        if !g.iter().all(|&gi| gi < 0.0) {
            return Err(MbmError::Domain(format!(
                "barrier evaluated outside the strict interior: g = {g:?}"
            )));
        }
        Ok(self.evaluate_from_constraints(&g))
    }

    /// Barrier values from already-computed constraint values `g < 0`.
    pub(crate) fn evaluate_from_constraints(&self, g: &[f64]) -> Vec<f64> {
        match &self.kind {
            BarrierKind::InverseAssigned => {
                let mut b = vec![0.0; self.m];
                for (i, &gi) in g.iter().enumerate() {
                    b[i] = 1.0 / (-gi);
                }
                b
            }
            BarrierKind::InverseSummedReplicated => {
                let total: f64 = g.iter().map(|&gi| 1.0 / (-gi)).sum();
                vec![total; self.m]
            }
            BarrierKind::InverseGrouped(groups) => groups
                .iter()
                .map(|group| group.iter().map(|&i| 1.0 / (-g[i])).sum())
                .collect(),
            BarrierKind::LogReplicatedShifted(shift) => {
                let total: f64 = g.iter().map(|&gi| -(-gi).ln()).sum();
                vec![total - shift; self.m]
            }
        }
    }

    /// Jacobian of the barrier, via the chain rule on the constraint Jacobian
    /// (analytic when the problem has one, central differences otherwise).
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.n {
            return Err(MbmError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let g = (self.constraints)(x);
        if !g.iter().all(|&gi| gi < 0.0) {
            return Err(MbmError::Domain(format!(
                "barrier jacobian outside the strict interior: g = {g:?}"
            )));
        }
        let jg = match &self.constraint_jacobian {
            Some(j) => j(x),
            None => {
                let g_fn = self.constraints.clone();
                finite_difference_jacobian(move |y| g_fn(y), x, default_fd_step(x))
            }
        };
        Ok(self.jacobian_from_parts(&g, &jg))
    }

    pub(crate) fn jacobian_from_parts(&self, g: &[f64], jg: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let zero_row = || vec![0.0; self.n];
        // d/dx [1/(-g_i)] = grad g_i / g_i^2,  d/dx [-log(-g_i)] = -grad g_i / g_i
        match &self.kind {
            BarrierKind::InverseAssigned => {
                let mut rows = vec![zero_row(); self.m];
                for i in 0..self.p {
                    let scale = 1.0 / (g[i] * g[i]);
                    rows[i] = jg[i].iter().map(|&d| d * scale).collect();
                }
                rows
            }
            BarrierKind::InverseSummedReplicated => {
                let mut row = zero_row();
                for i in 0..self.p {
                    let scale = 1.0 / (g[i] * g[i]);
                    for (r, &d) in row.iter_mut().zip(&jg[i]) {
                        *r += d * scale;
                    }
                }
                vec![row; self.m]
            }
            BarrierKind::InverseGrouped(groups) => groups
                .iter()
                .map(|group| {
                    let mut row = zero_row();
                    for &i in group {
                        let scale = 1.0 / (g[i] * g[i]);
                        for (r, &d) in row.iter_mut().zip(&jg[i]) {
                            *r += d * scale;
                        }
                    }
                    row
                })
                .collect(),
            BarrierKind::LogReplicatedShifted(_) => {
                let mut row = zero_row();
                for i in 0..self.p {
                    let scale = -1.0 / g[i];
                    for (r, &d) in row.iter_mut().zip(&jg[i]) {
                        *r += d * scale;
                    }
                }
                vec![row; self.m]
            }
        }
    }
}

impl std::fmt::Debug for Barrier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Barrier")
            .field("kind", &self.kind)
            .field("m", &self.m)
            .field("p", &self.p)
            .finish()
    }
}

/// Estimates a shift for the log barrier by sampling: the minimum unshifted
/// value over `samples`, minus a margin of one. The samples must be strictly
/// feasible.
pub fn estimate_log_shift(problem: &Problem, samples: &[Vec<f64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(MbmError::Input(
            "shift estimation needs at least one sample point".to_string(),
        ));
    }
    let unshifted = Barrier::log_replicated_shifted(problem, 0.0);
    let mut low = f64::INFINITY;
    for x in samples {
        let b = unshifted.evaluate(x)?;
        for v in b {
            low = low.min(v);
        }
    }
    Ok(low - 1.0)
}
