//! Scalar subproblem engine.
//!
//! Minimizes `x -> phi(f(x) + tau * B(x))` over the strict interior of the
//! feasible set, optionally intersected with the interior of an axis-aligned
//! box. Every point the solver commits to is strictly feasible: the gradient
//! method shrinks steps with a fraction-to-boundary rule before evaluating
//! the objective, and the simplex method sees `+inf` at infeasible probes.

use crate::auxiliary::AuxiliaryFunction;
use crate::barrier::Barrier;
use crate::error::{MbmError, Result};
use crate::problem::{is_strictly_feasible, Problem};
use crate::util::{dot, norm_inf, norm_inf_diff, step_along};

/// Armijo sufficient-decrease parameter.
const ARMIJO: f64 = 1e-4;
/// Composite values below this are treated as divergence to -inf.
pub const DIVERGENCE_VALUE: f64 = -1e12;
/// Iterate infinity-norms above this are treated as divergence.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// Closed axis-aligned box with nonempty interior.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(MbmError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(MbmError::Config(format!(
                    "box bounds must be finite (coordinate {j}: [{lo}, {hi}])"
                )));
            }
            if !(lo < hi) {
                return Err(MbmError::Config(format!(
                    "box has empty interior in coordinate {j}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(BoxBounds { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn strictly_inside(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| lo < xi && xi < hi)
    }

    /// Margins of the box faces as constraint values (negative inside).
    fn face_margins(&self, x: &[f64]) -> Vec<f64> {
        let mut margins = Vec::with_capacity(2 * self.dim());
        for (&xi, (&lo, &hi)) in x.iter().zip(self.lower.iter().zip(&self.upper)) {
            margins.push(lo - xi);
            margins.push(xi - hi);
        }
        margins
    }
}

/// The penalized scalar objective `phi(f(x) + tau * B(x))` with an optional
/// box restriction.
#[derive(Clone)]
pub struct CompositeObjective {
    problem: Problem,
    barrier: Barrier,
    phi: AuxiliaryFunction,
    penalty: f64,
    bounds: Option<BoxBounds>,
}

impl CompositeObjective {
    pub fn new(
        problem: Problem,
        barrier: Barrier,
        phi: AuxiliaryFunction,
        penalty: f64,
        bounds: Option<BoxBounds>,
    ) -> Result<Self> {
        if !(penalty > 0.0) {
            return Err(MbmError::Config(format!(
                "penalty must be positive, got {penalty}"
            )));
        }
        if barrier.objective_count() != problem.objective_count() {
            return Err(MbmError::DimensionMismatch {
                expected: problem.objective_count(),
                got: barrier.objective_count(),
            });
        }
        if let Some(d) = phi.expected_dim() {
            if d != problem.objective_count() {
                return Err(MbmError::DimensionMismatch {
                    expected: problem.objective_count(),
                    got: d,
                });
            }
        }
        if let Some(b) = &bounds {
            if b.dim() != problem.decision_dim() {
                return Err(MbmError::DimensionMismatch {
                    expected: problem.decision_dim(),
                    got: b.dim(),
                });
            }
        }
        Ok(CompositeObjective {
            problem,
            barrier,
            phi,
            penalty,
            bounds,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn barrier(&self) -> &Barrier {
        &self.barrier
    }

    pub fn phi(&self) -> &AuxiliaryFunction {
        &self.phi
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn bounds(&self) -> Option<&BoxBounds> {
        self.bounds.as_ref()
    }

    /// Composite value, with `+inf` standing in for points outside the strict
    /// interior (of the feasible set or of the box).
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.problem.decision_dim());
        if let Some(b) = &self.bounds {
            if !b.strictly_inside(x) {
                return f64::INFINITY;
            }
        }
        let g = self.problem.constraints(x);
        if !g.iter().all(|&gi| gi < 0.0) {
            return f64::INFINITY;
        }
        let b = self.barrier.evaluate_from_constraints(&g);
        let f = self.problem.objectives(x);
        let u: Vec<f64> = f
            .iter()
            .zip(&b)
            .map(|(fi, bi)| fi + self.penalty * bi)
            .collect();
        if u.iter().any(|v| v.is_nan()) {
            return f64::INFINITY;
        }
        let value = self
            .phi
            .evaluate(&u)
            .expect("dimensions validated at construction");
        if value.is_nan() {
            f64::INFINITY
        } else {
            value
        }
    }

    /// Gradient of the composite by the chain rule,
    /// `grad phi(u)^T (J_f + tau * J_B)` with `u = f + tau * B`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.problem.constraints(x);
        if g.iter().any(|&gi| gi > -1e-12) {
            return Err(MbmError::Domain(format!(
                "gradient requested too close to the boundary: g = {g:?}"
            )));
        }
        if let Some(b) = &self.bounds {
            if !b.strictly_inside(x) {
                return Err(MbmError::Domain(
                    "gradient requested outside the box interior".to_string(),
                ));
            }
        }
        let f = self.problem.objectives(x);
        let b = self.barrier.evaluate_from_constraints(&g);
        let u: Vec<f64> = f
            .iter()
            .zip(&b)
            .map(|(fi, bi)| fi + self.penalty * bi)
            .collect();
        let phi_grad = self.phi.gradient(&u)?;
        let jf = self.problem.objective_jacobian(x);
        let jb = self.barrier.jacobian(x)?;
        let n = self.problem.decision_dim();
        let mut grad = vec![0.0; n];
        for (i, &wi) in phi_grad.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            for j in 0..n {
                grad[j] += wi * (jf[i][j] + self.penalty * jb[i][j]);
            }
        }
        Ok(grad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMethod {
    GradientBacktracking,
    NelderMead,
}

#[derive(Clone, Debug)]
pub struct InnerSolverConfig {
    pub method: InnerMethod,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub value_tolerance: f64,
    /// Multiplicative backtracking factor, in (0, 1).
    pub shrink: f64,
    /// Fraction-to-boundary safeguard factor, in (0, 1): trial points may keep
    /// at most this fraction of the current constraint value.
    pub boundary_fraction: f64,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        InnerSolverConfig {
            method: InnerMethod::NelderMead,
            max_iterations: 5000,
            step_tolerance: 1e-10,
            value_tolerance: 1e-12,
            shrink: 0.5,
            boundary_fraction: 0.99,
        }
    }
}

impl InnerSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(MbmError::Config("max_iterations must be positive".to_string()));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(MbmError::Config("step_tolerance must be positive".to_string()));
        }
        if !(self.value_tolerance > 0.0) {
            return Err(MbmError::Config("value_tolerance must be positive".to_string()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(MbmError::Config("shrink factor must lie in (0, 1)".to_string()));
        }
        if !(self.boundary_fraction > 0.0 && self.boundary_fraction < 1.0) {
            return Err(MbmError::Config(
                "boundary_fraction must lie in (0, 1)".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerTermination {
    StepTolerance,
    ValueTolerance,
    MaxIterations,
    /// The value fell below [`DIVERGENCE_VALUE`] or the iterate norm grew
    /// beyond [`DIVERGENCE_NORM`]; the composite very likely has no minimizer.
    Diverged,
}

#[derive(Clone, Debug)]
pub struct InnerResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: InnerTermination,
}

/// Callback receiving `(iteration, x, value)` whenever the incumbent improves.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &[f64], f64);

/// Minimizes the composite from a strictly feasible start.
///
/// The returned point is strictly feasible and its value never exceeds the
/// start value. Termination: step shorter than `step_tolerance`, decrease
/// smaller than `value_tolerance`, iteration budget, or divergence.
pub fn minimize(
    obj: &CompositeObjective,
    x_start: &[f64],
    config: &InnerSolverConfig,
    observer: Option<Observer<'_>>,
) -> Result<InnerResult> {
    config.validate()?;
    let n = obj.problem().decision_dim();
    if x_start.len() != n {
        return Err(MbmError::DimensionMismatch {
            expected: n,
            got: x_start.len(),
        });
    }
    if !is_strictly_feasible(obj.problem(), x_start)? {
        return Err(MbmError::Precondition(
            "inner solve started at a point that is not strictly feasible".to_string(),
        ));
    }
    if let Some(b) = obj.bounds() {
        if !b.strictly_inside(x_start) {
            return Err(MbmError::Precondition(
                "inner solve started outside the box interior".to_string(),
            ));
        }
    }
    let start_value = obj.value(x_start);
    if !start_value.is_finite() {
        return Err(MbmError::Precondition(format!(
            "composite objective is not finite at the start point (value {start_value})"
        )));
    }
    match config.method {
        InnerMethod::GradientBacktracking => {
            gradient_backtracking(obj, x_start, start_value, config, observer)
        }
        InnerMethod::NelderMead => nelder_mead(obj, x_start, start_value, config, observer),
    }
}

fn notify(observer: &mut Option<Observer<'_>>, iteration: usize, x: &[f64], value: f64) {
    if let Some(obs) = observer {
        obs(iteration, x, value);
    }
}

fn diverged(x: &[f64], value: f64) -> bool {
    value <= DIVERGENCE_VALUE || norm_inf(x) >= DIVERGENCE_NORM
}

/// Constraint-style margins at `x`: the problem constraints plus box faces.
fn margins(obj: &CompositeObjective, x: &[f64]) -> Vec<f64> {
    let mut g = obj.problem().constraints(x);
    if let Some(b) = obj.bounds() {
        g.extend(b.face_margins(x));
    }
    g
}

fn gradient_backtracking(
    obj: &CompositeObjective,
    x_start: &[f64],
    start_value: f64,
    config: &InnerSolverConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<InnerResult> {
    let mut x = x_start.to_vec();
    let mut value = start_value;
    notify(&mut observer, 0, &x, value);

    for iteration in 1..=config.max_iterations {
        let grad = obj.gradient(&x)?;
        let grad_norm_sq = dot(&grad, &grad);
        if !grad_norm_sq.is_finite() {
            return Err(MbmError::Domain(
                "non-finite composite gradient".to_string(),
            ));
        }
        if grad_norm_sq == 0.0 {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::StepTolerance,
            });
        }
        let direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let current_margins = margins(obj, &x);
        let mut step = 1.0;

        // Fraction-to-boundary: only the constraints are evaluated here, so
        // the objective and barrier never see an infeasible trial.
        let mut guarded = false;
        for _ in 0..600 {
            let trial = step_along(&x, step, &direction);
            let trial_margins = margins(obj, &trial);
            if trial_margins
                .iter()
                .zip(&current_margins)
                .all(|(&t, &c)| t <= config.boundary_fraction * c)
            {
                guarded = true;
                break;
            }
            step *= config.shrink;
        }
        if !guarded {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::StepTolerance,
            });
        }

        // Armijo backtracking on the safeguarded step.
        let slope = -grad_norm_sq;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        loop {
            let trial = step_along(&x, step, &direction);
            let trial_value = obj.value(&trial);
            if trial_value <= value + ARMIJO * step * slope {
                accepted = Some((trial, trial_value));
                break;
            }
            step *= config.shrink;
            if step * norm_inf(&grad) < f64::MIN_POSITIVE.max(1e-3 * config.step_tolerance) {
                break;
            }
        }
        let Some((trial, trial_value)) = accepted else {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::StepTolerance,
            });
        };

        let step_norm = norm_inf_diff(&trial, &x);
        let decrease = value - trial_value;
        x = trial;
        value = trial_value;
        notify(&mut observer, iteration, &x, value);

        if diverged(&x, value) {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::Diverged,
            });
        }
        if step_norm < config.step_tolerance {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::StepTolerance,
            });
        }
        if decrease < config.value_tolerance {
            return Ok(InnerResult {
                x,
                value,
                iterations: iteration,
                termination: InnerTermination::ValueTolerance,
            });
        }
    }
    Ok(InnerResult {
        x,
        value,
        iterations: config.max_iterations,
        termination: InnerTermination::MaxIterations,
    })
}

/// Standard simplex method with reflection 1, expansion 2, contraction 0.5
/// and shrink 0.5. The initial simplex is deterministic in the start point;
/// infeasible probes receive `+inf` and are never adopted as the incumbent.
fn nelder_mead(
    obj: &CompositeObjective,
    x_start: &[f64],
    start_value: f64,
    config: &InnerSolverConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<InnerResult> {
    let n = x_start.len();
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    vertices.push((x_start.to_vec(), start_value));
    for j in 0..n {
        let base = 0.05 * x_start[j].abs().max(1.0);
        let mut vertex = None;
        'outer: for sign in [1.0, -1.0] {
            let mut offset = base * sign;
            for _ in 0..50 {
                let mut candidate = x_start.to_vec();
                candidate[j] += offset;
                let v = obj.value(&candidate);
                if v.is_finite() {
                    vertex = Some((candidate, v));
                    break 'outer;
                }
                offset *= 0.5;
            }
        }
        vertices.push(vertex.unwrap_or_else(|| {
            let mut candidate = x_start.to_vec();
            candidate[j] += base;
            let v = obj.value(&candidate);
            (candidate, v)
        }));
    }

    let mut best = vertices
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .cloned()
        .expect("simplex is nonempty");
    notify(&mut observer, 0, &best.0, best.1);

    let mut track_best =
        |vertices: &[(Vec<f64>, f64)], best: &mut (Vec<f64>, f64), iteration: usize| -> bool {
            let candidate = vertices
                .iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .expect("simplex is nonempty");
            if candidate.1 < best.1 {
                *best = candidate.clone();
                if let Some(obs) = observer.as_mut() {
                    obs(iteration, &best.0, best.1);
                }
            }
            diverged(&best.0, best.1)
        };

    for iteration in 1..=config.max_iterations {
        vertices.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        let diameter = vertices[1..]
            .iter()
            .map(|(v, _)| norm_inf_diff(v, &vertices[0].0))
            .fold(0.0, f64::max);
        if diameter < config.step_tolerance {
            return Ok(InnerResult {
                x: best.0,
                value: best.1,
                iterations: iteration,
                termination: InnerTermination::StepTolerance,
            });
        }
        let spread = vertices[n].1 - vertices[0].1;
        if spread.is_finite() && spread < config.value_tolerance {
            return Ok(InnerResult {
                x: best.0,
                value: best.1,
                iterations: iteration,
                termination: InnerTermination::ValueTolerance,
            });
        }

        let mut centroid = vec![0.0; n];
        for (v, _) in &vertices[..n] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let worst = vertices[n].clone();

        let reflect = step_along(&centroid, 1.0, &sub(&centroid, &worst.0));
        let f_reflect = obj.value(&reflect);

        let mut shrink_needed = false;
        if f_reflect < vertices[0].1 {
            let expand = step_along(&centroid, 2.0, &sub(&centroid, &worst.0));
            let f_expand = obj.value(&expand);
            if f_expand < f_reflect {
                vertices[n] = (expand, f_expand);
            } else {
                vertices[n] = (reflect, f_reflect);
            }
        } else if f_reflect < vertices[n - 1].1 {
            vertices[n] = (reflect, f_reflect);
        } else if f_reflect < worst.1 {
            let outside = step_along(&centroid, 0.5, &sub(&centroid, &worst.0));
            let f_outside = obj.value(&outside);
            if f_outside <= f_reflect {
                vertices[n] = (outside, f_outside);
            } else {
                shrink_needed = true;
            }
        } else {
            let inside = step_along(&centroid, -0.5, &sub(&centroid, &worst.0));
            let f_inside = obj.value(&inside);
            if f_inside < worst.1 {
                vertices[n] = (inside, f_inside);
            } else {
                shrink_needed = true;
            }
        }

        if shrink_needed {
            let anchor = vertices[0].0.clone();
            for vertex in vertices[1..].iter_mut() {
                let moved: Vec<f64> = anchor
                    .iter()
                    .zip(&vertex.0)
                    .map(|(&a, &v)| a + 0.5 * (v - a))
                    .collect();
                let value = obj.value(&moved);
                *vertex = (moved, value);
            }
        }

        if track_best(&vertices, &mut best, iteration) {
            return Ok(InnerResult {
                x: best.0,
                value: best.1,
                iterations: iteration,
                termination: InnerTermination::Diverged,
            });
        }
    }
    Ok(InnerResult {
        x: best.0,
        value: best.1,
        iterations: config.max_iterations,
        termination: InnerTermination::MaxIterations,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{disk2d, ex51, ex52};

    fn ex51_composite(penalty: f64) -> CompositeObjective {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        CompositeObjective::new(
            inst.problem,
            barrier,
            AuxiliaryFunction::max(),
            penalty,
            None,
        )
        .unwrap()
    }

    #[test]
    fn composite_value_examples() {
        let obj = ex51_composite(0.25);
        assert!((obj.value(&[0.5]) - 1.0).abs() < 1e-12);
        assert_eq!(obj.value(&[-1.0]), f64::INFINITY);

        let inst = ex52();
        let barrier = Barrier::log_replicated_shifted(&inst.problem, 0.0);
        let phi = AuxiliaryFunction::shifted_max(vec![0.0, 0.0]).unwrap();
        let obj = CompositeObjective::new(inst.problem, barrier, phi, 1.0, None).unwrap();
        assert!((obj.value(&[-1.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn composite_value_respects_box_interior() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let obj = CompositeObjective::new(
            inst.problem,
            barrier,
            AuxiliaryFunction::max(),
            1.0,
            Some(BoxBounds::new(vec![0.2], vec![0.8]).unwrap()),
        )
        .unwrap();
        assert!(obj.value(&[0.5]).is_finite());
        assert_eq!(obj.value(&[0.2]), f64::INFINITY);
        assert_eq!(obj.value(&[1.0]), f64::INFINITY);
    }

    #[test]
    fn composite_gradient_stationary_at_known_minimizer() {
        let obj = ex51_composite(0.25);
        // d/dt [t + 1/(4t)] vanishes at t = 0.5
        let g = obj.gradient(&[0.5]).unwrap();
        assert!(g[0].abs() < 1e-12, "{g:?}");
    }

    #[test]
    fn weighted_sum_gradient_selects_single_row() {
        let inst = ex51(9.0);
        let barrier = Barrier::inverse_assigned(&inst.problem).unwrap();
        // weight fully on the first objective, tiny weight elsewhere not allowed;
        // compare against the first row of the combined jacobian directly
        let phi = AuxiliaryFunction::weighted_sum(vec![1.0, 1e-300]).unwrap();
        let obj = CompositeObjective::new(inst.problem, barrier, phi, 0.5, None).unwrap();
        let g = obj.gradient(&[2.0]).unwrap();
        // d/dt [t + 0.5 / t] = 1 - 0.5 / t^2 at t = 2
        assert!((g[0] - (1.0 - 0.5 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn composite_gradient_boundary_proximity_error() {
        let obj = ex51_composite(0.25);
        assert!(matches!(
            obj.gradient(&[1e-13]),
            Err(MbmError::Domain(_))
        ));
    }

    #[test]
    fn composite_gradient_matches_finite_differences_on_disk() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let inst = disk2d();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::sum_arctan();
        let obj = CompositeObjective::new(inst.problem, barrier, phi, 0.1, None).unwrap();
        let mut checked = 0;
        while checked < 20 {
            let x = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            if x[0] * x[0] + x[1] * x[1] - 1.0 > -0.1 {
                continue;
            }
            checked += 1;
            let grad = obj.gradient(&x).unwrap();
            for j in 0..2 {
                let h = 1e-6;
                let mut plus = x;
                let mut minus = x;
                plus[j] += h;
                minus[j] -= h;
                let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
                assert!(
                    (grad[j] - fd).abs() <= 1e-5 * grad[j].abs().max(fd.abs()).max(1.0),
                    "{} vs {fd}",
                    grad[j]
                );
            }
        }
    }

    fn both_methods() -> [InnerSolverConfig; 2] {
        [
            InnerSolverConfig {
                method: InnerMethod::GradientBacktracking,
                ..InnerSolverConfig::default()
            },
            InnerSolverConfig::default(),
        ]
    }

    #[test]
    fn minimize_finds_known_minimizers() {
        for config in both_methods() {
            let obj = ex51_composite(0.25);
            let result = minimize(&obj, &[2.0], &config, None).unwrap();
            assert!(
                (result.x[0] - 0.5).abs() < 1e-4,
                "{:?}: {}",
                config.method,
                result.x[0]
            );

            let obj = ex51_composite(0.01);
            let result = minimize(&obj, &[2.0], &config, None).unwrap();
            assert!((result.x[0] - 0.1).abs() < 1e-4, "{:?}", config.method);
        }
    }

    #[test]
    fn minimize_shifted_max_crossing() {
        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        let obj = CompositeObjective::new(inst.problem, barrier, phi, 1e-6, None).unwrap();
        let result = minimize(&obj, &[-1.0], &InnerSolverConfig::default(), None).unwrap();
        assert!((result.x[0] - 0.5).abs() < 1e-3, "{}", result.x[0]);
    }

    #[test]
    fn minimize_matches_closed_form_within_step_tolerance_scale() {
        let config = InnerSolverConfig {
            step_tolerance: 1e-6,
            value_tolerance: 1e-14,
            ..InnerSolverConfig::default()
        };
        for k in [1.0f64, 4.0, 25.0, 100.0] {
            let obj = ex51_composite(1.0 / k);
            let result = minimize(&obj, &[2.0], &config, None).unwrap();
            let target = k.powf(-0.5);
            assert!(
                (result.x[0] - target).abs() < 10.0 * config.step_tolerance,
                "k = {k}: {} vs {target}",
                result.x[0]
            );
        }
    }

    #[test]
    fn minimize_rejects_bad_starts() {
        let obj = ex51_composite(0.25);
        assert!(matches!(
            minimize(&obj, &[-1.0], &InnerSolverConfig::default(), None),
            Err(MbmError::Precondition(_))
        ));

        let inst = ex52();
        let barrier = Barrier::inverse_summed_replicated(&inst.problem);
        let obj = CompositeObjective::new(
            inst.problem,
            barrier,
            AuxiliaryFunction::max(),
            1.0,
            Some(BoxBounds::new(vec![0.2], vec![0.8]).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            minimize(&obj, &[1.5], &InnerSolverConfig::default(), None),
            Err(MbmError::Precondition(_))
        ));
    }

    #[test]
    fn accepted_points_stay_feasible_and_values_descend() {
        for config in both_methods() {
            let inst = disk2d();
            let problem = inst.problem.clone();
            let barrier = Barrier::inverse_summed_replicated(&inst.problem);
            let phi = AuxiliaryFunction::weighted_sum(vec![0.4, 0.6]).unwrap();
            let obj = CompositeObjective::new(inst.problem, barrier, phi, 0.01, None).unwrap();
            let mut accepted: Vec<(Vec<f64>, f64)> = Vec::new();
            let mut observer = |_k: usize, x: &[f64], v: f64| accepted.push((x.to_vec(), v));
            minimize(&obj, &[0.3, -0.2], &config, Some(&mut observer)).unwrap();
            assert!(!accepted.is_empty());
            for window in accepted.windows(2) {
                assert!(window[1].1 <= window[0].1, "{:?}", config.method);
            }
            for (x, _) in &accepted {
                assert!(
                    problem.constraints(x).iter().all(|&gi| gi < 0.0),
                    "{:?}: accepted infeasible point {x:?}",
                    config.method
                );
            }
        }
    }

    #[test]
    fn gradient_method_never_evaluates_objective_outside_interior() {
        use std::sync::atomic::{AtomicBool, Ordering};
        use std::sync::Arc;
        let violated = Arc::new(AtomicBool::new(false));
        let flag = violated.clone();
        // objective wrapper checks its own argument against the constraint
        let problem = Problem::new(
            1,
            2,
            1,
            move |x: &[f64]| {
                if -x[0] >= 0.0 {
                    flag.store(true, Ordering::SeqCst);
                }
                vec![x[0], -9.0 * x[0]]
            },
            |x: &[f64]| vec![-x[0]],
        )
        .with_objective_jacobian(|_x| vec![vec![1.0], vec![-9.0]])
        .with_constraint_jacobian(|_x| vec![vec![-1.0]]);
        let barrier = Barrier::inverse_summed_replicated(&problem);
        let obj = CompositeObjective::new(
            problem,
            barrier,
            AuxiliaryFunction::max(),
            0.25,
            None,
        )
        .unwrap();
        let config = InnerSolverConfig {
            method: InnerMethod::GradientBacktracking,
            ..InnerSolverConfig::default()
        };
        minimize(&obj, &[2.0], &config, None).unwrap();
        assert!(!violated.load(std::sync::atomic::Ordering::SeqCst));
    }

    #[test]
    fn nelder_mead_diverges_on_unbounded_composite() {
        // decreasing objective with a vacuous constraint: walks off to +inf
        let problem = Problem::new(
            1,
            1,
            1,
            |x: &[f64]| vec![-x[0]],
            |x: &[f64]| vec![-x[0] - 1e9],
        );
        let barrier = Barrier::inverse_summed_replicated(&problem);
        let obj =
            CompositeObjective::new(problem, barrier, AuxiliaryFunction::max(), 1e-8, None)
                .unwrap();
        let result = minimize(&obj, &[0.0], &InnerSolverConfig::default(), None).unwrap();
        assert_eq!(result.termination, InnerTermination::Diverged);
    }

    #[test]
    fn config_validation() {
        let bad = InnerSolverConfig {
            shrink: 1.5,
            ..InnerSolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = InnerSolverConfig {
            step_tolerance: 0.0,
            ..InnerSolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn degenerate_box_is_config_error() {
        assert!(matches!(
            BoxBounds::new(vec![0.5], vec![0.5]),
            Err(MbmError::Config(_))
        ));
        assert!(matches!(
            BoxBounds::new(vec![1.0], vec![0.0]),
            Err(MbmError::Config(_))
        ));
        assert!(BoxBounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
    }
}
