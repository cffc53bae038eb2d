//! Monotone scalarizing functions and a randomized contract verifier.
//!
//! The solver composes one of these maps with the penalized objective vector.
//! Weakly increasing maps (strictly larger in every coordinate implies a
//! strictly larger value) steer the method to weak Pareto optima; strongly
//! increasing maps (larger-or-equal with one strict coordinate suffices)
//! steer it to Pareto optima.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MbmError, Result};
use crate::util::dot;

/// Absolute tolerance below which two leading components count as tied when
/// taking the gradient of a max-type scalarizer.
pub const MAX_TIE_TOLERANCE: f64 = 1e-12;

/// Default sharpness for the log-sum-exp surrogate.
pub const DEFAULT_LOG_SUM_EXP_SHARPNESS: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub enum AuxKind {
    /// `max_i u_i`
    Max,
    /// `max_i (u_i + offsets_i)`
    ShiftedMax(Vec<f64>),
    /// `sum_i weights_i * u_i`, all weights strictly positive
    WeightedSum(Vec<f64>),
    /// `sum_i arctan(u_i)`, bounded
    SumArctan,
    /// `log(sum_i exp(sharpness * u_i)) / sharpness`, a smooth max surrogate
    LogSumExp(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    WIncreasing,
    SIncreasing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryFunction {
    kind: AuxKind,
}

impl AuxiliaryFunction {
    pub fn max() -> Self {
        AuxiliaryFunction { kind: AuxKind::Max }
    }

    pub fn shifted_max(offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(MbmError::Input("offsets must be nonempty".to_string()));
        }
        Ok(AuxiliaryFunction {
            kind: AuxKind::ShiftedMax(offsets),
        })
    }

    pub fn weighted_sum(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(MbmError::Input("weights must be nonempty".to_string()));
        }
        if !weights.iter().all(|&w| w > 0.0) {
            return Err(MbmError::Input(format!(
                "weighted-sum scalarizer needs strictly positive weights, got {weights:?}"
            )));
        }
        Ok(AuxiliaryFunction {
            kind: AuxKind::WeightedSum(weights),
        })
    }

    pub fn sum_arctan() -> Self {
        AuxiliaryFunction {
            kind: AuxKind::SumArctan,
        }
    }

    pub fn log_sum_exp(sharpness: f64) -> Result<Self> {
        if !(sharpness > 0.0) {
            return Err(MbmError::Input(format!(
                "log-sum-exp sharpness must be positive, got {sharpness}"
            )));
        }
        Ok(AuxiliaryFunction {
            kind: AuxKind::LogSumExp(sharpness),
        })
    }

    pub fn kind(&self) -> &AuxKind {
        &self.kind
    }

    /// The monotonicity class guaranteed by construction.
    pub fn monotonicity(&self) -> Monotonicity {
        match self.kind {
            AuxKind::Max | AuxKind::ShiftedMax(_) => Monotonicity::WIncreasing,
            AuxKind::WeightedSum(_) | AuxKind::SumArctan | AuxKind::LogSumExp(_) => {
                Monotonicity::SIncreasing
            }
        }
    }

    /// Whether `u_i <= phi(u)` holds for every `u` and coordinate.
    pub fn dominates_components(&self) -> bool {
        match &self.kind {
            AuxKind::Max | AuxKind::LogSumExp(_) => true,
            AuxKind::ShiftedMax(offsets) => offsets.iter().all(|&w| w >= 0.0),
            AuxKind::WeightedSum(_) | AuxKind::SumArctan => false,
        }
    }

    /// Differentiable everywhere (the max kinds only have gradients at points
    /// with a unique leading component).
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            AuxKind::WeightedSum(_) | AuxKind::SumArctan | AuxKind::LogSumExp(_)
        )
    }

    /// Dimension pinned by the parameters, when any.
    pub fn expected_dim(&self) -> Option<usize> {
        match &self.kind {
            AuxKind::ShiftedMax(offsets) => Some(offsets.len()),
            AuxKind::WeightedSum(weights) => Some(weights.len()),
            _ => None,
        }
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.is_empty() {
            return Err(MbmError::Input("empty argument vector".to_string()));
        }
        if let Some(d) = self.expected_dim() {
            if u.len() != d {
                return Err(MbmError::DimensionMismatch {
                    expected: d,
                    got: u.len(),
                });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        Ok(match &self.kind {
            AuxKind::Max => u.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            AuxKind::ShiftedMax(offsets) => u
                .iter()
                .zip(offsets)
                .map(|(ui, wi)| ui + wi)
                .fold(f64::NEG_INFINITY, f64::max),
            AuxKind::WeightedSum(weights) => dot(u, weights),
            AuxKind::SumArctan => u.iter().map(|ui| ui.atan()).sum(),
            AuxKind::LogSumExp(sharpness) => log_sum_exp(u, *sharpness),
        })
    }

    /// Gradient at `u`. For the max kinds this is the indicator of the unique
    /// leading component; ties within [`MAX_TIE_TOLERANCE`] are an error the
    /// caller must handle.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        match &self.kind {
            AuxKind::Max => unique_active_gradient(u, None),
            AuxKind::ShiftedMax(offsets) => unique_active_gradient(u, Some(offsets)),
            AuxKind::WeightedSum(weights) => Ok(weights.clone()),
            AuxKind::SumArctan => Ok(u.iter().map(|ui| 1.0 / (1.0 + ui * ui)).collect()),
            AuxKind::LogSumExp(sharpness) => {
                let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = u.iter().map(|ui| ((ui - max) * sharpness).exp()).collect();
                let total: f64 = exps.iter().sum();
                Ok(exps.into_iter().map(|e| e / total).collect())
            }
        }
    }
}

fn log_sum_exp(u: &[f64], sharpness: f64) -> f64 {
    let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = u.iter().map(|ui| ((ui - max) * sharpness).exp()).sum();
    max + sum.ln() / sharpness
}

fn unique_active_gradient(u: &[f64], offsets: Option<&[f64]>) -> Result<Vec<f64>> {
    let scored = |i: usize| u[i] + offsets.map_or(0.0, |w| w[i]);
    let mut leader = 0;
    for i in 1..u.len() {
        if scored(i) > scored(leader) {
            leader = i;
        }
    }
    for i in 0..u.len() {
        if i != leader && scored(leader) - scored(i) <= MAX_TIE_TOLERANCE {
            return Err(MbmError::TiedMax {
                first: leader.min(i),
                second: leader.max(i),
                tolerance: MAX_TIE_TOLERANCE,
            });
        }
    }
    let mut grad = vec![0.0; u.len()];
    grad[leader] = 1.0;
    Ok(grad)
}

/// How the larger point of a sampled pair is built from the smaller one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationCase {
    /// Every coordinate strictly increased.
    AllCoordinates,
    /// Exactly one coordinate strictly increased.
    SingleCoordinate,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub case: PerturbationCase,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub phi_u: f64,
    pub phi_v: f64,
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub claimed: Monotonicity,
    pub trials_run: usize,
    pub counterexample: Option<Counterexample>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Randomized check of a claimed monotonicity class.
///
/// Pairs `(u, v = u + delta)` are drawn from `box_range^dim`, alternating
/// between a strictly positive `delta` and a `delta` with exactly one strictly
/// positive coordinate. A strictly increasing value is required in the first
/// case for both classes and in the second case only for the strong class;
/// there the weak class still must not decrease. Stops at the first violation.
pub fn verify_monotonicity(
    phi: &AuxiliaryFunction,
    claimed: Monotonicity,
    dim: usize,
    trials: usize,
    box_range: (f64, f64),
    seed: u64,
) -> Result<MonotonicityReport> {
    if trials == 0 {
        return Err(MbmError::Input("at least one trial is required".to_string()));
    }
    if dim == 0 {
        return Err(MbmError::Input("dimension must be positive".to_string()));
    }
    if let Some(d) = phi.expected_dim() {
        if d != dim {
            return Err(MbmError::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }
    let (lo, hi) = box_range;
    if !(lo < hi) {
        return Err(MbmError::Input(format!(
            "sampling box must have positive width, got [{lo}, {hi}]"
        )));
    }
    let span = hi - lo;
    let delta_lo = 1e-3 * span;
    let delta_hi = 0.5 * span;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials_run = 0;
    for trial in 0..trials {
        trials_run = trial + 1;
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(lo..hi)).collect();
        let case = if trial % 2 == 0 {
            PerturbationCase::AllCoordinates
        } else {
            PerturbationCase::SingleCoordinate
        };
        let mut v = u.clone();
        match case {
            PerturbationCase::AllCoordinates => {
                for vi in v.iter_mut() {
                    *vi += rng.gen_range(delta_lo..delta_hi);
                }
            }
            PerturbationCase::SingleCoordinate => {
                let j = rng.gen_range(0..dim);
                v[j] += rng.gen_range(delta_lo..delta_hi);
            }
        }
        let phi_u = phi.evaluate(&u)?;
        let phi_v = phi.evaluate(&v)?;
        let requires_strict = match (claimed, case) {
            (_, PerturbationCase::AllCoordinates) => true,
            (Monotonicity::SIncreasing, PerturbationCase::SingleCoordinate) => true,
            (Monotonicity::WIncreasing, PerturbationCase::SingleCoordinate) => false,
        };
        let ok = if requires_strict {
            phi_u < phi_v
        } else {
            phi_u <= phi_v
        };
        if !ok {
            return Ok(MonotonicityReport {
                claimed,
                trials_run,
                counterexample: Some(Counterexample {
                    case,
                    u,
                    v,
                    phi_u,
                    phi_v,
                }),
            });
        }
    }
    Ok(MonotonicityReport {
        claimed,
        trials_run,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn max_on_first_example_objectives() {
        let phi = AuxiliaryFunction::max();
        for &t in &[0.0, 0.3, 1.0, 5.0] {
            let u = [t, -9.0 * t];
            assert_eq!(phi.evaluate(&u).unwrap(), t);
        }
    }

    #[test]
    fn sum_arctan_at_origin() {
        let phi = AuxiliaryFunction::sum_arctan();
        assert_eq!(phi.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn shifted_max_crossing_value() {
        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        // objective values of the second registry example at t = 0.5
        let u = [1.25, 0.25];
        assert!((phi.evaluate(&u).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let phi = AuxiliaryFunction::weighted_sum(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            phi.evaluate(&[1.0]),
            Err(MbmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradients_of_smooth_kinds() {
        let phi = AuxiliaryFunction::log_sum_exp(10.0).unwrap();
        let g = phi.gradient(&[0.0, 0.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 0.5).abs() < 1e-15);

        let phi = AuxiliaryFunction::weighted_sum(vec![0.3, 0.7]).unwrap();
        assert_eq!(phi.gradient(&[4.0, -2.0]).unwrap(), vec![0.3, 0.7]);

        let phi = AuxiliaryFunction::sum_arctan();
        let g = phi.gradient(&[1.0, 0.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_gradient_unique_and_tied() {
        let phi = AuxiliaryFunction::max();
        assert_eq!(phi.gradient(&[1.0, 3.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            phi.gradient(&[2.0, 2.0]),
            Err(MbmError::TiedMax { .. })
        ));

        let phi = AuxiliaryFunction::shifted_max(vec![-1.0, 0.0]).unwrap();
        // shifted scores tie at (1.25, 0.25)
        assert!(matches!(
            phi.gradient(&[1.25, 0.25]),
            Err(MbmError::TiedMax { .. })
        ));
        assert_eq!(phi.gradient(&[2.0, 0.25]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn constructor_validation() {
        assert!(AuxiliaryFunction::weighted_sum(vec![0.5, 0.0]).is_err());
        assert!(AuxiliaryFunction::weighted_sum(vec![]).is_err());
        assert!(AuxiliaryFunction::log_sum_exp(0.0).is_err());
        assert!(AuxiliaryFunction::log_sum_exp(-3.0).is_err());
        assert!(AuxiliaryFunction::shifted_max(vec![]).is_err());
    }

    #[test]
    fn monotonicity_tags() {
        assert_eq!(
            AuxiliaryFunction::max().monotonicity(),
            Monotonicity::WIncreasing
        );
        assert_eq!(
            AuxiliaryFunction::shifted_max(vec![0.0, 1.0])
                .unwrap()
                .monotonicity(),
            Monotonicity::WIncreasing
        );
        assert_eq!(
            AuxiliaryFunction::weighted_sum(vec![1.0, 1.0])
                .unwrap()
                .monotonicity(),
            Monotonicity::SIncreasing
        );
        assert_eq!(
            AuxiliaryFunction::sum_arctan().monotonicity(),
            Monotonicity::SIncreasing
        );
        assert_eq!(
            AuxiliaryFunction::log_sum_exp(100.0).unwrap().monotonicity(),
            Monotonicity::SIncreasing
        );
    }

    #[test]
    fn dominates_components_flags() {
        assert!(AuxiliaryFunction::max().dominates_components());
        assert!(AuxiliaryFunction::log_sum_exp(100.0)
            .unwrap()
            .dominates_components());
        assert!(AuxiliaryFunction::shifted_max(vec![0.0, 2.0])
            .unwrap()
            .dominates_components());
        assert!(!AuxiliaryFunction::shifted_max(vec![-0.5, 0.0])
            .unwrap()
            .dominates_components());
        assert!(!AuxiliaryFunction::sum_arctan().dominates_components());
        assert!(!AuxiliaryFunction::weighted_sum(vec![0.5, 0.5])
            .unwrap()
            .dominates_components());
    }

    #[test]
    fn verifier_passes_declared_tags() {
        let max = AuxiliaryFunction::max();
        let report =
            verify_monotonicity(&max, Monotonicity::WIncreasing, 3, 2000, (-2.0, 2.0), 1).unwrap();
        assert!(report.passed(), "{:?}", report.counterexample);

        let atan = AuxiliaryFunction::sum_arctan();
        let report =
            verify_monotonicity(&atan, Monotonicity::SIncreasing, 3, 2000, (-2.0, 2.0), 2).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn max_fails_strong_claim_with_counterexample() {
        let max = AuxiliaryFunction::max();
        let report =
            verify_monotonicity(&max, Monotonicity::SIncreasing, 2, 2000, (-2.0, 2.0), 3).unwrap();
        assert!(!report.passed());
        let ce = report.counterexample.unwrap();
        assert_eq!(ce.case, PerturbationCase::SingleCoordinate);
        assert!(ce.phi_u >= ce.phi_v);

        // the hand-built pair: bumping the non-leading coordinate leaves max unchanged
        let u = [0.0, 1.0];
        let v = [0.5, 1.0];
        assert_eq!(max.evaluate(&u).unwrap(), max.evaluate(&v).unwrap());
    }

    #[test]
    fn verifier_rejects_bad_arguments() {
        let max = AuxiliaryFunction::max();
        assert!(verify_monotonicity(&max, Monotonicity::WIncreasing, 2, 0, (-1.0, 1.0), 0).is_err());
        assert!(verify_monotonicity(&max, Monotonicity::WIncreasing, 0, 10, (-1.0, 1.0), 0).is_err());
        assert!(verify_monotonicity(&max, Monotonicity::WIncreasing, 2, 10, (1.0, 1.0), 0).is_err());
        let ws = AuxiliaryFunction::weighted_sum(vec![1.0, 1.0]).unwrap();
        assert!(verify_monotonicity(&ws, Monotonicity::SIncreasing, 3, 10, (-1.0, 1.0), 0).is_err());
    }

    fn catalog(dim: usize) -> Vec<AuxiliaryFunction> {
        vec![
            AuxiliaryFunction::max(),
            AuxiliaryFunction::shifted_max((0..dim).map(|i| i as f64 * 0.5 - 1.0).collect())
                .unwrap(),
            AuxiliaryFunction::weighted_sum(vec![1.0 / dim as f64; dim]).unwrap(),
            AuxiliaryFunction::sum_arctan(),
            AuxiliaryFunction::log_sum_exp(5.0).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        /// Componentwise u <= v implies phi(u) <= phi(v), exactly, for all kinds.
        #[test]
        fn weak_inequality_preserved(
            u in proptest::collection::vec(-5.0f64..5.0, 3),
            bumps in proptest::collection::vec(0.0f64..3.0, 3),
        ) {
            let v: Vec<f64> = u.iter().zip(&bumps).map(|(a, b)| a + b).collect();
            for phi in catalog(3) {
                let fu = phi.evaluate(&u).unwrap();
                let fv = phi.evaluate(&v).unwrap();
                prop_assert!(fu <= fv, "{:?}: {fu} > {fv}", phi.kind());
            }
        }

        /// Kinds with the flag set satisfy u_i <= phi(u) on samples.
        #[test]
        fn component_domination_flag(
            u in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            for phi in catalog(3) {
                if phi.dominates_components() {
                    let val = phi.evaluate(&u).unwrap();
                    for &ui in &u {
                        prop_assert!(ui <= val + 1e-12, "{:?}", phi.kind());
                    }
                }
            }
        }

        /// Log-sum-exp stays within log(m)/sharpness of the max.
        #[test]
        fn log_sum_exp_tracks_max(
            u in proptest::collection::vec(-5.0f64..5.0, 3),
            sharpness in 1.0f64..200.0,
        ) {
            let lse = AuxiliaryFunction::log_sum_exp(sharpness).unwrap();
            let max = AuxiliaryFunction::max();
            let gap = (lse.evaluate(&u).unwrap() - max.evaluate(&u).unwrap()).abs();
            prop_assert!(gap <= (3.0f64).ln() / sharpness + 1e-12);
        }

        /// Smooth gradients match central differences.
        #[test]
        fn smooth_gradients_match_finite_differences(
            u in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            for phi in catalog(3) {
                if !phi.is_smooth() {
                    continue;
                }
                let grad = phi.gradient(&u).unwrap();
                for j in 0..u.len() {
                    let h = 1e-6;
                    let mut plus = u.clone();
                    let mut minus = u.clone();
                    plus[j] += h;
                    minus[j] -= h;
                    let fd = (phi.evaluate(&plus).unwrap() - phi.evaluate(&minus).unwrap())
                        / (2.0 * h);
                    prop_assert!(
                        (grad[j] - fd).abs() <= 1e-6 * grad[j].abs().max(fd.abs()).max(1.0),
                        "{:?}: {} vs {}", phi.kind(), grad[j], fd
                    );
                }
            }
        }
    }
}
