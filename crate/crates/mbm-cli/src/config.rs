//! Run configuration: a single TOML file describing the problem, barrier,
//! scalarizer, penalty schedule, loop parameters, inner solver, optional
//! sweep section and output paths. Validation reports the first offending
//! field by its path (for example `schedule.tau0`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mbm::{
    AuxiliaryFunction, Barrier, BoxBounds, InnerMethod, InnerSolverConfig, MbmConfig, MbmMode,
    Monotonicity, PenaltySchedule, ProblemInstance,
};

use crate::{CliResult, Failure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfigFile {
    pub problem: ProblemSection,
    pub barrier: BarrierSection,
    pub phi: PhiSection,
    pub schedule: ScheduleSection,
    pub run: RunSection,
    #[serde(default)]
    pub inner: InnerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSection {
    pub name: String,
    /// Instance parameters, e.g. `a` for ex51.
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierKindConfig {
    InverseAssigned,
    InverseSummed,
    InverseGrouped,
    LogShifted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    pub kind: BarrierKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// One group of 1-based constraint indices per objective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKindConfig {
    Max,
    ShiftedMax,
    WeightedSum,
    SumArctan,
    LogSumExp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSection {
    pub kind: PhiKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleRuleConfig {
    Geometric,
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub rule: ScheduleRuleConfig,
    pub tau0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    Weak,
    Strong,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: ModeConfig,
    pub outer_iterations: usize,
    #[serde(default = "default_outer_tolerance")]
    pub outer_tolerance: f64,
    #[serde(default = "default_tau_stop")]
    pub tau_stop: f64,
    /// Start point; defaults to the instance's built-in strictly feasible one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_box: Option<BoxSection>,
    #[serde(default)]
    pub recover_weights: bool,
    #[serde(default = "default_true")]
    pub warm_start: bool,
}

fn default_outer_tolerance() -> f64 {
    1e-9
}

fn default_tau_stop() -> f64 {
    1e-8
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMethodConfig {
    GradientBacktracking,
    NelderMead,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSection {
    #[serde(default = "default_inner_method")]
    pub method: InnerMethodConfig,
    #[serde(default = "default_inner_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_inner_step_tolerance")]
    pub step_tolerance: f64,
    #[serde(default = "default_inner_value_tolerance")]
    pub value_tolerance: f64,
    #[serde(default = "default_inner_shrink")]
    pub shrink: f64,
    #[serde(default = "default_inner_boundary_fraction")]
    pub boundary_fraction: f64,
}

fn default_inner_method() -> InnerMethodConfig {
    InnerMethodConfig::NelderMead
}

fn default_inner_max_iterations() -> usize {
    InnerSolverConfig::default().max_iterations
}

fn default_inner_step_tolerance() -> f64 {
    InnerSolverConfig::default().step_tolerance
}

fn default_inner_value_tolerance() -> f64 {
    InnerSolverConfig::default().value_tolerance
}

fn default_inner_shrink() -> f64 {
    InnerSolverConfig::default().shrink
}

fn default_inner_boundary_fraction() -> f64 {
    InnerSolverConfig::default().boundary_fraction
}

impl Default for InnerSection {
    fn default() -> Self {
        InnerSection {
            method: default_inner_method(),
            max_iterations: default_inner_max_iterations(),
            step_tolerance: default_inner_step_tolerance(),
            value_tolerance: default_inner_value_tolerance(),
            shrink: default_inner_shrink(),
            boundary_fraction: default_inner_boundary_fraction(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKindConfig {
    /// Shifted-max scalarizers; the swept value lands in one offset slot.
    ShiftedMax,
    /// Biobjective weighted sums `(v, 1 - v)`.
    WeightedSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuesConfig {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl ValuesConfig {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            ValuesConfig::List(values) => values.clone(),
            ValuesConfig::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*count)
                    .map(|i| start + (stop - start) * i as f64 / (*count as f64 - 1.0))
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub family: FamilyKindConfig,
    /// Which offset slot carries the swept value (1-based; shifted-max only).
    #[serde(default = "default_one")]
    pub vary_index: usize,
    pub values: ValuesConfig,
    /// Classify each retrieved point against the instance's default grid.
    #[serde(default)]
    pub classify: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_points: Option<Vec<usize>>,
}

fn default_one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front: Option<PathBuf>,
}

/// Everything a run or sweep needs, materialized from a parsed config.
pub struct BuiltConfig {
    pub instance: ProblemInstance,
    pub barrier: Barrier,
    pub phi: AuxiliaryFunction,
    pub mbm: MbmConfig,
    pub start: Vec<f64>,
}

pub fn parse_config(text: &str) -> CliResult<RunConfigFile> {
    toml::from_str(text).map_err(|e| Failure::config(format!("invalid configuration: {e}")))
}

pub fn serialize_config(config: &RunConfigFile) -> CliResult<String> {
    toml::to_string_pretty(config)
        .map_err(|e| Failure::config(format!("could not serialize configuration: {e}")))
}

pub fn build(config: &RunConfigFile) -> CliResult<BuiltConfig> {
    let instance = build_instance(&config.problem)?;
    let barrier = build_barrier(&config.barrier, &instance)?;
    let phi = build_phi(&config.phi, instance.problem.objective_count())?;
    let schedule = build_schedule(&config.schedule)?;
    let (mbm, start) = build_run(&config.run, &config.inner, schedule, &phi, &instance)?;
    Ok(BuiltConfig {
        instance,
        barrier,
        phi,
        mbm,
        start,
    })
}

pub fn build_instance(section: &ProblemSection) -> CliResult<ProblemInstance> {
    let mut params = section.params.clone();
    let instance = match section.name.as_str() {
        "ex51" => {
            let a = params.remove("a").unwrap_or(9.0);
            if !(a > 0.0) {
                return Err(Failure::config(format!(
                    "problem.a: must be positive, got {a}"
                )));
            }
            mbm::ex51(a)
        }
        other => mbm::registry_get(other)
            .map_err(|e| Failure::config(format!("problem.name: {e}")))?,
    };
    if let Some(key) = params.keys().next() {
        return Err(Failure::config(format!(
            "problem.{key}: unknown parameter for instance \"{}\"",
            section.name
        )));
    }
    Ok(instance)
}

fn build_barrier(section: &BarrierSection, instance: &ProblemInstance) -> CliResult<Barrier> {
    if section.shift.is_some() && section.kind != BarrierKindConfig::LogShifted {
        return Err(Failure::config(
            "barrier.shift: only meaningful for kind \"log-shifted\"",
        ));
    }
    if section.groups.is_some() && section.kind != BarrierKindConfig::InverseGrouped {
        return Err(Failure::config(
            "barrier.groups: only meaningful for kind \"inverse-grouped\"",
        ));
    }
    match section.kind {
        BarrierKindConfig::InverseAssigned => Barrier::inverse_assigned(&instance.problem)
            .map_err(|e| Failure::config(format!("barrier.kind: {e}"))),
        BarrierKindConfig::InverseSummed => {
            Ok(Barrier::inverse_summed_replicated(&instance.problem))
        }
        BarrierKindConfig::InverseGrouped => {
            let groups = section.groups.clone().ok_or_else(|| {
                Failure::config("barrier.groups: required for kind \"inverse-grouped\"")
            })?;
            let mut zero_based = Vec::with_capacity(groups.len());
            for group in &groups {
                let mut adjusted = Vec::with_capacity(group.len());
                for &index in group {
                    if index == 0 {
                        return Err(Failure::config(
                            "barrier.groups: constraint indices are 1-based",
                        ));
                    }
                    adjusted.push(index - 1);
                }
                zero_based.push(adjusted);
            }
            Barrier::inverse_grouped(&instance.problem, zero_based)
                .map_err(|e| Failure::config(format!("barrier.groups: {e}")))
        }
        BarrierKindConfig::LogShifted => {
            let shift = section.shift.ok_or_else(|| {
                Failure::config("barrier.shift: required for kind \"log-shifted\"")
            })?;
            Ok(Barrier::log_replicated_shifted(&instance.problem, shift))
        }
    }
}

fn build_phi(section: &PhiSection, objectives: usize) -> CliResult<AuxiliaryFunction> {
    let reject = |field: &str, kind: &str| -> CliResult<()> {
        Err(Failure::config(format!(
            "phi.{field}: only meaningful for kind \"{kind}\""
        )))
    };
    match section.kind {
        PhiKindConfig::Max | PhiKindConfig::SumArctan => {
            if section.offsets.is_some() {
                reject("offsets", "shifted-max")?;
            }
            if section.weights.is_some() {
                reject("weights", "weighted-sum")?;
            }
            if section.sharpness.is_some() {
                reject("sharpness", "log-sum-exp")?;
            }
        }
        PhiKindConfig::ShiftedMax => {
            if section.weights.is_some() {
                reject("weights", "weighted-sum")?;
            }
            if section.sharpness.is_some() {
                reject("sharpness", "log-sum-exp")?;
            }
        }
        PhiKindConfig::WeightedSum => {
            if section.offsets.is_some() {
                reject("offsets", "shifted-max")?;
            }
            if section.sharpness.is_some() {
                reject("sharpness", "log-sum-exp")?;
            }
        }
        PhiKindConfig::LogSumExp => {
            if section.offsets.is_some() {
                reject("offsets", "shifted-max")?;
            }
            if section.weights.is_some() {
                reject("weights", "weighted-sum")?;
            }
        }
    }
    match section.kind {
        PhiKindConfig::Max => Ok(AuxiliaryFunction::max()),
        PhiKindConfig::SumArctan => Ok(AuxiliaryFunction::sum_arctan()),
        PhiKindConfig::ShiftedMax => {
            let offsets = section
                .offsets
                .clone()
                .ok_or_else(|| Failure::config("phi.offsets: required for kind \"shifted-max\""))?;
            if offsets.len() != objectives {
                return Err(Failure::config(format!(
                    "phi.offsets: expected {objectives} entries, got {}",
                    offsets.len()
                )));
            }
            AuxiliaryFunction::shifted_max(offsets)
                .map_err(|e| Failure::config(format!("phi.offsets: {e}")))
        }
        PhiKindConfig::WeightedSum => {
            let weights = section
                .weights
                .clone()
                .ok_or_else(|| Failure::config("phi.weights: required for kind \"weighted-sum\""))?;
            if weights.len() != objectives {
                return Err(Failure::config(format!(
                    "phi.weights: expected {objectives} entries, got {}",
                    weights.len()
                )));
            }
            AuxiliaryFunction::weighted_sum(weights)
                .map_err(|e| Failure::config(format!("phi.weights: {e}")))
        }
        PhiKindConfig::LogSumExp => {
            let sharpness = section
                .sharpness
                .unwrap_or(mbm::auxiliary::DEFAULT_LOG_SUM_EXP_SHARPNESS);
            AuxiliaryFunction::log_sum_exp(sharpness)
                .map_err(|e| Failure::config(format!("phi.sharpness: {e}")))
        }
    }
}

fn build_schedule(section: &ScheduleSection) -> CliResult<PenaltySchedule> {
    if !(section.tau0 > 0.0) {
        return Err(Failure::config(format!(
            "schedule.tau0: must be positive, got {}",
            section.tau0
        )));
    }
    match section.rule {
        ScheduleRuleConfig::Geometric => {
            let sigma = section.sigma.ok_or_else(|| {
                Failure::config("schedule.sigma: required for the geometric rule")
            })?;
            if !(sigma > 0.0 && sigma < 1.0) {
                return Err(Failure::config(format!(
                    "schedule.sigma: must lie in (0, 1), got {sigma}"
                )));
            }
            Ok(PenaltySchedule::Geometric {
                initial: section.tau0,
                ratio: sigma,
            })
        }
        ScheduleRuleConfig::Harmonic => {
            if section.sigma.is_some() {
                return Err(Failure::config(
                    "schedule.sigma: only meaningful for the geometric rule",
                ));
            }
            Ok(PenaltySchedule::Harmonic {
                initial: section.tau0,
            })
        }
    }
}

fn build_run(
    run: &RunSection,
    inner: &InnerSection,
    schedule: PenaltySchedule,
    phi: &AuxiliaryFunction,
    instance: &ProblemInstance,
) -> CliResult<(MbmConfig, Vec<f64>)> {
    if run.outer_iterations == 0 {
        return Err(Failure::config("run.outer_iterations: must be positive"));
    }
    if !(run.outer_tolerance > 0.0) {
        return Err(Failure::config(format!(
            "run.outer_tolerance: must be positive, got {}",
            run.outer_tolerance
        )));
    }
    if !(run.tau_stop > 0.0) {
        return Err(Failure::config(format!(
            "run.tau_stop: must be positive, got {}",
            run.tau_stop
        )));
    }
    let mode = match run.mode {
        ModeConfig::Weak => MbmMode::Weak,
        ModeConfig::Strong => MbmMode::Strong,
    };
    if mode == MbmMode::Strong && phi.monotonicity() != Monotonicity::SIncreasing {
        return Err(Failure::config(
            "run.mode: strong mode requires a strongly increasing scalarizer \
             (weighted-sum, sum-arctan or log-sum-exp)",
        ));
    }
    if run.recover_weights
        && !matches!(phi.kind(), mbm::AuxKind::Max | mbm::AuxKind::ShiftedMax(_))
    {
        return Err(Failure::config(
            "run.recover_weights: requires a max-type scalarizer",
        ));
    }
    let local_bounds = match &run.local_box {
        None => None,
        Some(section) => Some(
            BoxBounds::new(section.lower.clone(), section.upper.clone())
                .map_err(|e| Failure::config(format!("run.local_box: {e}")))?,
        ),
    };
    let n = instance.problem.decision_dim();
    let start = match &run.start {
        Some(point) => {
            if point.len() != n {
                return Err(Failure::config(format!(
                    "run.start: expected {n} coordinates, got {}",
                    point.len()
                )));
            }
            point.clone()
        }
        None => instance
            .problem
            .start()
            .ok_or_else(|| {
                Failure::config("run.start: required (the instance has no built-in start point)")
            })?
            .to_vec(),
    };
    let inner_config = build_inner(inner)?;
    let config = MbmConfig {
        mode,
        schedule,
        outer_iterations: run.outer_iterations,
        outer_tolerance: run.outer_tolerance,
        penalty_stop: run.tau_stop,
        local_bounds,
        inner: inner_config,
        recover_weights: run.recover_weights,
        warm_start: run.warm_start,
    };
    Ok((config, start))
}

fn build_inner(section: &InnerSection) -> CliResult<InnerSolverConfig> {
    let config = InnerSolverConfig {
        method: match section.method {
            InnerMethodConfig::GradientBacktracking => InnerMethod::GradientBacktracking,
            InnerMethodConfig::NelderMead => InnerMethod::NelderMead,
        },
        max_iterations: section.max_iterations,
        step_tolerance: section.step_tolerance,
        value_tolerance: section.value_tolerance,
        shrink: section.shrink,
        boundary_fraction: section.boundary_fraction,
    };
    config
        .validate()
        .map_err(|e| Failure::config(format!("inner: {e}")))?;
    Ok(config)
}

/// Expands the sweep section into labeled scalarizer family members.
pub fn build_family(
    sweep: &SweepSection,
    objectives: usize,
) -> CliResult<Vec<mbm::FamilyMember>> {
    let values = sweep.values.expand();
    if values.is_empty() {
        return Err(Failure::config("sweep.values: the sweep grid is empty"));
    }
    match sweep.family {
        FamilyKindConfig::ShiftedMax => {
            if sweep.vary_index == 0 || sweep.vary_index > objectives {
                return Err(Failure::config(format!(
                    "sweep.vary_index: must lie in 1..={objectives}"
                )));
            }
            Ok(values
                .iter()
                .map(|&value| {
                    let mut offsets = vec![0.0; objectives];
                    offsets[sweep.vary_index - 1] = value;
                    mbm::FamilyMember {
                        label: offsets.clone(),
                        phi: AuxiliaryFunction::shifted_max(offsets)
                            .expect("offsets are nonempty"),
                    }
                })
                .collect())
        }
        FamilyKindConfig::WeightedSum => {
            if objectives != 2 {
                return Err(Failure::config(
                    "sweep.family: the weighted-sum family needs a biobjective problem",
                ));
            }
            let mut members = Vec::with_capacity(values.len());
            for &value in &values {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Failure::config(format!(
                        "sweep.values: weighted-sum values must lie in (0, 1), got {value}"
                    )));
                }
                let weights = vec![value, 1.0 - value];
                members.push(mbm::FamilyMember {
                    label: weights.clone(),
                    phi: AuxiliaryFunction::weighted_sum(weights)
                        .expect("weights validated above"),
                });
            }
            Ok(members)
        }
    }
}

/// Grid sizes for the classification oracle: explicit, or the instance
/// defaults (501 points in one dimension, 201 per axis in two).
pub fn oracle_counts(sweep: &SweepSection, n: usize) -> CliResult<Vec<usize>> {
    if let Some(counts) = &sweep.oracle_points {
        if counts.len() != n {
            return Err(Failure::config(format!(
                "sweep.oracle_points: expected {n} entries, got {}",
                counts.len()
            )));
        }
        return Ok(counts.clone());
    }
    match n {
        1 => Ok(vec![501]),
        2 => Ok(vec![201, 201]),
        _ => Err(Failure::config(
            "sweep.oracle_points: required for problems with more than two variables",
        )),
    }
}
