//! CSV table writers. Numbers carry 17 significant digits so reruns are
//! bit-faithful; files are written to a temp sibling and renamed into place.

use std::fs;
use std::io;
use std::path::Path;

use mbm::{Classification, ProblemInstance, RunStatus, RunTrace, SweepEntry, WeightingOutcome};

use crate::{CliResult, Failure};

pub fn fmt_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// Write-then-rename so interrupted runs never leave truncated files.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".tmp");
    let tmp = parent.join(name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_atomic_or_fail(path: &Path, contents: &str) -> CliResult<()> {
    write_atomic(path, contents)
        .map_err(|e| Failure::config(format!("could not write {}: {e}", path.display())))
}

pub fn status_label(status: &RunStatus) -> &'static str {
    match status {
        RunStatus::Converged => "converged",
        RunStatus::OuterBudgetExhausted => "budget-exhausted",
        RunStatus::InnerFailure(_) => "inner-failure",
    }
}

pub fn classification_label(class: Classification) -> &'static str {
    match class {
        Classification::ApproxPareto => "approx-pareto",
        Classification::ApproxWeakParetoOnly => "approx-weak-pareto-only",
        Classification::Dominated => "dominated",
    }
}

/// Iteration trace: one row per outer iteration. Weight columns stay blank
/// on rows where recovery was not requested.
pub fn trace_csv(trace: &RunTrace, n: usize, m: usize) -> String {
    let mut header = vec!["k".to_string(), "tau".to_string()];
    header.extend((1..=n).map(|j| format!("x{j}")));
    header.extend((1..=m).map(|i| format!("f{i}")));
    header.push("phi".to_string());
    header.push("inner_iterations".to_string());
    header.extend((1..=m).map(|i| format!("alpha{i}")));
    header.push("kkt_residual".to_string());

    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &trace.rows {
        let mut fields = vec![row.iteration.to_string(), fmt_float(row.penalty)];
        fields.extend(row.x.iter().map(|&v| fmt_float(v)));
        fields.extend(row.objectives.iter().map(|&v| fmt_float(v)));
        fields.push(fmt_float(row.phi_value));
        fields.push(row.inner_iterations.to_string());
        match &row.weights {
            Some(recovered) => {
                fields.extend(recovered.weights.iter().map(|&v| fmt_float(v)));
                fields.push(fmt_float(recovered.residual));
            }
            None => {
                fields.extend(std::iter::repeat_n(String::new(), m + 1));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Retrieved front: one row per family member, in family order. Rows of
/// failed members keep their status and leave the point columns blank.
pub fn front_csv(
    entries: &[SweepEntry],
    instance: &ProblemInstance,
    label_len: usize,
    classifications: &[Option<Classification>],
) -> String {
    let n = instance.problem.decision_dim();
    let m = instance.problem.objective_count();
    let mut header = vec!["index".to_string()];
    header.extend((1..=label_len).map(|j| format!("param{j}")));
    header.push("status".to_string());
    header.extend((1..=n).map(|j| format!("x{j}")));
    header.extend((1..=m).map(|i| format!("f{i}")));
    header.push("classification".to_string());

    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (index, entry) in entries.iter().enumerate() {
        let mut fields = vec![index.to_string()];
        fields.extend(entry.label.iter().map(|&v| fmt_float(v)));
        match &entry.outcome {
            Ok(trace) => {
                fields.push(status_label(&trace.status).to_string());
                match trace.final_x() {
                    Some(x) => {
                        fields.extend(x.iter().map(|&v| fmt_float(v)));
                        let f = instance.problem.objectives(x);
                        fields.extend(f.iter().map(|&v| fmt_float(v)));
                    }
                    None => fields.extend(std::iter::repeat_n(String::new(), n + m)),
                }
            }
            Err(_) => {
                fields.push("error".to_string());
                fields.extend(std::iter::repeat_n(String::new(), n + m));
            }
        }
        fields.push(
            classifications[index]
                .map(|c| classification_label(c).to_string())
                .unwrap_or_default(),
        );
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Nondominated grid points with their objective values.
pub fn nondominated_csv(points: &[Vec<f64>], instance: &ProblemInstance) -> String {
    let n = instance.problem.decision_dim();
    let m = instance.problem.objective_count();
    let mut header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    header.extend((1..=m).map(|i| format!("f{i}")));
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for x in points {
        let mut fields: Vec<String> = x.iter().map(|&v| fmt_float(v)).collect();
        fields.extend(
            instance
                .problem
                .objectives(x)
                .iter()
                .map(|&v| fmt_float(v)),
        );
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Per-candidate classification rows.
pub fn classification_csv(candidates: &[Vec<f64>], classes: &[Classification], n: usize) -> String {
    let mut header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    header.push("classification".to_string());
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, class) in candidates.iter().zip(classes) {
        let mut fields: Vec<String> = x.iter().map(|&v| fmt_float(v)).collect();
        fields.push(classification_label(*class).to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Weighted-sum baseline outcomes, one row per weight vector.
pub fn weighting_csv(rows: &[(Vec<f64>, WeightingOutcome)], m: usize, n: usize) -> String {
    let mut header: Vec<String> = (1..=m).map(|i| format!("alpha{i}")).collect();
    header.push("outcome".to_string());
    header.extend((1..=n).map(|j| format!("x{j}")));
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (weights, outcome) in rows {
        let mut fields: Vec<String> = weights.iter().map(|&v| fmt_float(v)).collect();
        match outcome {
            WeightingOutcome::Minimizer(x) => {
                fields.push("minimizer".to_string());
                fields.extend(x.iter().map(|&v| fmt_float(v)));
            }
            WeightingOutcome::Unbounded => {
                fields.push("unbounded".to_string());
                fields.extend(std::iter::repeat_n(String::new(), n));
            }
            WeightingOutcome::BudgetExhausted => {
                fields.push("budget-exhausted".to_string());
                fields.extend(std::iter::repeat_n(String::new(), n));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Reads candidate points (first `n` numeric columns per row; a leading
/// non-numeric header line is skipped).
pub fn read_candidates(path: &Path, n: usize) -> CliResult<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("could not read {}: {e}", path.display())))?;
    let mut candidates = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        let parsed: Option<Vec<f64>> = fields
            .iter()
            .take(n)
            .map(|f| f.trim().parse::<f64>().ok())
            .collect();
        match parsed {
            Some(x) if x.len() == n => candidates.push(x),
            _ if line_no == 0 => continue, // header
            _ => {
                return Err(Failure::config(format!(
                    "{}:{}: expected {n} numeric columns",
                    path.display(),
                    line_no + 1
                )))
            }
        }
    }
    if candidates.is_empty() {
        return Err(Failure::config(format!(
            "{}: no candidate points found",
            path.display()
        )));
    }
    Ok(candidates)
}
