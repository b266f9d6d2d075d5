use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evalharness::{EvalError, TaskRegistry, TaskScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub model_id: String,
    pub per_task: BTreeMap<String, TaskScore>,
    /// Unweighted mean of the per-task values.
    pub overall: f64,
    /// Set when some registry tasks are missing.
    #[serde(default)]
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub per_task: BTreeMap<String, f64>,
    pub overall: f64,
}

/// Reports plus an optional diff, as written by the `report` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub reports: Vec<BenchmarkReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<DiffReport>,
}

pub fn aggregate(
    model_id: impl Into<String>,
    per_task: BTreeMap<String, TaskScore>,
    registry: &TaskRegistry,
) -> Result<BenchmarkReport, EvalError> {
    if per_task.is_empty() {
        return Err(EvalError::EmptyInput("no task scores to aggregate"));
    }
    let overall = per_task.values().map(|s| s.value).sum::<f64>() / per_task.len() as f64;
    let partial = registry.names().any(|name| !per_task.contains_key(name));
    Ok(BenchmarkReport { model_id: model_id.into(), per_task, overall, partial })
}

/// Per-task and overall deltas, `tuned - original`.
pub fn diff(tuned: &BenchmarkReport, original: &BenchmarkReport) -> Result<DiffReport, EvalError> {
    if !tuned.per_task.keys().eq(original.per_task.keys()) {
        let names = |r: &BenchmarkReport| r.per_task.keys().cloned().collect::<Vec<_>>().join(",");
        return Err(EvalError::TaskSetMismatch(format!(
            "`{}` has [{}], `{}` has [{}]",
            tuned.model_id,
            names(tuned),
            original.model_id,
            names(original)
        )));
    }
    let per_task = tuned
        .per_task
        .iter()
        .map(|(name, score)| (name.clone(), score.value - original.per_task[name].value))
        .collect();
    Ok(DiffReport { per_task, overall: tuned.overall - original.overall })
}

/// A signed delta at four decimals, e.g. `+0.0381`.
pub fn format_delta(delta: f64) -> String {
    let s = format!("{delta:+.4}");
    if s == "-0.0000" {
        "+0.0000".to_string()
    } else {
        s
    }
}

fn format_score(score: &TaskScore) -> String {
    match score.stderr {
        Some(se) => format!("{:.4}±{se:.4}", score.value),
        None => format!("{:.4}", score.value),
    }
}

/// A markdown table with one row per model and an optional `Diff` row.
/// Columns follow the first report's tasks, then `Overall`.
pub fn render_table(reports: &[BenchmarkReport], diff: Option<&DiffReport>) -> Result<String, EvalError> {
    let first = reports.first().ok_or(EvalError::EmptyInput("no reports to render"))?;
    let tasks: Vec<&String> = first.per_task.keys().collect();
    let mut out = String::from("| Model |");
    for task in &tasks {
        out.push_str(&format!(" {task} |"));
    }
    out.push_str(" Overall |\n|---|");
    out.push_str(&"---|".repeat(tasks.len() + 1));
    out.push('\n');
    for report in reports {
        out.push_str(&format!("| {} |", report.model_id));
        for task in &tasks {
            let cell = report.per_task.get(*task).map(format_score).unwrap_or_else(|| "-".into());
            out.push_str(&format!(" {cell} |"));
        }
        out.push_str(&format!(" {:.4} |\n", report.overall));
    }
    if let Some(d) = diff {
        out.push_str("| Diff |");
        for task in &tasks {
            let cell = d.per_task.get(*task).map(|v| format_delta(*v)).unwrap_or_else(|| "-".into());
            out.push_str(&format!(" {cell} |"));
        }
        out.push_str(&format!(" {} |\n", format_delta(d.overall)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str, values: &[f64]) -> BenchmarkReport {
        let names = ["chabsa", "cma_basics", "cpa_audit", "fp2", "security_sales_1"];
        let per_task = names
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), TaskScore { value: *v, stderr: None, n: 10 }))
            .collect();
        aggregate(id, per_task, &TaskRegistry::financial()).unwrap()
    }

    #[test]
    fn zero_scores_and_partial() {
        let r = report("z", &[0.0; 5]);
        assert_eq!(r.overall, 0.0);
        assert!(!r.partial);
        assert!(report("p", &[0.5, 0.5]).partial);
        assert!(aggregate("e", BTreeMap::new(), &TaskRegistry::financial()).is_err());
    }

    #[test]
    fn diff_identity_and_antisymmetry() {
        let a = report("a", &[0.1, 0.2, 0.3, 0.4, 0.5]);
        let b = report("b", &[0.5, 0.1, 0.3, 0.2, 0.9]);
        let zero = diff(&a, &a).unwrap();
        assert!(zero.per_task.values().all(|d| *d == 0.0) && zero.overall == 0.0);
        let ab = diff(&a, &b).unwrap();
        let ba = diff(&b, &a).unwrap();
        for (k, v) in &ab.per_task {
            assert_eq!(*v, -ba.per_task[k]);
        }
        assert_eq!(ab.overall, -ba.overall);
        assert!(matches!(diff(&a, &report("c", &[0.1])), Err(EvalError::TaskSetMismatch(_))));
    }

    #[test]
    fn table_layout() {
        let mut a = report("Original", &[0.5, 0.25, 0.0, 1.0, 0.75]);
        a.per_task.get_mut("fp2").unwrap().stderr = Some(0.0217);
        let b = report("Tuned", &[0.5, 0.25, 0.0, 1.0, 0.8]);
        let t = render_table(&[a.clone(), b.clone()], Some(&diff(&b, &a).unwrap())).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "| Model | chabsa | cma_basics | cpa_audit | fp2 | security_sales_1 | Overall |");
        assert_eq!(lines[1], "|---|---|---|---|---|---|---|");
        assert_eq!(lines[2], "| Original | 0.5000 | 0.2500 | 0.0000 | 1.0000±0.0217 | 0.7500 | 0.5000 |");
        assert_eq!(lines[4], "| Diff | +0.0000 | +0.0000 | +0.0000 | +0.0000 | +0.0500 | +0.0100 |");
    }
}
