use std::fmt::Write as _;

use super::analysis::{CorrelationRow, IgrRow};
use super::protocol::{EvalReport, JackknifeReport, MetricSummary};
use crate::factorlab::FactorGroup;

fn with_sd(m: &MetricSummary, show_sd: bool) -> String {
    if show_sd {
        format!("{:.4} ({:.4})", m.mean, m.stdev)
    } else {
        format!("{:.4}", m.mean)
    }
}

fn opt(m: &Option<MetricSummary>, show_sd: bool) -> String {
    m.as_ref().map_or_else(|| "n/a".to_string(), |m| with_sd(m, show_sd))
}

/// One row per learner: precision, recall, F1, AUC and accuracy with
/// standard deviations, then Pre@3 and MAP.
pub fn eval_table(reports: &[EvalReport]) -> String {
    let header = ["Method", "Precision", "Recall", "F1", "AUC", "Accuracy", "Pre@3", "MAP"];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        let s = &r.summary;
        let sd = r.learner != "random";
        rows.push(vec![
            r.learner.clone(),
            with_sd(&s.precision, sd),
            with_sd(&s.recall, sd),
            with_sd(&s.f1, sd),
            opt(&s.auc, sd),
            with_sd(&s.accuracy, sd),
            opt(&s.pre_at_3, false),
            opt(&s.map, false),
        ]);
    }
    align(&rows)
}

pub fn jackknife_table(r: &JackknifeReport) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    let mut rows = vec![vec![
        "Group".to_string(),
        "Name".to_string(),
        "Without".to_string(),
        "With only".to_string(),
    ]];
    for row in &r.rows {
        let label = FactorGroup::of(&format!("{}-", row.group)).map_or("custom", FactorGroup::label);
        rows.push(vec![row.group.clone(), label.to_string(), fmt(row.without_f1), fmt(row.with_only_f1)]);
    }
    rows.push(vec!["all".into(), "full set".into(), format!("{:.4}", r.full_f1), String::new()]);
    align(&rows)
}

pub fn igr_text(rows: &[IgrRow]) -> String {
    let mut t = vec![vec!["Factor".to_string(), "IGR (rank)".to_string()]];
    t.extend(rows.iter().map(|r| vec![r.factor.clone(), format!("{:.4} ({})", r.igr, r.rank)]));
    align(&t)
}

pub fn correlation_text(rows: &[CorrelationRow]) -> String {
    let mut t = vec![vec!["Factor".to_string(), "cc".to_string()]];
    t.extend(rows.iter().map(|r| {
        vec![r.factor.clone(), r.cc.map_or_else(|| "undefined".to_string(), |c| format!("{c:.4}"))]
    }));
    align(&t)
}

/// Left-aligned columns separated by two spaces.
pub fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c + 1 == r.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<w$}  ", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
