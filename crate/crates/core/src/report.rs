//! Trial-log serialization (JSONL) and the sweep summary table: one row block
//! per axis, one column per candidate value, SER cells with the per-row best
//! bolded in the Markdown rendering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::HyperparamGrid;
use crate::tuner::{TrialResult, TuneReport};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("no reports given")]
    Empty,
    #[error("no step-1 trial for axis `{axis}` value `{value}` in run `{label}`")]
    MissingCell { axis: String, value: String, label: String },
    #[error("malformed jsonl: {0}")]
    Malformed(String),
}

/// First line of every trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub record: String,
    pub method: crate::tuner::Method,
    pub distinct_evaluations: usize,
    pub total_requests: usize,
    pub converged_at_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub meta: Option<serde_json::Value>,
}

/// One header record, then one TrialResult per line. Wall times are excluded
/// from serialization, so identical runs yield identical bytes.
pub fn to_jsonl(report: &TuneReport, meta: Option<serde_json::Value>) -> String {
    let header = LogHeader {
        record: "header".to_string(),
        method: report.method,
        distinct_evaluations: report.distinct_evaluations,
        total_requests: report.total_requests,
        converged_at_step: report.converged_at_step,
        meta,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    for t in &report.trials {
        out.push('\n');
        out.push_str(&serde_json::to_string(t).expect("trial serializes"));
    }
    out.push('\n');
    out
}

pub fn parse_jsonl(s: &str) -> Result<(LogHeader, Vec<TrialResult>), ReportError> {
    let mut lines = s.lines();
    let head = lines.next().ok_or_else(|| ReportError::Malformed("empty".into()))?;
    let header: LogHeader =
        serde_json::from_str(head).map_err(|e| ReportError::Malformed(e.to_string()))?;
    let trials = lines
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| ReportError::Malformed(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, trials))
}

/// One (system, method) run feeding the summary table.
pub struct SweepRun<'a> {
    /// Row label, e.g. "method 1-FSO SER".
    pub label: String,
    pub report: &'a TuneReport,
}

/// Step-1 score of the candidate holding `value` on `axis`.
fn cell_score(report: &TuneReport, axis: &str, value: &str) -> Option<f64> {
    report
        .trials
        .iter()
        .find(|t| {
            t.step_index == 1
                && t.axis_swept.as_deref() == Some(axis)
                && t.key
                    .split(';')
                    .any(|pair| pair == format!("{axis}={value}"))
        })
        .map(|t| t.score)
}

/// Markdown and CSV renderings of the axis-by-candidate sweep table.
pub fn render_sweep_table(
    grid: &HyperparamGrid,
    runs: &[SweepRun],
) -> Result<(String, String), ReportError> {
    if runs.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut md = String::new();
    let mut csv = String::from("axis,value,label,score\n");
    for axis in grid.axes() {
        let values: Vec<String> = axis.values.iter().map(|v| v.to_string()).collect();
        md.push_str(&format!("| {} | {} |\n", axis.id, values.join(" | ")));
        md.push_str(&format!("|{}\n", "---|".repeat(values.len() + 1)));
        for run in runs {
            let mut scores = Vec::with_capacity(values.len());
            for v in &values {
                let s = cell_score(run.report, &axis.id, v).ok_or_else(|| {
                    ReportError::MissingCell {
                        axis: axis.id.clone(),
                        value: v.clone(),
                        label: run.label.clone(),
                    }
                })?;
                scores.push(s);
            }
            let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let cells: Vec<String> = scores
                .iter()
                .map(|&s| {
                    if s == best {
                        format!("**{s:.4}**")
                    } else {
                        format!("{s:.4}")
                    }
                })
                .collect();
            md.push_str(&format!("| {} | {} |\n", run.label, cells.join(" | ")));
            for (v, s) in values.iter().zip(&scores) {
                csv.push_str(&format!("{},{},{},{}\n", axis.id, v, run.label, s));
            }
        }
        md.push('\n');
    }
    Ok((md, csv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AxisValue, HyperparamGrid, ParamAxis};
    use crate::tuner::{marginal_search, SearchConfig};

    fn toy_grid() -> HyperparamGrid {
        HyperparamGrid::new(vec![
            ParamAxis::numeric("x", (1..=5).map(AxisValue::Int).collect()),
            ParamAxis::numeric("y", (1..=5).map(AxisValue::Int).collect()),
        ])
        .unwrap()
    }

    fn toy_report() -> TuneReport {
        let g = toy_grid();
        let init = g
            .point(&[("x", AxisValue::Int(1)), ("y", AxisValue::Int(1))])
            .unwrap();
        let f = |p: &crate::grid::HyperparamPoint, _: u64| {
            (p.f64("x").unwrap() - 2.0).powi(2) + (p.f64("y").unwrap() - 3.0).powi(2)
        };
        let cfg = SearchConfig { max_steps: 1, ..SearchConfig::default() };
        marginal_search(&g, &init, &f, &cfg).unwrap()
    }

    #[test]
    fn jsonl_round_trips_and_is_stable() {
        let r = toy_report();
        let a = to_jsonl(&r, None);
        let b = to_jsonl(&r, None);
        assert_eq!(a, b);
        let (header, trials) = parse_jsonl(&a).unwrap();
        assert_eq!(header.total_requests, r.total_requests);
        assert_eq!(trials.len(), r.trials.len());
        assert_eq!(trials[0].score, r.trials[0].score);
    }

    #[test]
    fn sweep_table_shape_and_bolding() {
        let g = toy_grid();
        let r = toy_report();
        let runs = [SweepRun { label: "method 1".to_string(), report: &r }];
        let (md, csv) = render_sweep_table(&g, &runs).unwrap();
        // one header + separator + one data row per axis block
        assert_eq!(md.matches("| method 1 |").count(), 2);
        assert!(md.contains("**"));
        // csv: header + sum of axis sizes rows
        assert_eq!(csv.lines().count(), 1 + 10);
        // csv preserves full precision of the step-1 scores
        let first_data = csv.lines().nth(1).unwrap();
        let score: f64 = first_data.rsplit(',').next().unwrap().parse().unwrap();
        let found = r.trials.iter().any(|t| t.score == score);
        assert!(found);
    }

    #[test]
    fn empty_run_list_is_an_error() {
        let g = toy_grid();
        assert_eq!(render_sweep_table(&g, &[]).unwrap_err(), ReportError::Empty);
    }
}
