//! The `sweep-table` subcommand: renders the per-axis sweep table from
//! previously written trial logs.

use std::path::PathBuf;

use anyhow::{Context, Result};

use coordtune::grid::HyperparamGrid;
use coordtune::report::{parse_jsonl, render_sweep_table, SweepRun};
use coordtune::tuner::TuneReport;

pub struct SweepArgs {
    /// `label=path` pairs; a bare path uses its parent directory name.
    pub logs: Vec<String>,
    pub out: Option<PathBuf>,
}

fn label_and_path(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) => (label.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(spec);
            let label = path
                .parent()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (label, path)
        }
    }
}

pub fn run(grid: &HyperparamGrid, args: &SweepArgs) -> Result<()> {
    let mut reports: Vec<(String, TuneReport)> = Vec::new();
    for spec in &args.logs {
        let (label, path) = label_and_path(spec);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let (header, trials) =
            parse_jsonl(&text).with_context(|| format!("parsing {}", path.display()))?;
        reports.push((
            label,
            TuneReport {
                method: header.method,
                trials,
                best_per_step: Vec::new(),
                distinct_evaluations: header.distinct_evaluations,
                total_requests: header.total_requests,
                converged_at_step: header.converged_at_step,
            },
        ));
    }
    let runs: Vec<SweepRun> = reports
        .iter()
        .map(|(label, report)| SweepRun { label: label.clone(), report })
        .collect();
    let (md, csv) = render_sweep_table(grid, &runs)?;
    match &args.out {
        Some(prefix) => {
            let md_path = prefix.with_extension("md");
            let csv_path = prefix.with_extension("csv");
            std::fs::write(&md_path, md)?;
            std::fs::write(&csv_path, csv)?;
            println!("wrote {} and {}", md_path.display(), csv_path.display());
        }
        None => print!("{md}"),
    }
    Ok(())
}
