//! The `tune` subcommand: runs each (system x method), writes trial logs,
//! summaries, the selected point, and a manifest.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use coordtune::report::{render_sweep_table, to_jsonl, SweepRun};
use coordtune::tuner::{
    alternating_search, joint_search, marginal_search, random_search, Method, TuneReport,
};

use crate::config::CampaignConfig;

fn method_tag(m: Method) -> &'static str {
    match m {
        Method::Marginal => "marginal",
        Method::Alternating => "alternating",
        Method::Joint => "joint",
        Method::Random => "random",
    }
}

/// Row label mirroring the published table ("method 1" = marginal,
/// "method 2" = alternating).
fn row_label(m: Method, system: &str) -> String {
    let n = match m {
        Method::Marginal => "method 1",
        Method::Alternating => "method 2",
        Method::Joint => "joint",
        Method::Random => "random",
    };
    format!("{n}-{} SER", system.to_uppercase())
}

pub fn run(cfg: &CampaignConfig) -> Result<()> {
    let init = cfg.initial_point()?;
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;

    let mut run_names = Vec::new();
    for system in &cfg.systems {
        let mut sweep_runs: Vec<(Method, TuneReport)> = Vec::new();
        for &method in &cfg.methods {
            let report = match method {
                Method::Marginal => {
                    marginal_search(&cfg.grid, &init, &system.config, &cfg.search)?
                }
                Method::Alternating => {
                    alternating_search(&cfg.grid, &init, &system.config, &cfg.search)?
                }
                Method::Joint => joint_search(&cfg.grid, &system.config, &cfg.search)?,
                Method::Random => {
                    random_search(&cfg.grid, &system.config, &cfg.search, cfg.random_trials)?
                }
            };
            let run_name = format!("{}-{}", system.name, method_tag(method));
            let run_dir = cfg.output_dir.join(&run_name);
            fs::create_dir_all(&run_dir)?;
            write_run(&run_dir, &system.name, method, &report)?;
            println!(
                "{run_name}: best {} score {:.4} ({} requests, {} distinct)",
                report.best().map(|b| b.key.as_str()).unwrap_or("-"),
                report.best().map(|b| b.score).unwrap_or(f64::NAN),
                report.total_requests,
                report.distinct_evaluations,
            );
            run_names.push(run_name);
            if matches!(method, Method::Marginal | Method::Alternating) {
                sweep_runs.push((method, report));
            }
        }
        if !sweep_runs.is_empty() {
            let runs: Vec<SweepRun> = sweep_runs
                .iter()
                .map(|(m, r)| SweepRun { label: row_label(*m, &system.name), report: r })
                .collect();
            let (md, csv) = render_sweep_table(&cfg.grid, &runs)?;
            fs::write(cfg.output_dir.join(format!("{}-summary.md", system.name)), md)?;
            fs::write(cfg.output_dir.join(format!("{}-summary.csv", system.name)), csv)?;
        }
    }
    write_manifest(&cfg.output_dir, cfg, &run_names)?;
    Ok(())
}

fn write_run(dir: &Path, system: &str, method: Method, report: &TuneReport) -> Result<()> {
    let meta = serde_json::json!({ "system": system, "method": method_tag(method) });
    fs::write(dir.join("report.jsonl"), to_jsonl(report, Some(meta)))?;
    if let Some(best) = report.best() {
        fs::write(dir.join("best.json"), serde_json::to_string_pretty(best)?)?;
    }
    Ok(())
}

fn write_manifest(dir: &Path, cfg: &CampaignConfig, runs: &[String]) -> Result<()> {
    let config_json = serde_json::to_value(cfg)?;
    let hash = Sha256::digest(serde_json::to_vec(&config_json)?);
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": format!("{hash:x}"),
        "base_seed": cfg.search.base_seed,
        "runs": runs,
        "config": config_json,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
