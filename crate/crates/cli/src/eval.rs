//! The `eval` subcommand: scores a single hyperparameter point on one system.

use std::path::PathBuf;

use anyhow::{Context, Result};

use coordtune::grid::point_key;
use coordtune::objective::evaluate_point;
use coordtune::seed::derive_seed;
use coordtune::ChannelModel;

use crate::config::CampaignConfig;

pub struct EvalArgs {
    /// Inline JSON object, or `@path` to read it from a file.
    pub point: String,
    pub system: String,
    pub es_n0_db: Option<f64>,
    pub seed: Option<u64>,
}

pub fn run(cfg: &CampaignConfig, args: &EvalArgs) -> Result<()> {
    let raw = match args.point.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(PathBuf::from(path))
            .with_context(|| format!("reading point file {path}"))?,
        None => args.point.clone(),
    };
    let value: serde_json::Value =
        serde_json::from_str(&raw).context("parsing point JSON")?;
    let point = cfg.grid.parse_point(&value).context("invalid point")?;

    // `awgn` is always available as an ad-hoc system so single points can be
    // probed without editing the campaign file.
    let sys = if args.system == "awgn" && cfg.system("awgn").is_err() {
        let mut s = cfg.systems[0].config.clone();
        s.channel = ChannelModel::awgn_at_es_n0_db(args.es_n0_db.unwrap_or(10.0));
        s
    } else {
        cfg.system(&args.system)?.config.clone()
    };

    let key = point_key(&point);
    let seed = args
        .seed
        .unwrap_or_else(|| derive_seed(cfg.search.base_seed, &[key.as_str()]));
    let eval = evaluate_point(&point, &sys, seed)?;
    let out = serde_json::json!({
        "point": point.to_json(),
        "key": key,
        "system": args.system,
        "seed": seed,
        "score": eval.score,
        "failed": eval.failed,
        "diagnostics": eval.diagnostics,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
