//! Campaign configuration: JSON file, `COORDTUNE_*` environment overrides,
//! and command-line overrides, with precedence CLI > env > file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use coordtune::channel::{ChannelModel, FiberParams, FsoParams};
use coordtune::grid::{default_grid, initial_point_on, HyperparamGrid, HyperparamPoint};
use coordtune::objective::SystemConfig;
use coordtune::tuner::{Method, SearchConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedSystem {
    pub name: String,
    #[serde(flatten)]
    pub config: SystemConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub systems: Vec<NamedSystem>,
    pub grid: HyperparamGrid,
    /// Flat point object; `null` means the published initial assignment.
    pub init: Option<serde_json::Value>,
    pub methods: Vec<Method>,
    pub search: SearchConfig,
    /// Trial budget for the random baseline.
    pub random_trials: usize,
    pub output_dir: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            systems: vec![
                NamedSystem {
                    name: "fso".to_string(),
                    config: SystemConfig::new(ChannelModel::Fso(
                        FsoParams::strong_turbulence_defaults(),
                    )),
                },
                NamedSystem {
                    name: "fiber".to_string(),
                    config: SystemConfig::new(ChannelModel::Fiber(FiberParams::table_defaults())),
                },
            ],
            grid: default_grid(),
            init: None,
            methods: vec![Method::Marginal, Method::Alternating],
            // single-step preset: the published sweep reports one step
            search: SearchConfig { max_steps: 1, ..SearchConfig::default() },
            random_trials: 76,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl CampaignConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(CampaignConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            bail!("config needs at least one system");
        }
        if self.methods.is_empty() {
            bail!("config needs at least one method");
        }
        for s in &self.systems {
            s.config
                .validate()
                .with_context(|| format!("system `{}`", s.name))?;
        }
        self.initial_point().context("init point")?;
        Ok(())
    }

    pub fn initial_point(&self) -> Result<HyperparamPoint> {
        match &self.init {
            Some(v) => Ok(self.grid.parse_point(v)?),
            None => Ok(initial_point_on(&self.grid)?),
        }
    }

    pub fn system(&self, name: &str) -> Result<&NamedSystem> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .with_context(|| format!("unknown system `{name}`"))
    }
}

/// One layer of overrides; env and CLI both produce one of these.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub methods: Option<Vec<Method>>,
    pub systems: Option<Vec<String>>,
    pub max_steps: Option<usize>,
    pub base_seed: Option<u64>,
    pub random_trials: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

pub fn parse_method(s: &str) -> Result<Method> {
    Ok(match s {
        "marginal" => Method::Marginal,
        "alternating" => Method::Alternating,
        "joint" => Method::Joint,
        "random" => Method::Random,
        other => bail!("unknown method `{other}` (expected marginal | alternating | joint | random)"),
    })
}

impl Overrides {
    pub fn from_env() -> Result<Self> {
        let var = |k: &str| std::env::var(format!("COORDTUNE_{k}")).ok();
        let mut o = Overrides::default();
        if let Some(v) = var("METHODS") {
            o.methods = Some(v.split(',').map(parse_method).collect::<Result<_>>()?);
        }
        if let Some(v) = var("SYSTEMS") {
            o.systems = Some(v.split(',').map(str::to_string).collect());
        }
        if let Some(v) = var("MAX_STEPS") {
            o.max_steps = Some(v.parse().context("COORDTUNE_MAX_STEPS")?);
        }
        if let Some(v) = var("BASE_SEED") {
            o.base_seed = Some(v.parse().context("COORDTUNE_BASE_SEED")?);
        }
        if let Some(v) = var("RANDOM_TRIALS") {
            o.random_trials = Some(v.parse().context("COORDTUNE_RANDOM_TRIALS")?);
        }
        if let Some(v) = var("OUTPUT_DIR") {
            o.output_dir = Some(PathBuf::from(v));
        }
        Ok(o)
    }

    pub fn apply(&self, cfg: &mut CampaignConfig) -> Result<()> {
        if let Some(methods) = &self.methods {
            cfg.methods = methods.clone();
        }
        if let Some(names) = &self.systems {
            for n in names {
                cfg.system(n)?;
            }
            cfg.systems.retain(|s| names.contains(&s.name));
        }
        if let Some(m) = self.max_steps {
            cfg.search.max_steps = m;
        }
        if let Some(s) = self.base_seed {
            cfg.search.base_seed = s;
        }
        if let Some(r) = self.random_trials {
            cfg.random_trials = r;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        Ok(())
    }
}

/// Resolves file config, then env, then CLI overrides, and validates.
pub fn resolve(
    path: Option<&PathBuf>,
    cli_overrides: &Overrides,
) -> Result<CampaignConfig> {
    let mut cfg = CampaignConfig::load(path)?;
    Overrides::from_env()?.apply(&mut cfg)?;
    cli_overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}
