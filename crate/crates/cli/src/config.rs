//! Run configuration: a JSON file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use levyme::{fixtures, Error, LevyModel64, MeDist64, Result};
use serde::Deserialize;

pub const SEED_ENV: &str = "LEVYME_SEED";

/// A horizon given either as a spec string or inline.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(
    untagged,
    expecting = "horizon: a spec string or an object with alpha, generator and optional exit"
)]
pub enum HorizonSpec {
    Named(String),
    Inline {
        alpha: Vec<f64>,
        generator: Vec<Vec<f64>>,
        /// Defaults to `−T·1`.
        #[serde(default)]
        exit: Option<Vec<f64>>,
    },
}

impl HorizonSpec {
    pub fn build(&self) -> Result<MeDist64> {
        match self {
            Self::Named(s) => fixtures::parse_horizon(s),
            Self::Inline {
                alpha,
                generator,
                exit: Some(exit),
            } => MeDist64::new(alpha.clone(), generator.clone(), exit.clone()),
            Self::Inline {
                alpha,
                generator,
                exit: None,
            } => MeDist64::with_exit_from_rows(alpha.clone(), generator.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub op: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    #[serde(default)]
    pub params: std::collections::BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Mc {
    pub enabled: Option<bool>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub horizon_cap: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub horizon: Option<HorizonSpec>,
    #[serde(default)]
    pub query: Query,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub mc: Mc,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("{origin}:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn model(&self) -> Result<LevyModel64> {
        fixtures::parse_model(self.model.as_deref().unwrap_or("stable:1.5"))
    }

    pub fn horizon(&self) -> Result<MeDist64> {
        match &self.horizon {
            Some(h) => h.build(),
            None => Ok(fixtures::worked_example()),
        }
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }

    /// Simulation settings; `LEVYME_SEED` beats the seed in the file.
    pub fn sim_config(&self) -> Result<levyme::mc::SimConfig> {
        let mut c = levyme::mc::SimConfig::default();
        if let Some(p) = self.mc.paths {
            c.paths = p;
        }
        if let Some(s) = self.mc.seed {
            c.seed = s;
        }
        if let Some(h) = self.mc.step {
            c.step = h;
        }
        if let Some(h) = self.mc.horizon_cap {
            c.horizon_cap = h;
        }
        if let Ok(s) = std::env::var(SEED_ENV) {
            c.seed = s.trim().parse().map_err(|e| Error::Parse {
                location: SEED_ENV.into(),
                message: format!("'{s}': {e}"),
            })?;
        }
        Ok(c)
    }
}
