//! Experiment configuration: TOML schema, command-line overrides, and the
//! mapping onto the library's Monte Carlo configuration.
//!
//! Every field is optional in the file; the defaults reproduce the
//! full-scale experiment design. Command-line overrides win over file
//! values, and the `LPGARCH_WORKERS` environment variable sits between the
//! two for the worker count.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use lp_garch::mc::ModelId;
use lp_garch::{McConfig64, OptimizerConfig};

/// On-disk experiment configuration (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    /// AR coefficients of the data-generating process.
    pub beta1_grid: Vec<f64>,
    /// Squared-innovation coefficients of the variance recursion.
    pub alpha2_grid: Vec<f64>,
    /// Lagged-variance coefficient (fixed across the grid).
    pub alpha1: f64,
    /// Variance intercept.
    pub gamma: f64,
    /// Mean intercept.
    pub beta0: f64,
    /// Sample lengths.
    pub t_grid: Vec<usize>,
    /// Replications per grid cell.
    pub replications: u32,
    /// Maximum projection horizon.
    pub horizons: usize,
    /// Estimators to run (`lp`, `lp-garch`, `lp-garchx`, `lp-garch-har`,
    /// `truth`).
    pub models: Vec<String>,
    /// Master seed; every replication seed derives from it.
    pub master_seed: u64,
    /// Worker threads (0 = one per core).
    pub workers: usize,
    pub optimizer: OptimizerFileConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerFileConfig {
    pub ftol: f64,
    pub max_evals: usize,
    pub max_restarts: usize,
    pub jitter_seed: u64,
}

impl Default for OptimizerFileConfig {
    fn default() -> Self {
        let base = OptimizerConfig::default();
        Self {
            ftol: base.ftol,
            max_evals: base.max_evals,
            max_restarts: base.max_restarts,
            jitter_seed: base.jitter_seed,
        }
    }
}

impl Default for FileConfig {
    fn default() -> Self {
        let base = McConfig64::default();
        Self {
            beta1_grid: base.beta1_grid,
            alpha2_grid: base.alpha2_grid,
            alpha1: base.alpha1,
            gamma: base.gamma,
            beta0: base.beta0,
            t_grid: base.t_grid,
            replications: base.replications,
            horizons: base.horizons,
            models: base.models.iter().map(|m| model_key(*m).to_string()).collect(),
            master_seed: base.master_seed,
            workers: base.workers,
            optimizer: OptimizerFileConfig::default(),
        }
    }
}

/// Lower-case key used for a model in config files and `--models` lists.
pub fn model_key(model: ModelId) -> &'static str {
    match model {
        ModelId::Lp => "lp",
        ModelId::LpGarch => "lp-garch",
        ModelId::LpGarchX => "lp-garchx",
        ModelId::LpGarchHar => "lp-garch-har",
        ModelId::Truth => "truth",
    }
}

/// Command-line overrides applied on top of the file configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub replications: Option<u32>,
    pub workers: Option<usize>,
    pub master_seed: Option<u64>,
    pub models: Option<String>,
    pub horizons: Option<usize>,
    pub t_grid: Option<String>,
}

impl FileConfig {
    /// Load from a TOML file; parse errors name the offending field.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        Ok(cfg)
    }

    /// Apply command-line overrides and the `LPGARCH_WORKERS` environment
    /// variable (flag wins over environment wins over file).
    pub fn apply_overrides(&mut self, ov: &Overrides) -> Result<()> {
        if let Ok(env_workers) = std::env::var("LPGARCH_WORKERS") {
            self.workers = env_workers
                .parse()
                .context("LPGARCH_WORKERS must be an unsigned integer")?;
        }
        if let Some(r) = ov.replications {
            self.replications = r;
        }
        if let Some(w) = ov.workers {
            self.workers = w;
        }
        if let Some(s) = ov.master_seed {
            self.master_seed = s;
        }
        if let Some(h) = ov.horizons {
            self.horizons = h;
        }
        if let Some(models) = &ov.models {
            let keys: Vec<String> = models
                .split(',')
                .map(|m| m.trim().to_string())
                .filter(|m| !m.is_empty())
                .collect();
            if keys.is_empty() {
                bail!("--models must list at least one model");
            }
            self.models = keys;
        }
        if let Some(ts) = &ov.t_grid {
            let grid: Vec<usize> = ts
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .with_context(|| format!("invalid sample length '{t}' in --T"))
                })
                .collect::<Result<_>>()?;
            if grid.is_empty() {
                bail!("--T must list at least one sample length");
            }
            self.t_grid = grid;
        }
        Ok(())
    }

    /// Convert to the library configuration, validating model names.
    pub fn to_mc_config(&self) -> Result<McConfig64> {
        let mut models = Vec::with_capacity(self.models.len());
        for key in &self.models {
            let id = ModelId::from_str(key)
                .with_context(|| format!("invalid model '{key}' in configuration"))?;
            if !models.contains(&id) {
                models.push(id);
            }
        }
        Ok(McConfig64 {
            beta1_grid: self.beta1_grid.clone(),
            alpha2_grid: self.alpha2_grid.clone(),
            alpha1: self.alpha1,
            gamma: self.gamma,
            beta0: self.beta0,
            t_grid: self.t_grid.clone(),
            replications: self.replications,
            horizons: self.horizons,
            models,
            master_seed: self.master_seed,
            workers: self.workers,
            optimizer: OptimizerConfig {
                ftol: self.optimizer.ftol,
                max_evals: self.optimizer.max_evals,
                max_restarts: self.optimizer.max_restarts,
                jitter_seed: self.optimizer.jitter_seed,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_full_scale_design() {
        let cfg = FileConfig::default();
        assert_eq!(cfg.beta1_grid, vec![0.6, 0.8, 0.9, 0.95]);
        assert_eq!(cfg.alpha2_grid, vec![0.3, 0.4, 0.48]);
        assert_eq!(cfg.t_grid, vec![500, 1000, 2000, 5000]);
        assert_eq!(cfg.replications, 500);
        assert_eq!(cfg.horizons, 24);
        assert_eq!(cfg.models.len(), 5);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = toml::from_str::<FileConfig>("replicationz = 5").unwrap_err();
        assert!(err.to_string().contains("replicationz"), "{err}");
    }

    #[test]
    fn overrides_win_over_file_values() {
        let mut cfg = FileConfig {
            replications: 500,
            ..FileConfig::default()
        };
        cfg.apply_overrides(&Overrides {
            replications: Some(10),
            models: Some("lp,truth".into()),
            t_grid: Some("500, 2000".into()),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(cfg.replications, 10);
        assert_eq!(cfg.models, vec!["lp", "truth"]);
        assert_eq!(cfg.t_grid, vec![500, 2000]);
    }

    #[test]
    fn bad_model_name_is_reported() {
        let cfg = FileConfig {
            models: vec!["var".into()],
            ..FileConfig::default()
        };
        assert!(cfg.to_mc_config().is_err());
    }
}
