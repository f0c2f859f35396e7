//! JSON run configuration.
//!
//! ```json
//! {
//!   "problem": { "kind": "ac1d", "epsilon": 0.02 },
//!   "network": { "backend": "kan", "widths": [1, 8, 8, 1] },
//!   "evolution": { "dt": 2e-4, "t_final": 1.0 },
//!   "sweep": [0.02, 0.01]
//! }
//! ```
//!
//! Unknown keys are rejected at every level. `sweep` replaces `epsilon`
//! (Allen-Cahn) or `nu` (Navier-Stokes) and expands into one child run per value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::{CollocationMode, CollocationSet, EvolutionConfig, FitConfig};
use crate::kan::{Backend, Embedding, NetworkSpec, ScaleMode};
use crate::problems::allen_cahn::{AMPLITUDE_2D, DEFAULT_AMPLITUDE};
use crate::problems::{AllenCahnSpec, NavierStokesSpec, NseInitialCondition, ProblemSpec};
use crate::spectral::BenchmarkConfig;

fn default_amplitude_1d() -> f64 {
    DEFAULT_AMPLITUDE
}
fn default_amplitude_2d() -> f64 {
    AMPLITUDE_2D
}
fn default_alpha() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Ac1d {
        epsilon: f64,
        #[serde(default = "default_amplitude_1d")]
        amplitude: f64,
    },
    Ac2d {
        epsilon: f64,
        #[serde(default = "default_alpha")]
        alpha: u32,
        #[serde(default = "default_amplitude_2d")]
        amplitude: f64,
    },
    Nse2d {
        nu: f64,
        #[serde(default)]
        ic: NseInitialCondition,
    },
}

impl ProblemConfig {
    pub fn spec(&self) -> ProblemSpec {
        match *self {
            ProblemConfig::Ac1d { epsilon, amplitude } => ProblemSpec::AllenCahn(AllenCahnSpec {
                amplitude,
                ..AllenCahnSpec::one_d(epsilon)
            }),
            ProblemConfig::Ac2d {
                epsilon,
                alpha,
                amplitude,
            } => ProblemSpec::AllenCahn(AllenCahnSpec {
                amplitude,
                ..AllenCahnSpec::two_d(epsilon, alpha)
            }),
            ProblemConfig::Nse2d { nu, ic } => ProblemSpec::NavierStokes(NavierStokesSpec { nu, ic }),
        }
    }

    /// Name and value of the parameter a sweep varies.
    pub fn parameter(&self) -> (&'static str, f64) {
        match *self {
            ProblemConfig::Ac1d { epsilon, .. } | ProblemConfig::Ac2d { epsilon, .. } => ("epsilon", epsilon),
            ProblemConfig::Nse2d { nu, .. } => ("nu", nu),
        }
    }

    pub fn with_parameter(mut self, value: f64) -> Self {
        match &mut self {
            ProblemConfig::Ac1d { epsilon, .. } | ProblemConfig::Ac2d { epsilon, .. } => *epsilon = value,
            ProblemConfig::Nse2d { nu, .. } => *nu = value,
        }
        self
    }

    pub fn dim(&self) -> usize {
        match self {
            ProblemConfig::Ac1d { .. } => 1,
            _ => 2,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            ProblemConfig::Nse2d { .. } => 2,
            _ => 1,
        }
    }

    /// Collocation and comparison grid points per axis.
    pub fn default_grid(&self) -> usize {
        match self {
            ProblemConfig::Ac1d { .. } => 256,
            _ => 64,
        }
    }
}

/// Network settings; anything omitted takes the per-problem default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub widths: Option<Vec<usize>>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub embedding: Option<Embedding>,
    #[serde(default)]
    pub scales: Option<ScaleMode>,
    #[serde(default)]
    pub full_hessian: Option<bool>,
}

impl NetworkConfig {
    pub fn spec(&self, problem: &ProblemConfig) -> NetworkSpec {
        let backend = self.backend.unwrap_or(Backend::Kan);
        let (d, m) = (problem.dim(), problem.components());
        let widths = self.widths.clone().unwrap_or_else(|| match (backend, problem) {
            (Backend::Mlp, _) => vec![d, 32, 32, m],
            (Backend::Kan, ProblemConfig::Nse2d { .. }) => vec![d, 10, 10, m],
            (Backend::Kan, _) => vec![d, 8, 8, m],
        });
        let mut spec = match backend {
            Backend::Kan => NetworkSpec::kan(widths),
            Backend::Mlp => NetworkSpec::mlp(widths),
        };
        if let Some(k) = self.order {
            spec.order = k;
        }
        if let Some(g) = self.grid {
            spec.grid = g;
        }
        if let Some(e) = self.embedding {
            spec.embedding = e;
        }
        if let Some(s) = self.scales {
            spec.scales = s;
        }
        if let Some(h) = self.full_hessian {
            spec.full_hessian = h;
        }
        spec
    }

    pub fn method_tag(&self) -> &'static str {
        match self.backend.unwrap_or(Backend::Kan) {
            Backend::Kan => "evokan",
            Backend::Mlp => "ednn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollocationConfig {
    UniformGrid { n: usize },
    /// Seeded from the run seed.
    UniformRandom { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    pub evolution: EvolutionConfig,
    /// `fit.seed` is overwritten by the run seed.
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub collocation: Option<CollocationConfig>,
    #[serde(default)]
    pub resample: bool,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    /// Seeds parameter initialization and random collocation.
    #[serde(default)]
    pub seed: u64,
    /// Default output directory when `--out` is not given.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Values of `epsilon` or `nu`, one child run each.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
}

impl RunConfig {
    /// Parse and validate. Errors carry the file name and the line/column.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::validation(origin.display().to_string(), e.to_string()))?;
        // A manifest from a previous run embeds the configuration it used.
        let text = match value.get("config") {
            Some(inner) if value.get("manifest_version").is_some() => inner.to_string(),
            _ => text.to_string(),
        };
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::validation(origin.display().to_string(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.spec().validate()?;
        self.evolution.validate()?;
        self.fit.validate()?;
        self.benchmark.validate(&self.problem.spec())?;
        crate::kan::Network::new(self.network.spec(&self.problem))?;
        let grid = self.grid_size();
        if grid < 16 || !grid.is_power_of_two() {
            return Err(Error::validation(
                "collocation.n",
                format!("comparison grid must be a power of two >= 16, got {grid}"),
            ));
        }
        if let ProblemConfig::Nse2d { .. } = self.problem {
            if matches!(self.collocation, Some(CollocationConfig::UniformRandom { .. })) || self.resample {
                return Err(Error::validation(
                    "collocation",
                    "Navier-Stokes needs fixed grid collocation for its pressure solve",
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(Error::validation("sweep", "must list at least one value"));
            }
            for &v in sweep {
                self.problem.with_parameter(v).spec().validate()?;
            }
        }
        Ok(())
    }

    /// Points per axis of the comparison grid (and of grid collocation).
    pub fn grid_size(&self) -> usize {
        match self.collocation {
            Some(CollocationConfig::UniformGrid { n }) => n,
            _ => self.problem.default_grid(),
        }
    }

    pub fn snapshot_shape(&self) -> Vec<usize> {
        vec![self.grid_size(); self.problem.dim()]
    }

    pub fn collocation_set(&self) -> Result<CollocationSet> {
        let mode = match self.collocation {
            Some(CollocationConfig::UniformRandom { count }) => CollocationMode::UniformRandom {
                count,
                seed: self.seed,
            },
            _ => CollocationMode::UniformGrid { n: self.grid_size() },
        };
        CollocationSet::new(mode, self.problem.dim(), self.resample)
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            seed: self.seed,
            ..self.fit
        }
    }

    /// One configuration per sweep value, with a directory name for each.
    /// Without a sweep the single child has an empty name.
    pub fn expand(&self) -> Vec<(String, RunConfig)> {
        match &self.sweep {
            None => vec![(String::new(), self.clone())],
            Some(values) => {
                let (name, _) = self.problem.parameter();
                values
                    .iter()
                    .map(|&v| {
                        let child = RunConfig {
                            problem: self.problem.with_parameter(v),
                            sweep: None,
                            ..self.clone()
                        };
                        (format!("{name}_{v}"), child)
                    })
                    .collect()
            }
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {"kind": "ac1d", "epsilon": 0.02},
        "evolution": {"dt": 0.001, "t_final": 0.01}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL, Path::new("c.json")).unwrap();
        assert_eq!(c.grid_size(), 256);
        assert_eq!(c.network.spec(&c.problem).widths, vec![1, 8, 8, 1]);
        assert_eq!(c.network.method_tag(), "evokan");
        assert_eq!(c.expand().len(), 1);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"epsilon\": 0.02", "\"epsilon\": 0.02, \"epsilonn\": 1");
        let err = RunConfig::parse(&text, Path::new("c.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilonn") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn zero_dt_names_the_field() {
        let text = MINIMAL.replace("\"dt\": 0.001", "\"dt\": 0");
        let msg = RunConfig::parse(&text, Path::new("c.json")).unwrap_err().to_string();
        assert!(msg.contains("evolution.dt"), "{msg}");
    }

    #[test]
    fn sweep_expands_with_names() {
        let text = MINIMAL.replace("\"evolution\"", "\"sweep\": [0.02, 0.01], \"evolution\"");
        let c = RunConfig::parse(&text, Path::new("c.json")).unwrap();
        let kids = c.expand();
        assert_eq!(kids[1].0, "epsilon_0.01");
        assert_eq!(kids[1].1.problem.parameter().1, 0.01);
        assert_ne!(kids[0].1.hash(), kids[1].1.hash());
    }

    #[test]
    fn nse_rejects_random_collocation() {
        let text = r#"{"problem": {"kind": "nse2d", "nu": 0.05},
            "evolution": {"dt": 0.001, "t_final": 0.01},
            "collocation": {"kind": "uniform_random", "count": 100}}"#;
        assert!(RunConfig::parse(text, Path::new("c.json")).is_err());
    }

    #[test]
    fn manifest_wrapping_is_unwrapped() {
        let c = RunConfig::parse(MINIMAL, Path::new("c.json")).unwrap();
        let m = serde_json::json!({"manifest_version": 1, "config": c});
        let back = RunConfig::parse(&m.to_string(), Path::new("manifest.json")).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }
}
