//! Run configuration.
//!
//! A minimal config names a scene and a budget:
//!
//! ```json
//! {"scene_path": "scene.json", "budget_k": 6}
//! ```
//!
//! Everything else defaults to the 1 GHz / 125 kHz link budget, robust and
//! edge thresholds of -10 and -22 dB, free-space-plus-walls propagation and
//! an `output` directory next to the config file. Relative paths inside the
//! file resolve against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lora_place_core::{LinkBudget, Point2, PropagationConfig, Thresholds};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub ambient_temp_k: f64,
    pub impl_margin_db: f64,
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        LinkBudget::default().into()
    }
}

impl From<LinkBudget> for LinkBudgetParams {
    fn from(b: LinkBudget) -> Self {
        LinkBudgetParams {
            carrier_hz: b.carrier_hz,
            bandwidth_hz: b.bandwidth_hz,
            tx_power_dbm: b.tx_power_dbm,
            noise_figure_db: b.noise_figure_db,
            ambient_temp_k: b.ambient_temp_k,
            impl_margin_db: b.impl_margin_db,
        }
    }
}

impl From<LinkBudgetParams> for LinkBudget {
    fn from(p: LinkBudgetParams) -> Self {
        LinkBudget {
            carrier_hz: p.carrier_hz,
            bandwidth_hz: p.bandwidth_hz,
            tx_power_dbm: p.tx_power_dbm,
            noise_figure_db: p.noise_figure_db,
            ambient_temp_k: p.ambient_temp_k,
            impl_margin_db: p.impl_margin_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdParams {
    pub robust_db: f64,
    pub edge_db: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdParams {
            robust_db: t.robust_db,
            edge_db: t.edge_db,
        }
    }
}

impl From<ThresholdParams> for Thresholds {
    fn from(p: ThresholdParams) -> Self {
        Thresholds {
            robust_db: p.robust_db,
            edge_db: p.edge_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationParams {
    pub carrier_hz: f64,
    pub knife_edge_enabled: bool,
    pub min_distance_m: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        let c = PropagationConfig::default();
        PropagationParams {
            carrier_hz: c.carrier_hz,
            knife_edge_enabled: c.knife_edge_enabled,
            min_distance_m: c.min_distance_m,
        }
    }
}

impl From<PropagationParams> for PropagationConfig {
    fn from(p: PropagationParams) -> Self {
        PropagationConfig {
            carrier_hz: p.carrier_hz,
            knife_edge_enabled: p.knife_edge_enabled,
            min_distance_m: p.min_distance_m,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorMode {
    /// Every grid cell counts, building interiors included.
    #[default]
    AllCells,
    /// Cells whose center lies inside a footprint are dropped from both the
    /// coverage sets and the denominator.
    ExcludeBuildingInteriors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub name: String,
    pub position: [f64; 2],
}

impl SensorSpec {
    pub fn point(&self) -> Point2 {
        Point2::new(self.position[0], self.position[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene_path: PathBuf,
    /// Precomputed gain grids by site id (PGG1, or header-less CSV when the
    /// extension is `.csv`). Sites not listed are computed.
    #[serde(default)]
    pub imported_gain_paths: BTreeMap<usize, PathBuf>,
    #[serde(default)]
    pub link_budget: LinkBudgetParams,
    #[serde(default)]
    pub thresholds: ThresholdParams,
    #[serde(default)]
    pub propagation: PropagationParams,
    pub budget_k: usize,
    /// SNR threshold used for coverage and placement. Defaults to the
    /// robust threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_threshold_db: Option<f64>,
    #[serde(default)]
    pub denominator_mode: DenominatorMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sensors: Vec<SensorSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub threshold_db: Option<f64>,
    pub budget: Option<usize>,
    /// Output directory, relative to the working directory.
    pub out: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn gamma_db(&self) -> f64 {
        self.analysis_threshold_db
            .unwrap_or(self.thresholds.robust_db)
    }

    pub fn link_budget(&self) -> LinkBudget {
        self.link_budget.into()
    }

    pub fn propagation(&self) -> PropagationConfig {
        self.propagation.into()
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.threshold_db {
            self.analysis_threshold_db = Some(g);
        }
        if let Some(k) = o.budget {
            self.budget_k = k;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
    }

    /// Checks the scene-independent parts of the config.
    pub fn validate(&self) -> Result<()> {
        if self.budget_k == 0 {
            return Err(bad("budget_k must be at least 1"));
        }
        self.link_budget()
            .validate()
            .map_err(|e| bad(format!("link_budget: {e}")))?;
        Thresholds::from(self.thresholds)
            .validate()
            .map_err(|e| bad(format!("thresholds: {e}")))?;
        self.propagation()
            .validate()
            .map_err(|e| bad(format!("propagation: {e}")))?;
        if self.link_budget.carrier_hz != self.propagation.carrier_hz {
            return Err(bad(format!(
                "link_budget.carrier_hz ({}) and propagation.carrier_hz ({}) differ",
                self.link_budget.carrier_hz, self.propagation.carrier_hz
            )));
        }
        if !self.gamma_db().is_finite() {
            return Err(bad("analysis threshold must be finite"));
        }
        for s in &self.sensors {
            if !s.position.iter().all(|v| v.is_finite()) {
                return Err(bad(format!("sensor {:?}: non-finite position", s.name)));
            }
        }
        Ok(())
    }
}

/// A config loaded from disk, with paths resolved.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    /// The effective config (file plus overrides), as echoed in reports.
    pub config: RunConfig,
    pub scene_path: PathBuf,
    pub imported: BTreeMap<usize, PathBuf>,
    pub output_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut config = RunConfig::parse(&text, path)?;
        config.apply(overrides);
        config.validate()?;
        let base = path.parent().unwrap_or(Path::new(""));
        let output_dir = match &overrides.out {
            Some(out) => out.clone(),
            None => base.join(&config.output_dir),
        };
        Ok(LoadedConfig {
            scene_path: base.join(&config.scene_path),
            imported: config
                .imported_gain_paths
                .iter()
                .map(|(&id, p)| (id, base.join(p)))
                .collect(),
            output_dir,
            config,
        })
    }
}
