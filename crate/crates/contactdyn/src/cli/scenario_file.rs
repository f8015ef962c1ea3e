//! Walking scenario files.
//!
//! ```toml
//! format = 1
//! name = "walk-0.5kmh"
//! preset = "surena-lower"
//! ground_height = 0.0
//! dt = 1e-5
//! decimation = 10
//! fall_fraction = 0.6
//!
//! [gait]
//! builtin = "walk-0.5kmh"
//! steps = 6
//!
//! [contact]
//! normal = "tanbarrier-table1"   # preset name, or `params = "file.toml"`
//! mu = 0.8
//! lambda = 0.01
//!
//! [controller]
//! type = "pd"                    # or "none"
//! # kp = [...13 values...]      # optional per-joint override
//! # kd = [...13 values...]
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::contact_models::{load_params_file, presets, FrictionModel};
use crate::gait::{GaitParams, GaitPlan};
use crate::kinetree::presets as tree_presets;
use crate::sim::{ControllerConfig, PdGains, WalkScenario};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("unsupported scenario format {0} (expected {SCENARIO_FORMAT_VERSION})")]
    Format(u32),
    #[error("scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
struct ScenarioFile {
    format: u32,
    #[allow(dead_code)]
    #[serde(default)]
    name: Option<String>,
    #[serde(default = "default_preset")]
    preset: String,
    #[serde(default)]
    ground_height: f64,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    duration: Option<f64>,
    #[serde(default)]
    decimation: Option<usize>,
    #[serde(default)]
    fall_fraction: Option<f64>,
    #[serde(default)]
    gait: GaitSection,
    #[serde(default)]
    contact: ContactSection,
    #[serde(default)]
    controller: ControllerSection,
}

fn default_preset() -> String {
    "surena-lower".into()
}

#[derive(Debug, Deserialize)]
struct GaitSection {
    #[serde(default = "default_gait")]
    builtin: String,
    #[serde(default = "default_steps")]
    steps: usize,
}

fn default_gait() -> String {
    "walk-0.5kmh".into()
}

fn default_steps() -> usize {
    6
}

impl Default for GaitSection {
    fn default() -> Self {
        GaitSection {
            builtin: default_gait(),
            steps: default_steps(),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
struct ContactSection {
    #[serde(default)]
    params: Option<String>,
    #[serde(default)]
    normal: Option<String>,
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default)]
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct ControllerSection {
    #[serde(rename = "type", default = "default_controller")]
    kind: String,
    #[serde(default)]
    kp: Option<Vec<f64>>,
    #[serde(default)]
    kd: Option<Vec<f64>>,
}

fn default_controller() -> String {
    "pd".into()
}

impl Default for ControllerSection {
    fn default() -> Self {
        ControllerSection {
            kind: default_controller(),
            kp: None,
            kd: None,
        }
    }
}

/// Load and resolve a walking scenario.
pub fn load_scenario_file(path: &Path) -> Result<WalkScenario, ScenarioFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|source| ScenarioFileError::Parse {
        path: path.display().to_string(),
        source: Box::new(source),
    })?;
    if file.format != SCENARIO_FORMAT_VERSION {
        return Err(ScenarioFileError::Format(file.format));
    }
    let tree = match file.preset.as_str() {
        "surena-lower" => tree_presets::surena_lower(),
        other => {
            return Err(ScenarioFileError::Invalid(format!(
                "walking scenarios require the surena-lower preset, got `{other}`"
            )))
        }
    };
    let params = match file.gait.builtin.as_str() {
        "walk-0.5kmh" => GaitParams::walk_half_kmh(file.gait.steps),
        "stand" => GaitParams::walk_half_kmh(0),
        other => {
            return Err(ScenarioFileError::Invalid(format!(
                "unknown builtin gait `{other}`"
            )))
        }
    };
    let plan = GaitPlan::new(&tree, params)
        .map_err(|e| ScenarioFileError::Invalid(e.to_string()))?;
    let mut scenario = WalkScenario::new(plan);

    if let Some(params_path) = &file.contact.params {
        let resolved = path
            .parent()
            .map(|dir| dir.join(params_path))
            .unwrap_or_else(|| params_path.into());
        let (normal, friction) =
            load_params_file(&resolved).map_err(|e| ScenarioFileError::Invalid(e.to_string()))?;
        scenario.normal = normal;
        scenario.friction = friction;
    }
    if let Some(name) = &file.contact.normal {
        scenario.normal = presets::normal_by_name(name).ok_or_else(|| {
            ScenarioFileError::Invalid(format!("unknown normal model preset `{name}`"))
        })?;
    }
    if file.contact.mu.is_some() || file.contact.lambda.is_some() {
        let mu = file.contact.mu.unwrap_or(0.8);
        let lambda = file.contact.lambda.unwrap_or(0.01);
        scenario.friction = FrictionModel::PseudoCoulomb { mu, lambda };
    }
    scenario.ground_height = file.ground_height;
    if let Some(dt) = file.dt {
        scenario.dt = dt;
    }
    if let Some(duration) = file.duration {
        scenario.duration = duration;
    }
    if let Some(decimation) = file.decimation {
        scenario.decimation = decimation;
    }
    if let Some(fall) = file.fall_fraction {
        scenario.fall_fraction = fall;
    }
    scenario.controller = match file.controller.kind.as_str() {
        "none" => ControllerConfig::None,
        "pd" => {
            let mut gains = PdGains::surena_default();
            if let Some(kp) = file.controller.kp {
                if kp.len() != gains.kp.len() {
                    return Err(ScenarioFileError::Invalid(format!(
                        "kp needs {} entries, got {}",
                        gains.kp.len(),
                        kp.len()
                    )));
                }
                gains.kp = nalgebra::DVector::from_vec(kp);
            }
            if let Some(kd) = file.controller.kd {
                if kd.len() != gains.kd.len() {
                    return Err(ScenarioFileError::Invalid(format!(
                        "kd needs {} entries, got {}",
                        gains.kd.len(),
                        kd.len()
                    )));
                }
                gains.kd = nalgebra::DVector::from_vec(kd);
            }
            ControllerConfig::Pd { gains }
        }
        other => {
            return Err(ScenarioFileError::Invalid(format!(
                "unknown controller type `{other}`"
            )))
        }
    };
    Ok(scenario)
}
