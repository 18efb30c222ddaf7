//! Scenario files: which world to fly in and with which camera.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{generate_environment, EnvKind, EnvLayout, GeneratorOptions, GroundTruthEnv};
use crate::error::{Result, SimError};
use crate::sensor::SensorConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Procedural world. Without a fixed seed the run seed is used, so a
    /// multi-seed benchmark visits a different world per seed.
    Generated {
        kind: EnvKind,
        size: [f64; 3],
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        options: GeneratorOptions,
    },
    Explicit {
        layout: EnvLayout,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub environment: EnvSpec,
    #[serde(default)]
    pub sensor: SensorConfig,
}

impl Scenario {
    pub fn generated(name: &str, kind: EnvKind, size: [f64; 3]) -> Self {
        Self {
            name: name.to_string(),
            environment: EnvSpec::Generated {
                kind,
                size,
                seed: None,
                options: GeneratorOptions::default(),
            },
            sensor: SensorConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            SimError::Scenario(msg) => SimError::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(SimError::Scenario("scenario name is empty".into()));
        }
        self.sensor.validate()?;
        if let EnvSpec::Explicit { layout } = &self.environment {
            layout.validate()?;
        }
        Ok(())
    }

    /// Builds the ground truth for a run.
    pub fn build_env(&self, voxel_size: f64, run_seed: u64) -> Result<GroundTruthEnv> {
        match &self.environment {
            EnvSpec::Generated {
                kind,
                size,
                seed,
                options,
            } => generate_environment(*kind, *size, seed.unwrap_or(run_seed), voxel_size, options),
            EnvSpec::Explicit { layout } => GroundTruthEnv::rasterize(layout.clone(), voxel_size),
        }
    }
}
