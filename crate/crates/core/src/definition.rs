//! Fractal definition files.
//!
//! ```toml
//! name = "gasket2"
//! dimension = 2
//! scale = 2.0
//!
//! [[maps]]
//! rotation = [[1.0, 0.0], [0.0, 1.0]]   # row-major N x N
//! translation = [0.0, 0.0]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{FractalError, Result};
use crate::ifs::{FractalSystem, Similitude};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDefinition {
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalDefinition {
    pub name: String,
    pub dimension: usize,
    pub scale: f64,
    pub maps: Vec<MapDefinition>,
}

impl FractalDefinition {
    pub fn parse(text: &str) -> Result<Self> {
        let def: Self = toml::from_str(text).map_err(|e| FractalError::Parse(e.to_string()))?;
        for (i, m) in def.maps.iter().enumerate() {
            if m.translation.len() != def.dimension
                || m.rotation.len() != def.dimension
                || m.rotation.iter().any(|r| r.len() != def.dimension)
            {
                return Err(FractalError::Parse(format!(
                    "map {i} does not match dimension {}",
                    def.dimension
                )));
            }
        }
        Ok(def)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("definition serializes")
    }

    pub fn similitudes(&self) -> Result<Vec<Similitude>> {
        self.maps
            .iter()
            .map(|m| Similitude::from_rows(self.scale, &m.rotation, &m.translation))
            .collect()
    }

    /// Builds and validates the system through `max_level`.
    pub fn build(&self, max_level: usize) -> Result<FractalSystem> {
        Ok(FractalSystem::build(self.similitudes()?, max_level)?.with_name(self.name.clone()))
    }

    pub fn from_system(system: &FractalSystem) -> Self {
        Self {
            name: system.name().to_string(),
            dimension: system.dim(),
            scale: system.scale(),
            maps: system
                .maps()
                .iter()
                .map(|m| MapDefinition {
                    rotation: m.rotation_rows(),
                    translation: m.translation().iter().copied().collect(),
                })
                .collect(),
        }
    }
}
