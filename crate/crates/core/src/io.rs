//! JSON files for spaces and martingales.
//!
//! A space file lists the coordinates; each coordinate gives its weights and
//! the partitions `P_0, ..., P_N` as lists of cells of point indices:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "coordinates": [
//!     { "weights": [0.5, 0.5], "partitions": [[[0, 1]], [[0], [1]]] }
//!   ]
//! }
//! ```
//!
//! A martingale file embeds a space and the terminal values `f_N` in product
//! order (first coordinate fastest); the martingale is `f_n = E_n f_N`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::Martingale;
use crate::space::{CoordinateSpace, ProductFilteredSpace, RandomVariable};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateDescription {
    pub weights: Vec<f64>,
    pub partitions: Vec<Vec<Vec<usize>>>,
    /// Optional point labels; defaults to `0, 1, 2, ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescription {
    pub schema_version: u32,
    pub coordinates: Vec<CoordinateDescription>,
}

impl SpaceDescription {
    pub fn describe(space: &ProductFilteredSpace) -> Self {
        let coordinates = space
            .coords()
            .iter()
            .map(|c| CoordinateDescription {
                weights: c.probs().to_vec(),
                partitions: c.partitions().to_vec(),
                points: Some(c.points().to_vec()),
            })
            .collect();
        Self { schema_version: SCHEMA_VERSION, coordinates }
    }

    pub fn build(&self) -> Result<Arc<ProductFilteredSpace>> {
        check_version(self.schema_version)?;
        let coords = self
            .coordinates
            .iter()
            .map(|c| {
                let points = c.points.clone().unwrap_or_else(|| (0..c.weights.len()).map(|i| i as f64).collect());
                CoordinateSpace::new(points, c.weights.clone(), c.partitions.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(ProductFilteredSpace::new(coords)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleFile {
    pub schema_version: u32,
    pub space: SpaceDescription,
    pub terminal: Vec<f64>,
}

impl MartingaleFile {
    pub fn describe(f: &Martingale) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            space: SpaceDescription::describe(f.space()),
            terminal: f.terminal().into_values(),
        }
    }

    pub fn build(&self) -> Result<Martingale> {
        check_version(self.schema_version)?;
        let space = self.space.build()?;
        Ok(Martingale::from_terminal(&RandomVariable::new(space, self.terminal.clone())?))
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

pub fn load_space(path: &Path) -> Result<Arc<ProductFilteredSpace>> {
    let desc: SpaceDescription = serde_json::from_str(&fs::read_to_string(path)?)?;
    desc.build()
}

pub fn save_space(space: &ProductFilteredSpace, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&SpaceDescription::describe(space))?)?;
    Ok(())
}

pub fn load_martingale(path: &Path) -> Result<Martingale> {
    let file: MartingaleFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.build()
}

pub fn save_martingale(f: &Martingale, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&MartingaleFile::describe(f))?)?;
    Ok(())
}
