use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::MappingScheme;
use crate::xbar::{AdcConfig, CrossbarConfig, Resolution};

/// A grid sweep, usually read from TOML:
///
/// ```toml
/// model = "crates/core/data/digits_mlp.toml"
/// dataset = "crates/core/data/digits_test.bin"
/// samples = 200                 # optional, default: whole dataset
/// mappings = ["bnn-v", "bnn-vi"]
/// adc_bits = ["inf", 3]
/// alphas = [1.0, 0.25]
/// sigma_lrs = [0.0]
/// sigma_hrs = [0.0, 5.0]
/// currents = [[5.0, 30.0]]      # (i_hrs, i_lrs) pairs, µA
/// trials = 5
/// seed = 1
/// rows = 256
/// cols = 256
/// tile = [64, 64]               # optional (m_int, n_int)
/// ```
///
/// Paths are used as written, i.e. relative to the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: PathBuf,
    pub dataset: PathBuf,
    #[serde(default)]
    pub samples: Option<usize>,
    pub mappings: Vec<MappingScheme>,
    pub adc_bits: Vec<Resolution>,
    pub alphas: Vec<f64>,
    pub sigma_lrs: Vec<f64>,
    pub sigma_hrs: Vec<f64>,
    pub currents: Vec<(f64, f64)>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub rows: usize,
    #[serde(default = "default_dim")]
    pub cols: usize,
    #[serde(default)]
    pub tile: Option<(usize, usize)>,
    #[serde(default)]
    pub host_first_layer: bool,
}

fn default_dim() -> usize {
    256
}

/// One grid point. `index` is its position in the canonical enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub mapping: MappingScheme,
    pub i_hrs: f64,
    pub i_lrs: f64,
    pub sigma_lrs: f64,
    pub sigma_hrs: f64,
    pub adc_bits: Resolution,
    pub alpha: f64,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SweepConfig =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        cfg.validate()
            .map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("mappings", self.mappings.is_empty()),
            ("adc_bits", self.adc_bits.is_empty()),
            ("alphas", self.alphas.is_empty()),
            ("sigma_lrs", self.sigma_lrs.is_empty()),
            ("sigma_hrs", self.sigma_hrs.is_empty()),
            ("currents", self.currents.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("`{name}` must not be empty")));
        }
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be at least 1".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::Config("`samples` must be at least 1".into()));
        }
        if let Some((m, n)) = self.tile {
            if m == 0 || n == 0 || n > self.rows || m > self.cols {
                return Err(Error::Config(format!(
                    "tile {m}x{n} must be positive and fit the {}x{} crossbar",
                    self.rows, self.cols
                )));
            }
        }
        // every point must yield a valid crossbar
        for point in self.points() {
            self.crossbar_config(&point, 0)?;
        }
        Ok(())
    }

    /// Number of grid points (the Cartesian product size).
    pub fn point_count(&self) -> usize {
        self.mappings.len()
            * self.currents.len()
            * self.sigma_lrs.len()
            * self.sigma_hrs.len()
            * self.adc_bits.len()
            * self.alphas.len()
    }

    /// All points; mapping varies slowest and α fastest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.point_count());
        for &mapping in &self.mappings {
            for &(i_hrs, i_lrs) in &self.currents {
                for &sigma_lrs in &self.sigma_lrs {
                    for &sigma_hrs in &self.sigma_hrs {
                        for &adc_bits in &self.adc_bits {
                            for &alpha in &self.alphas {
                                out.push(SweepPoint {
                                    index: out.len(),
                                    mapping,
                                    i_hrs,
                                    i_lrs,
                                    sigma_lrs,
                                    sigma_hrs,
                                    adc_bits,
                                    alpha,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Crossbar parameters for one point with the given seed.
    pub fn crossbar_config(&self, point: &SweepPoint, seed: u64) -> Result<CrossbarConfig> {
        let cfg = CrossbarConfig {
            rows: self.rows,
            cols: self.cols,
            i_hrs: point.i_hrs,
            i_lrs: point.i_lrs,
            sigma_hrs: point.sigma_hrs,
            sigma_lrs: point.sigma_lrs,
            adc: AdcConfig::new(point.adc_bits, point.alpha)?,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
