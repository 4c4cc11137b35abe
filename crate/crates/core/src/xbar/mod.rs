//! Analog model of one binary RRAM crossbar.
//!
//! Everything here is expressed in cell read currents (microamperes). Inputs
//! drive rows, each column sums the currents of its driven cells, and an ADC
//! converts either a single column or the analog difference of a column pair.

mod adc;

pub use adc::{adc_convert, AdcConfig, AdcMode, Resolution};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and electrical parameters of a crossbar.
///
/// `rows` x `cols` is the size of one cell plane. A mapping that needs several
/// cells per weight allocates one plane per cell, so a 256x256 logical tile
/// fits a 256x256 crossbar under every mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossbarConfig {
    pub rows: usize,
    pub cols: usize,
    /// Nominal high-resistance-state read current, µA.
    pub i_hrs: f64,
    /// Nominal low-resistance-state read current, µA.
    pub i_lrs: f64,
    #[serde(default)]
    pub sigma_hrs: f64,
    #[serde(default)]
    pub sigma_lrs: f64,
    #[serde(default)]
    pub adc: AdcConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        CrossbarConfig {
            rows: 256,
            cols: 256,
            i_hrs: 5.0,
            i_lrs: 10.0,
            sigma_hrs: 0.0,
            sigma_lrs: 0.0,
            adc: AdcConfig::ideal(),
            seed: 0,
        }
    }
}

impl CrossbarConfig {
    /// Noise-free crossbar with an ideal ADC.
    pub fn ideal(rows: usize, cols: usize, i_hrs: f64, i_lrs: f64) -> Self {
        CrossbarConfig {
            rows,
            cols,
            i_hrs,
            i_lrs,
            ..CrossbarConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config(format!(
                "crossbar dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.i_hrs > 0.0 && self.i_hrs < self.i_lrs && self.i_lrs.is_finite()) {
            return Err(Error::Config(format!(
                "read currents must satisfy 0 < i_hrs < i_lrs, got i_hrs={} i_lrs={}",
                self.i_hrs, self.i_lrs
            )));
        }
        if !(self.sigma_hrs >= 0.0 && self.sigma_lrs >= 0.0) {
            return Err(Error::Config(format!(
                "cell sigmas must be non-negative, got sigma_hrs={} sigma_lrs={}",
                self.sigma_hrs, self.sigma_lrs
            )));
        }
        self.adc.validate()
    }

    /// `I_lrs - I_hrs`, the current swing that carries one digital unit.
    pub fn i_mm(&self) -> f64 {
        self.i_lrs - self.i_hrs
    }

    pub fn is_noise_free(&self) -> bool {
        self.sigma_hrs == 0.0 && self.sigma_lrs == 0.0
    }

    /// ADC full-scale current for `driven_rows` rows in the given mode.
    pub fn i_max(&self, mode: AdcMode, driven_rows: usize) -> f64 {
        let n = driven_rows.max(1) as f64;
        match mode {
            AdcMode::Differential => n * self.i_mm(),
            AdcMode::SingleEnded => n * self.i_lrs,
        }
    }
}

/// Dense row-major matrix of binary cell targets or drive bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for &b in row {
                match b {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    other => {
                        return Err(Error::Encoding {
                            value: other as i32,
                            index: bits.len(),
                            alphabet: "{0,1}",
                        })
                    }
                }
            }
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            bits,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }
}

/// Programmed read currents of one cell plane, row-major, µA.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogTile {
    rows: usize,
    cols: usize,
    currents: Vec<f64>,
}

impl AnalogTile {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn current(&self, row: usize, col: usize) -> f64 {
        self.currents[row * self.cols + col]
    }

    pub fn currents(&self) -> &[f64] {
        &self.currents
    }

    /// Adds this plane's column currents for `drive` into `out`.
    ///
    /// Planes that share a bitline are read by accumulating into one buffer.
    pub fn accumulate_columns(&self, drive: &[bool], out: &mut [f64]) -> Result<()> {
        if drive.len() != self.rows {
            return Err(Error::shape(format!(
                "drive has {} entries for a tile with {} rows",
                drive.len(),
                self.rows
            )));
        }
        if out.len() != self.cols {
            return Err(Error::shape(format!(
                "output buffer has {} entries for a tile with {} columns",
                out.len(),
                self.cols
            )));
        }
        for (row, _) in drive.iter().enumerate().filter(|(_, d)| **d) {
            let cells = &self.currents[row * self.cols..(row + 1) * self.cols];
            for (acc, c) in out.iter_mut().zip(cells) {
                *acc += c;
            }
        }
        Ok(())
    }
}

fn sample_level<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    // sigma was validated as finite and non-negative
    let normal = Normal::new(mean, sigma).expect("valid normal parameters");
    normal.sample(rng).max(0.0)
}

/// Programs `target` (1 = LRS, 0 = HRS) and samples each cell's read current
/// once, clamping negative samples to zero.
pub fn program_cells<R: Rng + ?Sized>(
    target: &BitMatrix,
    cfg: &CrossbarConfig,
    rng: &mut R,
) -> Result<AnalogTile> {
    if target.rows() > cfg.rows || target.cols() > cfg.cols {
        return Err(Error::TileTooLarge {
            rows: target.rows(),
            cols: target.cols(),
            cap_rows: cfg.rows,
            cap_cols: cfg.cols,
        });
    }
    let currents = target
        .bits
        .iter()
        .map(|&lrs| {
            if lrs {
                sample_level(cfg.i_lrs, cfg.sigma_lrs, rng)
            } else {
                sample_level(cfg.i_hrs, cfg.sigma_hrs, rng)
            }
        })
        .collect();
    Ok(AnalogTile {
        rows: target.rows(),
        cols: target.cols(),
        currents,
    })
}

/// Ideal Kirchhoff column sums: `out[j] = sum_i drive[i] * currents[i][j]`.
pub fn column_currents(tile: &AnalogTile, drive: &[bool]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; tile.cols()];
    tile.accumulate_columns(drive, &mut out)?;
    Ok(out)
}

/// Subtracts paired columns in the analog domain, then converts each
/// difference with the ADC.
pub fn differential_read(
    plus: &AnalogTile,
    minus: &AnalogTile,
    drive: &[bool],
    i_max: f64,
    adc: &AdcConfig,
) -> Result<Vec<f64>> {
    if plus.cols() != minus.cols() || plus.rows() != minus.rows() {
        return Err(Error::shape(format!(
            "paired tiles differ: {}x{} vs {}x{}",
            plus.rows(),
            plus.cols(),
            minus.rows(),
            minus.cols()
        )));
    }
    let pos = column_currents(plus, drive)?;
    let neg = column_currents(minus, drive)?;
    Ok(pos
        .iter()
        .zip(&neg)
        .map(|(p, n)| adc_convert(p - n, i_max, adc))
        .collect())
}

/// Converts each single column current with the ADC.
pub fn single_ended_read(
    tile: &AnalogTile,
    drive: &[bool],
    i_max: f64,
    adc: &AdcConfig,
) -> Result<Vec<f64>> {
    Ok(column_currents(tile, drive)?
        .into_iter()
        .map(|x| adc_convert(x, i_max, adc))
        .collect())
}

/// A crossbar instance: its configuration plus the RNG stream that every
/// programming operation draws cell samples from.
#[derive(Debug, Clone)]
pub struct Crossbar {
    cfg: CrossbarConfig,
    rng: ChaCha8Rng,
}

impl Crossbar {
    pub fn new(cfg: CrossbarConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Crossbar { cfg, rng })
    }

    /// Same configuration with an explicit seed, ignoring `cfg.seed`.
    pub fn with_seed(cfg: CrossbarConfig, seed: u64) -> Result<Self> {
        Crossbar::new(CrossbarConfig { seed, ..cfg })
    }

    pub fn config(&self) -> &CrossbarConfig {
        &self.cfg
    }

    pub fn program(&mut self, target: &BitMatrix) -> Result<AnalogTile> {
        program_cells(target, &self.cfg, &mut self.rng)
    }
}
