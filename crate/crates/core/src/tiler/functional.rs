//! Offload interface with the shape of the C functions a compiler emits:
//! `write_matrix(m, m_int, n_int)` then any number of `mvm(r, v, m_int, n_int)`.
//! Matrices are row-major with the n dimension fastest. Calls return 0 on
//! success and a [`StatusCode`] otherwise.

use super::{write_matrix, CrossbarPool, MatrixHandle, WriteStats};
use crate::error::{Error, Result};
use crate::mapping::MappingScheme;
use crate::matrix::IntMatrix;
use crate::xbar::CrossbarConfig;

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusCode {
    Ok = 0,
    Shape = 1,
    Encoding = 2,
    TileTooLarge = 3,
    NoMatrix = 4,
    Other = 5,
}

impl From<&Error> for StatusCode {
    fn from(e: &Error) -> Self {
        match e {
            Error::Shape(_) => StatusCode::Shape,
            Error::Encoding { .. } => StatusCode::Encoding,
            Error::TileTooLarge { .. } => StatusCode::TileTooLarge,
            _ => StatusCode::Other,
        }
    }
}

fn status(result: Result<()>) -> i32 {
    match result {
        Ok(()) => StatusCode::Ok as i32,
        Err(e) => StatusCode::from(&e) as i32,
    }
}

/// One crossbar behind the two offload calls.
///
/// Matrices larger than the crossbar are tiled at the crossbar size. Writing
/// a matrix that is already programmed costs no cell writes.
#[derive(Debug)]
pub struct FunctionalInterface {
    scheme: MappingScheme,
    pool: CrossbarPool,
    current: Option<MatrixHandle>,
    retired: WriteStats,
}

impl FunctionalInterface {
    pub fn new(scheme: MappingScheme, cfg: CrossbarConfig) -> Result<Self> {
        Ok(FunctionalInterface {
            scheme,
            pool: CrossbarPool::new(cfg)?,
            current: None,
            retired: WriteStats::default(),
        })
    }

    fn dims(m_int: i32, n_int: i32) -> Result<(usize, usize)> {
        if m_int <= 0 || n_int <= 0 {
            return Err(Error::shape(format!(
                "matrix dimensions must be positive, got {m_int}x{n_int}"
            )));
        }
        Ok((m_int as usize, n_int as usize))
    }

    pub fn try_write_matrix(&mut self, m: &[i32], m_int: i32, n_int: i32) -> Result<()> {
        let (rows, cols) = Self::dims(m_int, n_int)?;
        let matrix = IntMatrix::new(rows, cols, m.get(..rows * cols).unwrap_or(m).to_vec())?;
        let tile_m = rows.min(self.pool.config().cols);
        let tile_n = cols.min(self.pool.config().rows);
        if let Some(h) = self.current.as_mut() {
            if h.grid().tile_dims() == (tile_m, tile_n) {
                h.rewrite(&matrix)?;
                return Ok(());
            }
        }
        let handle = write_matrix(&matrix, tile_m, tile_n, self.scheme, &mut self.pool)?;
        if let Some(old) = self.current.replace(handle) {
            self.retired = self.retired + old.stats();
        }
        Ok(())
    }

    pub fn try_mvm(&self, r: &mut [i32], v: &[i32], m_int: i32, n_int: i32) -> Result<()> {
        let (rows, cols) = Self::dims(m_int, n_int)?;
        let handle = self
            .current
            .as_ref()
            .ok_or_else(|| Error::Config("mvm called before write_matrix".into()))?;
        if (rows, cols) != (handle.grid().outputs(), handle.grid().inputs()) {
            return Err(Error::shape(format!(
                "mvm for {rows}x{cols} but the written matrix is {}x{}",
                handle.grid().outputs(),
                handle.grid().inputs()
            )));
        }
        if r.len() < rows || v.len() < cols {
            return Err(Error::shape("result or input buffer too short"));
        }
        let out = handle.mvm(&v[..cols])?;
        r[..rows].copy_from_slice(&out);
        Ok(())
    }

    /// Copies an `m_int x n_int` matrix to the crossbar.
    pub fn write_matrix(&mut self, m: &[i32], m_int: i32, n_int: i32) -> i32 {
        status(self.try_write_matrix(m, m_int, n_int))
    }

    /// `r = m * v` against the last written matrix.
    pub fn mvm(&self, r: &mut [i32], v: &[i32], m_int: i32, n_int: i32) -> i32 {
        if self.current.is_none() {
            return StatusCode::NoMatrix as i32;
        }
        status(self.try_mvm(r, v, m_int, n_int))
    }

    /// Totals over every matrix written through this interface.
    pub fn stats(&self) -> WriteStats {
        self.retired + self.current.as_ref().map(|h| h.stats()).unwrap_or_default()
    }
}
