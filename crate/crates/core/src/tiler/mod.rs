//! Logical matrices of any size on fixed-size crossbar tiles.
//!
//! A matrix is cut into `m_int x n_int` tiles, each tile is encoded with the
//! active mapping and programmed once, and every MVM drives all tiles with the
//! matching slice of the input and accumulates the partial sums on the host.
//! Logical rows (outputs) sit on physical columns and logical columns
//! (inputs) on physical rows.

mod ffi;
mod functional;

pub use functional::{FunctionalInterface, StatusCode};

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mapping::{
    encode_inputs, encode_weights, mvm_on_crossbar, MappedTile, MappingScheme, MvmOptions,
};
use crate::matrix::IntMatrix;
use crate::seed::derive_seed;
use crate::xbar::{Crossbar, CrossbarConfig};

/// One tile: output rows `row0..row0+rows`, input columns `col0..col0+cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpec {
    pub row0: usize,
    pub rows: usize,
    pub col0: usize,
    pub cols: usize,
    pub edge: bool,
}

/// Partition of an `m x n` matrix into `m_int x n_int` tiles, row-major over tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGrid {
    m: usize,
    n: usize,
    m_int: usize,
    n_int: usize,
    tiles: Vec<TileSpec>,
}

impl TileGrid {
    pub fn new(m: usize, n: usize, m_int: usize, n_int: usize) -> Result<Self> {
        if m_int == 0 || n_int == 0 {
            return Err(Error::Config("tile dimensions must be positive".into()));
        }
        let mut tiles = Vec::new();
        for row0 in (0..m).step_by(m_int) {
            for col0 in (0..n).step_by(n_int) {
                let rows = m_int.min(m - row0);
                let cols = n_int.min(n - col0);
                tiles.push(TileSpec {
                    row0,
                    rows,
                    col0,
                    cols,
                    edge: rows < m_int || cols < n_int,
                });
            }
        }
        Ok(TileGrid {
            m,
            n,
            m_int,
            n_int,
            tiles,
        })
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn tile_dims(&self) -> (usize, usize) {
        (self.m_int, self.n_int)
    }

    pub fn tiles(&self) -> &[TileSpec] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn full_tiles(&self) -> impl Iterator<Item = &TileSpec> {
        self.tiles.iter().filter(|t| !t.edge)
    }

    pub fn edge_tiles(&self) -> impl Iterator<Item = &TileSpec> {
        self.tiles.iter().filter(|t| t.edge)
    }
}

/// Counters of one handle since creation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WriteStats {
    /// Tile programmings.
    pub writes: u64,
    /// Crossbar MVM cycles.
    pub mvms: u64,
}

impl WriteStats {
    pub fn reuse_factor(&self) -> f64 {
        if self.writes == 0 {
            0.0
        } else {
            self.mvms as f64 / self.writes as f64
        }
    }
}

impl std::ops::Add for WriteStats {
    type Output = WriteStats;

    fn add(self, rhs: WriteStats) -> WriteStats {
        WriteStats {
            writes: self.writes + rhs.writes,
            mvms: self.mvms + rhs.mvms,
        }
    }
}

/// Hands out crossbar instances with independent, reproducible RNG streams.
#[derive(Debug, Clone)]
pub struct CrossbarPool {
    cfg: CrossbarConfig,
    issued: u64,
}

impl CrossbarPool {
    pub fn new(cfg: CrossbarConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(CrossbarPool { cfg, issued: 0 })
    }

    pub fn config(&self) -> &CrossbarConfig {
        &self.cfg
    }

    /// The k-th crossbar drawn from a pool always gets the same seed.
    pub fn crossbar(&mut self) -> Crossbar {
        let seed = derive_seed(&[self.cfg.seed, self.issued]);
        self.issued += 1;
        Crossbar::with_seed(self.cfg.clone(), seed).expect("pool config already validated")
    }
}

type ContentHash = [u8; 32];

fn content_hash(m: &IntMatrix) -> ContentHash {
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

/// A matrix written to crossbar tiles, ready for repeated MVMs.
///
/// Tiles with identical content share one programmed tile. Rewriting reuses
/// every programmed tile whose content is unchanged.
#[derive(Debug)]
pub struct MatrixHandle {
    scheme: MappingScheme,
    grid: TileGrid,
    crossbar: Crossbar,
    programmed: HashMap<ContentHash, MappedTile>,
    slots: Vec<ContentHash>,
    opts: MvmOptions,
    writes: u64,
    mvms: AtomicU64,
}

/// Partitions `m` into `m_int x n_int` tiles and programs them.
pub fn write_matrix(
    m: &IntMatrix,
    m_int: usize,
    n_int: usize,
    scheme: MappingScheme,
    pool: &mut CrossbarPool,
) -> Result<MatrixHandle> {
    let cfg = pool.config();
    if n_int > cfg.rows || m_int > cfg.cols {
        return Err(Error::TileTooLarge {
            rows: n_int,
            cols: m_int,
            cap_rows: cfg.rows,
            cap_cols: cfg.cols,
        });
    }
    let mut handle = MatrixHandle {
        scheme,
        grid: TileGrid::new(m.rows(), m.cols(), m_int, n_int)?,
        crossbar: pool.crossbar(),
        programmed: HashMap::new(),
        slots: Vec::new(),
        opts: MvmOptions::default(),
        writes: 0,
        mvms: AtomicU64::new(0),
    };
    handle.rewrite(m)?;
    Ok(handle)
}

impl MatrixHandle {
    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    pub fn grid(&self) -> &TileGrid {
        &self.grid
    }

    pub fn set_options(&mut self, opts: MvmOptions) {
        self.opts = opts;
    }

    /// Number of distinct programmed tiles.
    pub fn distinct_tiles(&self) -> usize {
        self.programmed.len()
    }

    /// Writes a new matrix with the same tile size, programming only tiles
    /// whose content is not already on the crossbar. Returns the number of
    /// tile programmings performed.
    pub fn rewrite(&mut self, m: &IntMatrix) -> Result<usize> {
        let (m_int, n_int) = self.grid.tile_dims();
        let grid = TileGrid::new(m.rows(), m.cols(), m_int, n_int)?;
        let mut previous = std::mem::take(&mut self.programmed);
        let mut programmed = HashMap::new();
        let mut slots = Vec::with_capacity(grid.len());
        let mut fresh = 0;
        for spec in grid.tiles() {
            let block = m.submatrix(spec.row0, spec.col0, spec.rows, spec.cols);
            let key = content_hash(&block);
            if let Entry::Vacant(slot) = programmed.entry(key) {
                let tile = match previous.remove(&key) {
                    Some(tile) => tile,
                    None => {
                        let plan = encode_weights(&block, self.scheme)?;
                        fresh += 1;
                        MappedTile::program_padded(plan, &mut self.crossbar, n_int, m_int)?
                    }
                };
                slot.insert(tile);
            }
            slots.push(key);
        }
        self.grid = grid;
        self.programmed = programmed;
        self.slots = slots;
        self.writes += fresh as u64;
        Ok(fresh)
    }

    /// `r = m * v` through the crossbar tiles.
    pub fn mvm(&self, v: &[i32]) -> Result<Vec<i32>> {
        if v.len() != self.grid.inputs() {
            return Err(Error::shape(format!(
                "vector of length {} for a matrix with {} columns",
                v.len(),
                self.grid.inputs()
            )));
        }
        let mut r = vec![0i32; self.grid.outputs()];
        for (spec, key) in self.grid.tiles().iter().zip(&self.slots) {
            let tile = &self.programmed[key];
            let input = encode_inputs(&v[spec.col0..spec.col0 + spec.cols], self.scheme)?;
            let partial = mvm_on_crossbar(tile, &input, &self.opts)?;
            for (acc, p) in r[spec.row0..spec.row0 + spec.rows].iter_mut().zip(partial) {
                *acc += p;
            }
        }
        self.mvms.fetch_add(
            (self.grid.len() * self.scheme.cycles()) as u64,
            Ordering::Relaxed,
        );
        Ok(r)
    }

    pub fn stats(&self) -> WriteStats {
        WriteStats {
            writes: self.writes,
            mvms: self.mvms.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool() -> CrossbarPool {
        CrossbarPool::new(CrossbarConfig::ideal(256, 256, 5.0, 10.0)).unwrap()
    }

    fn pm1(rows: usize, cols: usize, salt: usize) -> IntMatrix {
        let data = (0..rows * cols)
            .map(|k| if (k * 7 + salt * 3 + k / 5) % 3 == 0 { -1 } else { 1 })
            .collect();
        IntMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn ceiling_partition_with_edges() {
        let g = TileGrid::new(3, 3, 2, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.full_tiles().count(), 1);
        assert_eq!(g.edge_tiles().count(), 3);
        let g = TileGrid::new(4, 6, 2, 3).unwrap();
        assert_eq!(g.edge_tiles().count(), 0);
        let covered: usize = g.tiles().iter().map(|t| t.rows * t.cols).sum();
        assert_eq!(covered, 24);
    }

    #[test]
    fn one_tile_for_a_full_crossbar() {
        let s: MappingScheme = "bnn-i".parse().unwrap();
        let h = write_matrix(&pm1(256, 256, 0), 256, 256, s, &mut pool()).unwrap();
        assert_eq!(h.grid().len(), 1);
        assert_eq!(h.stats(), WriteStats { writes: 1, mvms: 0 });
        assert_eq!(h.programmed.values().next().unwrap().planes().len(), 2);
    }

    #[test]
    fn oversized_tile_rejected() {
        let s: MappingScheme = "bnn-i".parse().unwrap();
        let err = write_matrix(&pm1(4, 4, 0), 4, 300, s, &mut pool()).unwrap_err();
        assert!(matches!(err, Error::TileTooLarge { .. }));
    }

    #[test]
    fn rewriting_same_matrix_programs_nothing() {
        let s: MappingScheme = "tnn-ii".parse().unwrap();
        let m = pm1(5, 7, 1);
        let mut h = write_matrix(&m, 2, 3, s, &mut pool()).unwrap();
        let before = h.stats().writes;
        assert_eq!(h.rewrite(&m).unwrap(), 0);
        assert_eq!(h.stats().writes, before);
    }

    #[test]
    fn rewriting_changes_only_touched_tiles() {
        let s: MappingScheme = "bnn-vi".parse().unwrap();
        let m = pm1(4, 4, 2);
        let mut h = write_matrix(&m, 2, 2, s, &mut pool()).unwrap();
        let before = h.stats().writes;
        let mut data = m.as_slice().to_vec();
        data[0] = -data[0];
        let changed = IntMatrix::new(4, 4, data).unwrap();
        assert_eq!(h.rewrite(&changed).unwrap(), 1);
        assert_eq!(h.stats().writes, before + 1);
        assert_eq!(h.mvm(&[1, -1, 1, 1]).unwrap(), changed.matvec(&[1, -1, 1, 1]).unwrap());
    }

    #[test]
    fn edge_tiles_accumulate_exactly() {
        let s: MappingScheme = "bnn-iii+cycles".parse().unwrap();
        let m = pm1(3, 3, 4);
        let h = write_matrix(&m, 2, 2, s, &mut pool()).unwrap();
        for bits in 0..8u32 {
            let v: Vec<i32> = (0..3).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
            assert_eq!(h.mvm(&v).unwrap(), m.matvec(&v).unwrap(), "v={v:?}");
        }
        assert_eq!(h.stats().mvms, 8 * 4 * 2);
    }

    #[test]
    fn batch_does_not_add_writes() {
        let s: MappingScheme = "bnn-v".parse().unwrap();
        let m = pm1(6, 10, 5);
        let h = write_matrix(&m, 4, 4, s, &mut pool()).unwrap();
        let writes = h.stats().writes;
        for k in 0..32 {
            let v: Vec<i32> = (0..10).map(|j| if (j + k) % 3 == 0 { -1 } else { 1 }).collect();
            h.mvm(&v).unwrap();
        }
        assert_eq!(h.stats().writes, writes);
        assert_eq!(h.stats().mvms, 32 * h.grid().len() as u64);
    }

    #[test]
    fn wrong_vector_length() {
        let s: MappingScheme = "bnn-i".parse().unwrap();
        let h = write_matrix(&pm1(2, 3, 0), 2, 2, s, &mut pool()).unwrap();
        assert!(matches!(h.mvm(&[1, 1]), Err(Error::Shape(_))));
    }
}
