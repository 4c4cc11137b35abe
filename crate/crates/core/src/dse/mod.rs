//! Grid sweeps over mapping, ADC and cell parameters.
//!
//! Every (point, trial) pair gets its own crossbar seeded from
//! `derive_seed(&[seed, point, trial])`, so any row can be recomputed on its
//! own and the output does not depend on how many workers ran the sweep.

mod config;
mod rows;
mod summary;

pub use config::{SweepConfig, SweepPoint};
pub use rows::{read_csv, write_timing_csv, CsvSink, ResultRow, CSV_COLUMNS};
pub use summary::{
    summarize, write_plot_data, write_summary_csv, AlphaWindow, PointSummary, Summary,
};

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::{
    load_model, run_inference, BackendOptions, Dataset, EngineOptions, InferenceOptions,
    QuantizedModel,
};
use crate::seed::derive_seed;

/// A sweep with its model and dataset loaded.
#[derive(Debug)]
pub struct Sweep {
    cfg: SweepConfig,
    points: Vec<SweepPoint>,
    model: QuantizedModel,
    dataset: Dataset,
}

impl Sweep {
    /// Validates the config and loads its inputs; nothing is simulated yet.
    pub fn prepare(cfg: SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let model = load_model(&cfg.model)?;
        let dataset = Dataset::load(&cfg.dataset)?;
        Self::with_inputs(cfg, model, dataset)
    }

    /// Uses an already loaded model and dataset; the paths in `cfg` are ignored.
    pub fn with_inputs(cfg: SweepConfig, model: QuantizedModel, dataset: Dataset) -> Result<Self> {
        cfg.validate()?;
        let dataset = match cfg.samples {
            Some(n) => dataset.take(n),
            None => dataset,
        };
        if dataset.is_empty() {
            return Err(Error::EmptyInput("dataset has no samples".into()));
        }
        Ok(Sweep {
            points: cfg.points(),
            cfg,
            model,
            dataset,
        })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn row_count(&self) -> usize {
        self.points.len() * self.cfg.trials
    }

    /// Computes a single row. Failures become a row with an error status.
    pub fn run_row(&self, point: usize, trial: usize) -> Result<ResultRow> {
        let p = *self
            .points
            .get(point)
            .ok_or_else(|| Error::Config(format!("point {point} out of range")))?;
        if trial >= self.cfg.trials {
            return Err(Error::Config(format!("trial {trial} out of range")));
        }
        Ok(self.compute(p, trial))
    }

    fn compute(&self, p: SweepPoint, trial: usize) -> ResultRow {
        let point = p.index;
        let seed = derive_seed(&[self.cfg.seed, point as u64, trial as u64]);
        let start = Instant::now();
        let opts = InferenceOptions {
            engine: EngineOptions {
                host_first_layer: self.cfg.host_first_layer,
            },
            backend: BackendOptions {
                tile: self.cfg.tile,
                analog_correction: true,
            },
            parallel: false,
        };
        let outcome = self
            .cfg
            .crossbar_config(&p, seed)
            .and_then(|xcfg| run_inference(&self.model, &self.dataset, p.mapping, &xcfg, &opts));
        let wall = start.elapsed();
        ResultRow::new(p, trial, seed, self.dataset.len(), outcome, wall)
    }

    /// Runs every row on `workers` threads and hands rows to `sink` in
    /// canonical (point, trial) order as soon as each prefix is complete.
    /// Returns all rows in the same order.
    pub fn run<F>(&self, workers: usize, mut sink: F) -> Result<Vec<ResultRow>>
    where
        F: FnMut(&ResultRow) -> Result<()>,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let trials = self.cfg.trials;
        let total = self.row_count();
        let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
        let mut rows = Vec::with_capacity(total);
        let mut first_err = None;
        std::thread::scope(|s| {
            s.spawn(move || {
                pool.install(|| {
                    (0..total).into_par_iter().for_each_with(tx, |tx, k| {
                        let _ = tx.send((k, self.compute(self.points[k / trials], k % trials)));
                    })
                })
            });
            let mut pending = BTreeMap::new();
            for (k, row) in rx {
                pending.insert(k, row);
                while let Some(row) = pending.remove(&rows.len()) {
                    if first_err.is_none() {
                        if let Err(e) = sink(&row) {
                            first_err = Some(e);
                        }
                    }
                    rows.push(row);
                }
            }
        });
        match first_err {
            Some(e) => Err(e),
            None => Ok(rows),
        }
    }
}

/// Loads the inputs and runs the whole sweep, collecting rows in memory.
pub fn run_sweep(cfg: SweepConfig, workers: usize) -> Result<Vec<ResultRow>> {
    Sweep::prepare(cfg)?.run(workers, |_| Ok(()))
}
