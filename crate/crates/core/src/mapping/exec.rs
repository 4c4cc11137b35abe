use super::encode::{DigitalPlan, EncodedInput};
use super::layout::{Tally, Term};
use crate::error::{Error, Result};
use crate::xbar::{adc_convert, AdcMode, AnalogTile, BitMatrix, Crossbar, CrossbarConfig};

/// A digital plan programmed onto crossbar cell planes.
///
/// Planes may be larger than the plan (edge tiles of a tiled matrix); padding
/// cells are HRS, padding rows are never driven and padding columns never read.
#[derive(Debug, Clone)]
pub struct MappedTile {
    plan: DigitalPlan,
    cfg: CrossbarConfig,
    planes: Vec<AnalogTile>,
    rows: usize,
    cols: usize,
}

impl MappedTile {
    pub fn program(plan: DigitalPlan, crossbar: &mut Crossbar) -> Result<Self> {
        let (rows, cols) = (plan.inputs(), plan.outputs());
        MappedTile::program_padded(plan, crossbar, rows, cols)
    }

    /// Programs every plane as a `rows x cols` array with the plan in its
    /// top-left corner.
    pub fn program_padded(
        plan: DigitalPlan,
        crossbar: &mut Crossbar,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        if rows < plan.inputs() || cols < plan.outputs() {
            return Err(Error::shape(format!(
                "padded footprint {rows}x{cols} is smaller than the {}x{} plan",
                plan.inputs(),
                plan.outputs()
            )));
        }
        let planes = plan
            .planes()
            .iter()
            .map(|bits| {
                let mut padded = BitMatrix::zeros(rows, cols);
                for r in 0..bits.rows() {
                    for (c, &b) in bits.row(r).iter().enumerate() {
                        if b {
                            padded.set(r, c, true);
                        }
                    }
                }
                crossbar.program(&padded)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MappedTile {
            plan,
            cfg: crossbar.config().clone(),
            planes,
            rows,
            cols,
        })
    }

    pub fn plan(&self) -> &DigitalPlan {
        &self.plan
    }

    pub fn planes(&self) -> &[AnalogTile] {
        &self.planes
    }

    pub fn config(&self) -> &CrossbarConfig {
        &self.cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MvmOptions {
    /// Apply the analog correction term. Turning it off is only useful to
    /// show that the term is needed.
    pub analog_correction: bool,
}

impl Default for MvmOptions {
    fn default() -> Self {
        MvmOptions {
            analog_correction: true,
        }
    }
}

fn tally(term: &Term, input: &EncodedInput, plan: &DigitalPlan, out: usize) -> f64 {
    match term.tally {
        Tally::Weights => {
            let row = plan.weights().row(out);
            let masked: i64 = input.masked().iter().map(|&k| row[k] as i64).sum();
            (plan.weight_sums()[out] - masked) as f64
        }
        Tally::Inputs => input.sum_inputs() as f64,
        Tally::Active => input.active() as f64,
    }
}

/// Runs every crossbar cycle of the mapping and recombines the converted
/// readouts into integer outputs, applying scale and corrections.
pub fn mvm_on_crossbar(
    tile: &MappedTile,
    input: &EncodedInput,
    opts: &MvmOptions,
) -> Result<Vec<i32>> {
    let plan = &tile.plan;
    let scheme = plan.scheme();
    if input.scheme() != scheme {
        return Err(Error::shape(format!(
            "input encoded for {} but tile holds {}",
            input.scheme(),
            scheme
        )));
    }
    if input.len() != plan.inputs() {
        return Err(Error::shape(format!(
            "input of length {} for a tile with {} inputs",
            input.len(),
            plan.inputs()
        )));
    }
    let cfg = &tile.cfg;
    let layout = scheme.layout();
    let n = plan.inputs();
    let m = plan.outputs();
    let i_mm = cfg.i_mm();

    let padded_drive = |bits: &[bool]| {
        let mut d = bits.to_vec();
        d.resize(tile.rows, false);
        d
    };

    let mut acc = vec![0.0f64; m];
    let mut plus = vec![0.0f64; tile.cols];
    let mut minus = vec![0.0f64; tile.cols];
    for cycle in layout.cycles {
        let drives: Vec<Option<Vec<bool>>> = cycle
            .drives
            .iter()
            .map(|d| d.and_then(|bit| input.plane(bit)).map(padded_drive))
            .collect();
        let read_group = |group: usize, buf: &mut [f64]| -> Result<()> {
            buf.fill(0.0);
            for (slot, analog) in layout.planes.iter().zip(&tile.planes) {
                if slot.group != group {
                    continue;
                }
                if let Some(Some(drive)) = drives.get(slot.block) {
                    analog.accumulate_columns(drive, buf)?;
                }
            }
            Ok(())
        };
        for readout in cycle.readouts {
            read_group(readout.plus, &mut plus)?;
            let mode = match readout.minus {
                Some(g) => {
                    read_group(g, &mut minus)?;
                    AdcMode::Differential
                }
                None => AdcMode::SingleEnded,
            };
            let i_max = cfg.i_max(mode, n);
            let weight = readout.coef as f64 / i_mm;
            for j in 0..m {
                let x = match mode {
                    AdcMode::Differential => plus[j] - minus[j],
                    AdcMode::SingleEnded => plus[j],
                };
                acc[j] += weight * adc_convert(x, i_max, &cfg.adc);
            }
        }
    }

    let correction = scheme.correction();
    let hrs_ratio = cfg.i_hrs / i_mm;
    Ok(acc
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let mut y = x;
            if let Some(t) = &correction.digital {
                y += t.coef as f64 * tally(t, input, plan, j);
            }
            if let (Some(t), true) = (&correction.analog, opts.analog_correction) {
                y += t.coef as f64 * hrs_ratio * tally(t, input, plan, j);
            }
            y.round() as i32
        })
        .collect())
}
