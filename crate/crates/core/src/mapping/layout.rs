//! Physical realization of each mapping.
//!
//! A realization places digital weight bits on cell planes. Every plane is a
//! full `inputs x outputs` array sitting in a row block (which input plane
//! drives it) and a column group (which bitline it feeds). Planes in the same
//! group and different blocks share a bitline, so their currents add. A
//! readout converts one group, or the analog difference of two groups, and
//! is weighted digitally by `coef / I_mm`.

use super::scheme::{MappingKind, MappingScheme, Variant};

/// Binary weight plane of the digital form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightBit {
    /// g⁺, set where the weight is +1.
    Pos,
    /// g⁻, set where the weight is -1.
    Neg,
    /// Single-cell linear-scaling bit g.
    Single,
    /// High bit g¹ of a 2-bit weight code.
    Hi,
    /// Low bit g⁰ of a 2-bit weight code.
    Lo,
}

/// Binary input plane of the digital form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveBit {
    /// Single linear-scaling bit v.
    Plain,
    /// v⁺, set where the input is +1.
    Pos,
    /// v⁻, set where the input is -1.
    Neg,
    /// High bit v¹ of a 2-bit input code.
    Hi,
    /// Low bit v⁰ of a 2-bit input code.
    Lo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneSlot {
    pub block: usize,
    pub group: usize,
    pub bit: WeightBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Readout {
    pub plus: usize,
    pub minus: Option<usize>,
    pub coef: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cycle {
    /// Input plane applied to each row block; `None` leaves the block undriven.
    pub drives: &'static [Option<DriveBit>],
    pub readouts: &'static [Readout],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub blocks: usize,
    pub groups: usize,
    pub planes: &'static [PlaneSlot],
    pub cycles: &'static [Cycle],
}

/// Sum the host tracks for a correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tally {
    /// Σ w over the active inputs, per output.
    Weights,
    /// Σ i over the inputs.
    Inputs,
    /// Number of active (non-masked) inputs.
    Active,
}

/// `coef * tally` for a digital term; `coef * (I_hrs / I_mm) * tally` for an analog one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub coef: i32,
    pub tally: Tally,
}

/// Correction terms added to the scaled crossbar readouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionSpec {
    pub digital: Option<Term>,
    pub analog: Option<Term>,
}

const fn slot(block: usize, group: usize, bit: WeightBit) -> PlaneSlot {
    PlaneSlot { block, group, bit }
}

const fn diff(plus: usize, minus: usize, coef: i32) -> Readout {
    Readout {
        plus,
        minus: Some(minus),
        coef,
    }
}

const fn single(group: usize, coef: i32) -> Readout {
    Readout {
        plus: group,
        minus: None,
        coef,
    }
}

use DriveBit as D;
use WeightBit as W;

static BNN_I: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Pos), slot(0, 1, W::Neg)],
    cycles: &[Cycle {
        drives: &[Some(D::Plain)],
        readouts: &[diff(0, 1, 2)],
    }],
};

static BNN_II: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Pos), slot(0, 1, W::Neg)],
    cycles: &[Cycle {
        drives: &[Some(D::Plain)],
        readouts: &[diff(1, 0, 2)],
    }],
};

static BNN_III_CELLS: Layout = Layout {
    blocks: 2,
    groups: 2,
    planes: &[slot(0, 0, W::Single), slot(1, 1, W::Single)],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[single(0, 2), single(1, -2)],
    }],
};

static BNN_III_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 1,
    planes: &[slot(0, 0, W::Single)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Pos)],
            readouts: &[single(0, 2)],
        },
        Cycle {
            drives: &[Some(D::Neg)],
            readouts: &[single(0, -2)],
        },
    ],
};

static BNN_IV_CELLS: Layout = Layout {
    blocks: 2,
    groups: 2,
    planes: &[slot(0, 0, W::Single), slot(1, 1, W::Single)],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[single(0, -2), single(1, 2)],
    }],
};

static BNN_IV_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 1,
    planes: &[slot(0, 0, W::Single)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Pos)],
            readouts: &[single(0, -2)],
        },
        Cycle {
            drives: &[Some(D::Neg)],
            readouts: &[single(0, 2)],
        },
    ],
};

// XNOR: v⁺ rows meet g⁺ cells and v⁻ rows meet g⁻ cells on one bitline.
static BNN_V: Layout = Layout {
    blocks: 2,
    groups: 1,
    planes: &[slot(0, 0, W::Pos), slot(1, 0, W::Neg)],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[single(0, 2)],
    }],
};

// Differential inputs against differential weights; shared by BNN VI and TNN I.
static DIFF_DIFF_CELLS: Layout = Layout {
    blocks: 2,
    groups: 2,
    planes: &[
        slot(0, 0, W::Pos),
        slot(1, 0, W::Neg),
        slot(0, 1, W::Neg),
        slot(1, 1, W::Pos),
    ],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[diff(0, 1, 1)],
    }],
};

static DIFF_DIFF_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Pos), slot(0, 1, W::Neg)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Pos)],
            readouts: &[diff(0, 1, 1)],
        },
        Cycle {
            drives: &[Some(D::Neg)],
            readouts: &[diff(0, 1, -1)],
        },
    ],
};

// Two's-complement input bits (v¹ weighs -2).
static TNN_II_CELLS: Layout = Layout {
    blocks: 2,
    groups: 4,
    planes: &[
        slot(0, 0, W::Pos),
        slot(0, 1, W::Neg),
        slot(1, 2, W::Pos),
        slot(1, 3, W::Neg),
    ],
    cycles: &[Cycle {
        drives: &[Some(D::Lo), Some(D::Hi)],
        readouts: &[diff(0, 1, 1), diff(2, 3, -2)],
    }],
};

static TNN_II_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Pos), slot(0, 1, W::Neg)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Lo)],
            readouts: &[diff(0, 1, 1)],
        },
        Cycle {
            drives: &[Some(D::Hi)],
            readouts: &[diff(0, 1, -2)],
        },
    ],
};

// Offset input code i + 1 (v¹ weighs +2).
static TNN_III_CELLS: Layout = Layout {
    blocks: 2,
    groups: 4,
    planes: &[
        slot(0, 0, W::Pos),
        slot(0, 1, W::Neg),
        slot(1, 2, W::Pos),
        slot(1, 3, W::Neg),
    ],
    cycles: &[Cycle {
        drives: &[Some(D::Lo), Some(D::Hi)],
        readouts: &[diff(0, 1, 1), diff(2, 3, 2)],
    }],
};

static TNN_III_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Pos), slot(0, 1, W::Neg)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Lo)],
            readouts: &[diff(0, 1, 1)],
        },
        Cycle {
            drives: &[Some(D::Hi)],
            readouts: &[diff(0, 1, 2)],
        },
    ],
};

// Two's-complement weight bits (g¹ weighs -2), differential inputs.
static TNN_IV_CELLS: Layout = Layout {
    blocks: 2,
    groups: 4,
    planes: &[
        slot(0, 0, W::Lo),
        slot(0, 1, W::Hi),
        slot(1, 2, W::Lo),
        slot(1, 3, W::Hi),
    ],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[single(0, 1), single(1, -2), single(2, -1), single(3, 2)],
    }],
};

static TNN_IV_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Lo), slot(0, 1, W::Hi)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Pos)],
            readouts: &[single(0, 1), single(1, -2)],
        },
        Cycle {
            drives: &[Some(D::Neg)],
            readouts: &[single(0, -1), single(1, 2)],
        },
    ],
};

// Offset weight code w + 1 (g¹ weighs +2).
static TNN_V_CELLS: Layout = Layout {
    blocks: 2,
    groups: 4,
    planes: &[
        slot(0, 0, W::Lo),
        slot(0, 1, W::Hi),
        slot(1, 2, W::Lo),
        slot(1, 3, W::Hi),
    ],
    cycles: &[Cycle {
        drives: &[Some(D::Pos), Some(D::Neg)],
        readouts: &[single(0, 1), single(1, 2), single(2, -1), single(3, -2)],
    }],
};

static TNN_V_CYCLES: Layout = Layout {
    blocks: 1,
    groups: 2,
    planes: &[slot(0, 0, W::Lo), slot(0, 1, W::Hi)],
    cycles: &[
        Cycle {
            drives: &[Some(D::Pos)],
            readouts: &[single(0, 1), single(1, 2)],
        },
        Cycle {
            drives: &[Some(D::Neg)],
            readouts: &[single(0, -1), single(1, -2)],
        },
    ],
};

const fn term(coef: i32, tally: Tally) -> Option<Term> {
    Some(Term { coef, tally })
}

impl MappingScheme {
    pub fn layout(&self) -> &'static Layout {
        use MappingKind::*;
        use Variant::*;
        match (self.kind(), self.variant()) {
            (BnnI, _) => &BNN_I,
            (BnnII, _) => &BNN_II,
            (BnnIII, MoreCells) => &BNN_III_CELLS,
            (BnnIII, MoreCycles) => &BNN_III_CYCLES,
            (BnnIV, MoreCells) => &BNN_IV_CELLS,
            (BnnIV, MoreCycles) => &BNN_IV_CYCLES,
            (BnnV, _) => &BNN_V,
            (BnnVI | TnnI, MoreCells) => &DIFF_DIFF_CELLS,
            (BnnVI | TnnI, MoreCycles) => &DIFF_DIFF_CYCLES,
            (TnnII, MoreCells) => &TNN_II_CELLS,
            (TnnII, MoreCycles) => &TNN_II_CYCLES,
            (TnnIII, MoreCells) => &TNN_III_CELLS,
            (TnnIII, MoreCycles) => &TNN_III_CYCLES,
            (TnnIV, MoreCells) => &TNN_IV_CELLS,
            (TnnIV, MoreCycles) => &TNN_IV_CYCLES,
            (TnnV, MoreCells) => &TNN_V_CELLS,
            (TnnV, MoreCycles) => &TNN_V_CYCLES,
        }
    }

    /// Digital and analog correction terms. They depend only on the kind:
    /// both realizations of a kind share one set of terms.
    pub fn correction(&self) -> CorrectionSpec {
        use MappingKind::*;
        let (digital, analog) = match self.kind() {
            BnnI => (term(-1, Tally::Weights), None),
            BnnII => (term(1, Tally::Weights), None),
            BnnIII => (term(-1, Tally::Inputs), term(-2, Tally::Inputs)),
            BnnIV => (term(1, Tally::Inputs), term(2, Tally::Inputs)),
            BnnV => (term(-1, Tally::Active), term(-2, Tally::Active)),
            BnnVI | TnnI | TnnII => (None, None),
            TnnIII => (term(-1, Tally::Weights), None),
            TnnIV => (None, term(1, Tally::Inputs)),
            TnnV => (term(-1, Tally::Inputs), term(-3, Tally::Inputs)),
        };
        CorrectionSpec { digital, analog }
    }

    /// Human-readable scale of the crossbar term, e.g. `2/I_mm`.
    pub fn scale_label(&self) -> String {
        let mut coefs: Vec<i32> = self
            .layout()
            .cycles
            .iter()
            .flat_map(|c| c.readouts.iter().map(|r| r.coef.abs()))
            .collect();
        coefs.sort_unstable();
        coefs.dedup();
        coefs
            .iter()
            .map(|c| format!("{c}/I_mm"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl Term {
    pub fn label(&self, analog: bool) -> String {
        let tally = match self.tally {
            Tally::Weights => "sum(w)",
            Tally::Inputs => "sum(i)",
            Tally::Active => "N",
        };
        let sign = if self.coef < 0 { "-" } else { "+" };
        let mag = self.coef.abs();
        let factor = match (analog, mag) {
            (true, 1) => "(I_hrs/I_mm)*".to_string(),
            (true, m) => format!("{m}*(I_hrs/I_mm)*"),
            (false, 1) => String::new(),
            (false, m) => format!("{m}*"),
        };
        format!("{sign}{factor}{tally}")
    }
}
