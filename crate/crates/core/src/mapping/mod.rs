//! Integer MVMs on binary cells: digital encodings, physical realizations
//! and the correction terms that restore the exact integer result.
//!
//! The flow for one tile is
//! [`encode_weights`] → [`MappedTile::program`] once, then per input vector
//! [`encode_inputs`] → [`mvm_on_crossbar`].

mod encode;
mod exec;
mod layout;
mod scheme;

pub use encode::{encode_inputs, encode_weights, DigitalPlan, EncodedInput};
pub use exec::{mvm_on_crossbar, MappedTile, MvmOptions};
pub use layout::{
    CorrectionSpec, Cycle, DriveBit, Layout, PlaneSlot, Readout, Tally, Term, WeightBit,
};
pub use scheme::{Alphabet, MappingKind, MappingScheme, Variant};

/// (cycles, cells per weight) as published for each kind and realization.
pub fn published_cost(scheme: MappingScheme) -> (usize, usize) {
    use MappingKind::*;
    use Variant::*;
    match (scheme.kind(), scheme.variant()) {
        (BnnI | BnnII | BnnV, _) => (1, 2),
        (BnnIII | BnnIV, MoreCells) => (1, 2),
        (BnnIII | BnnIV, MoreCycles) => (2, 1),
        (BnnVI, MoreCells) => (1, 4),
        (BnnVI, MoreCycles) => (2, 2),
        (TnnI | TnnII | TnnIII | TnnIV | TnnV, MoreCells) => (1, 4),
        (TnnI | TnnII | TnnIII | TnnIV | TnnV, MoreCycles) => (2, 2),
    }
}
