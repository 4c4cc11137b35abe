// Lists every mapping scheme and checks each one against exact integer
// arithmetic on a small ideal crossbar.

use cimsim::mapping::{encode_inputs, encode_weights, mvm_on_crossbar, MappedTile, MappingScheme, MvmOptions};
use cimsim::xbar::{Crossbar, CrossbarConfig};
use cimsim::IntMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let binary = IntMatrix::from_rows(&[[1, -1, 1, 1], [-1, -1, 1, -1], [1, 1, 1, -1]])?;
    let ternary = IntMatrix::from_rows(&[[1, 0, -1, 1], [0, -1, 1, 0], [-1, 1, 0, 0]])?;

    println!("{:<16}{:>7}{:>7}  {:<22}{:<26}result", "mapping", "cycles", "cells", "digital", "analog");
    for scheme in MappingScheme::all() {
        let (w, v) = if scheme.alphabet().values().contains(&0) {
            (&ternary, vec![1, 0, -1, 1])
        } else {
            (&binary, vec![1, -1, -1, 1])
        };
        let mut xbar = Crossbar::new(CrossbarConfig::ideal(4, 3, 5.0, 10.0))?;
        let tile = MappedTile::program(encode_weights(w, scheme)?, &mut xbar)?;
        let out = mvm_on_crossbar(&tile, &encode_inputs(&v, scheme)?, &MvmOptions::default())?;
        assert_eq!(out, w.matvec(&v)?, "{scheme}");

        let c = scheme.correction();
        println!(
            "{:<16}{:>7}{:>7}  {:<22}{:<26}{:?}",
            scheme.name(),
            scheme.cycles(),
            scheme.cells_per_weight(),
            c.digital.map_or("-".into(), |t| t.label(false)),
            c.analog.map_or("-".into(), |t| t.label(true)),
            out
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
