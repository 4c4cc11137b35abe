// Programs a small crossbar with and without cell variability and reads
// column currents, single-ended and as a differential pair.

use cimsim::xbar::{
    column_currents, differential_read, AdcConfig, BitMatrix, Crossbar, CrossbarConfig, Resolution,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // 1 = LRS, 0 = HRS
    let plus = BitMatrix::from_rows(&[[1u8, 0, 1], [1, 1, 0], [0, 1, 1], [1, 0, 0]])?;
    let minus = BitMatrix::from_rows(&[[0u8, 1, 0], [0, 0, 1], [1, 0, 0], [0, 1, 1]])?;
    let drive = [true, true, false, true];

    let ideal = CrossbarConfig::ideal(4, 3, 5.0, 30.0);
    let mut xbar = Crossbar::new(ideal.clone())?;
    let p = xbar.program(&plus)?;
    let m = xbar.program(&minus)?;
    let currents = column_currents(&p, &drive)?;
    println!("ideal column currents (uA): {currents:?}");
    assert_eq!(currents, vec![90.0, 40.0, 40.0]);

    let i_max = ideal.i_max(cimsim::xbar::AdcMode::Differential, 3);
    let diff = differential_read(&p, &m, &drive, i_max, &AdcConfig::ideal())?;
    println!("differential, ideal ADC: {diff:?}");
    let coarse = AdcConfig::new(Resolution::Bits(3), 0.5)?;
    println!("differential, 3-bit ADC, alpha 0.5: {:?}", differential_read(&p, &m, &drive, i_max, &coarse)?);

    let noisy = CrossbarConfig {
        sigma_hrs: 2.0,
        sigma_lrs: 3.0,
        seed: 11,
        ..ideal
    };
    let mut xbar = Crossbar::new(noisy)?;
    let p = xbar.program(&plus)?;
    println!("with variability:   {:?}", column_currents(&p, &drive)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
