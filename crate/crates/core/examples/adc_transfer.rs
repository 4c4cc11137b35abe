// Transfer curve of the clipping mid-rise ADC for a few resolutions and
// clipping factors.

use cimsim::xbar::{adc_convert, AdcConfig, Resolution};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let i_max = 40.0;
    let configs = [
        AdcConfig::new(Resolution::Infinite, 1.0)?,
        AdcConfig::new(Resolution::Infinite, 0.5)?,
        AdcConfig::new(Resolution::Bits(3), 1.0)?,
        AdcConfig::new(Resolution::Bits(3), 0.5)?,
    ];
    print!("{:>8}", "x [uA]");
    for c in &configs {
        print!("{:>14}", format!("B={} a={}", c.resolution, c.alpha));
    }
    println!();
    for k in -8..=8 {
        let x = 5.0 * k as f64;
        print!("{x:>8.1}");
        for c in &configs {
            print!("{:>14.2}", adc_convert(x, i_max, c));
        }
        println!();
    }

    // 3 bits, alpha 0.5: step 5 uA, the rail sits half a step past the clip bound
    let c = AdcConfig::new(Resolution::Bits(3), 0.5)?;
    assert_eq!(c.step(i_max), Some(5.0));
    assert_eq!(adc_convert(-37.0, i_max, &c), -22.5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
