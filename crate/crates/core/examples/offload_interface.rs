// The two-call offload interface a compiler targets: `write_matrix` once,
// then `mvm` per input. Return values are status codes, 0 on success.

use cimsim::tiler::{FunctionalInterface, StatusCode};
use cimsim::xbar::CrossbarConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut xbar = FunctionalInterface::new("tnn-iv".parse()?, CrossbarConfig::ideal(256, 256, 5.0, 10.0))?;

    // 3x4, row-major, n fastest
    let m = [1, 0, -1, 1, 0, -1, 1, 0, -1, 1, 0, 0];
    assert_eq!(xbar.write_matrix(&m, 3, 4), 0);

    for v in [[1, 1, -1, 0], [0, -1, 1, 1]] {
        let mut r = [0; 3];
        assert_eq!(xbar.mvm(&mut r, &v, 3, 4), 0);
        println!("m * {v:?} = {r:?}");
    }

    let mut r = [0; 3];
    let bad = xbar.mvm(&mut r, &[2, 0, 0, 0], 3, 4);
    println!("out-of-alphabet input -> status {bad}");
    assert_eq!(bad, StatusCode::Encoding as i32);

    // same matrix again: nothing to reprogram
    let before = xbar.stats().writes;
    assert_eq!(xbar.write_matrix(&m, 3, 4), 0);
    assert_eq!(xbar.stats().writes, before);
    println!("{:?}", xbar.stats());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
