// Classifies the held-out digits with the bundled binarized MLP: on exact
// host arithmetic, on an ideal crossbar, and with HRS variability.

use cimsim::nn::{host_inference, load_model, run_inference, Dataset, InferenceOptions};
use cimsim::xbar::CrossbarConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let model = load_model(format!("{data}/digits_mlp.toml"))?;
    let dataset = Dataset::load(format!("{data}/digits_test.bin"))?;
    let opts = InferenceOptions::default();

    let host = host_inference(&model, &dataset, &opts)?;
    println!("host                 {:.4}", host.accuracy);

    let ideal = CrossbarConfig::ideal(256, 256, 5.0, 30.0);
    for mapping in ["bnn-v", "bnn-vi"] {
        let r = run_inference(&model, &dataset, mapping.parse()?, &ideal, &opts)?;
        assert_eq!(r.predictions, host.predictions);
        println!("{mapping:<8} ideal        {:.4}  ({} writes, {} mvms)", r.accuracy, r.stats.writes, r.stats.mvms);
    }
    for sigma in [5.0, 10.0] {
        let noisy = CrossbarConfig { sigma_hrs: sigma, seed: 1, ..ideal.clone() };
        for mapping in ["bnn-v", "bnn-vi"] {
            let r = run_inference(&model, &dataset, mapping.parse()?, &noisy, &opts)?;
            println!("{mapping:<8} sigma_hrs={sigma:<3} {:.4}", r.accuracy);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
