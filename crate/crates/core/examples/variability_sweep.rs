// A small grid sweep over ADC resolution and clipping factor, written as
// CSV and condensed into per-curve α windows.

use cimsim::dse::{summarize, CsvSink, Sweep, SweepConfig};
use cimsim::nn::{load_model, Dataset};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let cfg = SweepConfig::from_toml(&format!(
        r#"
model = "{data}/digits_mlp.toml"
dataset = "{data}/digits_test.bin"
samples = 120
mappings = ["bnn-vi"]
adc_bits = ["inf", 3]
alphas = [0.2, 0.3, 0.5, 1.0]
sigma_lrs = [0.0]
sigma_hrs = [0.0, 5.0]
currents = [[5.0, 30.0]]
trials = 2
seed = 42
"#
    ))?;
    let model = load_model(&cfg.model)?;
    let dataset = Dataset::load(&cfg.dataset)?;
    let sweep = Sweep::with_inputs(cfg, model, dataset)?;

    let mut sink = CsvSink::new(Vec::new())?;
    let rows = sweep.run(2, |row| sink.write(row))?;
    let csv = String::from_utf8(sink.into_inner()?)?;
    assert_eq!(csv.lines().count(), 1 + sweep.row_count());
    println!("{}", csv.lines().take(4).collect::<Vec<_>>().join("\n"));

    let summary = summarize(&rows, None)?;
    for w in &summary.windows {
        println!(
            "{} B={} sigma_hrs={} baseline {:.3} alpha window {:?}",
            w.curve.mapping, w.curve.adc_bits, w.curve.sigma_hrs, w.baseline, w.interval
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
