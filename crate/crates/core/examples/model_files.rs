// Builds a small conv net in code, saves it in the manifest + blob format
// and loads it back.

use cimsim::nn::{
    load_model, save_model, Layer, Padding, QuantConv2d, QuantDense, QuantizedModel, Quantizer,
    WeightAlphabet,
};
use cimsim::IntMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let conv = QuantConv2d {
        filters: 4,
        kernel: (3, 3),
        in_channels: 1,
        stride: 1,
        padding: Padding::Same,
        weights: IntMatrix::new(4, 9, (0..36).map(|k| if k % 4 == 0 { -1 } else { 1 }).collect())?,
        alphabet: WeightAlphabet::Binary,
    };
    let model = QuantizedModel::new(
        vec![8, 8, 1],
        vec![
            Layer::Quantize(Quantizer::Sign),
            Layer::Conv2d(conv),
            Layer::MaxPool { size: 2 },
            Layer::Affine { scale: vec![0.5; 4], shift: vec![0.0, 1.0, -1.0, 0.0] },
            Layer::Quantize(Quantizer::Ternary { threshold: 0.5 }),
            Layer::Flatten,
            Layer::Dense(QuantDense {
                weights: IntMatrix::new(3, 64, (0..192).map(|k: i32| k % 3 - 1).collect())?,
                alphabet: WeightAlphabet::Ternary,
            }),
        ],
    )?;

    let dir = std::env::temp_dir().join(format!("cimsim-model-files-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("tiny_cnn.toml");
    save_model(&model, &path)?;
    println!("{}", std::fs::read_to_string(&path)?);
    assert_eq!(load_model(&path)?, model);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
