// A ternary convolution lowered to one crossbar MVM per output pixel,
// checked against the same lowering on exact host arithmetic.

use cimsim::nn::{im2col_conv2d, Padding, QuantConv2d, WeightAlphabet};
use cimsim::tiler::{write_matrix, CrossbarPool};
use cimsim::xbar::CrossbarConfig;
use cimsim::IntMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (h, w, c, filters) = (6, 5, 3, 10);
    let weights: Vec<i32> = (0..filters * 9 * c).map(|k| ((k * 5 + k / 7) % 3) as i32 - 1).collect();
    let layer = QuantConv2d {
        filters,
        kernel: (3, 3),
        in_channels: c,
        stride: 2,
        padding: Padding::Same,
        weights: IntMatrix::new(filters, 9 * c, weights)?,
        alphabet: WeightAlphabet::Ternary,
    };
    let ifm: Vec<i32> = (0..h * w * c).map(|k| ((k * 11 + 3) % 3) as i32 - 1).collect();

    // 10 filters on 8-column tiles: one full and one edge tile per column block
    let mut pool = CrossbarPool::new(CrossbarConfig::ideal(16, 8, 5.0, 10.0))?;
    let handle = write_matrix(&layer.weights, 8, 16, "tnn-ii+cycles".parse()?, &mut pool)?;
    let (ofm, shape) = im2col_conv2d(&ifm, [h, w, c], &layer, |patch| handle.mvm(patch))?;
    let (host, _) = im2col_conv2d(&ifm, [h, w, c], &layer, |patch| layer.weights.matvec(patch))?;
    assert_eq!(ofm, host);

    println!("ofm {shape:?}, {} tiles, {:?}", handle.grid().len(), handle.stats());
    println!("first pixel: {:?}", &ofm[..filters]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
