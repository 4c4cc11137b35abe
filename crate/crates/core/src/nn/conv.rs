//! Convolution lowered to one MVM per output pixel.
//!
//! The kernel tensor is unrolled into a `filters x (kh * kw * in_channels)`
//! matrix, written once. Each output pixel gathers the matching input patch in
//! the same (kh, kw, in_channel) order and sends it through `mvm`. Positions
//! that fall into the padding read as zero; BNN mappings treat a zero input as
//! an undriven row, so padding never enters the correction terms.

use super::model::QuantConv2d;
use crate::error::{Error, Result};

/// Copies the patch for output pixel `(oy, ox)` into `patch`.
pub fn gather_patch<T: Copy + Default>(
    ifm: &[T],
    in_shape: [usize; 3],
    layer: &QuantConv2d,
    pad: (usize, usize),
    (oy, ox): (usize, usize),
    patch: &mut [T],
) {
    let [h, w, c] = in_shape;
    let (kh, kw) = layer.kernel;
    let mut k = 0;
    for dy in 0..kh {
        let y = (oy * layer.stride + dy) as isize - pad.0 as isize;
        for dx in 0..kw {
            let x = (ox * layer.stride + dx) as isize - pad.1 as isize;
            let inside = (0..h as isize).contains(&y) && (0..w as isize).contains(&x);
            if inside {
                let base = (y as usize * w + x as usize) * c;
                patch[k..k + c].copy_from_slice(&ifm[base..base + c]);
            } else {
                patch[k..k + c].fill(T::default());
            }
            k += c;
        }
    }
}

/// Runs `layer` over an `h x w x c` feature map, returning the output map and
/// its shape. `mvm` computes `weights * patch` for one unrolled patch.
pub fn im2col_conv2d<T, F>(
    ifm: &[T],
    in_shape: [usize; 3],
    layer: &QuantConv2d,
    mut mvm: F,
) -> Result<(Vec<T>, [usize; 3])>
where
    T: Copy + Default,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let [h, w, c] = in_shape;
    if c != layer.in_channels || ifm.len() != h * w * c {
        return Err(Error::shape(format!(
            "conv2d over {h}x{w}x{c} ({} values) but the layer takes {} channels",
            ifm.len(),
            layer.in_channels
        )));
    }
    let g = layer.geometry(h, w)?;
    let (kh, kw) = layer.kernel;
    let mut patch = vec![T::default(); kh * kw * c];
    let mut ofm = Vec::with_capacity(g.out_h * g.out_w * layer.filters);
    for oy in 0..g.out_h {
        for ox in 0..g.out_w {
            gather_patch(ifm, in_shape, layer, (g.pad_top, g.pad_left), (oy, ox), &mut patch);
            let out = mvm(&patch)?;
            if out.len() != layer.filters {
                return Err(Error::shape(format!(
                    "mvm returned {} values for {} filters",
                    out.len(),
                    layer.filters
                )));
            }
            ofm.extend_from_slice(&out);
        }
    }
    Ok((ofm, [g.out_h, g.out_w, layer.filters]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::nn::model::{Padding, WeightAlphabet};

    fn layer(filters: usize, k: usize, c: usize, stride: usize, padding: Padding) -> QuantConv2d {
        let data = (0..filters * k * k * c)
            .map(|i| if (i * 5 + i / 3) % 3 == 0 { -1 } else { 1 })
            .collect();
        QuantConv2d {
            filters,
            kernel: (k, k),
            in_channels: c,
            stride,
            padding,
            weights: IntMatrix::new(filters, k * k * c, data).unwrap(),
            alphabet: WeightAlphabet::Binary,
        }
    }

    #[test]
    fn one_by_one_kernel_is_per_pixel_dense() {
        let l = layer(3, 1, 2, 1, Padding::Valid);
        let ifm: Vec<i32> = (0..4 * 2).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let (ofm, shape) =
            im2col_conv2d(&ifm, [2, 2, 2], &l, |p| l.weights.matvec(p)).unwrap();
        assert_eq!(shape, [2, 2, 3]);
        for px in 0..4 {
            let dense = l.weights.matvec(&ifm[px * 2..px * 2 + 2]).unwrap();
            assert_eq!(&ofm[px * 3..px * 3 + 3], dense.as_slice());
        }
    }

    #[test]
    fn same_padding_zero_fills_border() {
        let l = layer(1, 3, 1, 1, Padding::Same);
        let ifm = vec![1i32; 9];
        let mut seen = Vec::new();
        im2col_conv2d(&ifm, [3, 3, 1], &l, |p| {
            seen.push(p.to_vec());
            Ok(vec![0])
        })
        .unwrap();
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[0], vec![0, 0, 0, 0, 1, 1, 0, 1, 1]);
        assert_eq!(seen[4], vec![1; 9]);
    }

    #[test]
    fn channel_mismatch_is_shape_error() {
        let l = layer(1, 3, 2, 1, Padding::Valid);
        let err = im2col_conv2d(&[0i32; 9], [3, 3, 1], &l, |_| Ok(vec![0])).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}
