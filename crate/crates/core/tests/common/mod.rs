// Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use cimsim::mapping::{Alphabet, MappingScheme};
use cimsim::nn::{Padding, QuantConv2d, WeightAlphabet};
use cimsim::xbar::CrossbarConfig;
use cimsim::IntMatrix;
use rand::Rng;

pub const DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

pub fn data(file: &str) -> String {
    format!("{DATA_DIR}/{file}")
}

/// Noise-free 256x256 crossbar with an ideal ADC.
pub fn ideal(i_hrs: f64, i_lrs: f64) -> CrossbarConfig {
    CrossbarConfig::ideal(256, 256, i_hrs, i_lrs)
}

pub fn random_vec<R: Rng>(rng: &mut R, alphabet: Alphabet, n: usize) -> Vec<i32> {
    let values = alphabet.values();
    (0..n).map(|_| values[rng.random_range(0..values.len())]).collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, alphabet: Alphabet, rows: usize, cols: usize) -> IntMatrix {
    IntMatrix::new(rows, cols, random_vec(rng, alphabet, rows * cols)).unwrap()
}

/// Every vector of length `n` over `values`, in lexicographic order.
pub fn all_vectors(values: &[i32], n: usize) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Plain integer product, independent of `IntMatrix::matvec`.
pub fn int_mvm(w: &IntMatrix, v: &[i32]) -> Vec<i32> {
    (0..w.rows())
        .map(|r| (0..w.cols()).map(|c| w.get(r, c) * v[c]).sum())
        .collect()
}

pub fn weight_alphabet(scheme: MappingScheme) -> WeightAlphabet {
    match scheme.alphabet() {
        Alphabet::Binary => WeightAlphabet::Binary,
        Alphabet::Ternary => WeightAlphabet::Ternary,
    }
}

/// Direct NHWC convolution with zero padding, one output at a time.
pub fn direct_conv(ifm: &[i32], [h, w, c]: [usize; 3], layer: &QuantConv2d) -> (Vec<i32>, [usize; 3]) {
    let (kh, kw) = layer.kernel;
    let s = layer.stride;
    let (out_h, out_w, pad_t, pad_l) = match layer.padding {
        Padding::Valid => ((h - kh) / s + 1, (w - kw) / s + 1, 0, 0),
        Padding::Same => {
            let (oh, ow) = (h.div_ceil(s), w.div_ceil(s));
            let ph = ((oh - 1) * s + kh).saturating_sub(h);
            let pw = ((ow - 1) * s + kw).saturating_sub(w);
            (oh, ow, ph / 2, pw / 2)
        }
    };
    let mut out = vec![0; out_h * out_w * layer.filters];
    for oy in 0..out_h {
        for ox in 0..out_w {
            for f in 0..layer.filters {
                let mut acc = 0;
                for dy in 0..kh {
                    for dx in 0..kw {
                        let y = (oy * s + dy) as isize - pad_t as isize;
                        let x = (ox * s + dx) as isize - pad_l as isize;
                        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
                            continue;
                        }
                        for ch in 0..c {
                            let weight = layer.weights.get(f, (dy * kw + dx) * c + ch);
                            acc += weight * ifm[(y as usize * w + x as usize) * c + ch];
                        }
                    }
                }
                out[(oy * out_w + ox) * layer.filters + f] = acc;
            }
        }
    }
    (out, [out_h, out_w, layer.filters])
}

/// Mean of `max(X, 0)` for `X ~ N(mu, sigma)`: `mu * Phi(mu/sigma) + sigma * phi(mu/sigma)`.
pub fn rectified_normal_mean(mu: f64, sigma: f64) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let std = Normal::new(0.0, 1.0).unwrap();
    let z = mu / sigma;
    mu * std.cdf(z) + sigma * std.pdf(z)
}

/// Second moment of `max(X, 0)`, for the standard error of the sample mean.
pub fn rectified_normal_second_moment(mu: f64, sigma: f64) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let std = Normal::new(0.0, 1.0).unwrap();
    let z = mu / sigma;
    (mu * mu + sigma * sigma) * std.cdf(z) + mu * sigma * std.pdf(z)
}
