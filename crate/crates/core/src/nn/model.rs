use serde::{Deserialize, Serialize};

use super::quant::Quantizer;
use crate::error::{Error, Result};
use crate::mapping::Alphabet;
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightAlphabet {
    Binary,
    Ternary,
}

impl WeightAlphabet {
    pub fn as_alphabet(self) -> Alphabet {
        match self {
            WeightAlphabet::Binary => Alphabet::Binary,
            WeightAlphabet::Ternary => Alphabet::Ternary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Valid,
    Same,
}

/// Fully connected layer; `weights` is `units x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantDense {
    pub weights: IntMatrix,
    pub alphabet: WeightAlphabet,
}

/// NHWC convolution. `weights` is the unrolled `filters x (kh * kw * in_channels)`
/// matrix with the kernel index ordered (kh, kw, in_channel).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantConv2d {
    pub filters: usize,
    pub kernel: (usize, usize),
    pub in_channels: usize,
    pub stride: usize,
    pub padding: Padding,
    pub weights: IntMatrix,
    pub alphabet: WeightAlphabet,
}

impl QuantConv2d {
    /// Output height/width and the leading (top, left) padding for an input.
    pub fn geometry(&self, h: usize, w: usize) -> Result<ConvGeometry> {
        let (kh, kw) = self.kernel;
        let s = self.stride;
        let axis = |size: usize, k: usize| -> Option<(usize, usize)> {
            match self.padding {
                Padding::Valid => (size >= k).then(|| ((size - k) / s + 1, 0)),
                Padding::Same => {
                    let out = size.div_ceil(s);
                    let total = ((out - 1) * s + k).saturating_sub(size);
                    Some((out, total / 2))
                }
            }
        };
        match (axis(h, kh), axis(w, kw)) {
            (Some((out_h, pad_top)), Some((out_w, pad_left))) => Ok(ConvGeometry {
                out_h,
                out_w,
                pad_top,
                pad_left,
            }),
            _ => Err(Error::shape(format!(
                "{kh}x{kw} kernel does not fit a {h}x{w} input without padding"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub out_h: usize,
    pub out_w: usize,
    pub pad_top: usize,
    pub pad_left: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(QuantDense),
    Conv2d(QuantConv2d),
    /// Non-overlapping `size x size` max pooling.
    MaxPool { size: usize },
    /// Per-channel `x * scale + shift` on the last axis.
    Affine { scale: Vec<f32>, shift: Vec<f32> },
    Quantize(Quantizer),
    Flatten,
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv2d(_) => "conv2d",
            Layer::MaxPool { .. } => "maxpool",
            Layer::Affine { .. } => "affine",
            Layer::Quantize(_) => "quantize",
            Layer::Flatten => "flatten",
        }
    }

    /// Whether the layer's MVMs run on the crossbar.
    pub fn is_crossbar(&self) -> bool {
        matches!(self, Layer::Dense(_) | Layer::Conv2d(_))
    }

    /// Weight matrix written to the crossbar, if any.
    pub fn crossbar_weights(&self) -> Option<(&IntMatrix, WeightAlphabet)> {
        match self {
            Layer::Dense(d) => Some((&d.weights, d.alphabet)),
            Layer::Conv2d(c) => Some((&c.weights, c.alphabet)),
            _ => None,
        }
    }

    /// Output shape for a given input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let numel: usize = input.iter().product();
        match self {
            Layer::Dense(d) => {
                if numel != d.weights.cols() {
                    return Err(Error::shape(format!(
                        "dense expects {} inputs, got shape {input:?}",
                        d.weights.cols()
                    )));
                }
                Ok(vec![d.weights.rows()])
            }
            Layer::Conv2d(c) => {
                let [h, w, ch] = input else {
                    return Err(Error::shape(format!(
                        "conv2d expects an HxWxC input, got {input:?}"
                    )));
                };
                if *ch != c.in_channels {
                    return Err(Error::shape(format!(
                        "conv2d expects {} channels, got {ch}",
                        c.in_channels
                    )));
                }
                let g = c.geometry(*h, *w)?;
                Ok(vec![g.out_h, g.out_w, c.filters])
            }
            Layer::MaxPool { size } => {
                let [h, w, ch] = input else {
                    return Err(Error::shape(format!(
                        "maxpool expects an HxWxC input, got {input:?}"
                    )));
                };
                if *size == 0 || h / size == 0 || w / size == 0 {
                    return Err(Error::shape(format!(
                        "pool size {size} does not fit {h}x{w}"
                    )));
                }
                Ok(vec![h / size, w / size, *ch])
            }
            Layer::Affine { scale, shift } => {
                let channels = *input.last().unwrap_or(&0);
                if scale.len() != channels || shift.len() != channels {
                    return Err(Error::shape(format!(
                        "affine has {}/{} parameters for {channels} channels",
                        scale.len(),
                        shift.len()
                    )));
                }
                Ok(input.to_vec())
            }
            Layer::Quantize(_) => Ok(input.to_vec()),
            Layer::Flatten => Ok(vec![numel]),
        }
    }
}

/// Layer list plus the input shape it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    pub input_shape: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl QuantizedModel {
    pub fn new(input_shape: Vec<usize>, layers: Vec<Layer>) -> Result<Self> {
        let model = QuantizedModel {
            input_shape,
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks weight alphabets and that shapes chain from input to output.
    pub fn validate(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.is_empty() || self.input_shape.contains(&0) {
            return Err(Error::Model(format!(
                "input shape {:?} must be non-empty and positive",
                self.input_shape
            )));
        }
        let mut shapes = vec![self.input_shape.clone()];
        for (idx, layer) in self.layers.iter().enumerate() {
            if let Some((weights, alphabet)) = layer.crossbar_weights() {
                let a = alphabet.as_alphabet();
                if let Some((k, v)) = weights
                    .as_slice()
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !a.contains(**v))
                {
                    return Err(Error::Model(format!(
                        "layer {idx} ({}): weight {v} at index {k} is outside the {} alphabet",
                        layer.name(),
                        a.label()
                    )));
                }
            }
            if let Layer::Conv2d(c) = layer {
                let (kh, kw) = c.kernel;
                if c.stride == 0
                    || kh == 0
                    || kw == 0
                    || c.weights.rows() != c.filters
                    || c.weights.cols() != kh * kw * c.in_channels
                {
                    return Err(Error::Model(format!(
                        "layer {idx} (conv2d): weight matrix {}x{} does not match {} filters of {kh}x{kw}x{}, stride {}",
                        c.weights.rows(),
                        c.weights.cols(),
                        c.filters,
                        c.in_channels,
                        c.stride
                    )));
                }
            }
            if let Layer::Quantize(Quantizer::Ternary { threshold }) = layer {
                if !(*threshold >= 0.0) {
                    return Err(Error::Model(format!(
                        "layer {idx} (quantize): ternary threshold must be >= 0, got {threshold}"
                    )));
                }
            }
            let next = layer
                .output_shape(shapes.last().expect("non-empty"))
                .map_err(|e| Error::Model(format!("layer {idx} ({}): {e}", layer.name())))?;
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn output_len(&self) -> usize {
        self.validate()
            .ok()
            .and_then(|s| s.last().map(|s| s.iter().product()))
            .unwrap_or(0)
    }
}
