//! Quantized network inference with every dense/conv MVM offloaded to the
//! crossbar through the tiler. Affine, pooling and quantizer layers run on the
//! host in `f32`.

mod conv;
mod dataset;
mod engine;
mod format;
mod model;
mod quant;

pub use conv::{gather_patch, im2col_conv2d};
pub use dataset::{Dataset, RawTensor, TensorData};
pub use engine::{
    argmax, host_inference, run_inference, BackendOptions, CrossbarBackend, Engine,
    EngineOptions, HostBackend, InferenceOptions, InferenceReport, MvmBackend,
};
pub use format::{load_model, save_model, FORMAT_NAME, FORMAT_VERSION};
pub use model::{
    ConvGeometry, Layer, Padding, QuantConv2d, QuantDense, QuantizedModel, WeightAlphabet,
};
pub use quant::{sign, sign_quantize, ternary, ternary_quantize, Quantizer};

use crate::error::{Error, Result};

/// Dense row-major `f32` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} holds {numel} elements, data has {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }
}
