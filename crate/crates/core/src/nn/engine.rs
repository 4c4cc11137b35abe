use rayon::prelude::*;

use super::conv::im2col_conv2d;
use super::dataset::Dataset;
use super::model::{Layer, QuantizedModel};
use super::quant::sign;
use crate::error::{Error, Result};
use crate::mapping::{MappingScheme, MvmOptions};
use crate::matrix::IntMatrix;
use crate::tiler::{write_matrix, CrossbarPool, MatrixHandle, WriteStats};
use crate::xbar::CrossbarConfig;

/// Executes the integer MVMs of a model's dense and conv layers.
pub trait MvmBackend: Sync {
    /// `weights(layer) * v` for the crossbar layer at index `layer`.
    fn mvm(&self, layer: usize, v: &[i32]) -> Result<Vec<i32>>;

    fn stats(&self) -> WriteStats {
        WriteStats::default()
    }
}

/// Exact integer products on the host.
#[derive(Debug, Clone)]
pub struct HostBackend {
    weights: Vec<Option<IntMatrix>>,
}

impl HostBackend {
    pub fn new(model: &QuantizedModel) -> Self {
        HostBackend {
            weights: model
                .layers
                .iter()
                .map(|l| l.crossbar_weights().map(|(w, _)| w.clone()))
                .collect(),
        }
    }
}

fn missing(layer: usize) -> Error {
    Error::Model(format!("layer {layer} has no weights to multiply"))
}

impl MvmBackend for HostBackend {
    fn mvm(&self, layer: usize, v: &[i32]) -> Result<Vec<i32>> {
        self.weights
            .get(layer)
            .and_then(Option::as_ref)
            .ok_or_else(|| missing(layer))?
            .matvec(v)
    }
}

/// Tile shape and correction switch for [`CrossbarBackend`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendOptions {
    /// `(m_int, n_int)`; defaults to the crossbar size capped by the layer size.
    pub tile: Option<(usize, usize)>,
    pub analog_correction: bool,
}

impl Default for BackendOptions {
    fn default() -> Self {
        BackendOptions {
            tile: None,
            analog_correction: true,
        }
    }
}

/// Every crossbar layer written once through the tiler, in layer order.
#[derive(Debug)]
pub struct CrossbarBackend {
    handles: Vec<Option<MatrixHandle>>,
}

impl CrossbarBackend {
    pub fn program(
        model: &QuantizedModel,
        scheme: MappingScheme,
        cfg: CrossbarConfig,
        opts: BackendOptions,
    ) -> Result<Self> {
        let mut pool = CrossbarPool::new(cfg)?;
        let mut handles = Vec::with_capacity(model.layers.len());
        for (idx, layer) in model.layers.iter().enumerate() {
            let Some((w, _)) = layer.crossbar_weights() else {
                handles.push(None);
                continue;
            };
            let (m_int, n_int) = opts.tile.unwrap_or((
                w.rows().min(pool.config().cols),
                w.cols().min(pool.config().rows),
            ));
            let mut handle = write_matrix(w, m_int, n_int, scheme, &mut pool).map_err(|e| match e {
                Error::Encoding { .. } => Error::Model(format!(
                    "layer {idx} ({}): weights do not fit mapping {scheme}: {e}",
                    layer.name()
                )),
                other => other,
            })?;
            handle.set_options(MvmOptions {
                analog_correction: opts.analog_correction,
            });
            handles.push(Some(handle));
        }
        Ok(CrossbarBackend { handles })
    }

    pub fn handle(&self, layer: usize) -> Option<&MatrixHandle> {
        self.handles.get(layer).and_then(Option::as_ref)
    }
}

impl MvmBackend for CrossbarBackend {
    fn mvm(&self, layer: usize, v: &[i32]) -> Result<Vec<i32>> {
        self.handle(layer).ok_or_else(|| missing(layer))?.mvm(v)
    }

    fn stats(&self) -> WriteStats {
        self.handles
            .iter()
            .flatten()
            .fold(WriteStats::default(), |acc, h| acc + h.stats())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    /// Run the first dense/conv layer on the host at full precision instead
    /// of sign-quantizing real-valued inputs for the crossbar.
    pub host_first_layer: bool,
}

/// Forward passes of one model against one backend.
pub struct Engine<'m, B> {
    model: &'m QuantizedModel,
    shapes: Vec<Vec<usize>>,
    backend: B,
    opts: EngineOptions,
}

fn to_ternary_ints(x: &[f32]) -> Option<Vec<i32>> {
    x.iter()
        .map(|&v| {
            if v == 1.0 {
                Some(1)
            } else if v == -1.0 {
                Some(-1)
            } else if v == 0.0 {
                Some(0)
            } else {
                None
            }
        })
        .collect()
}

fn shape3(shape: &[usize]) -> [usize; 3] {
    [shape[0], shape[1], shape[2]]
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(x: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate().skip(1) {
        if v > x[best] {
            best = i;
        }
    }
    best
}

impl<'m, B: MvmBackend> Engine<'m, B> {
    pub fn new(model: &'m QuantizedModel, backend: B, opts: EngineOptions) -> Result<Self> {
        Ok(Engine {
            shapes: model.validate()?,
            model,
            backend,
            opts,
        })
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// Final-layer outputs for one sample.
    pub fn forward(&self, sample: &[f32]) -> Result<Vec<f32>> {
        let numel: usize = self.shapes[0].iter().product();
        if sample.len() != numel {
            return Err(Error::shape(format!(
                "sample has {} values, model input {:?} needs {numel}",
                sample.len(),
                self.shapes[0]
            )));
        }
        let first_crossbar = self.model.layers.iter().position(Layer::is_crossbar);
        let mut act = sample.to_vec();
        for (idx, layer) in self.model.layers.iter().enumerate() {
            let in_shape = &self.shapes[idx];
            act = match layer {
                Layer::Dense(_) | Layer::Conv2d(_) => {
                    let first = Some(idx) == first_crossbar;
                    if first && self.opts.host_first_layer {
                        self.host_float_layer(layer, &act, in_shape)?
                    } else {
                        let ints = match to_ternary_ints(&act) {
                            Some(v) => v,
                            None if first => act.iter().map(|&x| sign(x) as i32).collect(),
                            None => {
                                return Err(Error::Model(format!(
                                    "layer {idx} ({}) receives activations outside {{-1, 0, +1}}; \
                                     add a quantize layer before it",
                                    layer.name()
                                )))
                            }
                        };
                        let out = match layer {
                            Layer::Conv2d(c) => {
                                im2col_conv2d(&ints, shape3(in_shape), c, |p| {
                                    self.backend.mvm(idx, p)
                                })?
                                .0
                            }
                            _ => self.backend.mvm(idx, &ints)?,
                        };
                        out.into_iter().map(|v| v as f32).collect()
                    }
                }
                Layer::MaxPool { size } => {
                    let [h, w, c] = shape3(in_shape);
                    let (oh, ow) = (h / size, w / size);
                    let mut out = vec![f32::NEG_INFINITY; oh * ow * c];
                    for y in 0..oh * size {
                        for x in 0..ow * size {
                            for ch in 0..c {
                                let o = &mut out[((y / size) * ow + x / size) * c + ch];
                                *o = o.max(act[(y * w + x) * c + ch]);
                            }
                        }
                    }
                    out
                }
                Layer::Affine { scale, shift } => {
                    let c = scale.len();
                    act.iter()
                        .enumerate()
                        .map(|(i, &x)| x * scale[i % c] + shift[i % c])
                        .collect()
                }
                Layer::Quantize(q) => act.iter().map(|&x| q.apply(x)).collect(),
                Layer::Flatten => act,
            };
        }
        Ok(act)
    }

    fn host_float_layer(&self, layer: &Layer, act: &[f32], in_shape: &[usize]) -> Result<Vec<f32>> {
        let (w, _) = layer.crossbar_weights().expect("crossbar layer");
        let dot = |v: &[f32]| -> Result<Vec<f32>> {
            Ok((0..w.rows())
                .map(|r| w.row(r).iter().zip(v).map(|(&a, &b)| a as f32 * b).sum())
                .collect())
        };
        match layer {
            Layer::Conv2d(c) => Ok(im2col_conv2d(act, shape3(in_shape), c, dot)?.0),
            _ => dot(act),
        }
    }

    pub fn predict(&self, sample: &[f32]) -> Result<usize> {
        Ok(argmax(&self.forward(sample)?))
    }

    /// Predicts every sample, optionally spreading samples over the rayon pool.
    /// The result does not depend on `parallel`.
    pub fn evaluate(&self, dataset: &Dataset, parallel: bool) -> Result<InferenceReport> {
        if dataset.sample_shape() != self.shapes[0].as_slice() {
            return Err(Error::shape(format!(
                "dataset samples are {:?}, model expects {:?}",
                dataset.sample_shape(),
                self.shapes[0]
            )));
        }
        let predict = |i: usize| self.predict(dataset.sample(i));
        let predictions: Vec<usize> = if parallel {
            (0..dataset.len()).into_par_iter().map(predict).collect::<Result<_>>()?
        } else {
            (0..dataset.len()).map(predict).collect::<Result<_>>()?
        };
        let correct = predictions
            .iter()
            .zip(dataset.labels())
            .filter(|(p, l)| p == l)
            .count();
        Ok(InferenceReport {
            accuracy: if predictions.is_empty() {
                0.0
            } else {
                correct as f64 / predictions.len() as f64
            },
            correct,
            predictions,
            stats: self.backend.stats(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceReport {
    pub predictions: Vec<usize>,
    pub correct: usize,
    /// Top-1 accuracy in `[0, 1]`.
    pub accuracy: f64,
    pub stats: WriteStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferenceOptions {
    pub engine: EngineOptions,
    pub backend: BackendOptions,
    pub parallel: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            engine: EngineOptions::default(),
            backend: BackendOptions::default(),
            parallel: true,
        }
    }
}

/// Programs the model once on a crossbar and classifies the whole dataset.
pub fn run_inference(
    model: &QuantizedModel,
    dataset: &Dataset,
    scheme: MappingScheme,
    cfg: &CrossbarConfig,
    opts: &InferenceOptions,
) -> Result<InferenceReport> {
    let backend = CrossbarBackend::program(model, scheme, cfg.clone(), opts.backend)?;
    Engine::new(model, backend, opts.engine)?.evaluate(dataset, opts.parallel)
}

/// The same network evaluated with exact host arithmetic.
pub fn host_inference(
    model: &QuantizedModel,
    dataset: &Dataset,
    opts: &InferenceOptions,
) -> Result<InferenceReport> {
    Engine::new(model, HostBackend::new(model), opts.engine)?.evaluate(dataset, opts.parallel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::{QuantDense, WeightAlphabet};
    use crate::nn::quant::Quantizer;
    use crate::nn::Tensor;

    fn toy() -> (QuantizedModel, Dataset) {
        let w1 = IntMatrix::from_rows(&[[1, -1, 1, -1], [1, 1, -1, -1], [-1, 1, 1, -1]]).unwrap();
        let w2 = IntMatrix::from_rows(&[[1, -1, 1], [-1, 1, 1]]).unwrap();
        let model = QuantizedModel::new(
            vec![4],
            vec![
                Layer::Dense(QuantDense {
                    weights: w1,
                    alphabet: WeightAlphabet::Binary,
                }),
                Layer::Affine {
                    scale: vec![1.0, 0.5, 2.0],
                    shift: vec![0.5, -0.5, 0.0],
                },
                Layer::Quantize(Quantizer::Sign),
                Layer::Dense(QuantDense {
                    weights: w2,
                    alphabet: WeightAlphabet::Binary,
                }),
            ],
        )
        .unwrap();
        let data: Vec<f32> = (0..8 * 4).map(|i| ((i * 7 % 11) as f32) - 5.0).collect();
        let ds = Dataset::new(Tensor::new(vec![8, 4], data).unwrap(), vec![0, 1, 0, 1, 1, 0, 0, 1])
            .unwrap();
        (model, ds)
    }

    #[test]
    fn argmax_ties_pick_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0]), 0);
    }

    #[test]
    fn ideal_crossbar_matches_host() {
        let (model, ds) = toy();
        let cfg = CrossbarConfig::ideal(8, 8, 5.0, 10.0);
        let host = host_inference(&model, &ds, &InferenceOptions::default()).unwrap();
        for scheme in ["bnn-i", "bnn-iii", "bnn-v", "bnn-vi", "tnn-ii", "tnn-v+cells"] {
            let xb = run_inference(&model, &ds, scheme.parse().unwrap(), &cfg, &InferenceOptions::default())
                .unwrap();
            assert_eq!(xb.predictions, host.predictions, "{scheme}");
            assert_eq!(xb.stats.writes, 2);
        }
    }

    #[test]
    fn non_quantized_hidden_activations_are_rejected() {
        let (mut model, ds) = toy();
        model.layers.remove(2);
        let err = host_inference(&model, &ds, &InferenceOptions::default()).unwrap_err();
        assert!(err.to_string().contains("layer 2"), "{err}");
    }

    #[test]
    fn ternary_weights_need_a_ternary_mapping() {
        let model = QuantizedModel::new(
            vec![2],
            vec![Layer::Dense(QuantDense {
                weights: IntMatrix::from_rows(&[[1, 0]]).unwrap(),
                alphabet: WeightAlphabet::Ternary,
            })],
        )
        .unwrap();
        let err = CrossbarBackend::program(
            &model,
            "bnn-vi".parse().unwrap(),
            CrossbarConfig::ideal(4, 4, 5.0, 10.0),
            BackendOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Model(ref m) if m.contains("layer 0")), "{err}");
    }
}
