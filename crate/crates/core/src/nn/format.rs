//! Model files: a TOML manifest describing the layers plus a flat
//! little-endian weight blob referenced by byte offset.
//!
//! ```toml
//! format = "cimsim-model"
//! version = 1
//! weights = "mlp.bin"          # relative to the manifest
//! input_shape = [64]
//!
//! [[layers]]
//! kind = "dense"
//! units = 128
//! alphabet = "binary"          # or "ternary"
//! weights = { offset = 0, len = 8192 }   # i8, units x inputs, row-major
//!
//! [[layers]]
//! kind = "affine"
//! scale = { offset = 8192, len = 128 }   # f32
//! shift = { offset = 8704, len = 128 }   # f32
//!
//! [[layers]]
//! kind = "quantize"
//! mode = "ternary"
//! threshold = 0.5
//! ```
//!
//! Convolution weights are i8 in (filters, kh, kw, in_channels) order.
//! `len` counts elements, `offset` counts bytes from the start of the blob.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::model::{Layer, Padding, QuantConv2d, QuantDense, QuantizedModel, WeightAlphabet};
use super::quant::Quantizer;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

pub const FORMAT_NAME: &str = "cimsim-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlobRef {
    offset: usize,
    len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum LayerEntry {
    Dense {
        units: usize,
        alphabet: WeightAlphabet,
        weights: BlobRef,
    },
    Conv2d {
        filters: usize,
        kernel: [usize; 2],
        in_channels: usize,
        stride: usize,
        padding: Padding,
        alphabet: WeightAlphabet,
        weights: BlobRef,
    },
    Maxpool {
        size: usize,
    },
    Affine {
        scale: BlobRef,
        shift: BlobRef,
    },
    Quantize {
        mode: QuantMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f32>,
    },
    Flatten,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum QuantMode {
    Sign,
    Ternary,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    version: u32,
    weights: PathBuf,
    input_shape: Vec<usize>,
    layers: Vec<LayerEntry>,
}

struct Blob<'a> {
    path: &'a Path,
    bytes: &'a [u8],
}

impl Blob<'_> {
    fn slice(&self, r: BlobRef, elem: usize, layer: usize) -> Result<&[u8]> {
        let end = r
            .len
            .checked_mul(elem)
            .and_then(|n| n.checked_add(r.offset))
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| {
                Error::parse(
                    self.path,
                    format!(
                        "layer {layer}: tensor at offset {} with {} elements runs past the {}-byte blob",
                        r.offset,
                        r.len,
                        self.bytes.len()
                    ),
                )
            })?;
        Ok(&self.bytes[r.offset..end])
    }

    fn i8s(&self, r: BlobRef, layer: usize) -> Result<Vec<i32>> {
        Ok(self
            .slice(r, 1, layer)?
            .iter()
            .map(|&b| b as i8 as i32)
            .collect())
    }

    fn f32s(&self, r: BlobRef, layer: usize) -> Result<Vec<f32>> {
        Ok(self
            .slice(r, 4, layer)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
}

/// Reads and validates a model manifest and its weight blob.
pub fn load_model(path: impl AsRef<Path>) -> Result<QuantizedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    if manifest.format != FORMAT_NAME || manifest.version != FORMAT_VERSION {
        return Err(Error::parse(
            path,
            format!(
                "expected format `{FORMAT_NAME}` version {FORMAT_VERSION}, got `{}` version {}",
                manifest.format, manifest.version
            ),
        ));
    }
    let blob_path = path
        .parent()
        .unwrap_or_else(|| Path::new(""))
        .join(&manifest.weights);
    let bytes = fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
    let blob = Blob {
        path: &blob_path,
        bytes: &bytes,
    };

    let mut layers = Vec::with_capacity(manifest.layers.len());
    let mut shape = manifest.input_shape.clone();
    for (idx, entry) in manifest.layers.into_iter().enumerate() {
        let layer = match entry {
            LayerEntry::Dense {
                units,
                alphabet,
                weights,
            } => {
                let inputs = shape.iter().product::<usize>();
                let data = blob.i8s(weights, idx)?;
                let weights = IntMatrix::new(units, inputs, data).map_err(|e| {
                    Error::parse(path, format!("layer {idx} (dense): {e}"))
                })?;
                Layer::Dense(QuantDense { weights, alphabet })
            }
            LayerEntry::Conv2d {
                filters,
                kernel,
                in_channels,
                stride,
                padding,
                alphabet,
                weights,
            } => {
                let data = blob.i8s(weights, idx)?;
                let cols = kernel[0] * kernel[1] * in_channels;
                let weights = IntMatrix::new(filters, cols, data).map_err(|e| {
                    Error::parse(path, format!("layer {idx} (conv2d): {e}"))
                })?;
                Layer::Conv2d(QuantConv2d {
                    filters,
                    kernel: (kernel[0], kernel[1]),
                    in_channels,
                    stride,
                    padding,
                    weights,
                    alphabet,
                })
            }
            LayerEntry::Maxpool { size } => Layer::MaxPool { size },
            LayerEntry::Affine { scale, shift } => Layer::Affine {
                scale: blob.f32s(scale, idx)?,
                shift: blob.f32s(shift, idx)?,
            },
            LayerEntry::Quantize { mode, threshold } => Layer::Quantize(match (mode, threshold) {
                (QuantMode::Sign, None) => Quantizer::Sign,
                (QuantMode::Ternary, Some(threshold)) => Quantizer::Ternary { threshold },
                (QuantMode::Sign, Some(_)) => {
                    return Err(Error::parse(path, format!("layer {idx} (quantize): sign takes no threshold")))
                }
                (QuantMode::Ternary, None) => {
                    return Err(Error::parse(path, format!("layer {idx} (quantize): ternary needs a threshold")))
                }
            }),
            LayerEntry::Flatten => Layer::Flatten,
        };
        // keep tracking shapes so dense layers know their fan-in
        shape = layer
            .output_shape(&shape)
            .map_err(|e| Error::parse(path, format!("layer {idx} ({}): {e}", layer.name())))?;
        layers.push(layer);
    }
    QuantizedModel::new(manifest.input_shape, layers).map_err(|e| Error::parse(path, e.to_string()))
}

/// Writes the manifest to `manifest_path` and the blob next to it with a `.bin` extension.
pub fn save_model(model: &QuantizedModel, manifest_path: impl AsRef<Path>) -> Result<()> {
    let manifest_path = manifest_path.as_ref();
    model.validate()?;
    let blob_name = PathBuf::from(
        manifest_path
            .with_extension("bin")
            .file_name()
            .ok_or_else(|| Error::Config(format!("{} has no file name", manifest_path.display())))?,
    );
    let mut bytes: Vec<u8> = Vec::new();
    let push_i8 = |bytes: &mut Vec<u8>, data: &[i32]| {
        let r = BlobRef {
            offset: bytes.len(),
            len: data.len(),
        };
        bytes.extend(data.iter().map(|&v| v as i8 as u8));
        r
    };
    let push_f32 = |bytes: &mut Vec<u8>, data: &[f32]| {
        let r = BlobRef {
            offset: bytes.len(),
            len: data.len(),
        };
        for v in data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        r
    };
    let mut entries = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        entries.push(match layer {
            Layer::Dense(d) => LayerEntry::Dense {
                units: d.weights.rows(),
                alphabet: d.alphabet,
                weights: push_i8(&mut bytes, d.weights.as_slice()),
            },
            Layer::Conv2d(c) => LayerEntry::Conv2d {
                filters: c.filters,
                kernel: [c.kernel.0, c.kernel.1],
                in_channels: c.in_channels,
                stride: c.stride,
                padding: c.padding,
                alphabet: c.alphabet,
                weights: push_i8(&mut bytes, c.weights.as_slice()),
            },
            Layer::MaxPool { size } => LayerEntry::Maxpool { size: *size },
            Layer::Affine { scale, shift } => LayerEntry::Affine {
                scale: push_f32(&mut bytes, scale),
                shift: push_f32(&mut bytes, shift),
            },
            Layer::Quantize(Quantizer::Sign) => LayerEntry::Quantize {
                mode: QuantMode::Sign,
                threshold: None,
            },
            Layer::Quantize(Quantizer::Ternary { threshold }) => LayerEntry::Quantize {
                mode: QuantMode::Ternary,
                threshold: Some(*threshold),
            },
            Layer::Flatten => LayerEntry::Flatten,
        });
    }
    let manifest = Manifest {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        weights: blob_name.clone(),
        input_shape: model.input_shape.clone(),
        layers: entries,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    let blob_path = manifest_path.with_file_name(&blob_name);
    fs::write(&blob_path, bytes).map_err(|e| Error::io(&blob_path, e))?;
    fs::write(manifest_path, text).map_err(|e| Error::io(manifest_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: usize, cols: usize) -> Layer {
        let data = (0..rows * cols).map(|k| if k % 3 == 0 { -1 } else { 1 }).collect();
        Layer::Dense(QuantDense {
            weights: IntMatrix::new(rows, cols, data).unwrap(),
            alphabet: WeightAlphabet::Binary,
        })
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        let conv = QuantConv2d {
            filters: 2,
            kernel: (3, 3),
            in_channels: 1,
            stride: 1,
            padding: Padding::Same,
            weights: IntMatrix::new(2, 9, (0..18).map(|k: i32| k % 3 - 1).collect()).unwrap(),
            alphabet: WeightAlphabet::Ternary,
        };
        let model = QuantizedModel::new(
            vec![4, 4, 1],
            vec![
                Layer::Conv2d(conv),
                Layer::Affine {
                    scale: vec![0.5, -1.25],
                    shift: vec![3.0, 0.0],
                },
                Layer::Quantize(Quantizer::Ternary { threshold: 0.75 }),
                Layer::MaxPool { size: 2 },
                Layer::Flatten,
                dense(3, 8),
                Layer::Quantize(Quantizer::Sign),
            ],
        )
        .unwrap();
        save_model(&model, &path).unwrap();
        assert!(dir.path().join("m.bin").exists());
        assert_eq!(load_model(&path).unwrap(), model);
    }

    #[test]
    fn minimal_dense_loads() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("w.bin"), [1u8, 0xff, 0xff, 1]).unwrap();
        let path = dir.path().join("m.toml");
        fs::write(
            &path,
            r#"format = "cimsim-model"
version = 1
weights = "w.bin"
input_shape = [2]

[[layers]]
kind = "dense"
units = 2
alphabet = "binary"
weights = { offset = 0, len = 4 }
"#,
        )
        .unwrap();
        let m = load_model(&path).unwrap();
        assert_eq!(m.output_len(), 2);
        let Layer::Dense(d) = &m.layers[0] else { panic!() };
        assert_eq!(d.weights.as_slice(), &[1, -1, -1, 1]);
    }

    #[test]
    fn bad_alphabet_names_layer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        let model = QuantizedModel::new(vec![2], vec![Layer::Quantize(Quantizer::Sign), dense(2, 2)]).unwrap();
        save_model(&model, &path).unwrap();
        let blob = dir.path().join("m.bin");
        let mut bytes = fs::read(&blob).unwrap();
        bytes[1] = 2;
        fs::write(&blob, bytes).unwrap();
        let err = load_model(&path).unwrap_err().to_string();
        assert!(err.contains("layer 1") && err.contains("weight 2"), "{err}");
    }

    #[test]
    fn diagnostics_are_positional() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(dir.path().join("w.bin"), [1u8; 2]).unwrap();
        fs::write(&path, "format = \"cimsim-model\"\nversion = 1\nweights = \"w.bin\"\ninput_shape = [2]\n\n[[layers]]\nkind = \"dens\"\n").unwrap();
        let err = load_model(&path).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");

        fs::write(&path, "format = \"cimsim-model\"\nversion = 1\nweights = \"w.bin\"\ninput_shape = [2]\n\n[[layers]]\nkind = \"dense\"\nunits = 2\nalphabet = \"binary\"\nweights = { offset = 0, len = 4 }\n").unwrap();
        let err = load_model(&path).unwrap_err().to_string();
        assert!(err.contains("layer 0") && err.contains("2-byte blob"), "{err}");

        assert!(matches!(load_model(dir.path().join("nope.toml")), Err(Error::Io { .. })));
    }
}
