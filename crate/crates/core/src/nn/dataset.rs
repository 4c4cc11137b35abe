//! Binary tensor files.
//!
//! Each tensor is a header followed by raw little-endian data:
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `CIMT`                            |
//! | 1     | version, `1`                            |
//! | 1     | dtype: 1 = f32, 2 = u8, 3 = i8, 4 = i32 |
//! | 2     | ndim, u16                               |
//! | 4·ndim| dims, u32 each, outermost first         |
//! | …     | data, row-major                         |
//!
//! A dataset file holds two tensors back to back: the inputs
//! (`samples x ...`) and the labels (`samples`, any integer dtype).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::Tensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CIMT";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    U8(Vec<u8>),
    I8(Vec<i8>),
    I32(Vec<i32>),
}

impl TensorData {
    fn dtype(&self) -> u8 {
        match self {
            TensorData::F32(_) => 1,
            TensorData::U8(_) => 2,
            TensorData::I8(_) => 3,
            TensorData::I32(_) => 4,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::U8(v) => v.len(),
            TensorData::I8(v) => v.len(),
            TensorData::I32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f32(&self) -> Vec<f32> {
        match self {
            TensorData::F32(v) => v.clone(),
            TensorData::U8(v) => v.iter().map(|&x| x as f32).collect(),
            TensorData::I8(v) => v.iter().map(|&x| x as f32).collect(),
            TensorData::I32(v) => v.iter().map(|&x| x as f32).collect(),
        }
    }

    /// Integer view; `None` for float data.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        match self {
            TensorData::F32(_) => None,
            TensorData::U8(v) => Some(v.iter().map(|&x| x as i64).collect()),
            TensorData::I8(v) => Some(v.iter().map(|&x| x as i64).collect()),
            TensorData::I32(v) => Some(v.iter().map(|&x| x as i64).collect()),
        }
    }
}

/// A tensor as stored on disk, keeping its dtype.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub shape: Vec<usize>,
    pub data: TensorData,
}

impl RawTensor {
    pub fn new(shape: Vec<usize>, data: TensorData) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} holds {numel} elements, data has {}",
                data.len()
            )));
        }
        Ok(RawTensor { shape, data })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.data.dtype()])?;
        w.write_all(&(self.shape.len() as u16).to_le_bytes())?;
        for &d in &self.shape {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        match &self.data {
            TensorData::F32(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes())),
            TensorData::U8(v) => w.write_all(v),
            TensorData::I8(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes())),
            TensorData::I32(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes())),
        }
    }

    /// Reads one tensor; errors describe the byte offset where parsing failed.
    pub fn read_from<R: Read>(r: &mut R) -> std::result::Result<Self, String> {
        let mut pos = 0usize;
        let mut take = |r: &mut R, n: usize, what: &str| -> std::result::Result<Vec<u8>, String> {
            let mut buf = vec![0u8; n];
            r.read_exact(&mut buf)
                .map_err(|_| format!("truncated at byte {pos} while reading {what}"))?;
            pos += n;
            Ok(buf)
        };
        let magic = take(r, 4, "magic")?;
        if magic != MAGIC {
            return Err(format!("bad magic {magic:?} at byte 0, expected \"CIMT\""));
        }
        let head = take(r, 4, "header")?;
        if head[0] != VERSION {
            return Err(format!("unsupported version {} at byte 4", head[0]));
        }
        let dtype = head[1];
        let ndim = u16::from_le_bytes([head[2], head[3]]) as usize;
        let dims = take(r, 4 * ndim, "dims")?;
        let shape: Vec<usize> = dims
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
            .collect();
        let numel: usize = shape.iter().product();
        let width = match dtype {
            1 | 4 => 4,
            2 | 3 => 1,
            other => return Err(format!("unknown dtype {other} at byte 5")),
        };
        let bytes = take(r, numel * width, "data")?;
        let words = || {
            bytes
                .chunks_exact(4)
                .map(|c| [c[0], c[1], c[2], c[3]])
        };
        let data = match dtype {
            1 => TensorData::F32(words().map(f32::from_le_bytes).collect()),
            2 => TensorData::U8(bytes.clone()),
            3 => TensorData::I8(bytes.iter().map(|&b| b as i8).collect()),
            _ => TensorData::I32(words().map(i32::from_le_bytes).collect()),
        };
        Ok(RawTensor { shape, data })
    }
}

/// Samples plus integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Tensor,
    labels: Vec<usize>,
}

impl Dataset {
    /// `inputs` has the sample index as its outermost axis.
    pub fn new(inputs: Tensor, labels: Vec<usize>) -> Result<Self> {
        if inputs.shape.first() != Some(&labels.len()) {
            return Err(Error::shape(format!(
                "{} labels for inputs of shape {:?}",
                labels.len(),
                inputs.shape
            )));
        }
        Ok(Dataset { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_shape(&self) -> &[usize] {
        &self.inputs.shape[1..]
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        let n: usize = self.sample_shape().iter().product();
        &self.inputs.data[i * n..(i + 1) * n]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The first `n` samples (all of them if `n` exceeds the length).
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        let per: usize = self.sample_shape().iter().product();
        let mut shape = self.inputs.shape.clone();
        shape[0] = n;
        Dataset {
            inputs: Tensor {
                shape,
                data: self.inputs.data[..n * per].to_vec(),
            },
            labels: self.labels[..n].to_vec(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        let inputs = RawTensor::new(
            self.inputs.shape.clone(),
            TensorData::F32(self.inputs.data.clone()),
        )?;
        let labels = RawTensor::new(
            vec![self.labels.len()],
            TensorData::I32(self.labels.iter().map(|&l| l as i32).collect()),
        )?;
        inputs.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        labels.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut cursor = bytes.as_slice();
        let inputs = RawTensor::read_from(&mut cursor)
            .map_err(|m| Error::parse(path, format!("inputs tensor: {m}")))?;
        let offset = bytes.len() - cursor.len();
        let labels = RawTensor::read_from(&mut cursor).map_err(|m| {
            Error::parse(path, format!("labels tensor starting at byte {offset}: {m}"))
        })?;
        if !cursor.is_empty() {
            return Err(Error::parse(
                path,
                format!("{} trailing bytes after the labels tensor", cursor.len()),
            ));
        }
        let Some(raw_labels) = labels.data.to_i64() else {
            return Err(Error::parse(path, "labels must have an integer dtype"));
        };
        if labels.shape.len() != 1 {
            return Err(Error::parse(path, format!("labels must be 1-D, got {:?}", labels.shape)));
        }
        let mut out = Vec::with_capacity(raw_labels.len());
        for (i, l) in raw_labels.into_iter().enumerate() {
            out.push(
                usize::try_from(l)
                    .map_err(|_| Error::parse(path, format!("label {i} is negative ({l})")))?,
            );
        }
        if inputs.shape.is_empty() {
            return Err(Error::parse(path, "inputs tensor must have a sample axis"));
        }
        let inputs = Tensor {
            data: inputs.data.to_f32(),
            shape: inputs.shape,
        };
        Dataset::new(inputs, out).map_err(|e| Error::parse(path, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip_all_dtypes() {
        for data in [
            TensorData::F32(vec![1.5, -2.0, 0.0, 3.25, 9.0, -0.5]),
            TensorData::U8(vec![0, 1, 2, 3, 254, 255]),
            TensorData::I8(vec![-128, -1, 0, 1, 2, 127]),
            TensorData::I32(vec![i32::MIN, -1, 0, 1, 7, i32::MAX]),
        ] {
            let t = RawTensor::new(vec![2, 3], data).unwrap();
            let mut buf = Vec::new();
            t.write_to(&mut buf).unwrap();
            assert_eq!(buf.len(), 8 + 8 + 6 * if matches!(t.data, TensorData::F32(_) | TensorData::I32(_)) { 4 } else { 1 });
            assert_eq!(RawTensor::read_from(&mut buf.as_slice()).unwrap(), t);
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let t = RawTensor::new(vec![1, 2], TensorData::U8(vec![7, 9])).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf, [b'C', b'I', b'M', b'T', 1, 2, 2, 0, 1, 0, 0, 0, 2, 0, 0, 0, 7, 9]);
    }

    #[test]
    fn truncated_input_names_offset() {
        let t = RawTensor::new(vec![4], TensorData::F32(vec![0.0; 4])).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        let err = RawTensor::read_from(&mut buf.as_slice()).unwrap_err();
        assert!(err.contains("byte 12"), "{err}");
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        let ds = Dataset::new(
            Tensor::new(vec![3, 2], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(),
            vec![2, 0, 1],
        )
        .unwrap();
        ds.save(&path).unwrap();
        let back = Dataset::load(&path).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.sample(1), &[2.0, 3.0]);
        assert_eq!(back.take(2).len(), 2);
        assert!(Dataset::new(Tensor::new(vec![2, 1], vec![0.0, 1.0]).unwrap(), vec![0]).is_err());
    }
}
