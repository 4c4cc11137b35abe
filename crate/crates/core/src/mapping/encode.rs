use super::layout::{DriveBit, WeightBit};
use super::scheme::{MappingKind, MappingScheme};
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::xbar::BitMatrix;

fn weight_bit(kind: MappingKind, bit: WeightBit, w: i32) -> bool {
    use MappingKind::*;
    match (bit, kind) {
        (WeightBit::Pos, _) => w == 1,
        (WeightBit::Neg, _) => w == -1,
        // w = 2g - 1
        (WeightBit::Single, BnnIII) => w == 1,
        // w = -2g + 1
        (WeightBit::Single, _) => w == -1,
        // w = g⁰ - 2g¹: -1 -> (1,1), 0 -> (0,0), +1 -> (0,1)
        (WeightBit::Hi, TnnIV) => w == -1,
        (WeightBit::Lo, TnnIV) => w != 0,
        // w + 1 = 2g¹ + g⁰: -1 -> (0,0), 0 -> (0,1), +1 -> (1,0)
        (WeightBit::Hi, _) => w == 1,
        (WeightBit::Lo, _) => w == 0,
    }
}

fn drive_bit(kind: MappingKind, bit: DriveBit, i: i32) -> bool {
    use MappingKind::*;
    match (bit, kind) {
        // i = 2v - 1
        (DriveBit::Plain, BnnI) => i == 1,
        // i = -2v + 1
        (DriveBit::Plain, _) => i == -1,
        (DriveBit::Pos, _) => i == 1,
        (DriveBit::Neg, _) => i == -1,
        // i = v⁰ - 2v¹
        (DriveBit::Hi, TnnII) => i == -1,
        (DriveBit::Lo, TnnII) => i != 0,
        // i + 1 = 2v¹ + v⁰
        (DriveBit::Hi, _) => i == 1,
        (DriveBit::Lo, _) => i == 0,
    }
}

/// Weights of one tile in digital crossbar form: one binary plane per cell of
/// the realization, laid out with inputs along rows and outputs along columns.
#[derive(Debug, Clone)]
pub struct DigitalPlan {
    scheme: MappingScheme,
    weights: IntMatrix,
    planes: Vec<BitMatrix>,
    weight_sums: Vec<i64>,
}

/// Splits `w` (outputs x inputs) into the binary cell planes of `scheme`.
pub fn encode_weights(w: &IntMatrix, scheme: MappingScheme) -> Result<DigitalPlan> {
    let alphabet = scheme.alphabet();
    if let Some((index, &value)) = w
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| !alphabet.contains(**v))
    {
        return Err(Error::Encoding {
            value,
            index,
            alphabet: alphabet.label(),
        });
    }
    let kind = scheme.kind();
    let planes = scheme
        .layout()
        .planes
        .iter()
        .map(|slot| {
            let mut plane = BitMatrix::zeros(w.cols(), w.rows());
            for out in 0..w.rows() {
                for (inp, &value) in w.row(out).iter().enumerate() {
                    if weight_bit(kind, slot.bit, value) {
                        plane.set(inp, out, true);
                    }
                }
            }
            plane
        })
        .collect();
    let weight_sums = (0..w.rows())
        .map(|r| w.row(r).iter().map(|&v| v as i64).sum())
        .collect();
    Ok(DigitalPlan {
        scheme,
        weights: w.clone(),
        planes,
        weight_sums,
    })
}

impl DigitalPlan {
    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &IntMatrix {
        &self.weights
    }

    /// Cell planes in the order of `scheme.layout().planes`.
    pub fn planes(&self) -> &[BitMatrix] {
        &self.planes
    }

    /// Σ w per output over all inputs.
    pub fn weight_sums(&self) -> &[i64] {
        &self.weight_sums
    }

    /// Compile-time correction per output: the weight-sum term when the
    /// mapping has one, zero otherwise.
    pub fn digital_constant(&self) -> Vec<i64> {
        match self.scheme.correction().digital {
            Some(t) if t.tally == super::Tally::Weights => self
                .weight_sums
                .iter()
                .map(|s| t.coef as i64 * s)
                .collect(),
            _ => vec![0; self.outputs()],
        }
    }

    fn plane_for(&self, bit: WeightBit) -> Option<&BitMatrix> {
        self.scheme
            .layout()
            .planes
            .iter()
            .position(|s| s.bit == bit)
            .map(|i| &self.planes[i])
    }

    /// Recovers the integer weights from the cell planes alone.
    pub fn decode_weights(&self) -> IntMatrix {
        use MappingKind::*;
        let kind = self.scheme.kind();
        let bit = |b: WeightBit, inp: usize, out: usize| -> i32 {
            self.plane_for(b).map_or(0, |p| p.get(inp, out) as i32)
        };
        let mut data = Vec::with_capacity(self.outputs() * self.inputs());
        for out in 0..self.outputs() {
            for inp in 0..self.inputs() {
                let w = match kind {
                    BnnIII => 2 * bit(WeightBit::Single, inp, out) - 1,
                    BnnIV => -2 * bit(WeightBit::Single, inp, out) + 1,
                    TnnIV => bit(WeightBit::Lo, inp, out) - 2 * bit(WeightBit::Hi, inp, out),
                    TnnV => 2 * bit(WeightBit::Hi, inp, out) + bit(WeightBit::Lo, inp, out) - 1,
                    _ => bit(WeightBit::Pos, inp, out) - bit(WeightBit::Neg, inp, out),
                };
                data.push(w);
            }
        }
        IntMatrix::new(self.outputs(), self.inputs(), data).expect("dimensions match")
    }
}

/// Input vector in digital crossbar form plus the host-side tallies the
/// corrections need.
///
/// For binary mappings a 0 entry marks a masked input (for example a padded
/// convolution position): it drives no row and is left out of every tally.
#[derive(Debug, Clone)]
pub struct EncodedInput {
    scheme: MappingScheme,
    len: usize,
    planes: Vec<(DriveBit, Vec<bool>)>,
    sum_inputs: i64,
    active: usize,
    masked: Vec<usize>,
}

pub fn encode_inputs(v: &[i32], scheme: MappingScheme) -> Result<EncodedInput> {
    let kind = scheme.kind();
    let alphabet = scheme.alphabet();
    let mut masked = Vec::new();
    for (index, &value) in v.iter().enumerate() {
        if kind.is_binary() && value == 0 {
            masked.push(index);
        } else if !alphabet.contains(value) {
            return Err(Error::Encoding {
                value,
                index,
                alphabet: alphabet.label(),
            });
        }
    }
    let mut bits: Vec<DriveBit> = Vec::new();
    for cycle in scheme.layout().cycles {
        for bit in cycle.drives.iter().flatten() {
            if !bits.contains(bit) {
                bits.push(*bit);
            }
        }
    }
    let planes = bits
        .into_iter()
        .map(|bit| (bit, v.iter().map(|&i| drive_bit(kind, bit, i)).collect()))
        .collect();
    Ok(EncodedInput {
        scheme,
        len: v.len(),
        planes,
        sum_inputs: v.iter().map(|&i| i as i64).sum(),
        active: v.len() - masked.len(),
        masked,
    })
}

impl EncodedInput {
    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sum_inputs(&self) -> i64 {
        self.sum_inputs
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn masked(&self) -> &[usize] {
        &self.masked
    }

    pub fn plane(&self, bit: DriveBit) -> Option<&[bool]> {
        self.planes
            .iter()
            .find(|(b, _)| *b == bit)
            .map(|(_, p)| p.as_slice())
    }

    /// One physical drive vector per cycle, row blocks stacked in order.
    pub fn cycle_drives(&self) -> Vec<Vec<bool>> {
        self.scheme
            .layout()
            .cycles
            .iter()
            .map(|cycle| {
                cycle
                    .drives
                    .iter()
                    .flat_map(|d| match d.and_then(|bit| self.plane(bit)) {
                        Some(p) => p.to_vec(),
                        None => vec![false; self.len],
                    })
                    .collect()
            })
            .collect()
    }

    /// Recovers the integer inputs from the drive planes (masked entries as 0).
    pub fn decode(&self) -> Vec<i32> {
        use MappingKind::*;
        let bit = |b: DriveBit, k: usize| self.plane(b).map_or(0, |p| p[k] as i32);
        let mut out: Vec<i32> = (0..self.len)
            .map(|k| match self.scheme.kind() {
                BnnI => 2 * bit(DriveBit::Plain, k) - 1,
                BnnII => -2 * bit(DriveBit::Plain, k) + 1,
                TnnII => bit(DriveBit::Lo, k) - 2 * bit(DriveBit::Hi, k),
                TnnIII => 2 * bit(DriveBit::Hi, k) + bit(DriveBit::Lo, k) - 1,
                _ => bit(DriveBit::Pos, k) - bit(DriveBit::Neg, k),
            })
            .collect();
        for &k in &self.masked {
            out[k] = 0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Variant;

    fn scheme(name: &str) -> MappingScheme {
        name.parse().unwrap()
    }

    fn plane_bits(plan: &DigitalPlan, bit: WeightBit) -> Vec<u8> {
        let p = plan.plane_for(bit).unwrap();
        (0..plan.inputs()).map(|i| p.get(i, 0) as u8).collect()
    }

    #[test]
    fn bnn_i_weights_split_into_signed_planes() {
        let w = IntMatrix::from_rows(&[[1, -1]]).unwrap();
        let plan = encode_weights(&w, scheme("bnn-i")).unwrap();
        assert_eq!(plane_bits(&plan, WeightBit::Pos), vec![1, 0]);
        assert_eq!(plane_bits(&plan, WeightBit::Neg), vec![0, 1]);
        assert_eq!(plan.digital_constant(), vec![0]);
    }

    #[test]
    fn tnn_iv_uses_twos_complement_weight_bits() {
        let w = IntMatrix::from_rows(&[[-1, 0, 1]]).unwrap();
        let plan = encode_weights(&w, scheme("tnn-iv")).unwrap();
        assert_eq!(plane_bits(&plan, WeightBit::Hi), vec![1, 0, 0]);
        assert_eq!(plane_bits(&plan, WeightBit::Lo), vec![1, 0, 1]);
    }

    #[test]
    fn tnn_v_offset_code_at_alphabet_edge() {
        let w = IntMatrix::from_rows(&[[-1]]).unwrap();
        let plan = encode_weights(&w, scheme("tnn-v")).unwrap();
        assert_eq!(plane_bits(&plan, WeightBit::Hi), vec![0]);
        assert_eq!(plane_bits(&plan, WeightBit::Lo), vec![0]);
    }

    #[test]
    fn bnn_i_single_cycle_drive() {
        let enc = encode_inputs(&[1, -1, 1], scheme("bnn-i")).unwrap();
        assert_eq!(enc.cycle_drives(), vec![vec![true, false, true]]);
    }

    #[test]
    fn bnn_v_xnor_drives_both_blocks_in_one_cycle() {
        let enc = encode_inputs(&[1, -1], scheme("bnn-v")).unwrap();
        assert_eq!(enc.plane(DriveBit::Pos).unwrap(), &[true, false]);
        assert_eq!(enc.plane(DriveBit::Neg).unwrap(), &[false, true]);
        assert_eq!(enc.cycle_drives(), vec![vec![true, false, false, true]]);
    }

    #[test]
    fn tnn_iii_zero_input_sets_low_bit_only() {
        let s = MappingScheme::new(MappingKind::TnnIII, Variant::MoreCycles).unwrap();
        let enc = encode_inputs(&[0], s).unwrap();
        assert_eq!(enc.cycle_drives(), vec![vec![true], vec![false]]);
    }

    #[test]
    fn cycle_count_matches_scheme() {
        for s in MappingScheme::all() {
            let v: Vec<i32> = vec![1; 5];
            assert_eq!(encode_inputs(&v, s).unwrap().cycle_drives().len(), s.cycles());
        }
    }

    #[test]
    fn alphabet_violations() {
        let w = IntMatrix::from_rows(&[[1, 0]]).unwrap();
        let err = encode_weights(&w, scheme("bnn-i")).unwrap_err();
        assert!(matches!(err, Error::Encoding { value: 0, index: 1, .. }));
        let w = IntMatrix::from_rows(&[[2]]).unwrap();
        assert!(encode_weights(&w, scheme("tnn-i")).is_err());
        assert!(encode_inputs(&[1, 2], scheme("bnn-vi")).is_err());
        assert!(encode_inputs(&[-2], scheme("tnn-ii")).is_err());
    }

    #[test]
    fn binary_zero_inputs_are_masked() {
        let enc = encode_inputs(&[1, 0, -1], scheme("bnn-i")).unwrap();
        assert_eq!(enc.masked(), &[1]);
        assert_eq!(enc.active(), 2);
        assert_eq!(enc.cycle_drives(), vec![vec![true, false, false]]);
        assert_eq!(enc.decode(), vec![1, 0, -1]);
    }

    #[test]
    fn round_trip_every_alphabet_value() {
        for s in MappingScheme::all() {
            let values = s.alphabet().values();
            let w = IntMatrix::from_rows(&[values]).unwrap();
            let plan = encode_weights(&w, s).unwrap();
            assert_eq!(plan.decode_weights(), w, "{s}");
            assert_eq!(encode_inputs(values, s).unwrap().decode(), values, "{s}");
            for plane in plan.planes() {
                assert_eq!((plane.rows(), plane.cols()), (values.len(), 1));
            }
        }
    }
}
