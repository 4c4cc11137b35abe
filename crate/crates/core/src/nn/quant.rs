use serde::{Deserialize, Serialize};

/// Activation quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum Quantizer {
    /// +1 for x >= 0, -1 otherwise.
    Sign,
    /// +1 above `threshold`, -1 below `-threshold`, 0 in between (inclusive).
    Ternary { threshold: f32 },
}

impl Quantizer {
    pub fn apply(&self, x: f32) -> f32 {
        match *self {
            Quantizer::Sign => sign(x),
            Quantizer::Ternary { threshold } => ternary(x, threshold),
        }
    }
}

pub fn sign(x: f32) -> f32 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn ternary(x: f32, threshold: f32) -> f32 {
    if x > threshold {
        1.0
    } else if x < -threshold {
        -1.0
    } else {
        0.0
    }
}

pub fn sign_quantize(x: &[f32]) -> Vec<f32> {
    x.iter().map(|&v| sign(v)).collect()
}

pub fn ternary_quantize(x: &[f32], threshold: f32) -> Vec<f32> {
    debug_assert!(threshold >= 0.0);
    x.iter().map(|&v| ternary(v, threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_maps_zero_to_plus_one() {
        assert_eq!(sign(0.0), 1.0);
        assert_eq!(sign(-0.3), -1.0);
        assert_eq!(sign_quantize(&[2.0, -1e-9, 0.0, -7.0]), vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn ternary_boundaries() {
        let t = 0.5;
        assert_eq!(ternary(t, t), 0.0);
        assert_eq!(ternary(-t, t), 0.0);
        assert_eq!(ternary(t + 1e-6, t), 1.0);
        assert_eq!(ternary(-t - 1e-6, t), -1.0);
        assert_eq!(ternary_quantize(&[0.0, 1e-6, -1e-6], 0.0), vec![0.0, 1.0, -1.0]);
    }
}
