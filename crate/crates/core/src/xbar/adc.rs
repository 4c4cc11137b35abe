//! Clipping mid-rise ADC model.
//!
//! The converter sees a signed (differential) or non-negative (single-ended)
//! column current and returns a current again, so the caller can apply the
//! same scaling it would apply to an ideal read.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// ADC resolution in bits, or an ideal converter that only clips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    Bits(u32),
    Infinite,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
            return Ok(Resolution::Infinite);
        }
        match s.parse::<u32>() {
            Ok(b) if b >= 1 => Ok(Resolution::Bits(b)),
            _ => Err(Error::Config(format!(
                "ADC resolution must be a positive bit count or `inf`, got `{s}`"
            ))),
        }
    }
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Bits(b) => serializer.serialize_u32(*b),
            Resolution::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(b) if b >= 1 && b <= u32::MAX as i64 => Ok(Resolution::Bits(b as u32)),
            Raw::Int(b) => Err(serde::de::Error::custom(format!(
                "ADC resolution must be positive, got {b}"
            ))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Whether a conversion sees a column-pair difference or a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdcMode {
    Differential,
    SingleEnded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcConfig {
    pub resolution: Resolution,
    /// Fraction of the maximum column current covered by the input range.
    pub alpha: f64,
}

impl Default for AdcConfig {
    fn default() -> Self {
        AdcConfig::ideal()
    }
}

impl AdcConfig {
    /// No quantization and a full-range window.
    pub const fn ideal() -> Self {
        AdcConfig {
            resolution: Resolution::Infinite,
            alpha: 1.0,
        }
    }

    pub fn new(resolution: Resolution, alpha: f64) -> Result<Self> {
        let cfg = AdcConfig { resolution, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "clipping factor alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if let Resolution::Bits(0) = self.resolution {
            return Err(Error::Config("ADC resolution must be at least 1 bit".into()));
        }
        Ok(())
    }

    /// Quantizer step `alpha * 2 * i_max / 2^B`, `None` for an infinite resolution.
    pub fn step(&self, i_max: f64) -> Option<f64> {
        match self.resolution {
            Resolution::Bits(b) => Some(self.alpha * 2.0 * i_max / 2f64.powi(b as i32)),
            Resolution::Infinite => None,
        }
    }

    /// Upper edge of the clipping window.
    pub fn clip_bound(&self, i_max: f64) -> f64 {
        self.alpha * i_max
    }

    pub fn convert(&self, x: f64, i_max: f64) -> f64 {
        adc_convert(x, i_max, self)
    }
}

/// Clip `|x|` to `[0, alpha * i_max]` and, for a finite resolution, snap it to
/// the mid-rise level `sgn(x) * step * (floor(|x| / step) + 1/2)`.
///
/// At the rail the mid-rise level sits half a step above the clip bound; that
/// overshoot is kept.
pub fn adc_convert(x: f64, i_max: f64, adc: &AdcConfig) -> f64 {
    debug_assert!(i_max > 0.0, "i_max must be positive");
    if x == 0.0 || x.is_nan() {
        return 0.0;
    }
    let clipped = x.abs().min(adc.clip_bound(i_max));
    let magnitude = match adc.step(i_max) {
        Some(step) => step * ((clipped / step).floor() + 0.5),
        None => clipped,
    };
    magnitude.copysign(x)
}
