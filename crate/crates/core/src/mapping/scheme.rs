use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The eleven binary/ternary MVM mappings onto binary cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MappingKind {
    BnnI,
    BnnII,
    BnnIII,
    BnnIV,
    BnnV,
    BnnVI,
    TnnI,
    TnnII,
    TnnIII,
    TnnIV,
    TnnV,
}

/// Value set of the operands a mapping accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    /// {-1, +1}
    Binary,
    /// {-1, 0, +1}
    Ternary,
}

impl Alphabet {
    pub fn contains(self, value: i32) -> bool {
        match self {
            Alphabet::Binary => value == -1 || value == 1,
            Alphabet::Ternary => (-1..=1).contains(&value),
        }
    }

    pub fn values(self) -> &'static [i32] {
        match self {
            Alphabet::Binary => &[-1, 1],
            Alphabet::Ternary => &[-1, 0, 1],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Alphabet::Binary => "{-1,+1}",
            Alphabet::Ternary => "{-1,0,+1}",
        }
    }
}

impl MappingKind {
    pub const ALL: [MappingKind; 11] = [
        MappingKind::BnnI,
        MappingKind::BnnII,
        MappingKind::BnnIII,
        MappingKind::BnnIV,
        MappingKind::BnnV,
        MappingKind::BnnVI,
        MappingKind::TnnI,
        MappingKind::TnnII,
        MappingKind::TnnIII,
        MappingKind::TnnIV,
        MappingKind::TnnV,
    ];

    pub fn base_name(self) -> &'static str {
        match self {
            MappingKind::BnnI => "bnn-i",
            MappingKind::BnnII => "bnn-ii",
            MappingKind::BnnIII => "bnn-iii",
            MappingKind::BnnIV => "bnn-iv",
            MappingKind::BnnV => "bnn-v",
            MappingKind::BnnVI => "bnn-vi",
            MappingKind::TnnI => "tnn-i",
            MappingKind::TnnII => "tnn-ii",
            MappingKind::TnnIII => "tnn-iii",
            MappingKind::TnnIV => "tnn-iv",
            MappingKind::TnnV => "tnn-v",
        }
    }

    pub fn alphabet(self) -> Alphabet {
        match self {
            MappingKind::BnnI
            | MappingKind::BnnII
            | MappingKind::BnnIII
            | MappingKind::BnnIV
            | MappingKind::BnnV
            | MappingKind::BnnVI => Alphabet::Binary,
            _ => Alphabet::Ternary,
        }
    }

    pub fn is_binary(self) -> bool {
        self.alphabet() == Alphabet::Binary
    }

    /// Whether the kind has both a more-cells and a more-cycles realization.
    pub fn has_variants(self) -> bool {
        !matches!(
            self,
            MappingKind::BnnI | MappingKind::BnnII | MappingKind::BnnV
        )
    }

    /// Realization used when a name carries no `+cells`/`+cycles` suffix:
    /// the first one listed in the published tables.
    pub fn default_variant(self) -> Variant {
        if self.is_binary() {
            Variant::MoreCells
        } else {
            Variant::MoreCycles
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    MoreCells,
    MoreCycles,
}

/// A mapping kind together with its realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MappingScheme {
    kind: MappingKind,
    variant: Variant,
}

impl MappingScheme {
    pub fn new(kind: MappingKind, variant: Variant) -> Result<Self> {
        if !kind.has_variants() && variant != Variant::MoreCells {
            return Err(Error::Config(format!(
                "{} has a single realization (1 cycle, 2 cells)",
                kind.base_name()
            )));
        }
        Ok(MappingScheme { kind, variant })
    }

    pub fn with_default_variant(kind: MappingKind) -> Self {
        MappingScheme {
            kind,
            variant: kind.default_variant(),
        }
    }

    /// Every kind in every realization it supports.
    pub fn all() -> Vec<MappingScheme> {
        MappingKind::ALL
            .iter()
            .flat_map(|&kind| {
                let variants: &[Variant] = if kind.has_variants() {
                    &[Variant::MoreCells, Variant::MoreCycles]
                } else {
                    &[Variant::MoreCells]
                };
                variants.iter().map(move |&variant| MappingScheme { kind, variant })
            })
            .collect()
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn alphabet(&self) -> Alphabet {
        self.kind.alphabet()
    }

    pub fn cycles(&self) -> usize {
        self.layout().cycles.len()
    }

    pub fn cells_per_weight(&self) -> usize {
        self.layout().planes.len()
    }

    /// Canonical name, with a variant suffix only where two realizations exist.
    pub fn name(&self) -> String {
        if self.kind.has_variants() {
            let suffix = match self.variant {
                Variant::MoreCells => "cells",
                Variant::MoreCycles => "cycles",
            };
            format!("{}+{suffix}", self.kind.base_name())
        } else {
            self.kind.base_name().to_string()
        }
    }

    pub fn valid_names() -> Vec<String> {
        let mut names: Vec<String> = MappingKind::ALL
            .iter()
            .map(|k| k.base_name().to_string())
            .collect();
        names.extend(
            MappingScheme::all()
                .iter()
                .filter(|s| s.kind.has_variants())
                .map(|s| s.name()),
        );
        names
    }
}

impl fmt::Display for MappingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MappingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownMapping {
            name: s.to_string(),
            valid: MappingScheme::valid_names().join(", "),
        };
        let (base, suffix) = match lower.split_once('+') {
            Some((b, v)) => (b, Some(v)),
            None => (lower.as_str(), None),
        };
        let kind = MappingKind::ALL
            .iter()
            .copied()
            .find(|k| k.base_name() == base)
            .ok_or_else(unknown)?;
        let variant = match suffix {
            None => kind.default_variant(),
            Some("cells") => Variant::MoreCells,
            Some("cycles") => Variant::MoreCycles,
            Some(_) => return Err(unknown()),
        };
        if suffix.is_some() && !kind.has_variants() {
            return Err(unknown());
        }
        MappingScheme::new(kind, variant)
    }
}

impl Serialize for MappingScheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for MappingScheme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for scheme in MappingScheme::all() {
            assert_eq!(scheme.name().parse::<MappingScheme>().unwrap(), scheme);
        }
        assert_eq!(MappingScheme::all().len(), 19);
    }

    #[test]
    fn bare_names_pick_the_first_listed_realization() {
        let s: MappingScheme = "bnn-vi".parse().unwrap();
        assert_eq!(s.variant(), Variant::MoreCells);
        let s: MappingScheme = "tnn-ii".parse().unwrap();
        assert_eq!(s.variant(), Variant::MoreCycles);
        let s: MappingScheme = "BNN-I".parse().unwrap();
        assert_eq!(s.kind(), MappingKind::BnnI);
    }

    #[test]
    fn unknown_names_list_valid_ones() {
        let err = "bnn-vii".parse::<MappingScheme>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bnn-vii"));
        assert!(msg.contains("bnn-i") && msg.contains("tnn-v+cycles"));
        assert!("bnn-i+cycles".parse::<MappingScheme>().is_err());
        assert!("tnn-i+wires".parse::<MappingScheme>().is_err());
    }
}
