//! Unit-suffixed literals for config files.
//!
//! Quantities may be written as bare SI numbers (`0.01`) or as strings with a
//! unit suffix (`"10mK"`, `"0.526 ps"`, `"0.5mm"`). Everything is normalized
//! to SI on load and serialized back as plain SI numbers.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};

use crate::constants::ELECTRON_VOLT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Temperature,
    Energy,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("μm", 1e-6),
                ("nm", 1e-9),
            ],
            Dimension::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("µs", 1e-6),
                ("μs", 1e-6),
                ("ns", 1e-9),
                ("ps", 1e-12),
                ("fs", 1e-15),
            ],
            Dimension::Temperature => &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6), ("µK", 1e-6)],
            Dimension::Energy => &[
                ("J", 1.0),
                ("eV", ELECTRON_VOLT),
                ("meV", 1e-3 * ELECTRON_VOLT),
                ("ueV", 1e-6 * ELECTRON_VOLT),
                ("µeV", 1e-6 * ELECTRON_VOLT),
            ],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::Energy => "energy",
        }
    }
}

/// Parses `"<number>[ ]<unit>"` into an SI value. A bare number is taken as SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    // an exponent marker directly followed by a letter belongs to the unit (e.g. "1eV")
    let (mut num, mut unit) = text.split_at(split);
    if num.ends_with(['e', 'E']) && !unit.is_empty() {
        num = &text[..split - 1];
        unit = &text[split - 1..];
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse number in `{text}`"))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    dim.units()
        .iter()
        .find(|(sym, _)| *sym == unit)
        .map(|(_, scale)| value * scale)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(s, _)| *s).collect();
            format!(
                "unknown {} unit `{unit}` (expected one of {})",
                dim.name(),
                known.join(", ")
            )
        })
}

struct QuantityVisitor(Dimension);

impl<'de> Visitor<'de> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or a {} literal with unit suffix", self.0.name())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }
}

fn deserialize_dim<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor(dim))
}

pub fn length<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    deserialize_dim(d, Dimension::Length)
}

pub fn time<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    deserialize_dim(d, Dimension::Time)
}

pub fn temperature<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    deserialize_dim(d, Dimension::Temperature)
}

pub fn energy<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    deserialize_dim(d, Dimension::Energy)
}

/// Plain dimensionless number that also accepts integers.
pub fn number<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    struct Plain;
    impl<'de> Visitor<'de> for Plain {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
    }
    d.deserialize_any(Plain)
}

/// Optional variant of [`number`] for override sections.
pub fn opt_number<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    number(d).map(Some)
}

pub fn opt_time<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    time(d).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert_eq!(parse_quantity("10mK", Dimension::Temperature).unwrap(), 10.0 * 1e-3);
        assert_eq!(parse_quantity("0.526ps", Dimension::Time).unwrap(), 0.526 * 1e-12);
        assert_eq!(parse_quantity("0.5 mm", Dimension::Length).unwrap(), 0.5 * 1e-3);
        assert_eq!(parse_quantity("1um", Dimension::Length).unwrap(), 1e-6);
        assert_eq!(parse_quantity("2.5e-3", Dimension::Time).unwrap(), 2.5e-3);
        assert_eq!(parse_quantity("1e-3s", Dimension::Time).unwrap(), 1e-3);
    }

    #[test]
    fn exponent_letter_before_unit() {
        let v = parse_quantity("1eV", Dimension::Energy).unwrap();
        assert_eq!(v, ELECTRON_VOLT);
        let v = parse_quantity("200ueV", Dimension::Energy).unwrap();
        assert!((v - 200e-6 * ELECTRON_VOLT).abs() < 1e-30);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let err = parse_quantity("10mK", Dimension::Length).unwrap_err();
        assert!(err.contains("unknown length unit"), "{err}");
        assert!(parse_quantity("fast", Dimension::Time).is_err());
    }
}
