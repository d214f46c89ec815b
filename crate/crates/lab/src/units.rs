//! Quantities with explicit units in config files.
//!
//! A quantity is written as a string holding a number, whitespace and a unit,
//! e.g. `"10 cm"` or `"0.6 c"`. Values are normalized to SI on parsing and
//! written back as `"<shortest repr> <SI unit>"`, so a serialized config parses
//! to bit-identical values.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use csl_core::physconst::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy)]
enum Scale {
    /// Decimal prefix, applied to the literal before rounding so that
    /// `"1e-5 cm"` is exactly `1e-7`.
    Pow10(i32),
    Mul(f64),
}

impl Scale {
    fn apply(self, literal: &str) -> Option<f64> {
        match self {
            Scale::Pow10(p) => {
                let (mantissa, exp) = match literal.find(['e', 'E']) {
                    Some(i) => (&literal[..i], literal[i + 1..].parse::<i32>().ok()?),
                    None => (literal, 0),
                };
                format!("{mantissa}e{}", exp.checked_add(p)?).parse().ok()
            }
            Scale::Mul(f) => literal.parse::<f64>().ok().map(|x| x * f),
        }
    }
}

/// Physical dimension of a config entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Rate,
    Speed,
    Wavenumber,
}

impl Dimension {
    /// Canonical SI unit used when serializing.
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Rate => "1/s",
            Dimension::Speed => "m/s",
            Dimension::Wavenumber => "1/m",
        }
    }

    fn units(self) -> &'static [(&'static str, Scale)] {
        use Scale::*;
        match self {
            Dimension::Length => &[
                ("m", Pow10(0)),
                ("km", Pow10(3)),
                ("cm", Pow10(-2)),
                ("mm", Pow10(-3)),
                ("um", Pow10(-6)),
                ("µm", Pow10(-6)),
                ("nm", Pow10(-9)),
                ("fm", Pow10(-15)),
            ],
            Dimension::Time => &[
                ("s", Pow10(0)),
                ("ms", Pow10(-3)),
                ("us", Pow10(-6)),
                ("µs", Pow10(-6)),
                ("ns", Pow10(-9)),
                ("ps", Pow10(-12)),
                ("fs", Pow10(-15)),
            ],
            Dimension::Rate => {
                &[("1/s", Pow10(0)), ("s^-1", Pow10(0)), ("1/ms", Pow10(3)), ("1/us", Pow10(6)), ("1/ns", Pow10(9))]
            }
            Dimension::Speed => &[("m/s", Pow10(0)), ("km/s", Pow10(3)), ("c", Mul(SPEED_OF_LIGHT))],
            Dimension::Wavenumber => &[
                ("1/m", Pow10(0)),
                ("m^-1", Pow10(0)),
                ("1/cm", Pow10(2)),
                ("1/mm", Pow10(3)),
                ("1/um", Pow10(6)),
                ("1/nm", Pow10(9)),
            ],
        }
    }

    fn expected(self) -> String {
        let names: Vec<&str> = self.units().iter().map(|(u, _)| *u).collect();
        format!("a string \"<number> <unit>\" with unit one of {}", names.join(", "))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Rate => "rate",
            Dimension::Speed => "speed",
            Dimension::Wavenumber => "wavenumber",
        };
        f.write_str(s)
    }
}

/// Parses `"<number> <unit>"` into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let mut parts = text.split_whitespace();
    let (Some(num), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!("{dim}: expected {}, got {text:?}", dim.expected()));
    };
    let value: f64 = num.parse().map_err(|_| format!("{dim}: {num:?} is not a number"))?;
    if !value.is_finite() {
        return Err(format!("{dim}: {num:?} is not finite"));
    }
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| format!("{dim}: unknown unit {unit:?}; expected {}", dim.expected()))?;
    let si = scale.apply(num).ok_or_else(|| format!("{dim}: cannot scale {num:?}"))?;
    if !si.is_finite() {
        return Err(format!("{dim}: {text:?} overflows"));
    }
    Ok(si)
}

pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:e} {}", dim.si_unit())
}

struct QuantityVisitor(Dimension);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{} ({})", self.0.expected(), self.0)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Err(E::custom(format!("bare number {v} has no unit; expected {}", self.0.expected())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Err(E::custom(format!("bare number {v} has no unit; expected {}", self.0.expected())))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Err(E::custom(format!("bare number {v} has no unit; expected {}", self.0.expected())))
    }
}

macro_rules! quantity {
    ($name:ident, $dim:expr) => {
        /// SI value.
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl $name {
            pub const DIM: Dimension = $dim;

            pub fn si(self) -> f64 {
                self.0
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&format_quantity(self.0, $dim))
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                d.deserialize_any(QuantityVisitor($dim)).map($name)
            }
        }
    };
}

quantity!(Length, Dimension::Length);
quantity!(Time, Dimension::Time);
quantity!(Rate, Dimension::Rate);
quantity!(Speed, Dimension::Speed);
quantity!(Wavenumber, Dimension::Wavenumber);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conversions() {
        assert_eq!(parse_quantity("10 cm", Dimension::Length).unwrap(), 0.1);
        assert_eq!(parse_quantity("1e-5 cm", Dimension::Length).unwrap(), 1e-7);
        assert_eq!(parse_quantity("2 km", Dimension::Length).unwrap(), 2000.0);
        assert_eq!(parse_quantity("250 us", Dimension::Time).unwrap(), 2.5e-4);
        assert_eq!(parse_quantity("0.6 c", Dimension::Speed).unwrap(), 0.6 * SPEED_OF_LIGHT);
        assert_eq!(parse_quantity("2e-9 1/s", Dimension::Rate).unwrap(), 2e-9);
        assert_eq!(parse_quantity("20 1/nm", Dimension::Wavenumber).unwrap(), 2e10);
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        assert!(parse_quantity("0.1", Dimension::Length).is_err());
        assert!(parse_quantity("0.1 s", Dimension::Length).is_err());
        assert!(parse_quantity("x m", Dimension::Length).is_err());
        assert!(parse_quantity("1 m extra", Dimension::Length).is_err());
        assert!(parse_quantity("inf m", Dimension::Length).is_err());
        let err = parse_quantity("3 furlong", Dimension::Length).unwrap_err();
        assert!(err.contains("cm"), "{err}");
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            for dim in [Dimension::Length, Dimension::Time, Dimension::Rate, Dimension::Speed, Dimension::Wavenumber] {
                let back = parse_quantity(&format_quantity(x, dim), dim).unwrap();
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }
    }
}
