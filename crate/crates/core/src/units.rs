//! Fixed-point resource quantities.
//!
//! The engine accounts CPU and memory in integer micro-units so that budget
//! checks, conservation and cross-node comparisons are exact. Cost-model
//! outputs (plain `f64`) are quantized once, when a node converts incoming
//! RPS into per-pod requests.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Micro-units per whole unit.
pub const SCALE: i64 = 1_000_000;

macro_rules! fixed_point {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(i64);

        impl $name {
            pub const ZERO: Self = Self(0);

            /// Builds a quantity from raw micro-units.
            pub const fn from_micros(micros: i64) -> Self {
                Self(micros)
            }

            pub const fn from_whole(units: i64) -> Self {
                Self(units * SCALE)
            }

            /// Rounds to the nearest micro-unit.
            pub fn from_f64(value: f64) -> Self {
                Self((value * SCALE as f64).round() as i64)
            }

            pub const fn micros(self) -> i64 {
                self.0
            }

            pub fn as_f64(self) -> f64 {
                self.0 as f64 / SCALE as f64
            }

            pub fn is_zero(self) -> bool {
                self.0 == 0
            }

            pub fn is_negative(self) -> bool {
                self.0 < 0
            }

            /// Integer division into `parts` pieces, truncating toward zero.
            pub fn div_floor(self, parts: i64) -> Self {
                Self(self.0 / parts)
            }

            /// Parses the fixed six-decimal format written by [`fmt::Display`].
            pub fn parse(text: &str) -> Option<Self> {
                parse_fixed(text).map(Self)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_fixed(f, self.0)
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self(-self.0)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, rhs: Self) {
                self.0 += rhs.0;
            }
        }

        impl SubAssign for $name {
            fn sub_assign(&mut self, rhs: Self) {
                self.0 -= rhs.0;
            }
        }

        impl Sum for $name {
            fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
                Self(iter.map(|v| v.0).sum())
            }
        }

        impl<'a> Sum<&'a $name> for $name {
            fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
                Self(iter.map(|v| v.0).sum())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_f64(self.as_f64())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let value = f64::deserialize(deserializer)?;
                if !value.is_finite() {
                    return Err(serde::de::Error::custom(concat!("non-finite ", $unit)));
                }
                Ok(Self::from_f64(value))
            }
        }
    };
}

fixed_point!(
    /// CPU time in millicores (1/1000 of a core for one time unit).
    Millicores,
    "millicores"
);

fixed_point!(
    /// Memory in megabytes.
    Megabytes,
    "megabytes"
);

fn write_fixed(f: &mut fmt::Formatter<'_>, micros: i64) -> fmt::Result {
    let sign = if micros < 0 { "-" } else { "" };
    let abs = micros.unsigned_abs();
    let scale = SCALE as u64;
    write!(f, "{sign}{}.{:06}", abs / scale, abs % scale)
}

fn parse_fixed(text: &str) -> Option<i64> {
    let text = text.trim();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() || frac.len() > 6 {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: i64 = whole.parse().ok()?;
    let mut frac_micros: i64 = 0;
    for (i, b) in frac.bytes().enumerate() {
        frac_micros += i64::from(b - b'0') * 10_i64.pow(5 - i as u32);
    }
    let value = whole.checked_mul(SCALE)?.checked_add(frac_micros)?;
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_six_decimals() {
        assert_eq!(Millicores::from_f64(273.52).to_string(), "273.520000");
        assert_eq!(Millicores::from_micros(-1).to_string(), "-0.000001");
        assert_eq!(Megabytes::from_whole(16000).to_string(), "16000.000000");
    }

    #[test]
    fn parse_inverts_display() {
        for micros in [0, 1, -1, 999_999, 1_000_000, 4_000_000_000, -273_520_000] {
            let m = Millicores::from_micros(micros);
            assert_eq!(Millicores::parse(&m.to_string()), Some(m));
        }
        assert_eq!(Millicores::parse("526"), Some(Millicores::from_whole(526)));
        assert_eq!(Millicores::parse("1.5x"), None);
        assert_eq!(Millicores::parse("1.1234567"), None);
    }

    #[test]
    fn quantization_of_split_costs() {
        // 526 * 13 / 25 and 526 * 12 / 25
        let a = Millicores::from_f64(526.0 / 25.0 * 13.0);
        let b = Millicores::from_f64(526.0 / 25.0 * 12.0);
        assert_eq!(a, Millicores::from_micros(273_520_000));
        assert_eq!(b, Millicores::from_micros(252_480_000));
        assert_eq!(a + b, Millicores::from_whole(526));
    }
}
