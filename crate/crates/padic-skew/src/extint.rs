use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// An integer extended with the two symbolic endpoints `-inf` and `+inf`.
///
/// Valuations live here (`+inf` marks the exact zero, via the convention
/// that the uniformizer to the power infinity is zero), and signature tails
/// use `-inf`. The derived ordering puts `NegInf < Int(n) < PosInf` for
/// every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    NegInf,
    Int(i64),
    PosInf,
}

impl ExtInt {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtInt::Int(_))
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            ExtInt::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Finite value or a panic; for call sites that have already checked.
    pub fn expect_int(self, what: &str) -> i64 {
        self.as_int()
            .unwrap_or_else(|| panic!("expected a finite value for {what}, got {self}"))
    }
}

impl From<i64> for ExtInt {
    fn from(n: i64) -> Self {
        ExtInt::Int(n)
    }
}

impl Add for ExtInt {
    type Output = ExtInt;

    /// `n + (±inf) = ±inf`; adding opposite infinities is undefined and panics.
    fn add(self, rhs: ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, rhs) {
            (Int(a), Int(b)) => Int(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => {
                panic!("indeterminate sum of opposite infinities")
            }
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::Int(n) => write!(f, "{n}"),
            ExtInt::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtInt::NegInf => serializer.serialize_str("-inf"),
            ExtInt::Int(n) => serializer.serialize_i64(*n),
            ExtInt::PosInf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtInt;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an integer, \"inf\", or \"-inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtInt, E> {
                Ok(ExtInt::Int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtInt, E> {
                i64::try_from(v)
                    .map(ExtInt::Int)
                    .map_err(|_| E::custom("integer out of range"))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ExtInt, E> {
                match s {
                    "inf" => Ok(ExtInt::PosInf),
                    "-inf" => Ok(ExtInt::NegInf),
                    _ => s
                        .parse::<i64>()
                        .map(ExtInt::Int)
                        .map_err(|_| E::custom(format!("not an extended integer: {s:?}"))),
                }
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order() {
        assert!(ExtInt::NegInf < ExtInt::Int(i64::MIN));
        assert!(ExtInt::Int(i64::MAX) < ExtInt::PosInf);
        assert!(ExtInt::Int(-3) < ExtInt::Int(5));
    }

    #[test]
    fn addition_absorbs_infinities() {
        assert_eq!(ExtInt::Int(2) + ExtInt::PosInf, ExtInt::PosInf);
        assert_eq!(ExtInt::NegInf + ExtInt::Int(7), ExtInt::NegInf);
        assert_eq!(ExtInt::Int(2) + ExtInt::Int(3), ExtInt::Int(5));
    }

    #[test]
    #[should_panic]
    fn opposite_infinities_panic() {
        let _ = ExtInt::PosInf + ExtInt::NegInf;
    }

    #[test]
    fn serde_round_trip() {
        for v in [ExtInt::NegInf, ExtInt::Int(-4), ExtInt::PosInf] {
            let s = serde_json::to_string(&v).unwrap();
            let back: ExtInt = serde_json::from_str(&s).unwrap();
            assert_eq!(v, back);
        }
        assert_eq!(serde_json::to_string(&ExtInt::NegInf).unwrap(), "\"-inf\"");
        assert_eq!(serde_json::to_string(&ExtInt::Int(3)).unwrap(), "3");
    }
}
