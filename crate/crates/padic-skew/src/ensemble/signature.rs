use std::fmt;

use serde::de::Deserializer;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extint::ExtInt;

/// A signature: finitely many nonincreasing integer spikes over a tail
/// value in `Z + {-inf}`, representing the eventually constant
/// nonincreasing sequence whose n-th term is the n-th spike, then the tail
/// forever.
///
/// The stored form is canonical: spikes strictly above the tail, so two
/// signatures are equal exactly when they represent the same sequence.
/// Sequences that are not eventually constant are outside the supported
/// set; within a fixed precision window they are indistinguishable from
/// their truncations anyway (see [`Signature::truncated`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    spikes: Vec<i64>,
    tail: ExtInt,
}

impl Signature {
    pub fn new(spikes: Vec<i64>, tail: ExtInt) -> Result<Self> {
        if tail == ExtInt::PosInf {
            return Err(Error::InvalidSignature("tail cannot be +inf".into()));
        }
        if spikes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSignature(format!(
                "spikes must be nonincreasing, got {spikes:?}"
            )));
        }
        if let (Some(&last), ExtInt::Int(t)) = (spikes.last(), tail) {
            if last < t {
                return Err(Error::InvalidSignature(format!(
                    "tail {t} exceeds the last spike {last}"
                )));
            }
        }
        // Canonicalize: trailing spikes equal to the tail are the tail.
        let mut spikes = spikes;
        if let ExtInt::Int(t) = tail {
            while spikes.last() == Some(&t) {
                spikes.pop();
            }
        }
        Ok(Signature { spikes, tail })
    }

    /// The point mass at the zero matrix: no spikes, tail `-inf`.
    pub fn dirac_zero() -> Self {
        Signature {
            spikes: Vec::new(),
            tail: ExtInt::NegInf,
        }
    }

    pub fn spikes(&self) -> &[i64] {
        &self.spikes
    }

    pub fn tail(&self) -> ExtInt {
        self.tail
    }

    /// The n-th term of the represented sequence (0-indexed).
    pub fn term(&self, n: usize) -> ExtInt {
        self.spikes
            .get(n)
            .map(|&k| ExtInt::Int(k))
            .unwrap_or(self.tail)
    }

    /// Largest exponent: the first spike, or the tail when there are none.
    pub fn max_exponent(&self) -> ExtInt {
        self.spikes
            .first()
            .map(|&k| ExtInt::Int(k))
            .unwrap_or(self.tail)
    }

    pub fn is_dirac_zero(&self) -> bool {
        self.spikes.is_empty() && self.tail == ExtInt::NegInf
    }

    /// Drop spikes (and the tail) whose scale contributes no digits inside
    /// the precision window anchored at the largest scale. Within the
    /// tracked window the truncated signature samples the same law.
    pub fn truncated(&self, precision: u32) -> Self {
        let max = match self.max_exponent() {
            ExtInt::Int(k) => k,
            _ => return self.clone(),
        };
        let cutoff = max - precision as i64;
        let spikes: Vec<i64> = self.spikes.iter().copied().filter(|&k| k > cutoff).collect();
        let tail = match self.tail {
            ExtInt::Int(t) if t <= cutoff => ExtInt::NegInf,
            t => t,
        };
        Signature { spikes, tail }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        write!(f, "[")?;
        for (i, k) in self.spikes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "], {})", self.tail)
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Signature", 2)?;
        st.serialize_field("spikes", &self.spikes)?;
        st.serialize_field("tail", &self.tail)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            spikes: Vec<i64>,
            tail: ExtInt,
        }
        let raw = Raw::deserialize(deserializer)?;
        Signature::new(raw.spikes, raw.tail).map_err(serde::de::Error::custom)
    }
}
