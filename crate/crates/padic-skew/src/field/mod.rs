//! Arithmetic, sampling, and character evaluation for a non-Archimedean
//! local field at fixed relative precision.
//!
//! The field is either a field of p-adic numbers or a field of formal
//! Laurent series over a prime field. Elements are stored in normalized
//! floating form: a valuation plus the leading unit digits, so absolute
//! values and valuations are O(1) queries and cancellation is tracked
//! rather than silently padded.

mod character;
pub(crate) mod digits;
mod elem;
mod phase;

pub use character::{chi, theta, theta_exact_exponent, theta_exponent};
pub use elem::LocalElem;
pub(crate) use elem::RawElem;
pub use phase::PhaseValue;

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Default number of tracked residue digits. Covers desk-scale exponents
/// with headroom for products.
pub const DEFAULT_PRECISION: u32 = 24;

/// Which local field is in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    /// The p-adic numbers; residue characteristic equals the field
    /// characteristic zero, and p = 2 is allowed.
    #[serde(rename = "padic")]
    PAdic,
    /// Formal Laurent series over the prime field; the field has
    /// characteristic p, so p = 2 is rejected (the residue field must not
    /// have characteristic two).
    #[serde(rename = "laurent")]
    LaurentSeries,
}

/// A local field at a fixed working precision.
///
/// The residue field is the prime field of size `q = p`. The spec is a small
/// copyable value; every element and matrix carries one, and mixing specs is
/// an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub p: u32,
    #[serde(rename = "prec")]
    pub precision: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    let n = n as u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn new(kind: FieldKind, p: u32, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidFieldSpec(format!("p = {p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidFieldSpec("precision must be positive".into()));
        }
        if kind == FieldKind::LaurentSeries && p == 2 {
            return Err(Error::InvalidFieldSpec(
                "Laurent series over F_2 have characteristic 2".into(),
            ));
        }
        Ok(FieldSpec { kind, p, precision })
    }

    /// p-adic numbers at the given precision.
    pub fn padic(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::PAdic, p, precision)
    }

    /// Laurent series over the prime field at the given precision.
    pub fn laurent(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::LaurentSeries, p, precision)
    }

    /// Residue field size.
    pub fn q(&self) -> u32 {
        self.p
    }

    /// The exponent of the absolute value of 2: `|2| = q^{-val_of_two}`.
    /// It is 1 exactly for the 2-adic numbers and 0 everywhere else.
    pub fn val_of_two(&self) -> i64 {
        if self.kind == FieldKind::PAdic && self.p == 2 {
            1
        } else {
            0
        }
    }

    /// Whether digit arithmetic propagates carries.
    pub(crate) fn carry(&self) -> bool {
        self.kind == FieldKind::PAdic
    }

    /// Printable symbol for the uniformizer.
    pub(crate) fn uniformizer_symbol(&self) -> String {
        match self.kind {
            FieldKind::PAdic => self.p.to_string(),
            FieldKind::LaurentSeries => "t".to_string(),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::PAdic => write!(f, "Q_{} (prec {})", self.p, self.precision),
            FieldKind::LaurentSeries => write!(f, "F_{}((t)) (prec {})", self.p, self.precision),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_over_f2_rejected() {
        assert!(FieldSpec::laurent(2, 8).is_err());
        assert!(FieldSpec::padic(2, 8).is_ok());
    }

    #[test]
    fn composite_p_rejected() {
        assert!(FieldSpec::padic(6, 8).is_err());
        assert!(FieldSpec::padic(1, 8).is_err());
        assert!(FieldSpec::padic(97, 8).is_ok());
    }

    #[test]
    fn val_of_two_is_one_only_for_q2() {
        assert_eq!(FieldSpec::padic(2, 8).unwrap().val_of_two(), 1);
        assert_eq!(FieldSpec::padic(3, 8).unwrap().val_of_two(), 0);
        assert_eq!(FieldSpec::laurent(3, 8).unwrap().val_of_two(), 0);
    }

    #[test]
    fn spec_json_shape() {
        let spec = FieldSpec::padic(3, 24).unwrap();
        let json = serde_json::to_value(spec).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "padic", "p": 3, "prec": 24})
        );
        let back: FieldSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }
}
