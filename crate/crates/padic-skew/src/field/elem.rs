use std::fmt;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::digits;
use super::FieldSpec;
use crate::error::{Error, Result};
use crate::extint::ExtInt;

/// A field element at fixed relative precision.
///
/// Nonzero elements are stored in normalized floating form: a finite
/// valuation `v` plus a string of unit digits with a nonzero leading digit,
/// representing a value known modulo `pi^(v + digits.len())`. The exact zero
/// has valuation `+inf` and an empty digit string.
///
/// Arithmetic tracks the jointly supported window. Cancellation in addition
/// shrinks the known digit count; a sum that cancels across its whole joint
/// window collapses to the exact zero, which is the floating-form reading of
/// equality at tracked precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalElem {
    spec: FieldSpec,
    val: ExtInt,
    digits: Vec<u32>,
}

impl LocalElem {
    /// The exact zero.
    pub fn zero(spec: FieldSpec) -> Self {
        LocalElem {
            spec,
            val: ExtInt::PosInf,
            digits: Vec::new(),
        }
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self::uniformizer_pow(spec, 0)
    }

    /// The uniformizer raised to `k`, tracked at full precision.
    pub fn uniformizer_pow(spec: FieldSpec, k: i64) -> Self {
        let mut digits = vec![0u32; spec.precision as usize];
        digits[0] = 1;
        LocalElem {
            spec,
            val: ExtInt::Int(k),
            digits,
        }
    }

    /// Embed an integer. For p-adic fields this is the base-p expansion at
    /// full precision; for Laurent series it is the constant `n mod p`.
    pub fn from_int(spec: FieldSpec, n: i64) -> Self {
        if n == 0 {
            return Self::zero(spec);
        }
        let p = spec.p as i64;
        if !spec.carry() {
            let r = n.rem_euclid(p) as u32;
            if r == 0 {
                return Self::zero(spec);
            }
            let mut digits = vec![0u32; spec.precision as usize];
            digits[0] = r;
            return LocalElem {
                spec,
                val: ExtInt::Int(0),
                digits,
            };
        }
        let neg = n < 0;
        let mut m = n.unsigned_abs();
        let mut v = 0i64;
        while m.is_multiple_of(p as u64) {
            m /= p as u64;
            v += 1;
        }
        let mut digits = vec![0u32; spec.precision as usize];
        for d in digits.iter_mut() {
            *d = (m % p as u64) as u32;
            m /= p as u64;
        }
        let mut out = LocalElem {
            spec,
            val: ExtInt::Int(v),
            digits,
        };
        if neg {
            out = out.neg();
        }
        out
    }

    /// Rebuild an element from its serialized parts, validating the
    /// normalized-form invariants.
    pub fn from_parts(spec: FieldSpec, val: ExtInt, digits: Vec<u32>) -> Result<Self> {
        match val {
            ExtInt::PosInf => {
                if !digits.is_empty() {
                    return Err(Error::InvalidArgument(
                        "exact zero must have an empty digit string".into(),
                    ));
                }
            }
            ExtInt::Int(_) => {
                if digits.is_empty() {
                    return Err(Error::InvalidArgument(
                        "a finite valuation needs at least one digit".into(),
                    ));
                }
                if digits[0] == 0 {
                    return Err(Error::InvalidArgument(
                        "leading digit of a nonzero element must be nonzero".into(),
                    ));
                }
                if digits.len() > spec.precision as usize {
                    return Err(Error::InvalidArgument(format!(
                        "{} digits exceed the precision window of {}",
                        digits.len(),
                        spec.precision
                    )));
                }
                if digits.iter().any(|&d| d >= spec.p) {
                    return Err(Error::InvalidArgument(format!(
                        "digit out of range for p = {}",
                        spec.p
                    )));
                }
            }
            ExtInt::NegInf => {
                return Err(Error::InvalidArgument(
                    "valuation -inf is not an element".into(),
                ));
            }
        }
        Ok(LocalElem { spec, val, digits })
    }

    /// Haar sample from the ring of integers: all tracked digits drawn
    /// i.i.d. uniformly, then normalized.
    pub fn sample_uniform<R: Rng + ?Sized>(spec: FieldSpec, rng: &mut R) -> Self {
        let n = spec.precision as usize;
        let mut raw = Vec::with_capacity(n);
        for _ in 0..n {
            raw.push(rng.random_range(0..spec.p));
        }
        match raw.iter().position(|&d| d != 0) {
            None => Self::zero(spec),
            Some(j) => LocalElem {
                spec,
                val: ExtInt::Int(j as i64),
                digits: raw[j..].to_vec(),
            },
        }
    }

    /// A random element with full digits and valuation drawn uniformly from
    /// `lo..=hi`; used to build test matrices at prescribed scales.
    pub fn sample_with_valuation_in<R: Rng + ?Sized>(
        spec: FieldSpec,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let v = rng.random_range(lo..=hi);
        let n = spec.precision as usize;
        let mut digits = Vec::with_capacity(n);
        digits.push(rng.random_range(1..spec.p));
        for _ in 1..n {
            digits.push(rng.random_range(0..spec.p));
        }
        LocalElem {
            spec,
            val: ExtInt::Int(v),
            digits,
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn valuation(&self) -> ExtInt {
        self.val
    }

    /// Exponent of the absolute value: `|x| = q^exp`; the zero gives `-inf`.
    pub fn abs_exponent(&self) -> ExtInt {
        match self.val {
            ExtInt::PosInf => ExtInt::NegInf,
            ExtInt::Int(v) => ExtInt::Int(-v),
            ExtInt::NegInf => unreachable!("valuations are never -inf"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val == ExtInt::PosInf
    }

    /// Membership in the ring of integers.
    pub fn is_integral(&self) -> bool {
        self.val >= ExtInt::Int(0)
    }

    pub fn known_digits(&self) -> &[u32] {
        &self.digits
    }

    /// Number of tracked unit digits (relative precision of this element).
    pub fn precision_len(&self) -> usize {
        self.digits.len()
    }

    /// Digit at an absolute position, inside the known window or below the
    /// valuation (where it is zero by normalization).
    fn digit_at(&self, pos: i64) -> u32 {
        match self.val {
            ExtInt::PosInf => 0,
            ExtInt::Int(v) => {
                if pos < v {
                    0
                } else {
                    self.digits[(pos - v) as usize]
                }
            }
            ExtInt::NegInf => unreachable!(),
        }
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    /// Sum at the jointly supported precision. The result valuation is at
    /// least the minimum of the operands', with equality when they differ.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let va = self.val.expect_int("valuation");
        let vb = other.val.expect_int("valuation");
        let start = va.min(vb);
        let end = (va + self.digits.len() as i64).min(vb + other.digits.len() as i64);
        debug_assert!(end > start);
        let len = (end - start) as usize;
        let mut acc = vec![0u64; len];
        for (i, &d) in self.digits.iter().enumerate() {
            let pos = va + i as i64 - start;
            if (pos as usize) < len {
                acc[pos as usize] += d as u64;
            }
        }
        for (i, &d) in other.digits.iter().enumerate() {
            let pos = vb + i as i64 - start;
            if (pos as usize) < len {
                acc[pos as usize] += d as u64;
            }
        }
        digits::normalize_acc(&mut acc, self.spec.p, self.spec.carry());
        match acc.iter().position(|&d| d != 0) {
            None => Ok(Self::zero(self.spec)),
            Some(j) => Ok(LocalElem {
                spec: self.spec,
                val: ExtInt::Int(start + j as i64),
                digits: acc[j..].iter().map(|&d| d as u32).collect(),
            }),
        }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        LocalElem {
            spec: self.spec,
            val: self.val,
            digits: digits::neg_digits(&self.digits, self.spec.p, self.spec.carry()),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product; valuations add and relative precision is the minimum of the
    /// operands'.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.spec));
        }
        let out_len = self.digits.len().min(other.digits.len());
        let digits = digits::mul_digits(
            &self.digits,
            &other.digits,
            self.spec.p,
            self.spec.carry(),
            out_len,
        );
        debug_assert!(digits[0] != 0);
        Ok(LocalElem {
            spec: self.spec,
            val: self.val + other.val,
            digits,
        })
    }

    /// Multiplicative inverse, to the relative precision of the input.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let digits = digits::inv_digits(
            &self.digits,
            self.spec.p,
            self.spec.carry(),
            self.digits.len(),
        );
        Ok(LocalElem {
            spec: self.spec,
            val: ExtInt::Int(-self.val.expect_int("valuation")),
            digits,
        })
    }

    /// Multiply by the uniformizer to the power `k` (a pure valuation shift).
    pub fn shifted(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        LocalElem {
            spec: self.spec,
            val: self.val + ExtInt::Int(k),
            digits: self.digits.clone(),
        }
    }

    /// The unit part `u` of `x = u * pi^v`, or `None` for the zero.
    pub fn unit_part(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(LocalElem {
            spec: self.spec,
            val: ExtInt::Int(0),
            digits: self.digits.clone(),
        })
    }

    /// Reduction mod the maximal ideal, defined for integral elements.
    pub fn residue(&self) -> Result<u32> {
        match self.val {
            ExtInt::PosInf => Ok(0),
            ExtInt::Int(v) if v > 0 => Ok(0),
            ExtInt::Int(0) => Ok(self.digits[0]),
            _ => Err(Error::NotIntegral),
        }
    }

    /// Agreement on the joint tracked window: both elements describe the same
    /// value as far as either can see. This is the equality used by
    /// round-trip checks.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if self.spec != other.spec {
            return false;
        }
        match (self.val.as_int(), other.val.as_int()) {
            (None, None) => true,
            (None, Some(_)) | (Some(_), None) => false,
            (Some(va), Some(vb)) => {
                let start = va.min(vb);
                let end = (va + self.digits.len() as i64).min(vb + other.digits.len() as i64);
                (start..end).all(|pos| self.digit_at(pos) == other.digit_at(pos))
            }
        }
    }
}

impl fmt::Display for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let sym = self.spec.uniformizer_symbol();
        let v = self.val.expect_int("valuation");
        if v != 0 {
            write!(f, "{sym}^{v}*")?;
        }
        write!(f, "(")?;
        let mut first = true;
        for (i, &d) in self.digits.iter().enumerate().take(4) {
            if d == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{d}")?,
                1 => write!(f, "{d}*{sym}")?,
                _ => write!(f, "{d}*{sym}^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({sym}^{}))", self.digits.len())
    }
}

impl Serialize for LocalElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LocalElem", 2)?;
        st.serialize_field("v", &self.val)?;
        st.serialize_field("d", &self.digits)?;
        st.end()
    }
}

/// Raw serialized form of an element; attach a spec with
/// [`LocalElem::from_parts`] to get a value back.
#[derive(Debug, Clone, serde::Deserialize)]
pub(crate) struct RawElem {
    pub v: ExtInt,
    pub d: Vec<u32>,
}

impl RawElem {
    pub(crate) fn into_elem(self, spec: FieldSpec) -> Result<LocalElem> {
        LocalElem::from_parts(spec, self.v, self.d)
    }
}
