//! Matrices over the local field, Haar sampling on the integral general
//! linear group, and the skew-symmetric canonical form.

mod canonical;
pub(crate) mod haar;

pub use canonical::{skew_canonical_form, CanonicalSkewForm};
pub use haar::{in_gl, residue_det, residue_matrix, sample_gl, sample_uniform_matrix};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::extint::ExtInt;
use crate::field::{FieldSpec, LocalElem};

/// A rectangular matrix of field elements sharing one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<LocalElem>,
}

impl LocalMatrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        LocalMatrix {
            spec,
            rows,
            cols,
            entries: vec![LocalElem::zero(spec); rows * cols],
        }
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.entries[i * n + i] = LocalElem::one(spec);
        }
        m
    }

    /// The 2x2 block `[[0, 1], [-1, 0]]`.
    pub fn j_block(spec: FieldSpec) -> Self {
        let one = LocalElem::one(spec);
        LocalMatrix {
            spec,
            rows: 2,
            cols: 2,
            entries: vec![LocalElem::zero(spec), one.clone(), one.neg(), LocalElem::zero(spec)],
        }
    }

    pub fn from_entries(
        spec: FieldSpec,
        rows: usize,
        cols: usize,
        entries: Vec<LocalElem>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        Ok(LocalMatrix {
            spec,
            rows,
            cols,
            entries,
        })
    }

    /// Block-diagonal skew matrix `diag(x_1 J, ..., x_m J)` padded with zeros
    /// to `total x total`.
    pub fn block_diag_j(spec: FieldSpec, scalars: &[LocalElem], total: usize) -> Result<Self> {
        if 2 * scalars.len() > total {
            return Err(Error::ShapeMismatch(format!(
                "{} J-blocks do not fit in a {total}x{total} matrix",
                scalars.len()
            )));
        }
        let mut m = Self::zeros(spec, total, total);
        for (i, x) in scalars.iter().enumerate() {
            if x.spec() != spec {
                return Err(Error::SpecMismatch);
            }
            m.set(2 * i, 2 * i + 1, x.clone());
            m.set(2 * i + 1, 2 * i, x.neg());
        }
        Ok(m)
    }

    /// Same, with scalars given as absolute-value exponents: block `i` is
    /// `pi^{-k_i} J`, and `-inf` gives a zero block.
    pub fn block_diag_from_exponents(
        spec: FieldSpec,
        exponents: &[ExtInt],
        total: usize,
    ) -> Result<Self> {
        let scalars: Vec<LocalElem> = exponents
            .iter()
            .map(|&k| match k {
                ExtInt::NegInf => LocalElem::zero(spec),
                ExtInt::Int(k) => LocalElem::uniformizer_pow(spec, -k),
                ExtInt::PosInf => LocalElem::zero(spec),
            })
            .collect();
        Self::block_diag_j(spec, &scalars, total)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LocalElem {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: LocalElem) {
        debug_assert_eq!(e.spec(), self.spec);
        self.entries[i * self.cols + j] = e;
    }

    pub fn entries(&self) -> &[LocalElem] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.spec, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        LocalMatrix {
            spec: self.spec,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalMatrix {
            spec: self.spec,
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = LocalElem::zero(self.spec);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Scale every entry by `x`.
    pub fn scale(&self, x: &LocalElem) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalMatrix {
            spec: self.spec,
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// The alternating part `X - X^t`; always skew with an exactly zero
    /// diagonal.
    pub fn skew_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "skew part of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut out = Self::zeros(self.spec, self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                if i == j {
                    continue;
                }
                out.set(i, j, self.get(i, j).sub(self.get(j, i))?);
            }
        }
        Ok(out)
    }

    /// The congruence action `g A g^t`.
    pub fn congruence(g: &Self, a: &Self) -> Result<Self> {
        g.matmul(a)?.matmul(&g.transpose())
    }

    /// Skewness within tracked precision: zero diagonal and `A_ij` agreeing
    /// with `-A_ji` on the joint window.
    pub fn is_skew(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            if !self.get(i, i).is_zero() {
                return false;
            }
            for j in (i + 1)..self.rows {
                if !self.get(i, j).agrees_with(&self.get(j, i).neg()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.is_integral())
    }

    /// Minimum valuation over all entries; `+inf` for the zero matrix.
    pub fn min_valuation(&self) -> ExtInt {
        self.entries
            .iter()
            .map(|e| e.valuation())
            .min()
            .unwrap_or(ExtInt::PosInf)
    }

    /// Entrywise agreement on joint windows.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.agrees_with(b))
    }

    /// `tr(X S)` computed as `sum_ij X_ij S_ji`, skipping exact zeros of `X`.
    pub fn trace_product(&self, other: &Self) -> Result<LocalElem> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.cols != other.rows || other.cols != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "trace of {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = LocalElem::zero(self.spec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if x.is_zero() {
                    continue;
                }
                let s = other.get(j, i);
                if s.is_zero() {
                    continue;
                }
                acc = acc.add(&x.mul(s)?)?;
            }
        }
        Ok(acc)
    }

    /// Inverse of a matrix in the integral general linear group, by
    /// Gauss-Jordan elimination on unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut out = Self::identity(self.spec, n);
        for col in 0..n {
            // A unit pivot exists in every column when the residue matrix is
            // invertible.
            let pivot_row = (col..n)
                .find(|&r| work.get(r, col).valuation() == ExtInt::Int(0))
                .ok_or_else(|| {
                    Error::InvalidArgument("matrix is not invertible over the integers".into())
                })?;
            if pivot_row != col {
                for j in 0..n {
                    let a = work.get(pivot_row, j).clone();
                    let b = work.get(col, j).clone();
                    work.set(pivot_row, j, b);
                    work.set(col, j, a);
                    let a = out.get(pivot_row, j).clone();
                    let b = out.get(col, j).clone();
                    out.set(pivot_row, j, b);
                    out.set(col, j, a);
                }
            }
            let inv_pivot = work.get(col, col).inv()?;
            for j in 0..n {
                work.set(col, j, work.get(col, j).mul(&inv_pivot)?);
                out.set(col, j, out.get(col, j).mul(&inv_pivot)?);
            }
            for r in 0..n {
                if r == col || work.get(r, col).is_zero() {
                    continue;
                }
                let factor = work.get(r, col).clone();
                for j in 0..n {
                    let w = work.get(r, j).sub(&factor.mul(work.get(col, j))?)?;
                    work.set(r, j, w);
                    let o = out.get(r, j).sub(&factor.mul(out.get(col, j))?)?;
                    out.set(r, j, o);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for LocalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl Serialize for LocalMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LocalMatrix", 4)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("spec", &self.spec)?;
        st.serialize_field("entries", &self.entries)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for LocalMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            spec: FieldSpec,
            entries: Vec<crate::field::RawElem>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let spec = FieldSpec::new(raw.spec.kind, raw.spec.p, raw.spec.precision)
            .map_err(de::Error::custom)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|e| e.into_elem(spec))
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        LocalMatrix::from_entries(spec, raw.rows, raw.cols, entries).map_err(de::Error::custom)
    }
}
