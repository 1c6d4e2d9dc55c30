//! Exact averages of character kernels over finite quotients.
//!
//! The built-in kernels all factor through the residue ring at a finite
//! depth m, so integration over the integral matrices (or over the
//! invertible-residue subset, which is the exact image of Haar measure on
//! the integral general linear group) reduces to finite enumeration. Sums
//! are accumulated as exact cyclotomic integers.

use super::cyclotomic::CyclotomicSum;
use crate::error::{Error, Result};
use crate::extint::ExtInt;
use crate::field::{FieldKind, FieldSpec, LocalElem, PhaseValue};
use crate::linalg::LocalMatrix;
use num_complex::Complex64;
use num_rational::BigRational;

/// Hard ceiling on enumeration size.
pub const ENUM_BUDGET: u128 = 10_000_000;

/// Which quotient to average over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// All integral matrices mod pi^m.
    Mat,
    /// Matrices with invertible reduction mod pi (the image of the
    /// integral general linear group).
    Gl,
}

/// Elements of the residue ring at depth `level`, packed as base-p digit
/// strings in a u64. For p-adic fields the packed value is the integer mod
/// p^level, so ring operations are plain modular arithmetic; Laurent-series
/// quotients operate digit-wise.
#[derive(Clone, Copy)]
struct ResidueRing {
    p: u64,
    level: u32,
    modulus: u64,
    carry: bool,
}

impl ResidueRing {
    fn new(spec: &FieldSpec, level: u32) -> Self {
        let p = spec.p as u64;
        ResidueRing {
            p,
            level,
            modulus: p.pow(level),
            carry: spec.carry(),
        }
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        if self.carry {
            (a + b) % self.modulus
        } else {
            let (mut a, mut b, mut out, mut pw) = (a, b, 0u64, 1u64);
            for _ in 0..self.level {
                out += (a % self.p + b % self.p) % self.p * pw;
                a /= self.p;
                b /= self.p;
                pw *= self.p;
            }
            out
        }
    }

    fn neg(&self, a: u64) -> u64 {
        if self.carry {
            (self.modulus - a) % self.modulus
        } else {
            let (mut a, mut out, mut pw) = (a, 0u64, 1u64);
            for _ in 0..self.level {
                out += (self.p - a % self.p) % self.p * pw;
                a /= self.p;
                pw *= self.p;
            }
            out
        }
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        if self.carry {
            a * b % self.modulus
        } else {
            // Truncated convolution of the digit strings.
            let mut da = [0u64; 64];
            let mut db = [0u64; 64];
            let l = self.level as usize;
            let (mut x, mut y) = (a, b);
            for i in 0..l {
                da[i] = x % self.p;
                db[i] = y % self.p;
                x /= self.p;
                y /= self.p;
            }
            let mut out = 0u64;
            let mut pw = 1u64;
            for k in 0..l {
                let mut acc = 0u64;
                for i in 0..=k {
                    acc += da[i] * db[k - i];
                }
                out += acc % self.p * pw;
                pw *= self.p;
            }
            out
        }
    }

    /// Truncate to a shallower level.
    fn truncate(&self, a: u64, level: u32) -> u64 {
        a % self.p.pow(level)
    }

    /// Residue mod pi (the lowest digit).
    fn first_digit(&self, a: u64) -> u32 {
        (a % self.p) as u32
    }
}

/// `chi(x * t)` for a residue `t` known mod pi^level.
///
/// Requires the scale's negative-valuation depth to be covered both by the
/// residue level and by the scale's own tracked digits.
fn phase_of_scaled(
    x: &LocalElem,
    t: u64,
    ring: &ResidueRing,
    spec: &FieldSpec,
) -> Result<PhaseValue> {
    let p = spec.p;
    let ell = match x.valuation() {
        ExtInt::PosInf => return Ok(PhaseValue::trivial(p)),
        ExtInt::Int(v) if v >= 0 => return Ok(PhaseValue::trivial(p)),
        ExtInt::Int(v) => (-v) as u32,
        ExtInt::NegInf => unreachable!(),
    };
    if ell > ring.level {
        return Err(Error::InsufficientPrecision(format!(
            "kernel scale needs depth {ell}, enumeration runs at depth {}",
            ring.level
        )));
    }
    if x.precision_len() < ell as usize {
        return Err(Error::InsufficientPrecision(format!(
            "kernel scale tracks {} digits, needs {ell}",
            x.precision_len()
        )));
    }
    // Unit of x mod pi^ell, packed.
    let mut u = 0u64;
    let mut pw = 1u64;
    for &d in &x.known_digits()[..ell as usize] {
        u += d as u64 * pw;
        pw *= p as u64;
    }
    let sub = ResidueRing {
        p: p as u64,
        level: ell,
        modulus: (p as u64).pow(ell),
        carry: ring.carry,
    };
    let w = sub.mul(u, ring.truncate(t, ell));
    match spec.kind {
        FieldKind::PAdic => Ok(PhaseValue::new(p, w, ell)),
        FieldKind::LaurentSeries => {
            // Coefficient of t^{-1} in x * t is the top digit of w.
            let top = w / (p as u64).pow(ell - 1) % p as u64;
            Ok(PhaseValue::new(p, top, 1))
        }
    }
}

/// A declarative character kernel over a matrix of residues.
#[derive(Debug, Clone)]
pub enum Kernel {
    /// `chi(scale * tr(Y J Y^t J))` over 2x2 matrices `Y`; the elementary
    /// quadratic kernel behind the orbital integrals.
    Theta { scale: LocalElem },
    /// `chi(sum_ij coeffs[i][j] X_ij)` over `n x n` matrices, with an
    /// `r x n` coefficient matrix: an observable of the first r rows.
    Row { coeffs: LocalMatrix },
    /// `chi(tr(g D g^t A))` over `2n x 2n` matrices `g`, with
    /// `D = diag(x_1 J, ..., x_n J)` and `A = diag(a_1 J, ..., a_r J, 0...)`.
    Orbital {
        d_scalars: Vec<LocalElem>,
        a_scalars: Vec<LocalElem>,
    },
}

enum TermKind {
    /// Phase of `scale * 2 (bc - ad)` over the 2x2 block at the given
    /// (row, col) corner; `tr(Y J Y^t J) = 2 (bc - ad)` for the block Y.
    BlockDet { row: usize, col: usize },
    /// Phase of `scale * X_ij`.
    Linear { row: usize, col: usize },
}

struct Term {
    scale: LocalElem,
    kind: TermKind,
}

struct PreparedKernel {
    n: usize,
    terms: Vec<Term>,
}

impl Kernel {
    /// Side length of the enumerated matrices.
    pub fn matrix_size(&self) -> usize {
        match self {
            Kernel::Theta { .. } => 2,
            Kernel::Row { coeffs } => coeffs.cols(),
            Kernel::Orbital { d_scalars, .. } => 2 * d_scalars.len(),
        }
    }

    fn scales(&self) -> Result<Vec<LocalElem>> {
        match self {
            Kernel::Theta { scale } => Ok(vec![scale.clone()]),
            Kernel::Row { coeffs } => Ok(coeffs.entries().to_vec()),
            Kernel::Orbital {
                d_scalars,
                a_scalars,
            } => {
                if a_scalars.len() > d_scalars.len() {
                    return Err(Error::InvalidArgument(
                        "orbital kernel needs r <= n".into(),
                    ));
                }
                let mut out = Vec::new();
                for a in a_scalars {
                    for x in d_scalars {
                        out.push(a.mul(x)?);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Smallest residue depth at which every phase of the kernel is
    /// determined.
    pub fn min_depth(&self) -> Result<u32> {
        let mut depth = 0u32;
        for s in self.scales()? {
            if let ExtInt::Int(v) = s.valuation() {
                if v < 0 {
                    depth = depth.max((-v) as u32);
                }
            }
        }
        Ok(depth)
    }

    fn prepare(&self) -> Result<PreparedKernel> {
        let n = self.matrix_size();
        let terms = match self {
            Kernel::Theta { scale } => vec![Term {
                scale: scale.clone(),
                kind: TermKind::BlockDet { row: 0, col: 0 },
            }],
            Kernel::Row { coeffs } => {
                if coeffs.rows() > coeffs.cols() {
                    return Err(Error::InvalidArgument(
                        "row kernel wants r <= n coefficient rows".into(),
                    ));
                }
                let mut terms = Vec::new();
                for i in 0..coeffs.rows() {
                    for j in 0..coeffs.cols() {
                        let c = coeffs.get(i, j);
                        if c.is_zero() {
                            continue;
                        }
                        terms.push(Term {
                            scale: c.clone(),
                            kind: TermKind::Linear { row: i, col: j },
                        });
                    }
                }
                terms
            }
            Kernel::Orbital {
                d_scalars,
                a_scalars,
            } => {
                if a_scalars.len() > d_scalars.len() {
                    return Err(Error::InvalidArgument(
                        "orbital kernel needs r <= n".into(),
                    ));
                }
                // tr(g D g^t A) = sum_ij a_i x_j tr(G_ij J G_ij^t J) over
                // the 2x2 blocks G_ij of g.
                let mut terms = Vec::new();
                for (i, a) in a_scalars.iter().enumerate() {
                    for (j, x) in d_scalars.iter().enumerate() {
                        let scale = a.mul(x)?;
                        if scale.is_zero() {
                            continue;
                        }
                        terms.push(Term {
                            scale,
                            kind: TermKind::BlockDet {
                                row: 2 * i,
                                col: 2 * j,
                            },
                        });
                    }
                }
                terms
            }
        };
        Ok(PreparedKernel { n, terms })
    }
}

impl PreparedKernel {
    fn eval(
        &self,
        entries: &[u64],
        ring: &ResidueRing,
        spec: &FieldSpec,
    ) -> Result<PhaseValue> {
        let n = self.n;
        let mut phase = PhaseValue::trivial(spec.p);
        for term in &self.terms {
            let t = match term.kind {
                TermKind::Linear { row, col } => entries[row * n + col],
                TermKind::BlockDet { row, col } => {
                    let a = entries[row * n + col];
                    let b = entries[row * n + col + 1];
                    let c = entries[(row + 1) * n + col];
                    let d = entries[(row + 1) * n + col + 1];
                    let bc_ad = ring.sub(ring.mul(b, c), ring.mul(a, d));
                    ring.add(bc_ad, bc_ad)
                }
            };
            phase = phase.mul(&phase_of_scaled(&term.scale, t, ring, spec)?);
        }
        Ok(phase)
    }
}

/// The exact value of a finite-quotient integral: a cyclotomic sum over a
/// counted point set.
#[derive(Debug, Clone)]
pub struct ExactIntegral {
    pub sum: CyclotomicSum,
    pub points: u64,
}

impl ExactIntegral {
    /// Exact rational value, when the sum is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.sum.as_rational_over(self.points)
    }

    pub fn to_complex(&self) -> Complex64 {
        self.sum.to_complex_over(self.points)
    }
}

/// Average the kernel exactly over the chosen domain at residue depth
/// `depth` (defaulting to the kernel's minimal sufficient depth).
///
/// The character factors through the quotient, so the returned cyclotomic
/// sum equals the corresponding Haar integral exactly. Depth 0 means the
/// trivial quotient: a single point where every phase is 1.
pub fn exact_quotient_integral(
    kernel: &Kernel,
    domain: Domain,
    spec: &FieldSpec,
    depth: Option<u32>,
) -> Result<ExactIntegral> {
    let min_depth = kernel.min_depth()?;
    let depth = depth.unwrap_or(min_depth);
    if depth < min_depth {
        return Err(Error::InsufficientPrecision(format!(
            "kernel is not determined mod pi^{depth}; needs depth {min_depth}"
        )));
    }
    let n = kernel.matrix_size();
    let cells = (n * n) as u32;
    let per_entry = (spec.p as u128).pow(depth);
    let total = per_entry.checked_pow(cells).ok_or(Error::BudgetExceeded {
        points: u128::MAX,
        budget: ENUM_BUDGET,
    })?;
    if total > ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            points: total,
            budget: ENUM_BUDGET,
        });
    }
    let ring = ResidueRing::new(spec, depth);
    let prepared = kernel.prepare()?;
    let mut sum = CyclotomicSum::new(spec.p, depth);
    let mut points = 0u64;
    let mut entries = vec![0u64; n * n];
    let mut residues = vec![0u32; n * n];
    let per_entry = per_entry as u64;
    for idx in 0..(total as u64) {
        let mut rem = idx;
        for e in entries.iter_mut() {
            *e = rem % per_entry;
            rem /= per_entry;
        }
        if domain == Domain::Gl && depth > 0 {
            for (r, e) in residues.iter_mut().zip(&entries) {
                *r = ring.first_digit(*e);
            }
            if !crate::linalg::haar::residue_invertible(&mut residues, n, spec.p) {
                continue;
            }
        }
        sum.add_phase(&prepared.eval(&entries, &ring, spec)?);
        points += 1;
    }
    Ok(ExactIntegral { sum, points })
}
