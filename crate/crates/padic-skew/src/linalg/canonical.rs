//! Canonical form of a skew-symmetric matrix under integral congruence.
//!
//! Every skew matrix of even size can be written `g D g^t` with `g` in the
//! integral general linear group and `D = diag(pi^{-k_1} J, ...,
//! pi^{-k_n} J)`, the exponents nonincreasing in `Z + {-inf}`. The
//! algorithm pivots on an entry of maximal absolute value, moves it to the
//! leading 2x2 block by transposition congruences, clears the first block
//! row and column with one integral unipotent, and recurses on the
//! complement; unit factors and the nonincreasing ordering are split off at
//! the end as separate congruences.

use crate::error::{Error, Result};
use crate::extint::ExtInt;
use crate::field::LocalElem;
use crate::linalg::LocalMatrix;

/// Result of the diagonalization: `transform * D * transform^t` reproduces
/// the input within tracked precision, where `D` has J-blocks scaled by
/// `pi^{-k}` for the stored exponents.
#[derive(Debug, Clone)]
pub struct CanonicalSkewForm {
    /// The congruence transform `g`; integral with unit determinant.
    pub transform: LocalMatrix,
    /// Absolute-value exponents `k_1 >= k_2 >= ... ` (`-inf` for zero
    /// blocks, produced only from exactly-zero complements).
    pub exponents: Vec<ExtInt>,
}

impl CanonicalSkewForm {
    /// The block-diagonal middle factor `D`.
    pub fn block_diagonal(&self) -> LocalMatrix {
        let spec = self.transform.spec();
        let total = self.transform.rows();
        LocalMatrix::block_diag_from_exponents(spec, &self.exponents, total)
            .expect("exponent count fixed by construction")
    }

    /// `g D g^t`, for round-trip checks against the original matrix.
    pub fn reconstruct(&self) -> Result<LocalMatrix> {
        LocalMatrix::congruence(&self.transform, &self.block_diagonal())
    }
}

/// 2x2 working block.
#[derive(Clone)]
struct Block2 {
    e: [LocalElem; 4], // row-major
}

impl Block2 {
    fn from_matrix(m: &LocalMatrix, r: usize, c: usize) -> Self {
        Block2 {
            e: [
                m.get(r, c).clone(),
                m.get(r, c + 1).clone(),
                m.get(r + 1, c).clone(),
                m.get(r + 1, c + 1).clone(),
            ],
        }
    }

    fn write_to(&self, m: &mut LocalMatrix, r: usize, c: usize) {
        m.set(r, c, self.e[0].clone());
        m.set(r, c + 1, self.e[1].clone());
        m.set(r + 1, c, self.e[2].clone());
        m.set(r + 1, c + 1, self.e[3].clone());
    }

    /// Left-multiply by J: swaps rows with a sign.
    fn j_times(&self) -> Self {
        Block2 {
            e: [
                self.e[2].clone(),
                self.e[3].clone(),
                self.e[0].neg(),
                self.e[1].neg(),
            ],
        }
    }

    fn transpose(&self) -> Self {
        Block2 {
            e: [
                self.e[0].clone(),
                self.e[2].clone(),
                self.e[1].clone(),
                self.e[3].clone(),
            ],
        }
    }

    fn scale(&self, x: &LocalElem) -> Result<Self> {
        Ok(Block2 {
            e: [
                self.e[0].mul(x)?,
                self.e[1].mul(x)?,
                self.e[2].mul(x)?,
                self.e[3].mul(x)?,
            ],
        })
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let p = |i: usize, j: usize, k: usize, l: usize| -> Result<LocalElem> {
            self.e[i].mul(&other.e[j])?.add(&self.e[k].mul(&other.e[l])?)
        };
        Ok(Block2 {
            e: [p(0, 0, 1, 2)?, p(0, 1, 1, 3)?, p(2, 0, 3, 2)?, p(2, 1, 3, 3)?],
        })
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Block2 {
            e: [
                self.e[0].sub(&other.e[0])?,
                self.e[1].sub(&other.e[1])?,
                self.e[2].sub(&other.e[2])?,
                self.e[3].sub(&other.e[3])?,
            ],
        })
    }
}

/// Bring the pivot at `(i0, j0)` (absolute indices, `i0 < j0`) to positions
/// `(base, base + 1)` by a transposition congruence; three overlap cases,
/// offset into the trailing block.
fn pivot_permutation(n2: usize, base: usize, i0: usize, j0: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n2).collect();
    let (r1, r2) = (base, base + 1);
    if (i0, j0) == (r1, r2) {
        return perm;
    }
    let apply_swap = |perm: &mut Vec<usize>, a: usize, b: usize| {
        // perm <- transposition(a, b) composed after perm
        for v in perm.iter_mut() {
            if *v == a {
                *v = b;
            } else if *v == b {
                *v = a;
            }
        }
    };
    if i0 != r1 && i0 != r2 && j0 != r1 && j0 != r2 {
        apply_swap(&mut perm, r1, i0);
        apply_swap(&mut perm, r2, j0);
    } else if i0 == r1 {
        apply_swap(&mut perm, r2, j0);
    } else if i0 == r2 {
        apply_swap(&mut perm, r2, j0);
        apply_swap(&mut perm, r1, r2);
    } else {
        // j0 in {r1, r2} with i0 > base: only j0 == r2 is possible since
        // i0 < j0, which means i0 == r1 was handled above; j0 == r1 cannot
        // occur because i0 < j0 would force i0 < r1 < base.
        unreachable!("pivot below the active block");
    }
    debug_assert_eq!(perm[r1], i0);
    debug_assert_eq!(perm[r2], j0);
    perm
}

/// Conjugate by the permutation matrix: `W'(i, j) = W(perm(i), perm(j))`.
fn permute_congruence(w: &LocalMatrix, perm: &[usize]) -> LocalMatrix {
    let n = w.rows();
    let mut out = LocalMatrix::zeros(w.spec(), n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, w.get(perm[i], perm[j]).clone());
        }
    }
    out
}

/// Column remap `H <- H P^t` for the permutation congruence above.
fn permute_columns(h: &LocalMatrix, perm: &[usize]) -> LocalMatrix {
    let n = h.rows();
    let mut out = LocalMatrix::zeros(h.spec(), n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, h.get(i, perm[j]).clone());
        }
    }
    out
}

/// Canonical form of a skew-symmetric matrix of even size.
///
/// The pivot is an entry of maximal absolute value above the diagonal, ties
/// broken at the lexicographically smallest index pair, which makes the
/// output deterministic. The zero matrix yields all exponents `-inf`.
/// Elimination results whose digits fall entirely below the precision
/// window shared by the input (anchored at its minimum valuation) raise
/// `PrecisionExhausted` rather than producing untrustworthy exponents.
pub fn skew_canonical_form(a: &LocalMatrix) -> Result<CanonicalSkewForm> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "canonical form of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.rows().is_multiple_of(2) {
        return Err(Error::OddDimension(a.rows()));
    }
    if !a.is_skew() {
        return Err(Error::NotSkew);
    }
    let spec = a.spec();
    let n2 = a.rows();
    let n = n2 / 2;

    // Precision window shared by the whole matrix.
    let window_end = match a.min_valuation() {
        ExtInt::PosInf => None,
        v => Some(v.expect_int("anchor valuation") + spec.precision as i64),
    };

    let mut w = a.clone();
    let mut h = LocalMatrix::identity(spec, n2);
    let mut scalars: Vec<LocalElem> = Vec::with_capacity(n);

    for step in 0..n {
        let base = 2 * step;
        // Locate the maximal-absolute-value entry of the trailing block.
        let mut pivot: Option<(i64, usize, usize)> = None;
        for i in base..n2 {
            for j in (i + 1)..n2 {
                if let ExtInt::Int(v) = w.get(i, j).valuation() {
                    if pivot.map(|(pv, _, _)| v < pv).unwrap_or(true) {
                        pivot = Some((v, i, j));
                    }
                }
            }
        }
        let (pivot_val, i0, j0) = match pivot {
            // Exactly-zero complement: the remaining blocks are zero.
            None => break,
            Some(p) => p,
        };
        // The matrix shares one window anchored at its minimum valuation; a
        // pivot whose digits start past the window's end cannot be trusted
        // (it was manufactured by cancellation or sits deeper than the
        // input's joint knowledge).
        if let Some(end) = window_end {
            if pivot_val >= end {
                return Err(Error::PrecisionExhausted(format!(
                    "pivot valuation {pivot_val} is at or past the window end {end}"
                )));
            }
        }

        if (i0, j0) != (base, base + 1) {
            let perm = pivot_permutation(n2, base, i0, j0);
            w = permute_congruence(&w, &perm);
            h = permute_columns(&h, &perm);
        }

        let x = w.get(base, base + 1).clone();
        scalars.push(x.clone());
        if step + 1 == n {
            break;
        }

        // Clear the first block row/column of the trailing matrix:
        // with B_v the 2x2 strip blocks, the complement becomes
        // C_uv - x^{-1} (J B_u)^t (J B_v) ... computed as
        // C_uv - x^{-1} B_u^t J B_v, and H picks up the inverse unipotent.
        let x_inv = x.inv()?;
        let strip: Vec<Block2> = ((step + 1)..n)
            .map(|v| Block2::from_matrix(&w, base, 2 * v))
            .collect();
        let r_blocks: Vec<Block2> = strip
            .iter()
            .map(|b| b.j_times().scale(&x_inv))
            .collect::<Result<Vec<_>>>()?;

        // Complement update.
        for (ui, u) in ((step + 1)..n).enumerate() {
            for (vi, v) in ((step + 1)..n).enumerate() {
                let c = Block2::from_matrix(&w, 2 * u, 2 * v);
                let correction = strip[ui].transpose().mul(&r_blocks[vi])?;
                let updated = c.sub(&correction)?;
                updated.write_to(&mut w, 2 * u, 2 * v);
            }
        }
        // The cleared strip is exactly zero.
        for v in (step + 1)..n {
            for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                w.set(base + di, 2 * v + dj, LocalElem::zero(spec));
                w.set(2 * v + dj, base + di, LocalElem::zero(spec));
            }
        }

        // H <- H * L^{-1} with L^{-1} unipotent carrying -R_v^t in the
        // leading block column.
        for (vi, v) in ((step + 1)..n).enumerate() {
            let rt = r_blocks[vi].transpose();
            for row in 0..n2 {
                for col in 0..2 {
                    // H[row, base+col] -= H[row, 2v..] . rt[.., col]
                    let t1 = h.get(row, 2 * v).mul(&rt.e[col])?;
                    let t2 = h.get(row, 2 * v + 1).mul(&rt.e[2 + col])?;
                    let updated = h.get(row, base + col).sub(&t1.add(&t2)?)?;
                    h.set(row, base + col, updated);
                }
            }
        }
    }

    // Pad with exact zeros for the untouched trailing blocks.
    while scalars.len() < n {
        scalars.push(LocalElem::zero(spec));
    }

    // Factor units out of the blocks: x J = [u 0; 0 1] pi^{-k} J [u 0; 0 1]^t.
    let mut exponents: Vec<ExtInt> = Vec::with_capacity(n);
    for (i, x) in scalars.iter().enumerate() {
        match x.valuation() {
            ExtInt::PosInf => exponents.push(ExtInt::NegInf),
            ExtInt::Int(v) => {
                exponents.push(ExtInt::Int(-v));
                let u = x.unit_part().expect("nonzero scalar");
                for row in 0..n2 {
                    let scaled = h.get(row, 2 * i).mul(&u)?;
                    h.set(row, 2 * i, scaled);
                }
            }
            ExtInt::NegInf => unreachable!(),
        }
    }

    // Nonincreasing order by a block permutation congruence.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| exponents[b].cmp(&exponents[a]));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let mut perm = vec![0usize; n2];
        for (i, &o) in order.iter().enumerate() {
            perm[2 * i] = 2 * o;
            perm[2 * i + 1] = 2 * o + 1;
        }
        h = permute_columns(&h, &perm);
        exponents = order.iter().map(|&o| exponents[o]).collect();
    }

    Ok(CanonicalSkewForm {
        transform: h,
        exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::stream_rng;
    use crate::field::FieldSpec;
    use crate::linalg::{in_gl, sample_gl};
    use rand::Rng;

    fn q3() -> FieldSpec {
        FieldSpec::padic(3, 24).unwrap()
    }

    fn random_skew<R: Rng + ?Sized>(
        spec: FieldSpec,
        n2: usize,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> LocalMatrix {
        let mut m = LocalMatrix::zeros(spec, n2, n2);
        for i in 0..n2 {
            for j in (i + 1)..n2 {
                let x = LocalElem::sample_with_valuation_in(spec, lo, hi, rng);
                m.set(j, i, x.neg());
                m.set(i, j, x);
            }
        }
        m
    }

    #[test]
    fn j_is_already_canonical() {
        let spec = q3();
        let j = LocalMatrix::j_block(spec);
        let cf = skew_canonical_form(&j).unwrap();
        assert_eq!(cf.exponents, vec![ExtInt::Int(0)]);
        assert!(cf.transform.agrees_with(&LocalMatrix::identity(spec, 2)));
    }

    #[test]
    fn scaled_j_reads_off_exponent() {
        let spec = q3();
        let x = LocalElem::uniformizer_pow(spec, -2);
        let m = LocalMatrix::block_diag_j(spec, &[x], 2).unwrap();
        let cf = skew_canonical_form(&m).unwrap();
        assert_eq!(cf.exponents, vec![ExtInt::Int(2)]);
    }

    #[test]
    fn four_by_four_cross_blocks() {
        // A13 = 1, A24 = 1/3, skew completions: canonical exponents (1, 0).
        let spec = q3();
        let mut m = LocalMatrix::zeros(spec, 4, 4);
        m.set(0, 2, LocalElem::one(spec));
        m.set(2, 0, LocalElem::one(spec).neg());
        m.set(1, 3, LocalElem::uniformizer_pow(spec, -1));
        m.set(3, 1, LocalElem::uniformizer_pow(spec, -1).neg());
        let cf = skew_canonical_form(&m).unwrap();
        assert_eq!(cf.exponents, vec![ExtInt::Int(1), ExtInt::Int(0)]);
        assert!(cf.reconstruct().unwrap().agrees_with(&m));
        assert!(in_gl(&cf.transform));
    }

    #[test]
    fn zero_matrix_gives_minus_infinity() {
        let spec = q3();
        let z = LocalMatrix::zeros(spec, 4, 4);
        let cf = skew_canonical_form(&z).unwrap();
        assert_eq!(cf.exponents, vec![ExtInt::NegInf, ExtInt::NegInf]);
        assert!(cf.reconstruct().unwrap().agrees_with(&z));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = q3();
        assert!(matches!(
            skew_canonical_form(&LocalMatrix::zeros(spec, 3, 3)),
            Err(Error::OddDimension(3))
        ));
        let mut not_skew = LocalMatrix::zeros(spec, 2, 2);
        not_skew.set(0, 1, LocalElem::one(spec));
        assert!(matches!(
            skew_canonical_form(&not_skew),
            Err(Error::NotSkew)
        ));
    }

    #[test]
    fn pivot_relocation_cases() {
        // Each overlap case of the pivot move gets a 6x6 with its unique
        // maximal entry at a position exercising that branch.
        let spec = q3();
        let place = |i0: usize, j0: usize| {
            let mut m = LocalMatrix::zeros(spec, 6, 6);
            let mut fill = |i: usize, j: usize, v: i64| {
                let x = LocalElem::uniformizer_pow(spec, v);
                m.set(j, i, x.neg());
                m.set(i, j, x);
            };
            for i in 0..6 {
                for j in (i + 1)..6 {
                    fill(i, j, 2); // background at scale pi^2
                }
            }
            fill(i0, j0, -3); // the unique pivot
            m
        };
        // Disjoint from the leading pair; first-row overlap; second-row
        // overlap.
        for (i0, j0) in [(2usize, 4usize), (0, 3), (1, 5)] {
            let a = place(i0, j0);
            let cf = skew_canonical_form(&a).unwrap();
            assert_eq!(cf.exponents[0], ExtInt::Int(3), "pivot at ({i0},{j0})");
            assert!(
                cf.reconstruct().unwrap().agrees_with(&a),
                "round trip failed for pivot at ({i0},{j0})"
            );
            assert!(in_gl(&cf.transform));
        }
    }

    #[test]
    fn laurent_series_round_trip() {
        let spec = FieldSpec::laurent(5, 24).unwrap();
        let mut rng = stream_rng(33, 0);
        for _ in 0..10 {
            let a = random_skew(spec, 6, -4, 4, &mut rng);
            let cf = skew_canonical_form(&a).unwrap();
            assert!(cf.reconstruct().unwrap().agrees_with(&a));
            assert!(in_gl(&cf.transform));
        }
    }

    #[test]
    fn round_trip_random_matrices() {
        let spec = q3();
        let mut rng = stream_rng(31, 0);
        for n in 1..=4usize {
            for _ in 0..25 {
                let a = random_skew(spec, 2 * n, -6, 6, &mut rng);
                let cf = skew_canonical_form(&a).unwrap();
                assert!(
                    cf.reconstruct().unwrap().agrees_with(&a),
                    "round trip failed for n = {n}"
                );
                assert!(in_gl(&cf.transform));
                assert!(cf.exponents.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn exponents_invariant_under_congruence() {
        let spec = q3();
        let mut rng = stream_rng(32, 0);
        for _ in 0..15 {
            let a = random_skew(spec, 6, -4, 4, &mut rng);
            let exps = skew_canonical_form(&a).unwrap().exponents;
            let g = sample_gl(spec, 6, &mut rng);
            let b = LocalMatrix::congruence(&g, &a).unwrap();
            assert_eq!(skew_canonical_form(&b).unwrap().exponents, exps);
        }
    }

    #[test]
    fn precision_exhaustion_detected() {
        // At two tracked digits the shared window of a matrix anchored at
        // valuation -1 ends at +1; a second pivot at valuation 1 sits past
        // it and must be refused rather than reported as an exponent.
        let spec = FieldSpec::padic(3, 2).unwrap();
        let mut m = LocalMatrix::zeros(spec, 4, 4);
        let big = LocalElem::uniformizer_pow(spec, -1);
        let tiny = LocalElem::uniformizer_pow(spec, 1);
        m.set(0, 1, big.clone());
        m.set(1, 0, big.neg());
        m.set(2, 3, tiny.clone());
        m.set(3, 2, tiny.neg());
        assert!(matches!(
            skew_canonical_form(&m),
            Err(Error::PrecisionExhausted(_))
        ));
        // At default precision the same matrix is fine.
        let spec = FieldSpec::padic(3, 24).unwrap();
        let mut m = LocalMatrix::zeros(spec, 4, 4);
        let big = LocalElem::uniformizer_pow(spec, -1);
        let tiny = LocalElem::uniformizer_pow(spec, 1);
        m.set(0, 1, big.clone());
        m.set(1, 0, big.neg());
        m.set(2, 3, tiny.clone());
        m.set(3, 2, tiny.neg());
        assert_eq!(
            skew_canonical_form(&m).unwrap().exponents,
            vec![ExtInt::Int(1), ExtInt::Int(-1)]
        );
    }
}
