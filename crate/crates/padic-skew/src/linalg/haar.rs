//! Haar sampling on the integral matrices and on the integral general
//! linear group.
//!
//! The group of integral invertible matrices is open in the integral
//! matrices and the additive Haar measure restricted to it is the group's
//! Haar measure, so rejection sampling on the residue matrix is exact: draw
//! a uniform integral matrix and accept when its reduction mod the maximal
//! ideal is invertible over the residue field.

use rand::Rng;

use super::LocalMatrix;
use crate::error::{Error, Result};
use crate::field::{digits::mod_inverse, FieldSpec, LocalElem};

/// Uniform (additive Haar) sample from the integral `rows x cols` matrices.
pub fn sample_uniform_matrix<R: Rng + ?Sized>(
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> LocalMatrix {
    let mut m = LocalMatrix::zeros(spec, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, LocalElem::sample_uniform(spec, rng));
        }
    }
    m
}

/// Reduction of an integral matrix mod the maximal ideal, row-major.
pub fn residue_matrix(m: &LocalMatrix) -> Result<Vec<u32>> {
    m.entries().iter().map(|e| e.residue()).collect()
}

/// Rank-full test over the residue field by Gaussian elimination.
pub(crate) fn residue_invertible(mat: &mut [u32], n: usize, p: u32) -> bool {
    let p64 = p as u64;
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !mat[r * n + col].is_multiple_of(p)) {
            Some(r) => r,
            None => return false,
        };
        if pivot != col {
            for j in 0..n {
                mat.swap(pivot * n + j, col * n + j);
            }
        }
        let inv = mod_inverse(mat[col * n + col], p) as u64;
        for r in (col + 1)..n {
            let factor = mat[r * n + col] as u64 * inv % p64;
            if factor == 0 {
                continue;
            }
            for j in col..n {
                let sub = factor * mat[col * n + j] as u64 % p64;
                mat[r * n + j] = ((mat[r * n + j] as u64 + p64 - sub) % p64) as u32;
            }
        }
    }
    true
}

/// Determinant of the residue matrix; nonzero exactly when the matrix lies
/// in the integral general linear group (the unit check used throughout).
pub fn residue_det(m: &LocalMatrix) -> Result<u32> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
    }
    let n = m.rows();
    let p = m.spec().p;
    let p64 = p as u64;
    let mut mat = residue_matrix(m)?;
    let mut det: u64 = 1;
    for col in 0..n {
        let pivot = match (col..n).find(|&r| mat[r * n + col] % p != 0) {
            Some(r) => r,
            None => return Ok(0),
        };
        if pivot != col {
            for j in 0..n {
                mat.swap(pivot * n + j, col * n + j);
            }
            det = (p64 - 1) * det % p64;
        }
        det = det * mat[col * n + col] as u64 % p64;
        let inv = mod_inverse(mat[col * n + col], p) as u64;
        for r in (col + 1)..n {
            let factor = mat[r * n + col] as u64 * inv % p64;
            if factor == 0 {
                continue;
            }
            for j in col..n {
                let sub = factor * mat[col * n + j] as u64 % p64;
                mat[r * n + j] = ((mat[r * n + j] as u64 + p64 - sub) % p64) as u32;
            }
        }
    }
    Ok(det as u32)
}

/// Haar sample from the integral general linear group of size `n`, by
/// rejection on the residue matrix. The loop terminates almost surely; the
/// acceptance probability is the proportion of invertible residue matrices.
pub fn sample_gl<R: Rng + ?Sized>(spec: FieldSpec, n: usize, rng: &mut R) -> LocalMatrix {
    loop {
        let candidate = sample_uniform_matrix(spec, n, n, rng);
        let mut res = residue_matrix(&candidate).expect("uniform integral sample");
        if residue_invertible(&mut res, n, spec.p) {
            return candidate;
        }
    }
}

/// Membership in the integral general linear group: integral entries and a
/// unit determinant (nonzero residue determinant).
pub fn in_gl(m: &LocalMatrix) -> bool {
    m.is_square() && m.is_integral() && residue_det(m).map(|d| d != 0).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::stream_rng;

    fn q3() -> FieldSpec {
        FieldSpec::padic(3, 24).unwrap()
    }

    /// Brute-force count of invertible matrices over F_p, the oracle for
    /// acceptance rates.
    fn count_invertible(n: usize, p: u32) -> (u64, u64) {
        let total = (p as u64).pow((n * n) as u32);
        let mut invertible = 0u64;
        for idx in 0..total {
            let mut mat = vec![0u32; n * n];
            let mut rem = idx;
            for e in mat.iter_mut() {
                *e = (rem % p as u64) as u32;
                rem /= p as u64;
            }
            if residue_invertible(&mut mat, n, p) {
                invertible += 1;
            }
        }
        (invertible, total)
    }

    #[test]
    fn acceptance_rate_matches_enumeration() {
        // n = 2, q = 3: 48 invertible of 81.
        let (inv, total) = count_invertible(2, 3);
        assert_eq!((inv, total), (48, 81));
        let p_accept = inv as f64 / total as f64;

        let spec = q3();
        let mut rng = stream_rng(21, 0);
        let trials = 20_000usize;
        let mut accepted = 0usize;
        for _ in 0..trials {
            let m = sample_uniform_matrix(spec, 2, 2, &mut rng);
            let mut res = residue_matrix(&m).unwrap();
            if residue_invertible(&mut res, 2, 3) {
                accepted += 1;
            }
        }
        let mean = trials as f64 * p_accept;
        let sd = (trials as f64 * p_accept * (1.0 - p_accept)).sqrt();
        assert!(
            (accepted as f64 - mean).abs() <= 3.0 * sd,
            "acceptance {accepted} out of {trials}, expected {mean} +- {sd}"
        );
    }

    #[test]
    fn acceptance_rate_n1() {
        let (inv, total) = count_invertible(1, 3);
        assert_eq!((inv, total), (2, 3));
    }

    #[test]
    fn samples_lie_in_the_group() {
        let spec = q3();
        let mut rng = stream_rng(22, 0);
        for _ in 0..50 {
            let g = sample_gl(spec, 3, &mut rng);
            assert!(in_gl(&g));
        }
    }

    #[test]
    fn group_closure_of_samples() {
        let spec = q3();
        let mut rng = stream_rng(23, 0);
        for _ in 0..20 {
            let a = sample_gl(spec, 2, &mut rng);
            let b = sample_gl(spec, 2, &mut rng);
            assert!(in_gl(&a.matmul(&b).unwrap()));
        }
    }

    #[test]
    fn residue_det_agrees_with_integer_det_mod_p() {
        let spec = q3();
        let mut rng = stream_rng(24, 0);
        for _ in 0..40 {
            let m = sample_uniform_matrix(spec, 2, 2, &mut rng);
            let r = residue_matrix(&m).unwrap();
            let expected =
                ((r[0] as i64 * r[3] as i64 - r[1] as i64 * r[2] as i64).rem_euclid(3)) as u32;
            assert_eq!(residue_det(&m).unwrap(), expected);
        }
    }
}
