//! Little-endian digit strings over the prime residue field.
//!
//! Two arithmetic flavors share these helpers: `carry = true` is base-p
//! positional arithmetic (p-adic numbers), `carry = false` is coefficientwise
//! mod-p arithmetic (formal Laurent series).

/// Multiplicative inverse mod a prime `p`, by the extended Euclid algorithm.
pub(crate) fn mod_inverse(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    let (mut r0, mut r1) = (p as i64, (a % p) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{a} is not invertible mod {p}");
    t0.rem_euclid(p as i64) as u32
}

/// Normalize an accumulator of digit sums in place. Carries that overflow the
/// final position fall outside the tracked window and are dropped.
pub(crate) fn normalize_acc(acc: &mut [u64], p: u32, carry: bool) {
    let p = p as u64;
    if carry {
        let mut c = 0u64;
        for d in acc.iter_mut() {
            let v = *d + c;
            *d = v % p;
            c = v / p;
        }
    } else {
        for d in acc.iter_mut() {
            *d %= p;
        }
    }
}

/// Digit string of `-x` on the same window.
pub(crate) fn neg_digits(a: &[u32], p: u32, carry: bool) -> Vec<u32> {
    if !carry {
        return a.iter().map(|&d| (p - d) % p).collect();
    }
    let mut out = vec![0u32; a.len()];
    let mut seen_nonzero = false;
    for (i, &d) in a.iter().enumerate() {
        out[i] = if !seen_nonzero {
            if d == 0 {
                0
            } else {
                seen_nonzero = true;
                p - d
            }
        } else {
            p - 1 - d
        };
    }
    out
}

/// Truncated product of two digit strings, `out_len` digits kept.
pub(crate) fn mul_digits(a: &[u32], b: &[u32], p: u32, carry: bool, out_len: usize) -> Vec<u32> {
    let mut acc = vec![0u64; out_len];
    for (i, &ai) in a.iter().enumerate().take(out_len) {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(out_len - i) {
            acc[i + j] += ai as u64 * bj as u64;
        }
    }
    normalize_acc(&mut acc, p, carry);
    acc.iter().map(|&d| d as u32).collect()
}

/// Inverse of a unit digit string (`u[0] != 0`) by digit-wise long division.
/// Relative precision is preserved: `out_len` digits of `1/u` are produced.
pub(crate) fn inv_digits(u: &[u32], p: u32, carry: bool, out_len: usize) -> Vec<u32> {
    debug_assert!(!u[0].is_multiple_of(p));
    let u0_inv = mod_inverse(u[0], p) as i64;
    let p64 = p as i64;
    let mut out = vec![0u32; out_len];
    // Remainder of 1 - u * (partial output); position i is fully reduced at
    // step i, residuals are pushed rightwards.
    let mut rem = vec![0i64; out_len + 1];
    rem[0] = 1;
    for i in 0..out_len {
        if carry {
            let q = rem[i].div_euclid(p64);
            rem[i] = rem[i].rem_euclid(p64);
            rem[i + 1] += q;
        } else {
            rem[i] = rem[i].rem_euclid(p64);
        }
        let c = (rem[i] * u0_inv).rem_euclid(p64);
        out[i] = c as u32;
        if c != 0 {
            for (j, &uj) in u.iter().enumerate() {
                if i + j > out_len {
                    break;
                }
                rem[i + j] -= c * uj as i64;
            }
        }
        if carry {
            // rem[i] is now an exact multiple of p; move it up.
            debug_assert_eq!(rem[i].rem_euclid(p64), 0);
            rem[i + 1] += rem[i] / p64;
        }
        rem[i] = 0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod_inverse_small_primes() {
        for p in [2u32, 3, 5, 7, 11] {
            for a in 1..p {
                assert_eq!(a * mod_inverse(a, p) % p, 1);
            }
        }
    }

    #[test]
    fn inverse_of_two_in_z3() {
        // 1/2 = 2 + 1*3 + 1*9 + ... in the 3-adics.
        assert_eq!(inv_digits(&[2], 3, true, 4), vec![2, 1, 1, 1]);
    }

    #[test]
    fn inverse_round_trips() {
        let u = [2u32, 0, 1, 2, 1];
        let inv = inv_digits(&u, 3, true, 5);
        let prod = mul_digits(&u, &inv, 3, true, 5);
        assert_eq!(prod, vec![1, 0, 0, 0, 0]);

        let inv = inv_digits(&u, 3, false, 5);
        let prod = mul_digits(&u, &inv, 3, false, 5);
        assert_eq!(prod, vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn negation_complements() {
        // -(1) = (p-1, p-1, ...) with carries, (p-1, 0, ...) without.
        assert_eq!(neg_digits(&[1, 0, 0], 3, true), vec![2, 2, 2]);
        assert_eq!(neg_digits(&[1, 0, 0], 3, false), vec![2, 0, 0]);
        let mut acc: Vec<u64> = [1u32, 0, 0]
            .iter()
            .zip(neg_digits(&[1, 0, 0], 3, true))
            .map(|(&a, b)| a as u64 + b as u64)
            .collect();
        normalize_acc(&mut acc, 3, true);
        assert_eq!(acc, vec![0, 0, 0]);
    }
}
