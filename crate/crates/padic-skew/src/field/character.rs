//! The standard additive character and the quadratic character-sum kernel.
//!
//! `chi` is a character of the additive group of the field that is trivial
//! on the ring of integers and nontrivial on `pi^{-1} O`. For p-adic fields
//! it reads off the fractional part; for Laurent series it reads the residue
//! of the `t^{-1}` coefficient. Every downstream formula depends only on
//! those two defining properties, so any admissible character produces the
//! same values.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{FieldKind, FieldSpec, LocalElem, PhaseValue};
use crate::error::{Error, Result};
use crate::extint::ExtInt;

/// Evaluate the additive character at `x`.
///
/// Requires every digit position below the integer line to be inside the
/// tracked window (`valuation + precision_len >= 0`); otherwise the phase is
/// not determined and an `InsufficientPrecision` error is raised.
pub fn chi(x: &LocalElem) -> Result<PhaseValue> {
    let spec = x.spec();
    let v = match x.valuation() {
        ExtInt::PosInf => return Ok(PhaseValue::trivial(spec.p)),
        ExtInt::Int(v) if v >= 0 => return Ok(PhaseValue::trivial(spec.p)),
        ExtInt::Int(v) => v,
        ExtInt::NegInf => unreachable!("valuations are never -inf"),
    };
    let ell = (-v) as usize;
    if x.precision_len() < ell {
        return Err(Error::InsufficientPrecision(format!(
            "character needs {ell} digits below the integer line, only {} tracked",
            x.precision_len()
        )));
    }
    match spec.kind {
        FieldKind::PAdic => {
            // Fractional part sum_{j<0} d_j p^j as a rational with
            // denominator p^ell.
            let mut num: u64 = 0;
            let mut pw: u64 = 1;
            for &d in &x.known_digits()[..ell] {
                num = num
                    .checked_add(d as u64 * pw)
                    .ok_or_else(|| Error::InvalidArgument("phase numerator overflow".into()))?;
                pw = pw
                    .checked_mul(spec.p as u64)
                    .ok_or_else(|| Error::InvalidArgument("phase denominator overflow".into()))?;
            }
            Ok(PhaseValue::new(spec.p, num, ell as u32))
        }
        FieldKind::LaurentSeries => {
            // Coefficient of t^{-1}, i.e. digit at absolute position -1.
            let d = x.known_digits()[ell - 1];
            Ok(PhaseValue::new(spec.p, d as u64, 1))
        }
    }
}

/// The quadratic kernel value as a function of the absolute-value exponent:
/// for `|x| = q^ell` it equals `q^{-2(ell - ell0)}` when `ell >= ell0` and 1
/// otherwise, where `|2| = q^{-ell0}`. The zero element (`ell = -inf`) gives 1.
pub fn theta_exponent(ell: ExtInt, spec: &FieldSpec) -> f64 {
    match ell {
        ExtInt::NegInf => 1.0,
        ExtInt::PosInf => panic!("theta is defined for field elements, not |x| = inf"),
        ExtInt::Int(l) => {
            let l0 = spec.val_of_two();
            if l >= l0 {
                (spec.q() as f64).powi(-2 * (l - l0) as i32)
            } else {
                1.0
            }
        }
    }
}

/// Exact rational value of [`theta_exponent`].
pub fn theta_exact_exponent(ell: ExtInt, spec: &FieldSpec) -> BigRational {
    match ell {
        ExtInt::NegInf => BigRational::from_integer(BigInt::from(1)),
        ExtInt::PosInf => panic!("theta is defined for field elements, not |x| = inf"),
        ExtInt::Int(l) => {
            let l0 = spec.val_of_two();
            if l >= l0 {
                let denom = BigInt::from(spec.q()).pow(2 * (l - l0) as u32);
                BigRational::new(BigInt::from(1), denom)
            } else {
                BigRational::from_integer(BigInt::from(1))
            }
        }
    }
}

/// Theta evaluated at an element; equals `min(1, 1/|2x|^2)`.
pub fn theta(x: &LocalElem) -> f64 {
    theta_exponent(x.abs_exponent(), &x.spec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldSpec {
        FieldSpec::padic(3, 24).unwrap()
    }

    #[test]
    fn trivial_on_integers() {
        let spec = q3();
        assert!(chi(&LocalElem::from_int(spec, 5)).unwrap().is_trivial());
        assert!(chi(&LocalElem::zero(spec)).unwrap().is_trivial());
        assert!(chi(&LocalElem::uniformizer_pow(spec, 3))
            .unwrap()
            .is_trivial());
    }

    #[test]
    fn value_at_inverse_uniformizer() {
        let spec = q3();
        let x = LocalElem::uniformizer_pow(spec, -1);
        let ph = chi(&x).unwrap();
        assert_eq!(ph.fraction(), (1, 3));
        // Additivity: chi(x)^3 = chi(3x) = chi(unit) = 1, and the phase is a
        // nontrivial cube root of unity.
        assert!(ph.pow(3).is_trivial());
        assert!(!ph.is_trivial());
    }

    #[test]
    fn laurent_reads_residue_of_t_inverse() {
        let spec = FieldSpec::laurent(3, 8).unwrap();
        let two_over_t = LocalElem::from_int(spec, 2).shifted(-1);
        assert_eq!(chi(&two_over_t).unwrap().fraction(), (2, 3));
    }

    #[test]
    fn takes_all_pth_roots_on_first_shell() {
        let spec = q3();
        let seen: Vec<(u64, u64)> = (1..3)
            .map(|d| {
                let x = LocalElem::from_int(spec, d).shifted(-1);
                chi(&x).unwrap().fraction()
            })
            .collect();
        assert_eq!(seen, vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn additivity_of_phases() {
        let spec = q3();
        let a = LocalElem::from_int(spec, 5).shifted(-2);
        let b = LocalElem::from_int(spec, 7).shifted(-2);
        let lhs = chi(&a.add(&b).unwrap()).unwrap();
        let rhs = chi(&a).unwrap().mul(&chi(&b).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn insufficient_window_is_an_error() {
        let spec = FieldSpec::padic(3, 4).unwrap();
        // Two known digits at valuation -3: positions -1 is untracked.
        let x = LocalElem::from_parts(spec, ExtInt::Int(-3), vec![1, 2]).unwrap();
        assert!(matches!(
            chi(&x),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn theta_values() {
        let spec = q3();
        assert_eq!(theta(&LocalElem::one(spec)), 1.0);
        assert_eq!(theta(&LocalElem::uniformizer_pow(spec, -1)), 1.0 / 9.0);
        assert_eq!(theta(&LocalElem::zero(spec)), 1.0);
        // For the 2-adics the kernel only starts decaying past ell0 = 1.
        let q2 = FieldSpec::padic(2, 24).unwrap();
        assert_eq!(theta(&LocalElem::uniformizer_pow(q2, -1)), 1.0);
        assert_eq!(theta(&LocalElem::uniformizer_pow(q2, -2)), 0.25);
    }

    #[test]
    fn theta_at_one_third_against_standalone_enumeration() {
        // Independent oracle: sum chi((1/3) * tr(Y J Y^t J)) over the 81
        // matrices of Mat(2, Z/3) by brute force. The trace is 2(bc - ad),
        // so the phase class is 2(bc - ad) mod 3; tally the classes and
        // evaluate the cube-root sum in closed form. None of the crate's
        // enumeration machinery is involved.
        let mut tally = [0i64; 3];
        for code in 0..81u32 {
            let (a, b, c, d) = (code % 3, code / 3 % 3, code / 9 % 3, code / 27 % 3);
            let det2 = (2 * (b * c + 2 * a * d)) % 3; // 2(bc - ad) mod 3
            tally[det2 as usize] += 1;
        }
        assert_eq!(tally, [33, 24, 24]);
        // 33 + 24 w + 24 w^2 = 33 - 24 = 9 since w + w^2 = -1; average 1/9.
        let total = tally[0] - (tally[1] + tally[2]) / 2;
        let average = total as f64 / 81.0;
        let spec = q3();
        assert_eq!(theta(&LocalElem::uniformizer_pow(spec, -1)), average);
    }

    #[test]
    fn theta_matches_min_formula_on_grid() {
        // min(1, 1/|2x|^2) against the exponent form, across fields.
        for spec in [
            FieldSpec::padic(3, 24).unwrap(),
            FieldSpec::padic(2, 24).unwrap(),
            FieldSpec::laurent(5, 24).unwrap(),
        ] {
            let two = LocalElem::from_int(spec, 2);
            for l in -5i64..=5 {
                let x = LocalElem::uniformizer_pow(spec, -l);
                let two_x = two.mul(&x).unwrap();
                let abs2x = match two_x.abs_exponent() {
                    ExtInt::Int(e) => (spec.q() as f64).powi(e as i32),
                    _ => 0.0,
                };
                let expected = (1.0f64).min(1.0 / (abs2x * abs2x));
                assert_eq!(theta_exponent(ExtInt::Int(l), &spec), expected);
            }
        }
    }

    #[test]
    fn theta_depends_only_on_absolute_value() {
        let spec = q3();
        let x = LocalElem::uniformizer_pow(spec, -2);
        let u = LocalElem::from_int(spec, 2); // a unit
        let ux = u.mul(&x).unwrap();
        assert_eq!(theta(&x), theta(&ux));
        assert_eq!(theta(&x), theta(&x.neg()));
    }
}
