use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::field::PhaseValue;

/// An exact integer combination of p^level-th roots of unity, stored as
/// occurrence counts per exponent.
///
/// Reduction to the power basis of the cyclotomic integers uses the
/// prime-power relation `1 + z^{p^{L-1}} + z^{2 p^{L-1}} + ... = 0`, so
/// rationality of a character sum can be decided exactly instead of by
/// floating comparisons.
#[derive(Debug, Clone)]
pub struct CyclotomicSum {
    p: u32,
    level: u32,
    counts: Vec<i64>,
}

impl CyclotomicSum {
    pub fn new(p: u32, level: u32) -> Self {
        let size = (p as u64).checked_pow(level).expect("cyclotomic order overflow") as usize;
        CyclotomicSum {
            p,
            level,
            counts: vec![0; size],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Raw occurrence counts per root-of-unity exponent.
    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    /// Add one phase; its denominator must divide p^level.
    pub fn add_phase(&mut self, phase: &PhaseValue) {
        assert_eq!(phase.prime(), self.p, "phase over a different prime");
        let (num, denom) = phase.fraction();
        let order = self.counts.len() as u64;
        assert!(
            order.is_multiple_of(denom),
            "phase denominator {denom} does not divide p^level = {order}"
        );
        let idx = num * (order / denom);
        self.counts[idx as usize] += 1;
    }

    /// Coordinates on the power basis `z^0 .. z^{phi(p^level)-1}`.
    pub fn reduced(&self) -> Vec<i64> {
        if self.level == 0 {
            return self.counts.clone();
        }
        let p = self.p as usize;
        let sub = self.counts.len() / p; // p^{level-1}
        let phi = sub * (p - 1);
        let mut red = self.counts.clone();
        for a in (phi..red.len()).rev() {
            let c = red[a];
            if c == 0 {
                continue;
            }
            red[a] = 0;
            let t = a - phi;
            for j in 0..(p - 1) {
                red[t + j * sub] -= c;
            }
        }
        red.truncate(phi);
        red
    }

    /// The exact rational value of the sum divided by `denom`, when the sum
    /// is rational (all basis coordinates beyond the constant vanish).
    pub fn as_rational_over(&self, denom: u64) -> Option<BigRational> {
        let red = self.reduced();
        if red[1..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(BigRational::new(BigInt::from(red[0]), BigInt::from(denom)))
    }

    /// Floating value of the sum divided by `denom`.
    pub fn to_complex_over(&self, denom: u64) -> Complex64 {
        let order = self.counts.len() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let angle = std::f64::consts::TAU * a as f64 / order;
            acc += Complex64::from_polar(c as f64, angle);
        }
        acc / denom as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_orbit_sums_to_zero() {
        // 1 + z + z^2 = 0 for the cube roots of unity.
        let mut s = CyclotomicSum::new(3, 1);
        for a in 0..3 {
            s.add_phase(&PhaseValue::new(3, a, 1));
        }
        assert_eq!(s.as_rational_over(3).unwrap(), BigRational::from_integer(0.into()));
    }

    #[test]
    fn nontrivial_unit_sum() {
        // z + z^2 = -1 over the cube roots.
        let mut s = CyclotomicSum::new(3, 1);
        s.add_phase(&PhaseValue::new(3, 1, 1));
        s.add_phase(&PhaseValue::new(3, 2, 1));
        assert_eq!(
            s.as_rational_over(2).unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(2))
        );
    }

    #[test]
    fn irrational_sums_are_detected() {
        let mut s = CyclotomicSum::new(3, 1);
        s.add_phase(&PhaseValue::new(3, 1, 1));
        assert!(s.as_rational_over(1).is_none());
        // The floating value is still available.
        let z = s.to_complex_over(1);
        assert!((z.re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn level_two_relation() {
        // Sum over all ninth roots vanishes.
        let mut s = CyclotomicSum::new(3, 2);
        for a in 0..9 {
            s.add_phase(&PhaseValue::new(3, a, 2));
        }
        assert_eq!(s.as_rational_over(9).unwrap(), BigRational::from_integer(0.into()));
        // Mixed levels with nonuniform counts: 3 * (sum of cube roots) + 2
        // at exponent 0 reduces to the rational 2.
        let mut s = CyclotomicSum::new(3, 2);
        for a in 0..3u64 {
            for _ in 0..3 {
                s.add_phase(&PhaseValue::new(3, a, 1));
            }
        }
        s.add_phase(&PhaseValue::trivial(3));
        s.add_phase(&PhaseValue::trivial(3));
        assert_eq!(
            s.as_rational_over(1).unwrap(),
            BigRational::from_integer(2.into())
        );
    }

    #[test]
    fn level_zero_is_plain_counting() {
        let mut s = CyclotomicSum::new(3, 0);
        s.add_phase(&PhaseValue::trivial(3));
        s.add_phase(&PhaseValue::trivial(3));
        assert_eq!(
            s.as_rational_over(2).unwrap(),
            BigRational::from_integer(1.into())
        );
    }
}
