use std::fmt;

use num_complex::Complex64;

/// An exact root of unity `exp(2*pi*i * num / p^exp)`.
///
/// Phases are kept as reduced rationals with a p-power denominator, so
/// character sums can be accumulated without rounding; conversion to a
/// complex double happens only when averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseValue {
    p: u32,
    num: u64,
    exp: u32,
}

fn pow_u64(p: u32, e: u32) -> u64 {
    (p as u64)
        .checked_pow(e)
        .expect("phase denominator overflows u64")
}

impl PhaseValue {
    /// The trivial phase 1.
    pub fn trivial(p: u32) -> Self {
        PhaseValue { p, num: 0, exp: 0 }
    }

    /// Build and reduce: `num` is taken mod `p^exp`, then common powers of p
    /// are cancelled.
    pub fn new(p: u32, num: u64, exp: u32) -> Self {
        let mut num = num % pow_u64(p, exp);
        let mut exp = exp;
        if num == 0 {
            return Self::trivial(p);
        }
        while exp > 0 && num.is_multiple_of(p as u64) {
            num /= p as u64;
            exp -= 1;
        }
        PhaseValue { p, num, exp }
    }

    pub fn is_trivial(&self) -> bool {
        self.exp == 0
    }

    /// Reduced fraction (numerator, denominator) of the phase angle.
    pub fn fraction(&self) -> (u64, u64) {
        (self.num, pow_u64(self.p, self.exp))
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    /// Product of phases: the rational angles add mod 1.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "phases over different primes");
        let exp = self.exp.max(other.exp);
        let p = self.p as u128;
        let lift = |ph: &PhaseValue| ph.num as u128 * p.pow(exp - ph.exp);
        let denom = p.pow(exp);
        let num = (lift(self) + lift(other)) % denom;
        Self::new(
            self.p,
            u64::try_from(num).expect("phase numerator overflows u64"),
            exp,
        )
    }

    /// Complex conjugate (the inverse root of unity).
    pub fn conj(&self) -> Self {
        if self.is_trivial() {
            return *self;
        }
        let denom = pow_u64(self.p, self.exp);
        Self::new(self.p, denom - self.num, self.exp)
    }

    /// `self` multiplied into itself `k` times.
    pub fn pow(&self, k: u64) -> Self {
        if self.is_trivial() {
            return *self;
        }
        let denom = pow_u64(self.p, self.exp) as u128;
        let num = (self.num as u128 * k as u128) % denom;
        Self::new(self.p, u64::try_from(num).unwrap(), self.exp)
    }

    /// Exact-to-rounding conversion to the unit circle.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_trivial() {
            return Complex64::new(1.0, 0.0);
        }
        let (n, d) = self.fraction();
        Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 / d as f64)
    }
}

impl fmt::Display for PhaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.fraction();
        write!(f, "e({n}/{d})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction() {
        let ph = PhaseValue::new(3, 3, 2); // 3/9 = 1/3
        assert_eq!(ph.fraction(), (1, 3));
        let ph = PhaseValue::new(3, 9, 2); // 9/9 = 0
        assert!(ph.is_trivial());
    }

    #[test]
    fn angles_add_mod_one() {
        let a = PhaseValue::new(3, 2, 1); // 2/3
        let b = PhaseValue::new(3, 2, 1); // 2/3
        assert_eq!(a.mul(&b).fraction(), (1, 3)); // 4/3 = 1/3
        let c = PhaseValue::new(3, 1, 2); // 1/9
        assert_eq!(a.mul(&c).fraction(), (7, 9));
    }

    #[test]
    fn conjugate_inverts() {
        let a = PhaseValue::new(5, 3, 2);
        assert!(a.mul(&a.conj()).is_trivial());
    }

    #[test]
    fn pth_power_of_pth_root_is_one() {
        let a = PhaseValue::new(3, 1, 1);
        assert!(a.pow(3).is_trivial());
        assert_eq!(a.pow(2).fraction(), (2, 3));
    }

    #[test]
    fn complex_values() {
        let a = PhaseValue::new(3, 1, 1);
        let z = a.to_complex();
        assert!((z.re - (-0.5)).abs() < 1e-12);
        assert!((z.im - (0.75f64).sqrt()).abs() < 1e-12);
    }
}
