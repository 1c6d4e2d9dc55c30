//! Characteristic functions of the skew ensembles: exact closed forms,
//! Monte Carlo estimators, orbital-integral error bounds, and exact
//! finite-quotient enumeration oracles.

mod cyclotomic;
mod enumerate;
mod estimate;
mod mc;

pub use cyclotomic::CyclotomicSum;
pub use enumerate::{exact_quotient_integral, Domain, ExactIntegral, Kernel, ENUM_BUDGET};
pub use estimate::{BoundReport, Estimate};
pub use mc::{mc_charfn, mc_orbital, mc_phase_mean, mc_phase_pair_mean, tau_identity_check, McOptions};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::ensemble::Signature;
use crate::error::{Error, Result};
use crate::extint::ExtInt;
use crate::field::{chi, theta_exponent, FieldSpec, LocalElem, PhaseValue};
use crate::linalg::LocalMatrix;

/// The character paired against a test matrix: `chi(tr(X S))`.
///
/// `X` is the (typically sparse, finite-support) test matrix; exact zeros
/// of `X` are skipped so block-diagonal test matrices pair in O(nonzeros).
pub fn pairing(x: &LocalMatrix, s: &LocalMatrix) -> Result<PhaseValue> {
    chi(&x.trace_product(s)?)
}

/// One exact factor of the closed-form characteristic function: either the
/// value 0 (an infinite tail of decaying factors) or `q^{-2 s}` for an
/// explicit integer `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharFactor {
    Zero,
    QPow(u64),
}

impl CharFactor {
    pub fn value(&self, spec: &FieldSpec) -> f64 {
        match self {
            CharFactor::Zero => 0.0,
            CharFactor::QPow(s) => (spec.q() as f64).powi(-2 * *s as i32),
        }
    }

    pub fn exact(&self, spec: &FieldSpec) -> Option<BigRational> {
        match self {
            CharFactor::Zero => None,
            CharFactor::QPow(s) => Some(BigRational::new(
                BigInt::one(),
                BigInt::from(spec.q()).pow(2 * *s as u32),
            )),
        }
    }
}

/// Exact closed-form factor of the characteristic function of the measure
/// with signature `sig`, evaluated at one J-block of scale `pi^{-ell}`.
///
/// The factor is `q^{-2 * sum_n (k_n + ell - ell0) 1{k_n + ell >= ell0}}`.
/// A finite tail `t` contributes nothing when `t + ell <= ell0` and forces
/// the factor to zero when `t + ell > ell0`; a `-inf` tail contributes
/// nothing.
pub fn charfn_factor(sig: &Signature, ell: i64, spec: &FieldSpec) -> CharFactor {
    let l0 = spec.val_of_two();
    if let ExtInt::Int(t) = sig.tail() {
        if t + ell > l0 {
            return CharFactor::Zero;
        }
    }
    let mut sum: u64 = 0;
    for &k in sig.spikes() {
        if k + ell >= l0 {
            sum += (k + ell - l0) as u64;
        }
    }
    CharFactor::QPow(sum)
}

/// Closed-form characteristic function at the block-diagonal test matrix
/// `diag(pi^{-ell_1} J, ..., pi^{-ell_r} J, 0, ...)`: the product of the
/// per-block factors.
pub fn charfn_closed_form(sig: &Signature, ells: &[i64], spec: &FieldSpec) -> f64 {
    ells.iter()
        .map(|&l| charfn_factor(sig, l, spec).value(spec))
        .product()
}

/// `prod_{i,j} Theta(a_i x_j)` with both families given by absolute-value
/// exponents (`|x_j| = q^{x_exps[j]}`, `-inf` for a zero scalar).
pub fn theta_product(x_exps: &[ExtInt], a_exps: &[ExtInt], spec: &FieldSpec) -> Result<f64> {
    if a_exps.len() > x_exps.len() {
        return Err(Error::InvalidArgument(format!(
            "need r <= n, got r = {} blocks against n = {}",
            a_exps.len(),
            x_exps.len()
        )));
    }
    let mut prod = 1.0f64;
    for &a in a_exps {
        for &x in x_exps {
            // |a x| = q^{a + x}; a zero scalar on either side gives -inf.
            let e = match (a, x) {
                (ExtInt::NegInf, _) | (_, ExtInt::NegInf) => ExtInt::NegInf,
                (ExtInt::Int(a), ExtInt::Int(x)) => ExtInt::Int(a + x),
                _ => return Err(Error::InvalidArgument("+inf exponent".into())),
            };
            prod *= theta_exponent(e, spec);
        }
    }
    Ok(prod)
}

fn check_block_counts(n: usize, r: usize) -> Result<()> {
    if r < 1 || r > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    Ok(())
}

/// Exact rational value of the orbital-integral error bound
/// `2 (1 - prod_{w=0}^{2r-1} (1 - q^{w-2n}))`.
pub fn orbital_error_bound_exact(n: usize, r: usize, q: u32) -> Result<BigRational> {
    check_block_counts(n, r)?;
    let mut prod = BigRational::one();
    for w in 0..2 * r as i64 {
        let term = BigRational::new(BigInt::one(), BigInt::from(q).pow((2 * n as i64 - w) as u32));
        prod *= BigRational::one() - term;
    }
    Ok((BigRational::one() - prod) * BigRational::from_integer(BigInt::from(2)))
}

/// The error bound as a double.
pub fn orbital_error_bound(n: usize, r: usize, q: u32) -> Result<f64> {
    Ok(orbital_error_bound_exact(n, r, q)?
        .to_f64()
        .expect("bound is a small rational"))
}

/// Exact rational value of the bound on the gap between averaging a
/// first-r-rows observable over the integral invertible matrices versus
/// over all integral matrices: `2 (1 - prod_{w=0}^{r-1} (1 - q^{w-n}))`
/// for observables of sup-norm one.
pub fn gl_vs_mat_gap_bound_exact(n: usize, r: usize, q: u32) -> Result<BigRational> {
    check_block_counts(n, r)?;
    let mut prod = BigRational::one();
    for w in 0..r as i64 {
        let term = BigRational::new(BigInt::one(), BigInt::from(q).pow((n as i64 - w) as u32));
        prod *= BigRational::one() - term;
    }
    Ok((BigRational::one() - prod) * BigRational::from_integer(BigInt::from(2)))
}

/// The gap bound as a double.
pub fn gl_vs_mat_gap_bound(n: usize, r: usize, q: u32) -> Result<f64> {
    Ok(gl_vs_mat_gap_bound_exact(n, r, q)?
        .to_f64()
        .expect("bound is a small rational"))
}

/// Convenience: the scalar `pi^{-e}` for a finite exponent, zero for `-inf`.
pub(crate) fn scalar_from_exponent(spec: FieldSpec, e: ExtInt) -> LocalElem {
    match e {
        ExtInt::Int(e) => LocalElem::uniformizer_pow(spec, -e),
        _ => LocalElem::zero(spec),
    }
}
