//! Seeded Monte Carlo drivers.
//!
//! Trials are split across a fixed number of derived rng streams
//! `(seed, stream index)` and partial sums are reduced in stream order, so
//! results depend only on `(seed, stream count)` and never on thread
//! scheduling.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::estimate::{BoundReport, Estimate};
use super::{orbital_error_bound, scalar_from_exponent, theta_product};
use crate::ensemble::{sample_skew_ergodic, stream_rng, Signature};
use crate::error::{Error, Result};
use crate::extint::ExtInt;
use crate::field::{chi, FieldSpec, PhaseValue};
use crate::linalg::{sample_gl, LocalMatrix};

/// Trial budget and stream layout of an estimator run.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub trials: u64,
    pub streams: u64,
    pub seed: u64,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            streams: 16,
            seed,
        }
    }
}

struct Accumulator {
    sum: Complex64,
    sum_sq: f64,
    count: u64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: Complex64::new(0.0, 0.0),
            sum_sq: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, z: Complex64) {
        self.sum += z;
        self.sum_sq += z.norm_sqr();
        self.count += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }

    fn finish(&self, seed: u64) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        // Averages of unit-modulus phases stay inside the closed unit disc.
        debug_assert!(mean.norm() <= 1.0 + 1e-9);
        let var = ((self.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
        Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
            trials: self.count,
            seed,
        }
    }
}

fn stream_lengths(trials: u64, streams: u64) -> Vec<u64> {
    let streams = streams.max(1).min(trials.max(1));
    let base = trials / streams;
    let extra = trials % streams;
    (0..streams)
        .map(|s| base + if s < extra { 1 } else { 0 })
        .collect()
}

/// Mean of a phase-valued observable over independent trials.
pub fn mc_phase_mean<F>(opts: &McOptions, per_trial: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha12Rng) -> Result<PhaseValue> + Sync,
{
    if opts.trials < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let lengths = stream_lengths(opts.trials, opts.streams);
    let partials: Vec<Result<Accumulator>> = lengths
        .par_iter()
        .enumerate()
        .map(|(s, &len)| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut acc = Accumulator::new();
            for _ in 0..len {
                acc.push(per_trial(&mut rng)?.to_complex());
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total.finish(opts.seed))
}

/// Paired variant: two phase observables per trial, two estimates out.
pub fn mc_phase_pair_mean<F>(opts: &McOptions, per_trial: F) -> Result<(Estimate, Estimate)>
where
    F: Fn(&mut ChaCha12Rng) -> Result<(PhaseValue, PhaseValue)> + Sync,
{
    if opts.trials < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let lengths = stream_lengths(opts.trials, opts.streams);
    let partials: Vec<Result<(Accumulator, Accumulator)>> = lengths
        .par_iter()
        .enumerate()
        .map(|(s, &len)| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut left = Accumulator::new();
            let mut right = Accumulator::new();
            for _ in 0..len {
                let (a, b) = per_trial(&mut rng)?;
                left.push(a.to_complex());
                right.push(b.to_complex());
            }
            Ok((left, right))
        })
        .collect();
    let mut l = Accumulator::new();
    let mut r = Accumulator::new();
    for p in partials {
        let (a, b) = p?;
        l.merge(&a);
        r.merge(&b);
    }
    Ok((l.finish(opts.seed), r.finish(opts.seed)))
}

/// Monte Carlo characteristic function of the ensemble with signature
/// `sig`, evaluated at `diag(pi^{-ell_1} J, ..., pi^{-ell_r} J, 0, ...)`
/// inside a `corner x corner` window.
pub fn mc_charfn(
    sig: &Signature,
    ells: &[i64],
    corner: usize,
    opts: &McOptions,
    spec: &FieldSpec,
) -> Result<Estimate> {
    if corner < 2 * ells.len() {
        return Err(Error::ShapeMismatch(format!(
            "corner {corner} cannot hold {} J-blocks",
            ells.len()
        )));
    }
    if !corner.is_multiple_of(2) {
        return Err(Error::OddDimension(corner));
    }
    let exps: Vec<ExtInt> = ells.iter().map(|&l| ExtInt::Int(l)).collect();
    let x = LocalMatrix::block_diag_from_exponents(*spec, &exps, corner)?;
    let spec = *spec;
    let sig = sig.clone();
    mc_phase_mean(opts, move |rng| {
        let s = sample_skew_ergodic(&sig, corner, spec, rng);
        super::pairing(&x, &s)
    })
}

/// Monte Carlo orbital integral `E[chi(tr(g D g^t A))]` with `g` Haar on
/// the integral invertible matrices of size 2n, packaged against the
/// theta-product main term and the deterministic error bound.
pub fn mc_orbital(
    d_exps: &[ExtInt],
    a_exps: &[ExtInt],
    opts: &McOptions,
    spec: &FieldSpec,
) -> Result<BoundReport> {
    let n = d_exps.len();
    let r = a_exps.len();
    if r > n || r == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    let spec = *spec;
    let d_scalars: Vec<_> = d_exps.iter().map(|&e| scalar_from_exponent(spec, e)).collect();
    let a_scalars: Vec<_> = a_exps.iter().map(|&e| scalar_from_exponent(spec, e)).collect();
    // Pairwise scales a_i x_j; tr(g D g^t A) expands over 2x2 blocks as
    // sum_ij a_i x_j tr(G_ij J G_ij^t J) with tr(Y J Y^t J) = 2(bc - ad).
    let mut scales = Vec::new();
    for (i, a) in a_scalars.iter().enumerate() {
        for (j, x) in d_scalars.iter().enumerate() {
            let s = a.mul(x)?;
            if !s.is_zero() {
                scales.push((i, j, s));
            }
        }
    }
    let estimate = mc_phase_mean(opts, |rng| {
        let g = sample_gl(spec, 2 * n, rng);
        let mut phase = PhaseValue::trivial(spec.p);
        for (i, j, s) in &scales {
            let a = g.get(2 * i, 2 * j);
            let b = g.get(2 * i, 2 * j + 1);
            let c = g.get(2 * i + 1, 2 * j);
            let d = g.get(2 * i + 1, 2 * j + 1);
            let bc_ad = b.mul(c)?.sub(&a.mul(d)?)?;
            let t = bc_ad.add(&bc_ad)?;
            phase = phase.mul(&chi(&s.mul(&t)?)?);
        }
        Ok(phase)
    })?;
    let main_term = theta_product(d_exps, a_exps, &spec)?;
    let bound = orbital_error_bound(n, r, spec.q())?;
    let params = serde_json::json!({
        "n": n,
        "r": r,
        "q": spec.q(),
        "d_exps": d_exps,
        "a_exps": a_exps,
    });
    Ok(BoundReport::evaluate(
        "orbital",
        params,
        main_term,
        bound,
        estimate,
    ))
}

/// Both sides of the pushforward identity relating an invariant measure on
/// rectangular matrices to its image on skew matrices: the left side pairs
/// `diag(x, y)` against the matrix law, the right side pairs the halved
/// scale `2^{-1} x J` against the skew part. The two estimates agree within
/// sampling error whenever `|y| <= |x|`.
pub fn tau_identity_check(
    k_scale: i64,
    x_exp: i64,
    y_exp: i64,
    opts: &McOptions,
    spec: &FieldSpec,
) -> Result<(Estimate, Estimate)> {
    if y_exp > x_exp {
        return Err(Error::InvalidArgument(format!(
            "normalization requires |y| <= |x|: y_exp {y_exp} > x_exp {x_exp}"
        )));
    }
    let spec = *spec;
    let x = crate::field::LocalElem::uniformizer_pow(spec, -x_exp);
    let y = crate::field::LocalElem::uniformizer_pow(spec, -y_exp);
    let half = crate::field::LocalElem::from_int(spec, 2).inv()?;
    let half_x = half.mul(&x)?;
    let j = LocalMatrix::j_block(spec);
    mc_phase_pair_mean(opts, move |rng| {
        let m = crate::ensemble::sample_mat_invariant(k_scale, 2, 2, spec, rng);
        let left = chi(&m.get(0, 0).mul(&x)?.add(&m.get(1, 1).mul(&y)?)?)?;
        let skew = m.skew_part()?;
        let right = chi(&half_x.mul(&skew.trace_product(&j)?)?)?;
        Ok((left, right))
    })
}
