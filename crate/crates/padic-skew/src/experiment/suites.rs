//! The verification suites behind the CLI and the acceptance gate.
//!
//! Case seeds are derived from the suite seed and the case index, trials
//! inside a case split over fixed rng streams, and integer counts reduce by
//! summation, so a rerun with the same configuration is bit-identical no
//! matter how the work is scheduled.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::report::{CaseReport, SuiteReport};
use super::stats::{symmetry_chi_square, two_sample_chi_square, ChiSquareOutcome};
use super::{ExperimentConfig, SuiteKind};
use crate::charfn::{
    charfn_closed_form, charfn_factor, exact_quotient_integral, gl_vs_mat_gap_bound, mc_charfn,
    mc_orbital, mc_phase_mean, pairing, tau_identity_check, Domain, Kernel, McOptions,
};
use crate::ensemble::{
    exchange_coords, sample_mat_invariant, sample_skew_ergodic, stream_rng, Signature,
};
use crate::error::Result;
use crate::extint::ExtInt;
use crate::field::{FieldSpec, LocalElem};
use crate::linalg::{in_gl, sample_gl, skew_canonical_form, LocalMatrix};

/// Mix a suite seed with a case index (splitmix64 finalizer).
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Run the configured suite and assemble its report.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let cases = match cfg.suite {
        SuiteKind::Invariance => invariance_cases(cfg)?,
        SuiteKind::Exchangeability => exchangeability_cases(cfg)?,
        SuiteKind::Canonical => canonical_cases(cfg)?,
        SuiteKind::Charfn => charfn_cases(cfg)?,
        SuiteKind::Orbital => orbital_cases(cfg)?,
        SuiteKind::GlMat => glmat_cases(cfg)?,
        SuiteKind::Correspondence => correspondence_cases(cfg)?,
    };
    Ok(SuiteReport::assemble(
        cfg.suite,
        cfg.field,
        cfg.seed,
        cases,
        start.elapsed().as_millis(),
    ))
}

/// All canonical signatures with up to `max_spikes` spikes in the given
/// range over the given tails.
pub fn enumerate_signatures(
    spike_lo: i64,
    spike_hi: i64,
    max_spikes: usize,
    tails: &[ExtInt],
) -> Vec<Signature> {
    fn extend(
        acc: &mut Vec<Vec<i64>>,
        prefix: &mut Vec<i64>,
        lo: i64,
        hi: i64,
        left: usize,
    ) {
        acc.push(prefix.clone());
        if left == 0 {
            return;
        }
        let cap = prefix.last().copied().unwrap_or(hi);
        for k in (lo..=cap).rev() {
            prefix.push(k);
            extend(acc, prefix, lo, hi, left - 1);
            prefix.pop();
        }
    }
    let mut spike_lists = Vec::new();
    extend(&mut spike_lists, &mut Vec::new(), spike_lo, spike_hi, max_spikes);
    let mut out = Vec::new();
    for &tail in tails {
        for spikes in &spike_lists {
            // Canonical representatives only: spikes strictly above a
            // finite tail.
            if let ExtInt::Int(t) = tail {
                if spikes.iter().any(|&k| k <= t) {
                    continue;
                }
            }
            out.push(Signature::new(spikes.clone(), tail).expect("grid signature"));
        }
    }
    out
}

/// Sample counts over a fixed category space, split across streams; integer
/// sums make the reduction order irrelevant.
fn parallel_counts<F>(
    samples: u64,
    streams: u64,
    seed: u64,
    categories: usize,
    per_sample: F,
) -> Vec<u64>
where
    F: Fn(&mut ChaCha12Rng) -> usize + Sync,
{
    let streams = streams.max(1).min(samples.max(1));
    let base = samples / streams;
    let extra = samples % streams;
    let partials: Vec<Vec<u64>> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            let mut counts = vec![0u64; categories];
            let len = base + if s < extra { 1 } else { 0 };
            for _ in 0..len {
                counts[per_sample(&mut rng)] += 1;
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; categories];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

// ---------------------------------------------------------------------
// Invariance
// ---------------------------------------------------------------------

const EXP_BINS: usize = 10;

/// Bin a canonical exponent relative to the signature's largest scale:
/// 0 for a zero block, 1 for above-range (only reachable by a defective
/// sampler), 2..=8 for offsets 0..=6 below the top, 9 for anything deeper.
fn bin_exponent(k: ExtInt, kmax: i64) -> usize {
    match k {
        ExtInt::NegInf => 0,
        ExtInt::PosInf => unreachable!("exponents are never +inf"),
        ExtInt::Int(k) => {
            if k > kmax {
                1
            } else {
                let offset = kmax - k;
                if offset <= 6 {
                    2 + offset as usize
                } else {
                    9
                }
            }
        }
    }
}

fn exponent_category(exps: &[ExtInt], kmax: i64) -> usize {
    exps.iter()
        .fold(0usize, |acc, &k| acc * EXP_BINS + bin_exponent(k, kmax))
}

fn default_invariance_signatures() -> Vec<Signature> {
    vec![
        Signature::dirac_zero(),
        Signature::new(vec![1], ExtInt::NegInf).unwrap(),
        Signature::new(vec![], ExtInt::Int(0)).unwrap(),
        Signature::new(vec![2, 1], ExtInt::NegInf).unwrap(),
    ]
}

fn invariance_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let sigs = if cfg.signatures.is_empty() {
        default_invariance_signatures()
    } else {
        cfg.signatures.clone()
    };
    let control_sig = Signature::new(vec![1], ExtInt::NegInf).unwrap();
    let n_cases = sigs.len() + usize::from(cfg.include_controls);
    let alpha = cfg.significance / n_cases as f64;
    let spec = cfg.field;
    let corner = cfg.corner;
    let blocks = corner / 2;
    let categories = EXP_BINS.pow(blocks as u32);

    let chi = |sig: &Signature, seed: u64, forced: bool| -> ChiSquareOutcome {
        // Anchor the bins high enough that the control's forced scale (an
        // exponent of 5) stays inside the binned range on both sides.
        let kmax = sig.max_exponent().as_int().unwrap_or(0).max(6);
        // Group A: the sampler under test, unconjugated. The negative
        // control corrupts this side only.
        let counts_a = parallel_counts(cfg.samples, cfg.streams, derive_seed(seed, 1), categories, |rng| {
            let mut a = sample_skew_ergodic(sig, corner, spec, rng);
            if forced {
                let spike = LocalElem::uniformizer_pow(spec, -5);
                a.set(0, 1, spike.clone());
                a.set(1, 0, spike.neg());
            }
            let exps = skew_canonical_form(&a).expect("sampled skew matrix").exponents;
            exponent_category(&exps, kmax)
        });
        // Group B: an independent run of the reference sampler, pushed
        // through a Haar congruence.
        let counts_b = parallel_counts(cfg.samples, cfg.streams, derive_seed(seed, 2), categories, |rng| {
            let a = sample_skew_ergodic(sig, corner, spec, rng);
            let h = sample_gl(spec, corner, rng);
            let b = LocalMatrix::congruence(&h, &a).expect("conforming");
            let exps = skew_canonical_form(&b).expect("sampled skew matrix").exponents;
            exponent_category(&exps, kmax)
        });
        two_sample_chi_square(&counts_a, &counts_b, 5.0)
    };

    let mut indexed: Vec<(usize, Signature, bool)> = sigs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (i, s, false))
        .collect();
    if cfg.include_controls {
        indexed.push((sigs.len(), control_sig, true));
    }

    let cases: Vec<CaseReport> = indexed
        .par_iter()
        .map(|(i, sig, forced)| {
            let out = chi(sig, derive_seed(cfg.seed, *i as u64), *forced);
            let name = if *forced {
                format!("negative-control {sig}")
            } else {
                format!("invariance {sig}")
            };
            let mut c = CaseReport::new(
                *i,
                name,
                serde_json::json!({
                    "signature": sig,
                    "samples": cfg.samples,
                    "corner": corner,
                    "control": forced,
                }),
            );
            c.statistic = Some(out.statistic);
            c.p_value = Some(out.p_value);
            c.threshold = Some(alpha);
            // A control passes when the defect is detected.
            c.pass = if *forced {
                out.p_value < alpha
            } else {
                out.p_value >= alpha
            };
            c.detail = Some(format!("df = {}", out.df));
            c
        })
        .collect();
    Ok(cases)
}

// ---------------------------------------------------------------------
// Exchangeability
// ---------------------------------------------------------------------

/// Bin an entry valuation relative to the smallest scale of the signature.
fn bin_valuation(v: ExtInt, vmin: i64) -> usize {
    match v {
        ExtInt::PosInf => 0,
        ExtInt::NegInf => unreachable!(),
        ExtInt::Int(v) => {
            if v < vmin {
                1
            } else {
                let offset = v - vmin;
                if offset <= 6 {
                    2 + offset as usize
                } else {
                    9
                }
            }
        }
    }
}

fn default_exchangeability_signatures() -> Vec<Signature> {
    vec![
        Signature::new(vec![], ExtInt::Int(0)).unwrap(),
        Signature::new(vec![1], ExtInt::NegInf).unwrap(),
        Signature::new(vec![2, 1], ExtInt::NegInf).unwrap(),
    ]
}

fn exchangeability_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let sigs = if cfg.signatures.is_empty() {
        default_exchangeability_signatures()
    } else {
        cfg.signatures.clone()
    };
    let control_sig = Signature::new(vec![2, 1], ExtInt::NegInf).unwrap();
    let n_cases = sigs.len() + usize::from(cfg.include_controls);
    let alpha = cfg.significance / n_cases as f64;
    let spec = cfg.field;
    let corner = cfg.corner.max(4);

    let run = |sig: &Signature, seed: u64, skewed_scale: bool| -> ChiSquareOutcome {
        let vmin = -sig.max_exponent().as_int().unwrap_or(0) - 3;
        let flat = parallel_counts(
            cfg.samples,
            cfg.streams,
            seed,
            EXP_BINS * EXP_BINS,
            |rng| {
                let a = sample_skew_ergodic(sig, corner, spec, rng);
                let coords = exchange_coords(&a).expect("even corner");
                let mut v1 = coords[0].clone();
                if skewed_scale {
                    // Asymmetric corruption of the first coordinate.
                    v1 = v1.shifted(-3);
                }
                let b1 = bin_valuation(v1.valuation(), vmin);
                let b2 = bin_valuation(coords[1].valuation(), vmin);
                b1 * EXP_BINS + b2
            },
        );
        let joint: Vec<Vec<u64>> = (0..EXP_BINS)
            .map(|i| flat[i * EXP_BINS..(i + 1) * EXP_BINS].to_vec())
            .collect();
        symmetry_chi_square(&joint)
    };

    let mut indexed: Vec<(usize, Signature, bool)> = sigs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (i, s, false))
        .collect();
    if cfg.include_controls {
        indexed.push((sigs.len(), control_sig, true));
    }

    let cases: Vec<CaseReport> = indexed
        .par_iter()
        .map(|(i, sig, control)| {
            let out = run(sig, derive_seed(cfg.seed, *i as u64), *control);
            let name = if *control {
                format!("negative-control {sig}")
            } else {
                format!("exchangeability {sig}")
            };
            let mut c = CaseReport::new(
                *i,
                name,
                serde_json::json!({
                    "signature": sig,
                    "samples": cfg.samples,
                    "corner": corner,
                    "control": control,
                }),
            );
            c.statistic = Some(out.statistic);
            c.p_value = Some(out.p_value);
            c.threshold = Some(alpha);
            c.pass = if *control {
                out.p_value < alpha
            } else {
                out.p_value >= alpha
            };
            c.detail = Some(format!("df = {}", out.df));
            c
        })
        .collect();
    Ok(cases)
}

// ---------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------

fn canonical_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let ns: Vec<usize> = if cfg.block_counts.is_empty() {
        vec![1, 2, 3, 4]
    } else {
        cfg.block_counts.clone()
    };
    let spec = cfg.field;
    let per_case = cfg.matrices_per_case;
    let congruence_checks = cfg.congruence_checks;

    let cases: Vec<CaseReport> = ns
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let case_seed = derive_seed(cfg.seed, i as u64);
            let failures: u64 = (0..per_case)
                .into_par_iter()
                .map(|m| {
                    let mut rng = stream_rng(case_seed, m);
                    let a = random_skew(spec, 2 * n, -6, 6, &mut rng);
                    let cf = match skew_canonical_form(&a) {
                        Ok(cf) => cf,
                        Err(_) => return 1,
                    };
                    let ok_roundtrip = cf
                        .reconstruct()
                        .map(|r| r.agrees_with(&a))
                        .unwrap_or(false);
                    let ok_unit = in_gl(&cf.transform);
                    let ok_sorted = cf.exponents.windows(2).all(|w| w[0] >= w[1]);
                    let mut ok_invariant = true;
                    for _ in 0..congruence_checks {
                        let h = sample_gl(spec, 2 * n, &mut rng);
                        let b = LocalMatrix::congruence(&h, &a).expect("conforming");
                        match skew_canonical_form(&b) {
                            Ok(cf2) => {
                                if cf2.exponents != cf.exponents {
                                    ok_invariant = false;
                                }
                            }
                            Err(_) => ok_invariant = false,
                        }
                    }
                    u64::from(!(ok_roundtrip && ok_unit && ok_sorted && ok_invariant))
                })
                .sum();
            let mut c = CaseReport::new(
                i,
                format!("canonical n={n}"),
                serde_json::json!({
                    "n": n,
                    "matrices": per_case,
                    "congruence_checks": congruence_checks,
                    "valuation_range": [-6, 6],
                }),
            );
            c.statistic = Some(failures as f64);
            c.pass = failures == 0;
            c.detail = Some(format!("{failures} failures of {per_case}"));
            c
        })
        .collect();
    Ok(cases)
}

/// Random skew matrix with entry valuations uniform in `[lo, hi]`.
pub(crate) fn random_skew<R: Rng + ?Sized>(
    spec: FieldSpec,
    size: usize,
    lo: i64,
    hi: i64,
    rng: &mut R,
) -> LocalMatrix {
    let mut m = LocalMatrix::zeros(spec, size, size);
    for i in 0..size {
        for j in (i + 1)..size {
            let x = LocalElem::sample_with_valuation_in(spec, lo, hi, rng);
            m.set(j, i, x.neg());
            m.set(i, j, x);
        }
    }
    m
}

// ---------------------------------------------------------------------
// Characteristic functions
// ---------------------------------------------------------------------

fn default_charfn_signatures() -> Vec<Signature> {
    let s = |spikes: Vec<i64>, tail: ExtInt| Signature::new(spikes, tail).unwrap();
    vec![
        Signature::dirac_zero(),
        s(vec![-2], ExtInt::NegInf),
        s(vec![0], ExtInt::NegInf),
        s(vec![1], ExtInt::NegInf),
        s(vec![2], ExtInt::NegInf),
        s(vec![1, 0], ExtInt::NegInf),
        s(vec![2, 1], ExtInt::NegInf),
        s(vec![2, -1], ExtInt::NegInf),
        s(vec![], ExtInt::Int(-2)),
        s(vec![0], ExtInt::Int(-2)),
        s(vec![2, 0], ExtInt::Int(-2)),
        s(vec![], ExtInt::Int(0)),
        s(vec![2, 1], ExtInt::Int(0)),
    ]
}

fn charfn_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let sigs = if cfg.signatures.is_empty() {
        default_charfn_signatures()
    } else {
        cfg.signatures.clone()
    };
    let ells: Vec<i64> = if cfg.ells.is_empty() {
        (-2..=2).collect()
    } else {
        cfg.ells.clone()
    };
    let spec = cfg.field;
    let corner = cfg.corner;

    struct Job {
        sig: Signature,
        ells: Vec<i64>,
        name: String,
    }
    let mut jobs: Vec<Job> = Vec::new();
    for sig in &sigs {
        for &l in &ells {
            jobs.push(Job {
                sig: sig.clone(),
                ells: vec![l],
                name: format!("charfn {sig} ell={l}"),
            });
        }
    }
    // Two-block cases exercising the product structure end to end.
    jobs.push(Job {
        sig: Signature::new(vec![1, 0], ExtInt::NegInf).unwrap(),
        ells: vec![0, 0],
        name: "charfn two-block (1,0) ells=(0,0)".into(),
    });
    jobs.push(Job {
        sig: Signature::new(vec![1], ExtInt::NegInf).unwrap(),
        ells: vec![1, 0],
        name: "charfn two-block (1) ells=(1,0)".into(),
    });

    let mut cases: Vec<CaseReport> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| {
            let opts = McOptions {
                trials: cfg.trials,
                streams: cfg.streams,
                seed: derive_seed(cfg.seed, i as u64),
            };
            let corner = corner.max(2 * job.ells.len());
            let corner = corner + corner % 2;
            match mc_charfn(&job.sig, &job.ells, corner, &opts, &spec) {
                Ok(est) => {
                    let main = charfn_closed_form(&job.sig, &job.ells, &spec);
                    let rep = crate::charfn::BoundReport::evaluate(
                        "charfn",
                        serde_json::json!({
                            "signature": job.sig,
                            "ells": job.ells,
                            "corner": corner,
                            "q": spec.q(),
                        }),
                        main,
                        0.0,
                        est,
                    );
                    let mut c = CaseReport::from_bound_report(i, job.name.clone(), rep);
                    // The closed form is real; flag runaway imaginary parts.
                    if est.value.im.abs() > 3.0 * est.std_error + 1e-12 {
                        c.pass = false;
                        c.detail = Some("imaginary part escapes 3 sigma".into());
                    }
                    c
                }
                Err(e) => {
                    let mut c = CaseReport::new(i, job.name.clone(), serde_json::json!({}));
                    c.detail = Some(format!("error: {e}"));
                    c
                }
            }
        })
        .collect();

    // Exact multiplicativity of the closed form over blocks.
    let idx = cases.len();
    let mut mult_ok = true;
    for sig in &sigs {
        for &l1 in &ells {
            for &l2 in &ells {
                let lhs = charfn_closed_form(sig, &[l1, l2], &spec);
                let rhs =
                    charfn_closed_form(sig, &[l1], &spec) * charfn_closed_form(sig, &[l2], &spec);
                if lhs != rhs {
                    mult_ok = false;
                }
            }
        }
    }
    let mut c = CaseReport::new(
        idx,
        "closed-form multiplicativity",
        serde_json::json!({"signatures": sigs.len(), "ells": ells}),
    );
    c.pass = mult_ok;
    cases.push(c);

    // Exact separation of distinct signatures by some test exponent.
    let idx = cases.len();
    let grid = enumerate_signatures(
        -3,
        3,
        3,
        &[
            ExtInt::NegInf,
            ExtInt::Int(-3),
            ExtInt::Int(-2),
            ExtInt::Int(-1),
            ExtInt::Int(0),
            ExtInt::Int(1),
            ExtInt::Int(2),
            ExtInt::Int(3),
        ],
    );
    let unseparated = count_unseparated_pairs(&grid, -4..=4, &spec);
    let mut c = CaseReport::new(
        idx,
        "signature separation",
        serde_json::json!({"signatures": grid.len(), "ell_range": [-4, 4]}),
    );
    c.statistic = Some(unseparated as f64);
    c.pass = unseparated == 0;
    c.detail = Some(format!("{} signatures, {unseparated} unseparated pairs", grid.len()));
    cases.push(c);

    Ok(cases)
}

/// Number of distinct signature pairs not separated by any closed-form
/// factor on the exponent range (exact integer comparison, no floats).
pub fn count_unseparated_pairs(
    grid: &[Signature],
    ells: std::ops::RangeInclusive<i64>,
    spec: &FieldSpec,
) -> usize {
    let ells: Vec<i64> = ells.collect();
    let fingerprints: Vec<Vec<crate::charfn::CharFactor>> = grid
        .iter()
        .map(|sig| ells.iter().map(|&l| charfn_factor(sig, l, spec)).collect())
        .collect();
    let mut unseparated = 0;
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            if fingerprints[i] == fingerprints[j] {
                unseparated += 1;
            }
        }
    }
    unseparated
}

// ---------------------------------------------------------------------
// Orbital bound sweep
// ---------------------------------------------------------------------

fn orbital_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let ns: Vec<usize> = if cfg.block_counts.is_empty() {
        vec![1, 2, 3]
    } else {
        cfg.block_counts.clone()
    };
    let spec = cfg.field;
    let exps: Vec<i64> = (cfg.exponent_lo..=cfg.exponent_hi).collect();

    struct Job {
        n: usize,
        d: i64,
        a: i64,
    }
    let mut jobs = Vec::new();
    for &n in &ns {
        for &d in &exps {
            for &a in &exps {
                jobs.push(Job { n, d, a });
            }
        }
    }

    let mut cases: Vec<CaseReport> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| {
            let opts = McOptions {
                trials: cfg.trials,
                streams: cfg.streams,
                seed: derive_seed(cfg.seed, i as u64),
            };
            let mut d_exps = vec![ExtInt::Int(0); job.n];
            d_exps[0] = ExtInt::Int(job.d);
            let a_exps = vec![ExtInt::Int(job.a)];
            match mc_orbital(&d_exps, &a_exps, &opts, &spec) {
                Ok(rep) => CaseReport::from_bound_report(
                    i,
                    format!("orbital n={} d={} a={}", job.n, job.d, job.a),
                    rep,
                ),
                Err(e) => {
                    let mut c = CaseReport::new(i, "orbital", serde_json::json!({}));
                    c.detail = Some(format!("error: {e}"));
                    c
                }
            }
        })
        .collect();

    // Exact cross-checks at n = 1: the residue-level enumeration over the
    // invertible matrices is the orbital integral exactly.
    for (d, a) in [(1i64, 0i64), (0, 1)] {
        let idx = cases.len();
        let opts = McOptions {
            trials: cfg.trials,
            streams: cfg.streams,
            seed: derive_seed(cfg.seed, idx as u64),
        };
        let mc = mc_orbital(&[ExtInt::Int(d)], &[ExtInt::Int(a)], &opts, &spec)?;
        let kernel = Kernel::Orbital {
            d_scalars: vec![LocalElem::uniformizer_pow(spec, -d)],
            a_scalars: vec![LocalElem::uniformizer_pow(spec, -a)],
        };
        let exact = exact_quotient_integral(&kernel, Domain::Gl, &spec, None)?;
        let z = exact.to_complex();
        let dev = (mc.estimate.value - z).norm();
        let tol = 3.0 * mc.estimate.std_error + 1e-12;
        let mut c = CaseReport::new(
            idx,
            format!("orbital exact n=1 d={d} a={a}"),
            serde_json::json!({
                "d": d, "a": a,
                "exact_re": z.re, "exact_im": z.im,
                "points": exact.points,
            }),
        );
        c.statistic = Some(dev);
        c.threshold = Some(tol);
        c.pass = dev <= tol;
        cases.push(c);
    }
    Ok(cases)
}

// ---------------------------------------------------------------------
// GL versus Mat gap
// ---------------------------------------------------------------------

fn glmat_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let spec = cfg.field;
    let grid: Vec<(usize, usize)> = if cfg.block_counts.is_empty() {
        vec![(1, 1), (2, 1), (3, 1), (2, 2)]
    } else {
        cfg.block_counts.iter().map(|&n| (n, 1)).collect()
    };
    let mut cases = Vec::new();
    for (i, &(n, r)) in grid.iter().enumerate() {
        let coeffs = LocalMatrix::from_entries(
            spec,
            r,
            n,
            vec![LocalElem::uniformizer_pow(spec, -1); r * n],
        )?;
        let kernel = Kernel::Row { coeffs };
        let mat = exact_quotient_integral(&kernel, Domain::Mat, &spec, None)?;
        let gl = exact_quotient_integral(&kernel, Domain::Gl, &spec, None)?;
        let gap = (gl.to_complex() - mat.to_complex()).norm();
        let bound = gl_vs_mat_gap_bound(n, r, spec.q())?;
        let mut c = CaseReport::new(
            i,
            format!("glmat n={n} r={r}"),
            serde_json::json!({
                "n": n, "r": r, "q": spec.q(), "depth": 1,
                "mat_points": mat.points, "gl_points": gl.points,
                "gl_re": gl.to_complex().re, "gl_im": gl.to_complex().im,
            }),
        );
        c.statistic = Some(gap);
        c.threshold = Some(bound);
        c.pass = gap <= bound + 1e-12;
        // The one-block case is exactly rational on both sides: the matrix
        // average is 0 and the group average is -1/(q-1).
        if n == 1 && r == 1 {
            use num_bigint::BigInt;
            use num_rational::BigRational;
            let mat_exact = mat.as_rational();
            let gl_exact = gl.as_rational();
            let expected_gl = BigRational::new(BigInt::from(-1), BigInt::from(spec.q() - 1));
            let ok = mat_exact == Some(BigRational::from_integer(0.into()))
                && gl_exact == Some(expected_gl);
            c.pass = c.pass && ok;
            c.detail = Some(format!(
                "exact: mat = {:?}, gl = {:?}",
                mat_exact, gl_exact
            ));
        }
        cases.push(c);
    }
    // Degenerate control: a kernel with all parameters integral has gap
    // exactly zero.
    let idx = cases.len();
    let kernel = Kernel::Row {
        coeffs: LocalMatrix::from_entries(spec, 1, 1, vec![LocalElem::one(spec)])?,
    };
    let mat = exact_quotient_integral(&kernel, Domain::Mat, &spec, Some(1))?;
    let gl = exact_quotient_integral(&kernel, Domain::Gl, &spec, Some(1))?;
    let gap = (gl.to_complex() - mat.to_complex()).norm();
    let mut c = CaseReport::new(
        idx,
        "glmat degenerate integral kernel",
        serde_json::json!({"n": 1, "r": 1}),
    );
    c.statistic = Some(gap);
    c.threshold = Some(gl_vs_mat_gap_bound(1, 1, spec.q())?);
    c.pass = gap <= 1e-12;
    cases.push(c);
    Ok(cases)
}

// ---------------------------------------------------------------------
// Correspondence
// ---------------------------------------------------------------------

fn correspondence_cases(cfg: &ExperimentConfig) -> Result<Vec<CaseReport>> {
    let spec = cfg.field;
    let exps: Vec<i64> = (cfg.exponent_lo..=cfg.exponent_hi).collect();
    struct Job {
        k: i64,
        x: i64,
        y: i64,
    }
    let mut jobs = Vec::new();
    for &k in &cfg.scales {
        for &x in &exps {
            for &y in &exps {
                if y <= x {
                    jobs.push(Job { k, x, y });
                }
            }
        }
    }
    let cases: Vec<CaseReport> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| run_correspondence_case(cfg, spec, i, job.k, job.x, job.y))
        .collect::<Result<Vec<_>>>()?;
    Ok(cases)
}

fn run_correspondence_case(
    cfg: &ExperimentConfig,
    spec: FieldSpec,
    index: usize,
    k: i64,
    x: i64,
    y: i64,
) -> Result<CaseReport> {
    let seed = derive_seed(cfg.seed, index as u64);
    let opts = McOptions {
        trials: cfg.trials,
        streams: cfg.streams,
        seed,
    };
    let (left, right) = tau_identity_check(k, x, y, &opts, &spec)?;
    // Haar on the scaled integral matrices pairs to an indicator.
    let analytic = if x + k <= 0 { 1.0 } else { 0.0 };

    let sides_agree = left.agrees_with(&right, 3.0);
    let left_ok = left.within_of(analytic, 3.0);
    let right_ok = right.within_of(analytic, 3.0);

    // Matrix-route estimate of the right side: pair the halved-scale J
    // block against the skew part of the sampled matrix law.
    let half_x = LocalElem::from_int(spec, 2).inv()?.mul(&LocalElem::uniformizer_pow(spec, -x))?;
    let test = LocalMatrix::block_diag_j(spec, &[half_x], 2)?;
    let route_opts = McOptions {
        trials: cfg.trials,
        streams: cfg.streams,
        seed: derive_seed(seed, 1),
    };
    let route = mc_phase_mean(&route_opts, |rng| {
        let m = sample_mat_invariant(k, 2, 2, spec, rng);
        pairing(&test, &m.skew_part()?)
    })?;
    let route_ok = route.within_of(analytic, 3.0);

    // Cross-check against a disjoint seed.
    let opts2 = McOptions {
        trials: cfg.trials,
        streams: cfg.streams,
        seed: derive_seed(seed, 2),
    };
    let (left2, right2) = tau_identity_check(k, x, y, &opts2, &spec)?;
    let stable = left.agrees_with(&left2, 3.0) && right.agrees_with(&right2, 3.0);

    let pass = sides_agree && left_ok && right_ok && route_ok && stable;
    let mut c = CaseReport::new(
        index,
        format!("correspondence k={k} x={x} y={y}"),
        serde_json::json!({
            "k": k, "x_exp": x, "y_exp": y,
            "analytic": analytic,
            "left": {"re": left.value.re, "im": left.value.im, "std_error": left.std_error},
            "right": {"re": right.value.re, "im": right.value.im, "std_error": right.std_error},
            "skew_route": {"re": route.value.re, "im": route.value.im, "std_error": route.std_error},
            "trials": cfg.trials,
        }),
    );
    c.statistic = Some((left.value - right.value).norm());
    c.threshold = Some(3.0 * left.combined_std_error(&right));
    c.pass = pass;
    if !pass {
        c.detail = Some(format!(
            "sides_agree={sides_agree} left_ok={left_ok} right_ok={right_ok} route_ok={route_ok} stable={stable}"
        ));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldSpec {
        FieldSpec::padic(3, 24).unwrap()
    }

    #[test]
    fn derived_seeds_spread() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn signature_enumeration_counts() {
        // Lists of length <= 3 over 7 values, nonincreasing: 1 + 7 + 28 + 84.
        let grid = enumerate_signatures(-3, 3, 3, &[ExtInt::NegInf]);
        assert_eq!(grid.len(), 120);
        // A finite tail only admits spikes strictly above it.
        let grid = enumerate_signatures(-3, 3, 3, &[ExtInt::Int(3)]);
        assert_eq!(grid.len(), 1);
        let grid = enumerate_signatures(-3, 3, 3, &[ExtInt::Int(2)]);
        assert_eq!(grid.len(), 4);
    }

    #[test]
    fn exponent_bins_cover_all_cases() {
        assert_eq!(bin_exponent(ExtInt::NegInf, 2), 0);
        assert_eq!(bin_exponent(ExtInt::Int(5), 2), 1);
        assert_eq!(bin_exponent(ExtInt::Int(2), 2), 2);
        assert_eq!(bin_exponent(ExtInt::Int(-4), 2), 8);
        assert_eq!(bin_exponent(ExtInt::Int(-10), 2), 9);
    }

    #[test]
    fn suites_run_over_laurent_series() {
        // The second field family goes through the same pipelines.
        let spec = FieldSpec::laurent(3, 24).unwrap();
        let mut cfg = ExperimentConfig::new(spec, SuiteKind::GlMat, 3);
        let rep = run_suite(&cfg).unwrap();
        assert!(rep.pass, "glmat over Laurent series");
        cfg.suite = SuiteKind::Canonical;
        cfg.matrices_per_case = 1_000;
        cfg.block_counts = vec![1, 2];
        let rep = run_suite(&cfg).unwrap();
        assert!(rep.pass, "canonical over Laurent series");
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let mut cfg = ExperimentConfig::new(q3(), SuiteKind::Orbital, 1);
        cfg.trials = 10;
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn control_cases_are_marked() {
        let mut cfg = ExperimentConfig::new(q3(), SuiteKind::Invariance, 11);
        cfg.samples = 2_000;
        let rep = run_suite(&cfg).unwrap();
        let controls: Vec<_> = rep
            .cases
            .iter()
            .filter(|c| c.name.starts_with("negative-control"))
            .collect();
        assert_eq!(controls.len(), 1);
        assert_eq!(controls[0].params["control"], serde_json::json!(true));
        // Disabling controls removes the case.
        cfg.include_controls = false;
        let rep = run_suite(&cfg).unwrap();
        assert!(rep
            .cases
            .iter()
            .all(|c| !c.name.starts_with("negative-control")));
    }
}
