//! Repeated runs of the statistical suites under distinct seeds: positive
//! cases must stay within the nominal false-positive budget and the
//! negative controls must be caught every time.

use padic_skew::{run_suite, ExperimentConfig, FieldSpec, SuiteKind};

fn repetitions(kind: SuiteKind, samples: u64) -> (u32, u32, u32) {
    let spec = FieldSpec::padic(3, 24).unwrap();
    let mut positive_failures = 0u32;
    let mut control_misses = 0u32;
    let mut reps = 0u32;
    for rep in 0..20u64 {
        let mut cfg = ExperimentConfig::new(spec, kind, 1000 + rep);
        cfg.samples = samples;
        let report = run_suite(&cfg).unwrap();
        reps += 1;
        for case in &report.cases {
            if case.name.starts_with("negative-control") {
                if !case.pass {
                    control_misses += 1;
                }
            } else if !case.pass {
                positive_failures += 1;
            }
        }
    }
    (reps, positive_failures, control_misses)
}

#[test]
fn invariance_over_twenty_seeds() {
    let (reps, false_rejections, misses) = repetitions(SuiteKind::Invariance, 2_000);
    assert_eq!(reps, 20);
    // 4 positive cases per rep at Bonferroni level 0.002: the expected
    // false-rejection count over 80 case runs is 0.16; allow a generous
    // Poisson tail.
    assert!(
        false_rejections <= 2,
        "{false_rejections} positive cases rejected over 20 repetitions"
    );
    // The corrupted sampler sits many shells away from the truth; the test
    // must catch it every single time.
    assert_eq!(misses, 0, "negative control slipped through {misses} times");
}

#[test]
fn exchangeability_over_twenty_seeds() {
    let (reps, false_rejections, misses) = repetitions(SuiteKind::Exchangeability, 2_000);
    assert_eq!(reps, 20);
    assert!(
        false_rejections <= 2,
        "{false_rejections} positive cases rejected over 20 repetitions"
    );
    assert_eq!(misses, 0, "negative control slipped through {misses} times");
}
