//! Chi-square machinery for the statistical suites.

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma P(a, x), by series for small x and
/// continued fraction otherwise.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // Series representation.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        // Continued fraction for the upper tail.
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / 1e-300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < 1e-300 {
                d = 1e-300;
            }
            c = b + an / c;
            if c.abs() < 1e-300 {
                c = 1e-300;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        1.0 - (-x + a * x.ln() - ln_gamma(a)).exp() * h
    }
}

/// CDF of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        reg_lower_gamma(df / 2.0, x / 2.0)
    }
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test over matched category counts.
///
/// Cells whose pooled expected count falls below `min_expected` are merged
/// (in index order) into one residual cell, keeping the statistic honest on
/// sparse tails. With zero remaining degrees of freedom the samples are
/// identical by construction and the p-value is 1.
pub fn two_sample_chi_square(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquareOutcome {
    assert_eq!(a.len(), b.len(), "category spaces must match");
    let n_a: u64 = a.iter().sum();
    let n_b: u64 = b.iter().sum();
    let n = (n_a + n_b) as f64;
    let share_a = n_a as f64 / n;
    let share_b = n_b as f64 / n;

    // Pool sparse cells.
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0f64, 0f64);
    let mut pooled_any = false;
    for i in 0..a.len() {
        let tot = (a[i] + b[i]) as f64;
        if tot == 0.0 {
            continue;
        }
        if tot * share_a.min(share_b) < min_expected {
            pooled.0 += a[i] as f64;
            pooled.1 += b[i] as f64;
            pooled_any = true;
        } else {
            kept.push((a[i] as f64, b[i] as f64));
        }
    }
    if pooled_any {
        kept.push(pooled);
    }
    if kept.len() <= 1 {
        return ChiSquareOutcome {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
        };
    }
    let mut stat = 0.0;
    for &(oa, ob) in &kept {
        let tot = oa + ob;
        let ea = tot * share_a;
        let eb = tot * share_b;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = (kept.len() - 1) as u64;
    ChiSquareOutcome {
        statistic: stat,
        df,
        p_value: 1.0 - chi_square_cdf(stat, df as f64),
    }
}

/// Bowker symmetry test on a square contingency table: under the null the
/// joint law is swap-symmetric, and
/// `sum_{i<j} (n_ij - n_ji)^2 / (n_ij + n_ji)` is chi-square with one
/// degree of freedom per informative pair.
pub fn symmetry_chi_square(joint: &[Vec<u64>]) -> ChiSquareOutcome {
    let k = joint.len();
    let mut stat = 0.0;
    let mut df = 0u64;
    for i in 0..k {
        assert_eq!(joint[i].len(), k, "table must be square");
        for j in (i + 1)..k {
            let nij = joint[i][j] as f64;
            let nji = joint[j][i] as f64;
            let tot = nij + nji;
            if tot == 0.0 {
                continue;
            }
            stat += (nij - nji) * (nij - nji) / tot;
            df += 1;
        }
    }
    if df == 0 {
        return ChiSquareOutcome {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
        };
    }
    ChiSquareOutcome {
        statistic: stat,
        df,
        p_value: 1.0 - chi_square_cdf(stat, df as f64),
    }
}
