//! Hypothesis tests used by the acceptance checks and the self-test battery.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    /// Degrees of freedom, where applicable.
    pub df: f64,
    pub critical: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// True when the null hypothesis is not rejected.
    pub passed: bool,
}

fn chi2_outcome(statistic: f64, df: usize, alpha: f64) -> TestOutcome {
    let dist = ChiSquared::new(df.max(1) as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(1.0 - alpha);
    TestOutcome {
        statistic,
        df: df as f64,
        critical,
        p_value: 1.0 - dist.cdf(statistic),
        alpha,
        passed: statistic <= critical,
    }
}

/// Pearson goodness of fit of `observed` counts against cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], alpha: f64) -> TestOutcome {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let stat = observed
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    chi2_outcome(stat, observed.len() - 1, alpha)
}

pub fn chi_square_uniform(observed: &[u64], alpha: f64) -> TestOutcome {
    let p = 1.0 / observed.len() as f64;
    chi_square_gof(observed, &vec![p; observed.len()], alpha)
}

/// Two-sample chi-square homogeneity test on aligned bins. Adjacent bins are
/// pooled until the pooled expected count is at least 5 in both samples.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], alpha: f64) -> TestOutcome {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ca += x as f64;
        cb += y as f64;
        let t = ca + cb;
        if t * na.min(nb) / n >= 5.0 {
            pooled.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => pooled.push((ca, cb)),
        }
    }
    let stat = pooled
        .iter()
        .map(|&(x, y)| {
            let t = x + y;
            let (ea, eb) = (t * na / n, t * nb / n);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    chi2_outcome(stat, pooled.len().saturating_sub(1), alpha)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic critical value.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> TestOutcome {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let scale = ((n + m) / (n * m)).sqrt();
    let critical = (-0.5 * (alpha / 2.0).ln()).sqrt() * scale;
    let lambda = d / scale;
    // Kolmogorov series for the tail probability.
    let p_value = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1.0f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum::<f64>()
        .clamp(0.0, 1.0);
    TestOutcome {
        statistic: d,
        df: f64::NAN,
        critical,
        p_value,
        alpha,
        passed: d <= critical,
    }
}

/// Two-sided z-test of `diff = 0` given its standard error.
pub fn z_test(diff: f64, stderr: f64, alpha: f64) -> TestOutcome {
    let normal = Normal::standard();
    let critical = normal.inverse_cdf(1.0 - alpha / 2.0);
    let z = if diff == 0.0 {
        0.0
    } else {
        (diff / stderr).abs()
    };
    TestOutcome {
        statistic: z,
        df: f64::NAN,
        critical,
        p_value: 2.0 * (1.0 - normal.cdf(z)),
        alpha,
        passed: z <= critical,
    }
}

/// Sum of squared standardised differences, tested against `chi2(k)`.
pub fn chi_square_paired(diffs: &[(f64, f64)], alpha: f64) -> TestOutcome {
    let stat = diffs.iter().map(|&(d, se)| (d / se).powi(2)).sum();
    chi2_outcome(stat, diffs.len(), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_critical_values() {
        let t = chi_square_uniform(&[100, 100, 100, 100], 0.01);
        assert_eq!(t.statistic, 0.0);
        assert!((t.critical - 11.3449).abs() < 1e-3);
        assert!(t.passed);
        let t = chi_square_uniform(&[400, 0, 0, 0], 0.01);
        assert!(!t.passed);
    }

    #[test]
    fn two_sample_pools_sparse_bins() {
        let t = chi_square_two_sample(&[50, 1, 0, 1, 50], &[48, 0, 2, 0, 52], 0.01);
        assert_eq!(t.df, 1.0);
        assert!(t.passed);
        let t = chi_square_two_sample(&[100, 0], &[0, 100], 0.01);
        assert!(!t.passed);
    }

    #[test]
    fn ks_and_z() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_two_sample(&a, &b, 0.01).passed);
        let c: Vec<f64> = a.iter().map(|v| v * v).collect();
        assert!(!ks_two_sample(&a, &c, 0.01).passed);
        assert!((z_test(1.0, 1.0, 0.05).critical - 1.959964).abs() < 1e-5);
        assert!(!z_test(4.0, 1.0, 0.01).passed);
    }
}
