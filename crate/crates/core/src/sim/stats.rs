//! Small statistics helpers for Monte Carlo summaries.

/// One-sided 95% normal quantile.
pub const Z_ONE_SIDED_95: f64 = 1.644_853_626_951_472_2;
/// Two-sided 95% normal quantile.
pub const Z_TWO_SIDED_95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over `√n`); 0 for
/// fewer than two samples.
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if p == 1.0 {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Mean and standard error of the paired differences `a[i] - b[i]`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired samples must align");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (mean(&d), stderr(&d))
}

/// z statistic for `p_a < p_b` from two independent proportions.
pub fn two_proportion_z(hits_a: u64, n_a: u64, hits_b: u64, n_b: u64) -> f64 {
    let pa = hits_a as f64 / n_a as f64;
    let pb = hits_b as f64 / n_b as f64;
    let pooled = (hits_a + hits_b) as f64 / (n_a + n_b) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (pb - pa) / se
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((stderr(&[1.0, 2.0, 3.0]) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(stderr(&[5.0]), 0.0);
    }

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson(30, 100, Z_TWO_SIDED_95);
        assert!(lo < 0.3 && hi > 0.3);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        assert_eq!(wilson(0, 50, Z_TWO_SIDED_95).0, 0.0);
    }

    #[test]
    fn two_proportion_direction() {
        assert!(two_proportion_z(10, 1000, 50, 1000) > 5.0);
        assert!(two_proportion_z(50, 1000, 10, 1000) < -5.0);
    }
}
