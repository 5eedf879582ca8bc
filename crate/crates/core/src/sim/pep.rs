//! Monte Carlo estimates of the pairwise error probability of localization.

use rand::seq::index::sample;

use crate::dft::{smallest_workers, LocatorPolynomial};
use crate::error::{invalid, Result};
use crate::params::DftCodeSpec;
use crate::rng::rng_from;
use crate::sim::stats::{wilson, Z_TWO_SIDED_95};

/// Empirical swap and miss rates with two-sided 95% Wilson intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PepEstimate {
    pub n: usize,
    pub a: usize,
    pub sigma_p2: f64,
    pub trials: usize,
    /// Neighbour comparisons `(i_a, i_a ± 1)` with `i_a ± 1` honest.
    pub comparisons: u64,
    /// Comparisons where the honest neighbour scored strictly lower.
    pub swaps: u64,
    pub pep: f64,
    pub pep_ci: (f64, f64),
    /// Trials with at least one adversary missed.
    pub error_trials: u64,
    pub p_error: f64,
    pub p_error_ci: (f64, f64),
    /// Total missed adversaries over all trials.
    pub misses: u64,
}

/// Draws `trials` random `A`-error locators, perturbs their non-leading
/// coefficients by `CN(0, σ_p²)`, and localizes the `A` smallest scores.
pub fn pep_experiment(
    n: usize,
    k: usize,
    a: usize,
    sigma_p2: f64,
    trials: usize,
    seed: u64,
) -> Result<PepEstimate> {
    let spec = DftCodeSpec::new(n, k)?;
    if a == 0 || a > spec.radius() {
        return Err(invalid(
            "a",
            format!("need 1 <= A <= v = {}, got {a}", spec.radius()),
        ));
    }
    if !(sigma_p2.is_finite() && sigma_p2 >= 0.0) {
        return Err(invalid("sigma_p2", "must be a non-negative real"));
    }
    let (mut comparisons, mut swaps, mut error_trials, mut misses) = (0u64, 0u64, 0u64, 0u64);
    for trial in 0..trials {
        let mut rng = rng_from(&[seed, a as u64, sigma_p2.to_bits(), trial as u64]);
        let mut truth: Vec<usize> = sample(&mut rng, n, a).into_iter().map(|i| i + 1).collect();
        truth.sort_unstable();
        let roots: Vec<_> = truth.iter().map(|&q| spec.locator_point(q)).collect();
        let mut g = LocatorPolynomial::from_roots(&roots);
        g.perturb(sigma_p2, &mut rng);
        let scores = g.scores(&spec);
        for &q in &truth {
            for b in [(q + n - 2) % n + 1, q % n + 1] {
                if truth.contains(&b) {
                    continue;
                }
                comparisons += 1;
                if scores[b - 1] < scores[q - 1] {
                    swaps += 1;
                }
            }
        }
        let detected = smallest_workers(&scores, a);
        let missed = truth.iter().filter(|q| !detected.contains(q)).count() as u64;
        misses += missed;
        error_trials += u64::from(missed > 0);
    }
    let rate = |x: u64, m: u64| if m == 0 { 0.0 } else { x as f64 / m as f64 };
    Ok(PepEstimate {
        n,
        a,
        sigma_p2,
        trials,
        comparisons,
        swaps,
        pep: rate(swaps, comparisons),
        pep_ci: wilson(swaps, comparisons, Z_TWO_SIDED_95),
        error_trials,
        p_error: rate(error_trials, trials as u64),
        p_error_ci: wilson(error_trials, trials as u64, Z_TWO_SIDED_95),
        misses,
    })
}
