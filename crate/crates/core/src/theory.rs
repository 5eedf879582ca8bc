//! Analytical localization-error bounds.
//!
//! `PEP_L = κ/(1+κ) · exp(-η(c_I² + c_Q²)κ / (4σ_p²(1+κ)))` lower-bounds the
//! probability that a true error location loses to its nearest neighbour on
//! the unit circle, with `κ = 2 / (η Σ_{j=1}^{A} (1 - cos(2πj/N)))`.
//!
//! The exponent is routinely below `-700` for small `σ_p²`, so everything is
//! also available in the log domain and monotonicity checks use logs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Inputs of the bound. `eta`, `c_i`, `c_q` are free positive constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub a: usize,
    pub n: usize,
    pub sigma_p2: f64,
    pub eta: f64,
    pub c_i: f64,
    pub c_q: f64,
}

/// Default constants: `η = c_I = c_Q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConstants {
    pub eta: f64,
    pub c_i: f64,
    pub c_q: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            eta: 1.0,
            c_i: 1.0,
            c_q: 1.0,
        }
    }
}

impl BoundConstants {
    pub fn at(&self, a: usize, n: usize, sigma_p2: f64) -> BoundParams {
        BoundParams {
            a,
            n,
            sigma_p2,
            eta: self.eta,
            c_i: self.c_i,
            c_q: self.c_q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("eta", self.eta), ("c_i", self.c_i), ("c_q", self.c_q)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(name, format!("must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

/// `κ = 2 / (η Σ_{j=1}^{A} (1 - cos(2πj/N)))`.
pub fn kappa(a: usize, n: usize, eta: f64) -> Result<f64> {
    if a == 0 {
        return Err(invalid("a", "need A >= 1"));
    }
    if a >= n {
        return Err(invalid("a", format!("need A < N, got A = {a}, N = {n}")));
    }
    let sum: f64 = (1..=a)
        .map(|j| 1.0 - (2.0 * PI * j as f64 / n as f64).cos())
        .sum();
    Ok(2.0 / (eta * sum))
}

/// `ln PEP_L`.
pub fn log_pep_lower_bound(p: &BoundParams) -> Result<f64> {
    if p.sigma_p2.is_nan() || p.sigma_p2 <= 0.0 {
        return Err(invalid("sigma_p2", "precision variance must be positive"));
    }
    let k = kappa(p.a, p.n, p.eta)?;
    let ratio = k / (1.0 + k);
    let exponent = -p.eta * (p.c_i * p.c_i + p.c_q * p.c_q) * ratio / (4.0 * p.sigma_p2);
    Ok(ratio.ln() + exponent)
}

/// `PEP_L`; underflows to 0 for very small `σ_p²`.
pub fn pep_lower_bound(p: &BoundParams) -> Result<f64> {
    log_pep_lower_bound(p).map(f64::exp)
}

/// `P_error ≈ 2·A·PEP_dom`, clamped to `[0, 1]`.
pub fn p_error_approx(a: usize, pep: f64) -> f64 {
    (2.0 * a as f64 * pep).clamp(0.0, 1.0)
}

/// Whether `A · PEP_L(A)` is non-decreasing over `A = 1..=v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Certificate {
    /// `ln(A · PEP_L(A))` for `A = 1..=v`.
    pub log_values: Vec<f64>,
    /// `ln(A·PEP_L(A)) - ln((A-1)·PEP_L(A-1))` for `A = 2..=v`.
    pub margins: Vec<f64>,
    pub non_decreasing: bool,
    /// First `A` whose value drops below its predecessor.
    pub first_violation: Option<usize>,
}

pub fn lemma1_certificate(
    n: usize,
    sigma_p2: f64,
    constants: &BoundConstants,
    v: usize,
) -> Result<Lemma1Certificate> {
    let log_values = (1..=v)
        .map(|a| Ok((a as f64).ln() + log_pep_lower_bound(&constants.at(a, n, sigma_p2))?))
        .collect::<Result<Vec<f64>>>()?;
    let margins: Vec<f64> = log_values.windows(2).map(|w| w[1] - w[0]).collect();
    let first_violation = margins.iter().position(|&m| m < 0.0).map(|i| i + 2);
    Ok(Lemma1Certificate {
        non_decreasing: first_violation.is_none(),
        log_values,
        margins,
        first_violation,
    })
}
