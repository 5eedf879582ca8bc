//! Code and system parameters.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// ALCC system parameters `(N, k, t, D, beta, sigma)`.
///
/// Worker indices are 1-based throughout the crate: worker `i` receives the
/// share evaluated at `alpha_i = gamma^(i-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlccParams {
    /// Number of workers.
    pub n: usize,
    /// Number of dataset blocks.
    pub k: usize,
    /// Number of privacy-noise matrices.
    pub t: usize,
    /// Degree of the computed polynomial `f`.
    pub d: usize,
    /// Radius of the circle carrying the interpolation nodes `beta_r`.
    pub beta: f64,
    /// Privacy-noise scale; each noise entry has standard deviation `sigma / sqrt(t)`.
    pub sigma: f64,
}

impl AlccParams {
    pub fn new(n: usize, k: usize, t: usize, d: usize, beta: f64, sigma: f64) -> Result<Self> {
        let params = Self {
            n,
            k,
            t,
            d,
            beta,
            sigma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "worker count must be positive"));
        }
        if self.k == 0 {
            return Err(invalid("k", "at least one dataset block is required"));
        }
        if self.d == 0 {
            return Err(invalid("d", "polynomial degree must be positive"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(invalid(
                "beta",
                format!("must be a positive real, got {}", self.beta),
            ));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(invalid(
                "sigma",
                format!("must be non-negative, got {}", self.sigma),
            ));
        }
        if (self.beta - 1.0).abs() < 1e-12 {
            return Err(invalid(
                "beta",
                "beta = 1 places interpolation nodes on the worker evaluation circle",
            ));
        }
        let big_k = self.code_dimension();
        if big_k > self.n {
            return Err(invalid(
                "n",
                format!(
                    "K = (k+t-1)*D + 1 = {big_k} exceeds N = {}; interpolation is impossible",
                    self.n
                ),
            ));
        }
        Ok(())
    }

    /// Number of interpolation nodes, `k + t`.
    pub fn nodes(&self) -> usize {
        self.k + self.t
    }

    /// `K = (k+t-1)·D + 1`, the number of coefficients of `f(u(z))`.
    pub fn code_dimension(&self) -> usize {
        (self.k + self.t - 1) * self.d + 1
    }

    /// Correction radius `v = floor((N-K)/2)`.
    pub fn radius(&self) -> usize {
        (self.n - self.code_dimension()) / 2
    }

    pub fn code(&self) -> DftCodeSpec {
        DftCodeSpec {
            n: self.n,
            k: self.code_dimension(),
        }
    }

    /// `gamma = exp(-2 pi i / N)`.
    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI / self.n as f64)
    }

    /// `omega = exp(-2 pi i / (k+t))`.
    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI / self.nodes() as f64)
    }

    /// Evaluation point of worker `i` (1-based).
    pub fn alpha(&self, i: usize) -> Complex64 {
        root_of_unity(self.n, -((i as i64) - 1))
    }

    /// Interpolation node `beta_r = beta · omega^(r-1)` (1-based).
    pub fn beta_node(&self, r: usize) -> Complex64 {
        root_of_unity(self.nodes(), -((r as i64) - 1)) * self.beta
    }

    pub fn beta_nodes(&self) -> Vec<Complex64> {
        (1..=self.nodes()).map(|r| self.beta_node(r)).collect()
    }
}

/// An `(N, K)` DFT code over the complex field.
///
/// Codewords are evaluations of degree-`(K-1)` polynomials at the `N`-th
/// roots of unity `gamma^(i-1)`, i.e. vectors whose inverse DFT vanishes on
/// bins `K..N-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DftCodeSpec {
    pub n: usize,
    pub k: usize,
}

impl DftCodeSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(invalid(
                "k",
                format!("need 0 < K < N, got K = {k}, N = {n}"),
            ));
        }
        Ok(Self { n, k })
    }

    /// Correction radius `v = floor((N-K)/2)`.
    pub fn radius(&self) -> usize {
        (self.n - self.k) / 2
    }

    /// Number of syndrome values, `N - K`.
    pub fn parity(&self) -> usize {
        self.n - self.k
    }

    /// Locator point of worker `q` (1-based): `conj(gamma^(q-1)) = exp(+2 pi i (q-1) / N)`.
    ///
    /// An error at worker `q` contributes `eps/N · X_q^(K+m-1)` to syndrome
    /// `s_m`, so `X_q` is the root its locator polynomial carries.
    pub fn locator_point(&self, q: usize) -> Complex64 {
        root_of_unity(self.n, (q as i64) - 1)
    }

    pub fn locator_points(&self) -> Vec<Complex64> {
        (1..=self.n).map(|q| self.locator_point(q)).collect()
    }
}

/// `exp(2 pi i · e / n)` with the exponent reduced modulo `n` first, so equal
/// powers are bit-identical.
pub fn root_of_unity(n: usize, e: i64) -> Complex64 {
    let r = e.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}
