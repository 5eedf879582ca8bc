//! Coding-theoretic decoder for `(N, K)` DFT codes over the complex field.
//!
//! Each output entry, carved across the `N` returned matrices, is a noisy DFT
//! codeword. Decoding runs the classical chain:
//!
//! 1. syndrome: projection of the received word onto the parity bins `K..N-1`
//!    of its inverse DFT,
//! 2. error count: numerical rank of the Hankel matrix of syndromes,
//! 3. locator: the monic polynomial annihilating every window of `A + 1`
//!    consecutive syndromes, solved in the least-squares sense,
//! 4. localization: the `A` candidate points with the smallest `|g(X_q)|²`,
//! 5. error values: least-squares solve of the syndrome Vandermonde system.
//!
//! Worker `q` maps to the locator point `X_q = exp(+2πi(q-1)/N)`, see
//! [`DftCodeSpec::locator_point`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{AlccError, Result};
use crate::params::{root_of_unity, DftCodeSpec};
use crate::rng::complex_normal;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative singular-value cutoff below which a least-squares system is
/// treated as rank deficient.
const RANK_EPS: f64 = 1e-12;

/// The `N - K` syndrome values `s_1..s_{N-K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Syndrome {
    pub values: Vec<Complex64>,
}

impl Syndrome {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `s_m = (1/N) Σ_i r_i · X_i^(K+m-1)` for `m ∈ [N-K]`.
pub fn compute_syndrome(spec: &DftCodeSpec, received: &[Complex64]) -> Result<Syndrome> {
    let n = spec.n;
    if received.len() != n {
        return Err(AlccError::ShapeMismatch {
            expected: format!("codeword of length {n}"),
            got: format!("length {}", received.len()),
        });
    }
    let scale = 1.0 / n as f64;
    let values = (0..spec.parity())
        .map(|m| {
            let bin = (spec.k + m) as i64;
            received
                .iter()
                .enumerate()
                .map(|(i, r)| r * root_of_unity(n, i as i64 * bin))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(Syndrome { values })
}

/// Thresholds for [`estimate_error_count`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountThresholds {
    /// Singular values below `rel_tol · σ_max` are treated as noise.
    pub rel_tol: f64,
    /// Syndromes with norm below this are declared error-free.
    pub abs_floor: f64,
}

impl Default for CountThresholds {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_floor: 1e-12,
        }
    }
}

/// Numerical rank of the `(N-K-v) × (v+1)` Hankel matrix `H[i][l] = s_{i+l}`,
/// saturated at `v`.
pub fn estimate_error_count(s: &Syndrome, v: usize, thresholds: CountThresholds) -> usize {
    if v == 0 || s.norm() < thresholds.abs_floor || s.len() < 2 * v {
        return 0;
    }
    let rows = s.len() - v;
    let h = DMatrix::from_fn(rows, v + 1, |i, l| s.values[i + l]);
    let sv = h.singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return 0;
    }
    sv.iter()
        .filter(|&&x| x >= thresholds.rel_tol * max)
        .count()
        .min(v)
}

/// Monic polynomial, coefficients stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatorPolynomial {
    coeffs: Vec<Complex64>,
}

impl LocatorPolynomial {
    /// Builds from the `A` non-leading coefficients `g_0..g_{A-1}`; the leading
    /// coefficient is fixed to 1.
    pub fn from_lower(lower: Vec<Complex64>) -> Self {
        let mut coeffs = lower;
        coeffs.push(ONE);
        Self { coeffs }
    }

    /// `prod_q (x - X_q)` over the given points.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (j, &c) in coeffs.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= r * c;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// All `degree + 1` coefficients, lowest first; the last is exactly 1.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// Adds i.i.d. `CN(0, variance)` noise to every non-leading coefficient.
    pub fn perturb<R: Rng + ?Sized>(&mut self, variance: f64, rng: &mut R) {
        if variance <= 0.0 {
            return;
        }
        let d = self.degree();
        for c in &mut self.coeffs[..d] {
            *c += complex_normal(rng, ZERO, variance);
        }
    }

    /// Coefficient-wise mean of equal-degree polynomials.
    pub fn average(polys: &[&LocatorPolynomial]) -> Option<LocatorPolynomial> {
        let first = polys.first()?;
        let d = first.degree();
        assert!(
            polys.iter().all(|p| p.degree() == d),
            "averaging needs equal degrees"
        );
        let mut coeffs = vec![ZERO; d + 1];
        for p in polys {
            for (acc, c) in coeffs.iter_mut().zip(&p.coeffs) {
                *acc += c;
            }
        }
        let inv = 1.0 / polys.len() as f64;
        for c in &mut coeffs[..d] {
            *c *= inv;
        }
        coeffs[d] = ONE;
        Some(LocatorPolynomial { coeffs })
    }

    /// `|g(X_q)|²` for every worker `q = 1..N`.
    pub fn scores(&self, spec: &DftCodeSpec) -> Vec<f64> {
        spec.locator_points()
            .into_iter()
            .map(|x| self.eval(x).norm_sqr())
            .collect()
    }
}

/// Solves for the monic degree-`a` locator annihilating all syndrome windows.
///
/// Window `j` contributes the row `Σ_{l<a} g_l s_{j+l} = -s_{j+a}`; all
/// `N-K-a` windows enter one least-squares solve.
pub fn solve_locator(s: &Syndrome, a: usize) -> Result<LocatorPolynomial> {
    if a == 0 || s.len() < 2 * a {
        return Err(AlccError::InvalidParams {
            field: "a",
            reason: format!("need 1 <= A and 2A <= {} syndromes, got A = {a}", s.len()),
        });
    }
    let rows = s.len() - a;
    let m = DMatrix::from_fn(rows, a, |j, l| s.values[j + l]);
    let rhs = DVector::from_fn(rows, |j, _| -s.values[j + a]);
    let solution = least_squares(m, rhs)?;
    Ok(LocatorPolynomial::from_lower(
        solution.iter().copied().collect(),
    ))
}

fn least_squares(m: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Result<DVector<Complex64>> {
    let cols = m.ncols();
    let svd = m.svd(true, true);
    let max = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&x| x > RANK_EPS * max)
        .count();
    if max == 0.0 || rank < cols {
        return Err(AlccError::DegenerateSystem {
            rank,
            expected: cols,
        });
    }
    svd.solve(&rhs, 0.0)
        .map_err(|_| AlccError::DegenerateSystem {
            rank,
            expected: cols,
        })
}

/// Detected error locations and the per-candidate scores they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    /// 1-based worker indices, ascending.
    pub locations: Vec<usize>,
    /// `|g(X_q)|²` for `q = 1..N`.
    pub scores: Vec<f64>,
}

/// Picks the `deg g` workers with the smallest `|g(X_q)|²`; ties go to the
/// smaller worker index.
pub fn localize_independent(g: &LocatorPolynomial, spec: &DftCodeSpec) -> LocalizationResult {
    let scores = g.scores(spec);
    let locations = smallest_workers(&scores, g.degree());
    LocalizationResult { locations, scores }
}

/// 1-based indices of the `count` smallest scores, returned ascending.
/// Equal scores go to the smaller index.
pub fn smallest_workers(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = order[..count.min(scores.len())]
        .iter()
        .map(|i| i + 1)
        .collect();
    picked.sort_unstable();
    picked
}

/// Estimated error magnitudes at a set of locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorValues {
    pub values: Vec<Complex64>,
    /// 2-norm condition number of the Vandermonde system.
    pub condition: f64,
    /// Set when `condition` exceeded the configured bound.
    pub ill_conditioned: bool,
}

/// Default bound above which [`ErrorValues::ill_conditioned`] is raised.
pub const DEFAULT_CONDITION_BOUND: f64 = 1e8;

/// Least-squares solve of `s_m = Σ_a (ε_a / N) X_a^(K+m-1)`.
pub fn estimate_error_values(
    s: &Syndrome,
    locations: &[usize],
    spec: &DftCodeSpec,
    condition_bound: f64,
) -> Result<ErrorValues> {
    if locations.is_empty() {
        return Ok(ErrorValues {
            values: vec![],
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    check_locations(locations, spec)?;
    let exps: Vec<i64> = locations.iter().map(|&q| q as i64 - 1).collect();
    let m = DMatrix::from_fn(s.len(), locations.len(), |row, col| {
        root_of_unity(spec.n, exps[col] * (spec.k + row) as i64)
    });
    let rhs = DVector::from_column_slice(&s.values);
    let svd = m.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let y = svd
        .solve(&rhs, RANK_EPS * max)
        .map_err(|_| AlccError::DegenerateSystem {
            rank: 0,
            expected: locations.len(),
        })?;
    let n = spec.n as f64;
    Ok(ErrorValues {
        values: y.iter().map(|v| v * n).collect(),
        condition,
        ill_conditioned: condition > condition_bound,
    })
}

fn check_locations(locations: &[usize], spec: &DftCodeSpec) -> Result<()> {
    for (i, &q) in locations.iter().enumerate() {
        if q == 0 || q > spec.n {
            return Err(AlccError::IndexOutOfRange {
                index: q,
                max: spec.n,
            });
        }
        if locations[..i].contains(&q) {
            return Err(AlccError::InvalidParams {
                field: "locations",
                reason: format!("worker {q} listed twice"),
            });
        }
    }
    Ok(())
}

/// Subtracts the estimated error at each detected location.
pub fn correct_codeword(
    received: &[Complex64],
    locations: &[usize],
    values: &[Complex64],
) -> Vec<Complex64> {
    assert_eq!(locations.len(), values.len(), "one value per location");
    let mut out = received.to_vec();
    for (&q, &e) in locations.iter().zip(values) {
        out[q - 1] -= e;
    }
    out
}

/// Codeword of a length-`K` message: evaluations of `Σ c_j z^j` at every `α_i`.
pub fn encode_message(spec: &DftCodeSpec, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() != spec.k {
        return Err(AlccError::ShapeMismatch {
            expected: format!("{} message coefficients", spec.k),
            got: coeffs.len().to_string(),
        });
    }
    Ok((0..spec.n)
        .map(|i| {
            let a = root_of_unity(spec.n, -(i as i64));
            coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &cf| acc * a + cf)
        })
        .collect())
}

/// How the locator degree is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorCount {
    /// The true count is supplied.
    Oracle(usize),
    /// Estimated from the syndrome.
    Estimated(CountThresholds),
}

/// Every intermediate of a single-codeword decode.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub syndrome: Syndrome,
    pub count: usize,
    pub locator: Option<LocatorPolynomial>,
    pub localization: Option<LocalizationResult>,
    pub values: Option<ErrorValues>,
    pub corrected: Vec<Complex64>,
}

/// Full independent decode of one codeword: syndrome → count → locator →
/// localization → values → correction.
pub fn decode(
    spec: &DftCodeSpec,
    received: &[Complex64],
    count: ErrorCount,
) -> Result<DecodeOutcome> {
    let syndrome = compute_syndrome(spec, received)?;
    let v = spec.radius();
    let count = match count {
        ErrorCount::Oracle(a) => a.min(v),
        ErrorCount::Estimated(th) => estimate_error_count(&syndrome, v, th),
    };
    if count == 0 {
        return Ok(DecodeOutcome {
            syndrome,
            count,
            locator: None,
            localization: None,
            values: None,
            corrected: received.to_vec(),
        });
    }
    let locator = solve_locator(&syndrome, count)?;
    let localization = localize_independent(&locator, spec);
    let values = estimate_error_values(
        &syndrome,
        &localization.locations,
        spec,
        DEFAULT_CONDITION_BOUND,
    )?;
    let corrected = correct_codeword(received, &localization.locations, &values.values);
    Ok(DecodeOutcome {
        syndrome,
        count,
        locator: Some(locator),
        localization: Some(localization),
        values: Some(values),
        corrected,
    })
}
