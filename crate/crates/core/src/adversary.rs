//! Adversarial workers: sparsity patterns of their noise and its injection.
//!
//! Adversary `a` corrupts output entry `(ū, h̄)` when bit `(ū·h + h̄, a)` of
//! the effective base matrix is set. Row `r` of that matrix therefore holds
//! the error count seen by codeword `r`, i.e. the degree of its locator.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, AlccError, Result};
use crate::matrix::ComplexMatrix;
use crate::rng::complex_normal;

/// `uh × A` binary matrix; column `a` is the row-major flattening of the base
/// matrix of the `a`-th adversary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveBaseMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl EffectiveBaseMatrix {
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(AlccError::ShapeMismatch {
                expected: format!("{rows}x{cols} bits"),
                got: format!("{} bits", bits.len()),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn filled(rows: usize, cols: usize, bit: bool) -> Self {
        Self {
            rows,
            cols,
            bits: vec![bit; rows * cols],
        }
    }

    /// Stacks base matrices (each `u × h`, row-major) column-wise.
    pub fn from_base_matrices(u: usize, h: usize, bases: &[Vec<bool>]) -> Result<Self> {
        let rows = u * h;
        let mut out = Self::filled(rows, bases.len(), false);
        for (a, b) in bases.iter().enumerate() {
            if b.len() != rows {
                return Err(AlccError::ShapeMismatch {
                    expected: format!("{u}x{h} base matrix"),
                    got: format!("{} entries", b.len()),
                });
            }
            for (r, &bit) in b.iter().enumerate() {
                out.set(r, a, bit);
            }
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        self.bits[row * self.cols + col] = bit;
    }

    pub fn row_weight(&self, row: usize) -> usize {
        self.bits[row * self.cols..(row + 1) * self.cols]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows).map(|r| self.row_weight(r)).collect()
    }

    pub fn column_weight(&self, col: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, col)).count()
    }

    pub fn zeros(&self) -> usize {
        self.bits.iter().filter(|&&b| !b).count()
    }

    pub fn all_ones_rows(&self) -> usize {
        (0..self.rows)
            .filter(|&r| self.row_weight(r) == self.cols)
            .count()
    }

    /// Base matrix of adversary `col`, row-major `u × h`.
    pub fn base_matrix(&self, col: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// Strongly colluding pattern: row 1 all ones, every other row exactly
/// `v - 1` ones at uniformly random positions, drawn independently per row.
pub fn strong_beff<R: Rng + ?Sized>(
    m: usize,
    v: usize,
    rng: &mut R,
) -> Result<EffectiveBaseMatrix> {
    if m == 0 {
        return Err(invalid("m", "need at least one row"));
    }
    if v < 2 {
        return Err(invalid(
            "v",
            format!("strong pattern needs v >= 2, got {v}"),
        ));
    }
    let mut b = EffectiveBaseMatrix::filled(m, v, false);
    for a in 0..v {
        b.set(0, a, true);
    }
    for r in 1..m {
        for a in sample(rng, v, v - 1).into_iter() {
            b.set(r, a, true);
        }
    }
    Ok(b)
}

/// Weakly colluding pattern: i.i.d. bits, 0 with probability `p`.
pub fn weak_beff<R: Rng + ?Sized>(
    m: usize,
    v: usize,
    p: f64,
    rng: &mut R,
) -> Result<EffectiveBaseMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    let bits = (0..m * v).map(|_| !rng.gen_bool(p)).collect();
    EffectiveBaseMatrix::from_bits(m, v, bits)
}

/// `h(p) = p + (1-p)^v`, the weak-collusion objective scaled by `M`.
pub fn weak_objective(p: f64, v: usize) -> f64 {
    p + (1.0 - p).powi(v as i32)
}

/// Closed-form minimizer of [`weak_objective`] on `(0, 1)`: `1 - v^(-1/(v-1))`.
pub fn optimal_p(v: usize) -> Result<f64> {
    if v < 2 {
        return Err(invalid("v", format!("need v >= 2, got {v}")));
    }
    let v = v as f64;
    Ok(1.0 - v.powf(-1.0 / (v - 1.0)))
}

/// Minimizes [`weak_objective`] numerically, independent of the closed form:
/// the objective is convex on `(0, 1)`, so its minimizer is the unique sign
/// change of `h'(p) = 1 - v(1-p)^(v-1)`, located by bisection.
pub fn optimal_p_numeric(v: usize) -> Result<f64> {
    if v < 2 {
        return Err(invalid("v", format!("need v >= 2, got {v}")));
    }
    let slope = |p: f64| 1.0 - v as f64 * (1.0 - p).powi(v as i32 - 1);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Threat model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AttackModel {
    /// Adversaries return honest results.
    None,
    /// Every entry of every adversarial result is corrupted.
    #[default]
    Dense,
    /// Strongly colluding pattern from [`strong_beff`].
    Strong,
    /// Weakly colluding Bernoulli pattern from [`weak_beff`].
    Weak,
}

impl AttackModel {
    pub fn name(self) -> &'static str {
        match self {
            AttackModel::None => "none",
            AttackModel::Dense => "dense",
            AttackModel::Strong => "strong",
            AttackModel::Weak => "weak",
        }
    }
}

/// Attack parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default)]
    pub model: AttackModel,
    /// Number of adversaries `A`.
    pub adversaries: usize,
    /// Fixed 1-based adversary indices; drawn uniformly per trial when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary_indices: Option<Vec<usize>>,
    /// Real mean of the `CN(mean, variance)` noise on corrupted entries.
    pub noise_mean: f64,
    pub noise_variance: f64,
    /// Zero probability of the weak model; defaults to [`optimal_p`]`(A)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            model: AttackModel::Dense,
            adversaries: 0,
            adversary_indices: None,
            noise_mean: 10.0,
            noise_variance: 1e3,
            p: None,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self, n: usize, v: usize) -> Result<()> {
        if self.adversaries > v {
            return Err(invalid(
                "attack.adversaries",
                format!(
                    "A = {} exceeds the correction radius v = {v}",
                    self.adversaries
                ),
            ));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(invalid(
                "attack.noise_variance",
                "must be a non-negative real",
            ));
        }
        if !self.noise_mean.is_finite() {
            return Err(invalid("attack.noise_mean", "must be finite"));
        }
        if let Some(idx) = &self.adversary_indices {
            if idx.len() != self.adversaries {
                return Err(invalid(
                    "attack.adversary_indices",
                    format!("{} indices given for A = {}", idx.len(), self.adversaries),
                ));
            }
            for (i, &q) in idx.iter().enumerate() {
                if q == 0 || q > n {
                    return Err(invalid(
                        "attack.adversary_indices",
                        format!("{q} outside 1..={n}"),
                    ));
                }
                if idx[..i].contains(&q) {
                    return Err(invalid("attack.adversary_indices", format!("{q} repeated")));
                }
            }
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid("attack.p", format!("must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    /// Zero probability used by the weak model.
    pub fn weak_p(&self) -> Result<f64> {
        match self.p {
            Some(p) => Ok(p),
            None => optimal_p(self.adversaries.max(2)),
        }
    }

    /// The adversary set for one trial, ascending.
    pub fn pick_adversaries<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let mut idx = match &self.adversary_indices {
            Some(idx) => idx.clone(),
            None => sample(rng, n, self.adversaries)
                .into_iter()
                .map(|q| q + 1)
                .collect(),
        };
        idx.sort_unstable();
        idx
    }

    /// Sparsity pattern for `m` output entries. A single strong adversary has
    /// no `v - 1` choice and falls back to the dense pattern.
    pub fn pattern<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<EffectiveBaseMatrix> {
        let a = self.adversaries;
        match self.model {
            AttackModel::None => Ok(EffectiveBaseMatrix::filled(m, a, false)),
            AttackModel::Dense => Ok(EffectiveBaseMatrix::filled(m, a, true)),
            AttackModel::Strong if a < 2 => Ok(EffectiveBaseMatrix::filled(m, a, true)),
            AttackModel::Strong => strong_beff(m, a, rng),
            AttackModel::Weak => weak_beff(m, a, self.weak_p()?, rng),
        }
    }
}

/// Corrupted results plus the exact error matrix added to every worker.
#[derive(Debug, Clone)]
pub struct Injection {
    pub results: Vec<ComplexMatrix>,
    pub errors: Vec<ComplexMatrix>,
}

/// Adds `CN(noise_mean, noise_variance)` draws to the entries selected by
/// `beff`; column `a` belongs to worker `adversaries[a]`.
pub fn inject<R: Rng + ?Sized>(
    results: &[ComplexMatrix],
    adversaries: &[usize],
    config: &AttackConfig,
    beff: &EffectiveBaseMatrix,
    rng: &mut R,
) -> Result<Injection> {
    let first = results
        .first()
        .ok_or_else(|| invalid("results", "no worker results"))?;
    let (u, h) = first.shape();
    if beff.rows() != u * h || beff.cols() != adversaries.len() {
        return Err(AlccError::ShapeMismatch {
            expected: format!("{}x{} effective base matrix", u * h, adversaries.len()),
            got: format!("{}x{}", beff.rows(), beff.cols()),
        });
    }
    let mut out = results.to_vec();
    let mut errors = vec![ComplexMatrix::zeros(u, h); results.len()];
    if config.model == AttackModel::None {
        return Ok(Injection {
            results: out,
            errors,
        });
    }
    let mean = Complex64::new(config.noise_mean, 0.0);
    for (a, &q) in adversaries.iter().enumerate() {
        if q == 0 || q > results.len() {
            return Err(AlccError::IndexOutOfRange {
                index: q,
                max: results.len(),
            });
        }
        for r in 0..beff.rows() {
            if beff.get(r, a) {
                let e = complex_normal(rng, mean, config.noise_variance);
                errors[q - 1].as_mut_slice()[r] = e;
                out[q - 1].as_mut_slice()[r] += e;
            }
        }
    }
    Ok(Injection {
        results: out,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn strong_single_row_is_all_ones() {
        let b = strong_beff(1, 8, &mut rng_from(&[1])).unwrap();
        assert_eq!(b.row_weights(), vec![8]);
    }

    #[test]
    fn strong_row_weights() {
        let mut rng = rng_from(&[2]);
        for _ in 0..100 {
            let b = strong_beff(25, 8, &mut rng).unwrap();
            let w = b.row_weights();
            assert_eq!(w[0], 8);
            assert!(w[1..].iter().all(|&x| x == 7));
        }
        assert!(strong_beff(25, 1, &mut rng).is_err());
        assert!(strong_beff(0, 8, &mut rng).is_err());
    }

    #[test]
    fn strong_column_weight_expectation() {
        // Each non-first row omits one uniformly chosen column, so the
        // expected column weight is 1 + 24·7/8 = 22; sd per column ≈ 1.62.
        let mut rng = rng_from(&[3]);
        let draws = 4000;
        let mut total = vec![0usize; 8];
        for _ in 0..draws {
            let b = strong_beff(25, 8, &mut rng).unwrap();
            for (a, t) in total.iter_mut().enumerate() {
                *t += b.column_weight(a);
            }
        }
        let se = (24.0 * (1.0 / 8.0) * (7.0 / 8.0) / draws as f64).sqrt();
        for t in total {
            let mean = t as f64 / draws as f64;
            assert!((mean - 22.0).abs() < 4.0 * se, "{mean}");
        }
    }

    #[test]
    fn optimal_p_values() {
        assert!((optimal_p(8).unwrap() - 0.257).abs() < 1e-3);
        assert!((optimal_p(2).unwrap() - 0.5).abs() < 1e-15);
        assert!((optimal_p(3).unwrap() - (1.0 - 3f64.powf(-0.5))).abs() < 1e-15);
        assert!(optimal_p(1).is_err());
        for v in 2..=32 {
            let p = optimal_p(v).unwrap();
            let q = optimal_p_numeric(v).unwrap();
            assert!((p - q).abs() < 1e-9, "v={v}: {p} vs {q}");
            assert!(p > 0.0 && p <= 0.5);
            let h = weak_objective(p, v);
            assert!(h <= weak_objective(p + 0.01, v));
            assert!(h <= weak_objective(p - 0.01, v));
            if v > 2 {
                assert!(p < optimal_p(v - 1).unwrap());
            }
        }
    }

    #[test]
    fn weak_degenerate_p_is_all_ones() {
        let b = weak_beff(25, 8, 1e-9, &mut rng_from(&[4])).unwrap();
        assert_eq!(b.zeros(), 0);
        assert!(weak_beff(25, 8, 0.0, &mut rng_from(&[4])).is_err());
        assert!(weak_beff(25, 8, 1.0, &mut rng_from(&[4])).is_err());
    }

    #[test]
    fn weak_zero_and_all_ones_row_statistics() {
        let p = 0.257;
        let draws = 10_000;
        let mut rng = rng_from(&[5]);
        let (mut zeros, mut ones_rows) = (0usize, 0usize);
        for _ in 0..draws {
            let b = weak_beff(25, 8, p, &mut rng).unwrap();
            zeros += b.zeros();
            ones_rows += b.all_ones_rows();
        }
        let n = draws as f64;
        // Zeros ~ Binomial(200, p); all-ones rows ~ Binomial(25, (1-p)^8).
        let z_mean = zeros as f64 / n;
        let z_sd = (200.0 * p * (1.0 - p) / n).sqrt();
        assert!((z_mean - 51.4).abs() < 3.0 * z_sd, "{z_mean}");
        let q = (1.0 - p).powi(8);
        let o_mean = ones_rows as f64 / n;
        let o_sd = (25.0 * q * (1.0 - q) / n).sqrt();
        assert!((o_mean - 25.0 * q).abs() < 3.0 * o_sd, "{o_mean}");
        assert!((25.0 * q - 2.31).abs() < 0.02);
    }

    #[test]
    fn base_matrix_round_trip() {
        let mut rng = rng_from(&[6]);
        let b = weak_beff(25, 8, 0.3, &mut rng).unwrap();
        let bases: Vec<_> = (0..8).map(|a| b.base_matrix(a)).collect();
        let back = EffectiveBaseMatrix::from_base_matrices(5, 5, &bases).unwrap();
        assert_eq!(back, b);
    }

    fn results(n: usize) -> Vec<ComplexMatrix> {
        (0..n)
            .map(|i| ComplexMatrix::filled(5, 5, Complex64::new(i as f64, 0.0)))
            .collect()
    }

    #[test]
    fn no_attack_changes_nothing() {
        let cfg = AttackConfig {
            model: AttackModel::None,
            adversaries: 3,
            ..Default::default()
        };
        let base = results(31);
        let beff = cfg.pattern(25, &mut rng_from(&[1])).unwrap();
        let inj = inject(&base, &[2, 5, 9], &cfg, &beff, &mut rng_from(&[1])).unwrap();
        assert_eq!(inj.results, base);
        assert!(inj.errors.iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn dense_attack_hits_every_entry() {
        let cfg = AttackConfig {
            adversaries: 8,
            ..Default::default()
        };
        let base = results(31);
        let mut rng = rng_from(&[7]);
        let adv = cfg.pick_adversaries(31, &mut rng);
        let beff = cfg.pattern(25, &mut rng).unwrap();
        let inj = inject(&base, &adv, &cfg, &beff, &mut rng).unwrap();
        for q in 1..=31 {
            let diff = &inj.results[q - 1] - &base[q - 1];
            if adv.contains(&q) {
                assert!(diff.as_slice().iter().all(|z| z.norm() > 0.0));
                assert!((&diff - &inj.errors[q - 1]).norm() < 1e-12);
            } else {
                assert_eq!(diff.norm(), 0.0);
            }
        }
    }

    #[test]
    fn weak_attack_follows_pattern() {
        let cfg = AttackConfig {
            model: AttackModel::Weak,
            adversaries: 8,
            noise_variance: 1e2,
            p: Some(0.257),
            ..Default::default()
        };
        let mut rng = rng_from(&[8]);
        let adv = cfg.pick_adversaries(31, &mut rng);
        let beff = cfg.pattern(25, &mut rng).unwrap();
        let inj = inject(&results(31), &adv, &cfg, &beff, &mut rng).unwrap();
        for (a, &q) in adv.iter().enumerate() {
            for r in 0..25 {
                assert_eq!(inj.errors[q - 1].as_slice()[r].norm() > 0.0, beff.get(r, a));
            }
        }
    }

    #[test]
    fn injection_is_reproducible() {
        let cfg = AttackConfig {
            adversaries: 4,
            ..Default::default()
        };
        let beff = cfg.pattern(25, &mut rng_from(&[0])).unwrap();
        let a = inject(
            &results(31),
            &[1, 2, 3, 4],
            &cfg,
            &beff,
            &mut rng_from(&[9]),
        )
        .unwrap();
        let b = inject(
            &results(31),
            &[1, 2, 3, 4],
            &cfg,
            &beff,
            &mut rng_from(&[9]),
        )
        .unwrap();
        let c = inject(
            &results(31),
            &[1, 2, 3, 4],
            &cfg,
            &beff,
            &mut rng_from(&[10]),
        )
        .unwrap();
        assert_eq!(a.results, b.results);
        assert_ne!(a.results, c.results);
    }

    #[test]
    fn config_validation() {
        let ok = AttackConfig {
            adversaries: 8,
            ..Default::default()
        };
        assert!(ok.validate(31, 8).is_ok());
        assert!(AttackConfig {
            adversaries: 9,
            ..Default::default()
        }
        .validate(31, 8)
        .is_err());
        let dup = AttackConfig {
            adversaries: 2,
            adversary_indices: Some(vec![3, 3]),
            ..Default::default()
        };
        assert!(dup.validate(31, 8).is_err());
        let bad_p = AttackConfig {
            p: Some(1.0),
            ..ok.clone()
        };
        assert!(bad_p.validate(31, 8).is_err());
        assert!((ok.weak_p().unwrap() - optimal_p(8).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_pattern() {
        let cfg = AttackConfig {
            adversaries: 2,
            ..Default::default()
        };
        let beff = EffectiveBaseMatrix::filled(24, 2, true);
        assert!(inject(&results(31), &[1, 2], &cfg, &beff, &mut rng_from(&[1])).is_err());
    }
}
