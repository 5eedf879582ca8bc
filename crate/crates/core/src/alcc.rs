//! Lagrange encoding of a dataset into worker shares, and recovery of
//! `f(X_r)` from the returned computations.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, AlccError, Result};
use crate::matrix::ComplexMatrix;
use crate::params::{root_of_unity, AlccParams};
use crate::rng::complex_normal;

/// `k` equally-shaped data blocks `X_1..X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    blocks: Vec<ComplexMatrix>,
}

impl Dataset {
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| invalid("blocks", "dataset must contain at least one block"))?;
        for b in &blocks[1..] {
            first.check_same_shape(b)?;
        }
        Ok(Self { blocks })
    }

    /// Splits a real `(k·m) × n` row-major matrix row-wise into `k` blocks of `m × n`.
    pub fn split_rows(rows: usize, cols: usize, data: &[f64], k: usize) -> Result<Self> {
        if k == 0 || !rows.is_multiple_of(k) {
            return Err(invalid(
                "k",
                format!("{rows} rows cannot be split into {k} equal blocks"),
            ));
        }
        if data.len() != rows * cols {
            return Err(AlccError::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        let m = rows / k;
        let blocks = data
            .chunks(m * cols)
            .map(|chunk| ComplexMatrix::from_real(m, cols, chunk))
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.blocks[0].shape()
    }
}

/// `l_r(z) = prod_{l != r} (z - beta_l) / (beta_r - beta_l)`, with `r` 1-based.
pub fn lagrange_monomial(params: &AlccParams, r: usize, z: Complex64) -> Result<Complex64> {
    let nodes = params.nodes();
    if r == 0 || r > nodes {
        return Err(AlccError::IndexOutOfRange {
            index: r,
            max: nodes,
        });
    }
    let betas = params.beta_nodes();
    Ok(monomial(&betas, r - 1, z))
}

fn monomial(betas: &[Complex64], r: usize, z: Complex64) -> Complex64 {
    betas
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != r)
        .fold(Complex64::new(1.0, 0.0), |acc, (_, &bl)| {
            acc * (z - bl) / (betas[r] - bl)
        })
}

/// Encodes `data` into the `N` shares `Y_i = u(alpha_i)`.
///
/// `u(z) = sum_r Z_r l_r(z)` with `Z = (X_1..X_k, N_1..N_t)`, where the privacy
/// matrices carry i.i.d. `CN(0, sigma²/t)` entries drawn from `rng`.
pub fn encode_shares<R: Rng + ?Sized>(
    params: &AlccParams,
    data: &Dataset,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>> {
    if data.len() != params.k {
        return Err(invalid(
            "k",
            format!(
                "dataset has {} blocks, params expect {}",
                data.len(),
                params.k
            ),
        ));
    }
    let (m, n) = data.block_shape();
    let mut z: Vec<ComplexMatrix> = data.blocks().to_vec();
    if params.t > 0 {
        let variance = params.sigma * params.sigma / params.t as f64;
        for _ in 0..params.t {
            let entries = (0..m * n)
                .map(|_| complex_normal(rng, Complex64::new(0.0, 0.0), variance))
                .collect();
            z.push(ComplexMatrix::new(m, n, entries)?);
        }
    }

    let betas = params.beta_nodes();
    let shares = (1..=params.n)
        .map(|i| {
            let alpha = params.alpha(i);
            let mut share = ComplexMatrix::zeros(m, n);
            for (r, zr) in z.iter().enumerate() {
                share.axpy(monomial(&betas, r, alpha), zr);
            }
            share
        })
        .collect();
    Ok(shares)
}

/// Matrix-valued coefficients of `f(u(z))` recovered from all `N` evaluations.
#[derive(Debug, Clone)]
pub struct ComposedPolynomial {
    /// `c_0..c_{K-1}`.
    pub coeffs: Vec<ComplexMatrix>,
    /// Frobenius norm of the discarded inverse-DFT positions `K..N-1`.
    pub tail_energy: f64,
    /// Frobenius norm over all `N` positions.
    pub total_energy: f64,
}

impl ComposedPolynomial {
    pub fn tail_ratio(&self) -> f64 {
        if self.total_energy == 0.0 {
            0.0
        } else {
            self.tail_energy / self.total_energy
        }
    }
}

/// Interpolates `f(u(z))` from `values[i-1] = f(u(alpha_i))`.
///
/// The evaluation points are exactly the `N`-th roots of unity, so the
/// coefficients are the entrywise length-`N` inverse DFT truncated to `K` terms.
pub fn interpolate_composed(
    values: &[ComplexMatrix],
    params: &AlccParams,
) -> Result<ComposedPolynomial> {
    let n = params.n;
    if values.len() != n {
        return Err(AlccError::ShapeMismatch {
            expected: format!("{n} values"),
            got: format!("{} values", values.len()),
        });
    }
    for v in &values[1..] {
        values[0].check_same_shape(v)?;
    }
    let (rows, cols) = values[0].shape();
    let big_k = params.code_dimension();
    let scale = 1.0 / n as f64;

    let mut coeffs = Vec::with_capacity(big_k);
    let mut tail_sqr = 0.0;
    let mut total_sqr = 0.0;
    for j in 0..n {
        let mut c = ComplexMatrix::zeros(rows, cols);
        for (i, v) in values.iter().enumerate() {
            let w = root_of_unity(n, (i * j) as i64) * scale;
            c.axpy(w, v);
        }
        let e = c.norm_sqr();
        total_sqr += e;
        if j < big_k {
            coeffs.push(c);
        } else {
            tail_sqr += e;
        }
    }
    Ok(ComposedPolynomial {
        coeffs,
        tail_energy: tail_sqr.sqrt(),
        total_energy: total_sqr.sqrt(),
    })
}

/// Horner evaluation at `beta_1..beta_k`, giving the recovered `f(X_r)`.
pub fn evaluate_at_betas(
    coeffs: &[ComplexMatrix],
    params: &AlccParams,
) -> Result<Vec<ComplexMatrix>> {
    let last = coeffs
        .last()
        .ok_or_else(|| invalid("coeffs", "polynomial has no coefficients"))?;
    for c in coeffs {
        last.check_same_shape(c)?;
    }
    Ok((1..=params.k)
        .map(|r| horner(coeffs, params.beta_node(r)))
        .collect())
}

fn horner(coeffs: &[ComplexMatrix], z: Complex64) -> ComplexMatrix {
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.scale(z);
        acc.axpy(Complex64::new(1.0, 0.0), c);
    }
    acc
}

/// `‖reference − estimate‖ / ‖reference‖` in the Frobenius norm.
pub fn relative_error(reference: &ComplexMatrix, estimate: &ComplexMatrix) -> Result<f64> {
    reference.check_same_shape(estimate)?;
    let denom = reference.norm();
    if denom == 0.0 {
        return Err(AlccError::ZeroNormReference);
    }
    Ok((reference - estimate).norm() / denom)
}

/// Block-wise relative error: all blocks are concatenated before taking norms.
pub fn relative_error_blocks(
    reference: &[ComplexMatrix],
    estimate: &[ComplexMatrix],
) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(AlccError::ShapeMismatch {
            expected: format!("{} blocks", reference.len()),
            got: format!("{} blocks", estimate.len()),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, e) in reference.iter().zip(estimate) {
        r.check_same_shape(e)?;
        num += (r - e).norm_sqr();
        den += r.norm_sqr();
    }
    if den == 0.0 {
        return Err(AlccError::ZeroNormReference);
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::PolyFunction;
    use crate::rng::rng_from;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig1(d: usize, sigma: f64) -> AlccParams {
        AlccParams::new(31, 5, 3, d, 1.5, sigma).unwrap()
    }

    fn random_dataset(k: usize, m: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(&[seed]);
        let data: Vec<f64> = (0..k * m * n).map(|_| rng.sample(StandardNormal)).collect();
        Dataset::split_rows(k * m, n, &data, k).unwrap()
    }

    #[test]
    fn monomial_is_kronecker_on_nodes() {
        let p = fig1(2, 0.0);
        for r in 1..=p.nodes() {
            for l in 1..=p.nodes() {
                let v = lagrange_monomial(&p, r, p.beta_node(l)).unwrap();
                let want = if r == l { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-12, "r={r} l={l} {v}");
            }
        }
    }

    #[test]
    fn monomial_two_nodes_at_origin() {
        // beta_1 = 1, beta_2 = -1: l_1(z) = (z + 1) / 2.
        let p = AlccParams {
            n: 4,
            k: 1,
            t: 1,
            d: 1,
            beta: 1.0,
            sigma: 0.0,
        };
        let v = lagrange_monomial(&p, 1, c(0.0, 0.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn monomial_rejects_out_of_range() {
        let p = fig1(2, 0.0);
        assert!(lagrange_monomial(&p, 0, c(0.0, 0.0)).is_err());
        assert!(lagrange_monomial(&p, 9, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn partition_of_unity() {
        let p = fig1(2, 0.0);
        let mut rng = rng_from(&[11]);
        for _ in 0..100 {
            let z = complex_normal(&mut rng, c(0.0, 0.0), 4.0);
            let sum: Complex64 = (1..=p.nodes())
                .map(|r| lagrange_monomial(&p, r, z).unwrap())
                .sum();
            assert!((sum - c(1.0, 0.0)).norm() < 1e-9, "{z} -> {sum}");
        }
    }

    #[test]
    fn single_block_without_noise_is_constant() {
        let p = AlccParams::new(7, 1, 0, 2, 1.5, 5.0).unwrap();
        let data = random_dataset(1, 2, 3, 3);
        let shares = encode_shares(&p, &data, &mut rng_from(&[1])).unwrap();
        assert_eq!(shares.len(), 7);
        for s in &shares {
            assert!(relative_error(&data.blocks()[0], s).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_sigma_is_seed_independent() {
        let p = fig1(2, 0.0);
        let data = random_dataset(5, 4, 5, 3);
        let a = encode_shares(&p, &data, &mut rng_from(&[1])).unwrap();
        let b = encode_shares(&p, &data, &mut rng_from(&[2])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_mismatched_blocks() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(Dataset::new(vec![a, b]).is_err());
        let p = fig1(2, 0.0);
        let data = random_dataset(4, 2, 2, 1);
        assert!(encode_shares(&p, &data, &mut rng_from(&[1])).is_err());
    }

    #[test]
    fn identity_round_trip_with_large_privacy_noise() {
        let p = fig1(1, 1e6);
        let data = random_dataset(5, 4, 5, 9);
        let shares = encode_shares(&p, &data, &mut rng_from(&[4])).unwrap();
        let poly = interpolate_composed(&shares, &p).unwrap();
        let rec = evaluate_at_betas(&poly.coeffs, &p).unwrap();
        let e = relative_error_blocks(data.blocks(), &rec).unwrap();
        assert!(e < 1e-6, "round-trip residual {e}");
    }

    #[test]
    fn identity_round_trip_noiseless() {
        let p = AlccParams::new(31, 5, 3, 1, 1.5, 0.0).unwrap();
        for seed in 0..10 {
            let data = random_dataset(5, 4, 5, seed);
            let shares = encode_shares(&p, &data, &mut rng_from(&[seed])).unwrap();
            let poly = interpolate_composed(&shares, &p).unwrap();
            let rec = evaluate_at_betas(&poly.coeffs, &p).unwrap();
            for (x, y) in data.blocks().iter().zip(&rec) {
                assert!(relative_error(x, y).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn constant_values_interpolate_to_constant() {
        let p = fig1(2, 0.0);
        let cm = ComplexMatrix::filled(2, 3, c(1.5, -2.0));
        let poly = interpolate_composed(&vec![cm.clone(); 31], &p).unwrap();
        assert_eq!(poly.coeffs.len(), 15);
        assert!(relative_error(&cm, &poly.coeffs[0]).unwrap() < 1e-14);
        for coeff in &poly.coeffs[1..] {
            assert!(coeff.norm() < 1e-13);
        }
        assert!(poly.tail_energy < 1e-13);
    }

    #[test]
    fn recovers_scalar_polynomial_coefficients() {
        // Synthesize P(alpha_i) from known coefficients by direct evaluation.
        let p = fig1(2, 0.0);
        let mut rng = rng_from(&[21]);
        let truth: Vec<Complex64> = (0..15)
            .map(|_| complex_normal(&mut rng, c(0.0, 0.0), 2.0))
            .collect();
        let values: Vec<ComplexMatrix> = (1..=31)
            .map(|i| {
                let a = p.alpha(i);
                let v: Complex64 = truth
                    .iter()
                    .enumerate()
                    .map(|(j, cj)| cj * a.powu(j as u32))
                    .sum();
                ComplexMatrix::new(1, 1, vec![v]).unwrap()
            })
            .collect();
        let poly = interpolate_composed(&values, &p).unwrap();
        let err: f64 = truth
            .iter()
            .zip(&poly.coeffs)
            .map(|(t, got)| (t - got[(0, 0)]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = truth.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-9);
        assert!(poly.tail_ratio() < 1e-12);
    }

    #[test]
    fn interpolation_rejects_bad_input() {
        let p = fig1(2, 0.0);
        assert!(interpolate_composed(&vec![ComplexMatrix::zeros(1, 1); 30], &p).is_err());
        let mut v = vec![ComplexMatrix::zeros(1, 1); 31];
        v[3] = ComplexMatrix::zeros(2, 1);
        assert!(interpolate_composed(&v, &p).is_err());
    }

    #[test]
    fn evaluation_of_low_degree_coefficients() {
        let p = fig1(2, 0.0);
        let c0 = ComplexMatrix::filled(2, 2, c(1.0, 1.0));
        let c1 = ComplexMatrix::filled(2, 2, c(-2.0, 0.5));
        let out = evaluate_at_betas(&[c0.clone(), ComplexMatrix::zeros(2, 2)], &p).unwrap();
        assert_eq!(out.len(), 5);
        for o in &out {
            assert!(relative_error(&c0, o).unwrap() < 1e-15);
        }
        let out = evaluate_at_betas(&[c0.clone(), c1.clone()], &p).unwrap();
        let mut want = c0.clone();
        want.axpy(c(1.5, 0.0), &c1);
        assert!(relative_error(&want, &out[0]).unwrap() < 1e-15);
    }

    #[test]
    fn gram_pipeline_without_adversaries() {
        let p = fig1(2, 1e6);
        let data = random_dataset(5, 4, 5, 17);
        let shares = encode_shares(&p, &data, &mut rng_from(&[5])).unwrap();
        let results: Vec<_> = shares.iter().map(|s| PolyFunction::Gram.apply(s)).collect();
        let poly = interpolate_composed(&results, &p).unwrap();
        assert!(poly.tail_ratio() < 1e-6, "tail ratio {}", poly.tail_ratio());
        let rec: Vec<_> = evaluate_at_betas(&poly.coeffs, &p)
            .unwrap()
            .iter()
            .map(ComplexMatrix::real_projection)
            .collect();
        let want: Vec<_> = data
            .blocks()
            .iter()
            .map(|x| PolyFunction::Gram.apply(x))
            .collect();
        let e = relative_error_blocks(&want, &rec).unwrap();
        assert!(e < 1e-3, "baseline e_rel {e}");
    }

    #[test]
    fn relative_error_examples() {
        let y = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(relative_error(&y, &y).unwrap(), 0.0);
        assert!((relative_error(&y, &y.scale(c(2.0, 0.0))).unwrap() - 1.0).abs() < 1e-15);
        let mut z = y.clone();
        z[(1, 0)] += c(0.25, 0.0);
        assert!((relative_error(&y, &z).unwrap() - 0.25 / y.norm()).abs() < 1e-15);
        assert_eq!(
            relative_error(&ComplexMatrix::zeros(2, 2), &y),
            Err(AlccError::ZeroNormReference)
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = Complex64> {
            (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn interpolation_is_linear(
                v in proptest::collection::vec(cplx(), 31),
                w in proptest::collection::vec(cplx(), 31),
                a in cplx(),
                b in cplx(),
            ) {
                let p = AlccParams::new(31, 5, 3, 2, 1.5, 0.0).unwrap();
                let wrap = |xs: &[Complex64]| -> Vec<ComplexMatrix> {
                    xs.iter().map(|&x| ComplexMatrix::new(1, 1, vec![x]).unwrap()).collect()
                };
                let mixed: Vec<Complex64> = v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
                let lhs = interpolate_composed(&wrap(&mixed), &p).unwrap();
                let pv = interpolate_composed(&wrap(&v), &p).unwrap();
                let pw = interpolate_composed(&wrap(&w), &p).unwrap();
                for j in 0..15 {
                    let rhs = a * pv.coeffs[j][(0, 0)] + b * pw.coeffs[j][(0, 0)];
                    prop_assert!((lhs.coeffs[j][(0, 0)] - rhs).norm() < 1e-9);
                }
            }

            #[test]
            fn evaluation_commutes_with_scaling(
                cs in proptest::collection::vec(cplx(), 15),
                s in cplx(),
            ) {
                let p = AlccParams::new(31, 5, 3, 2, 1.5, 0.0).unwrap();
                let coeffs: Vec<_> = cs.iter().map(|&x| ComplexMatrix::new(1, 1, vec![x]).unwrap()).collect();
                let scaled: Vec<_> = coeffs.iter().map(|m| m.scale(s)).collect();
                let a = evaluate_at_betas(&coeffs, &p).unwrap();
                let b = evaluate_at_betas(&scaled, &p).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    let want = x[(0, 0)] * s;
                    prop_assert!((y[(0, 0)] - want).norm() <= 1e-9 * (1.0 + want.norm()));
                }
            }
        }
    }
}
