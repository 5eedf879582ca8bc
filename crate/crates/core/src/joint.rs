//! Joint error localization across all locator polynomials of one round.
//!
//! The `M = u·h` codewords of a round share the same adversaries, so their
//! locators share roots. Degree-`v` locators all carry the full adversary set
//! and are averaged into one polynomial. The remaining ones are localized
//! jointly: every `v`-subset `S` of a candidate set is scored by
//! `E_S = Σ_m (sum of the d(m) smallest |t_m(X_q)|², q ∈ S)` and the
//! minimizing subset fixes each polynomial's roots.

use rand::seq::index::sample;
use rand::Rng;

use crate::dft::{localize_independent, LocatorPolynomial};
use crate::error::{AlccError, Result};
use crate::params::DftCodeSpec;

/// A locator polynomial tagged with the output entry it was solved for.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub poly: LocatorPolynomial,
    /// `(row, col)` of the output entry, 0-based.
    pub origin: (usize, usize),
}

/// The locator polynomials of one round, each of degree `1..=v`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolynomialBatch {
    pub entries: Vec<BatchEntry>,
}

impl PolynomialBatch {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One polynomial of `G_joint` and the batch entries it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoly {
    pub poly: LocatorPolynomial,
    /// Indices into the originating [`PolynomialBatch`].
    pub members: Vec<usize>,
}

impl JointPoly {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }
}

/// `G_joint = {ḡ_max} ∪ G_{v⁻}`: every degree-`v` polynomial replaced by
/// their coefficient-wise mean, listed first.
pub fn partition_and_average(batch: &PolynomialBatch, v: usize) -> Vec<JointPoly> {
    let (full, rest): (Vec<usize>, Vec<usize>) =
        (0..batch.len()).partition(|&i| batch.entries[i].poly.degree() == v);
    let mut out = Vec::with_capacity(rest.len() + 1);
    let full_polys: Vec<&LocatorPolynomial> =
        full.iter().map(|&i| &batch.entries[i].poly).collect();
    if let Some(avg) = LocatorPolynomial::average(&full_polys) {
        out.push(JointPoly {
            poly: avg,
            members: full,
        });
    }
    out.extend(rest.into_iter().map(|i| JointPoly {
        poly: batch.entries[i].poly.clone(),
        members: vec![i],
    }));
    out
}

/// Candidate workers for the joint search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCandidateSet {
    /// Distinct 1-based worker indices, ascending.
    pub roots: Vec<usize>,
    /// `|roots|`: `v''` for the full union, `v'` after subsampling.
    pub constraint_length: usize,
}

impl JointCandidateSet {
    pub fn new(mut roots: Vec<usize>) -> Self {
        roots.sort_unstable();
        roots.dedup();
        let constraint_length = roots.len();
        Self {
            roots,
            constraint_length,
        }
    }

    /// Every worker `1..=n`.
    pub fn all(n: usize) -> Self {
        Self::new((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Independent localization of every polynomial in `G_joint`, in order.
pub fn localize_each(joint: &[JointPoly], spec: &DftCodeSpec) -> Vec<Vec<usize>> {
    joint
        .iter()
        .map(|p| localize_independent(&p.poly, spec).locations)
        .collect()
}

/// `S_I`: union of the independently detected roots of every polynomial.
pub fn build_candidates(joint: &[JointPoly], spec: &DftCodeSpec) -> JointCandidateSet {
    JointCandidateSet::new(localize_each(joint, spec).into_iter().flatten().collect())
}

/// `S_II`: a uniformly random `v_prime`-subset of the candidates.
pub fn constrain_candidates<R: Rng + ?Sized>(
    candidates: &JointCandidateSet,
    v_prime: usize,
    rng: &mut R,
) -> Result<JointCandidateSet> {
    if v_prime > candidates.len() {
        return Err(AlccError::InvalidParams {
            field: "constraint_length",
            reason: format!("v' = {v_prime} exceeds |S_I| = {}", candidates.len()),
        });
    }
    let picked = sample(rng, candidates.len(), v_prime)
        .into_iter()
        .map(|i| candidates.roots[i])
        .collect();
    Ok(JointCandidateSet::new(picked))
}

/// Minimizer of the joint objective.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    /// `Ŝ`, ascending.
    pub subset: Vec<usize>,
    /// `E_Ŝ`.
    pub energy: f64,
    /// `R_{t_m}(Ŝ)` for each polynomial of `G_joint`, ascending.
    pub root_sets: Vec<Vec<usize>>,
    /// Union of `root_sets`: the detected adversaries.
    pub detected: Vec<usize>,
    /// Number of subsets scored.
    pub enumerated: u64,
}

/// `C(n, r)`, saturating.
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

/// How one polynomial's term is tracked while a subset grows.
#[derive(Clone, Copy)]
enum Keep {
    /// `E_m = running sum − (sum of the k largest)`; cheaper when `k` is small.
    Largest { k: usize, at: usize },
    /// `E_m = sum of the d smallest`.
    Smallest { d: usize, at: usize },
}

struct Search<'a> {
    size: usize,
    /// `Σ` of scores over polynomials whose full subset sum counts.
    additive: Vec<f64>,
    /// Per tracked polynomial, scores at each candidate.
    scores: Vec<Vec<f64>>,
    keeps: Vec<Keep>,
    buf_len: usize,
    roots: &'a [usize],
    best: Option<(f64, Vec<usize>)>,
    leaves: u64,
}

impl Search<'_> {
    fn run(&mut self) {
        let p = self.keeps.len();
        let mut sums = vec![0.0; (self.size + 1) * p];
        let mut bufs = vec![0.0; (self.size + 1) * self.buf_len];
        let mut chosen = Vec::with_capacity(self.size);
        self.descend(0, 0, 0.0, &mut sums, &mut bufs, &mut chosen);
    }

    fn descend(
        &mut self,
        start: usize,
        depth: usize,
        additive: f64,
        sums: &mut [f64],
        bufs: &mut [f64],
        chosen: &mut Vec<usize>,
    ) {
        let p = self.keeps.len();
        if depth == self.size {
            self.leaves += 1;
            let mut energy = additive;
            let sums_here = &sums[depth * p..(depth + 1) * p];
            let bufs_here = &bufs[depth * self.buf_len..(depth + 1) * self.buf_len];
            for (m, keep) in self.keeps.iter().enumerate() {
                energy += match *keep {
                    Keep::Largest { k, at } => {
                        sums_here[m] - bufs_here[at..at + k].iter().sum::<f64>()
                    }
                    Keep::Smallest { d, at } => bufs_here[at..at + d].iter().sum::<f64>(),
                };
            }
            let better = match &self.best {
                None => true,
                Some((e, _)) => energy < *e,
            };
            if better {
                self.best = Some((energy, chosen.clone()));
            }
            return;
        }
        let remaining = self.size - depth;
        let last_start = self.roots.len() - remaining;
        for j in start..=last_start {
            let (cur_s, next_s) = sums.split_at_mut((depth + 1) * p);
            let (cur_b, next_b) = bufs.split_at_mut((depth + 1) * self.buf_len);
            let cur_s = &cur_s[depth * p..];
            let cur_b = &cur_b[depth * self.buf_len..];
            let next_s = &mut next_s[..p];
            let next_b = &mut next_b[..self.buf_len];
            next_b.copy_from_slice(cur_b);
            for (m, keep) in self.keeps.iter().enumerate() {
                let w = self.scores[m][j];
                next_s[m] = cur_s[m] + w;
                match *keep {
                    Keep::Largest { k, at } => {
                        insert_bounded(&mut next_b[at..at + k], depth, w, |a, b| a > b)
                    }
                    Keep::Smallest { d, at } => {
                        insert_bounded(&mut next_b[at..at + d], depth, w, |a, b| a < b)
                    }
                }
            }
            chosen.push(j);
            let add = additive + self.additive[j];
            self.descend(j + 1, depth + 1, add, sums, bufs, chosen);
            chosen.pop();
        }
    }
}

/// Inserts `w` into the sorted prefix `buf[..filled.min(len)]`, keeping the
/// `len` most-preferred values under `before`.
fn insert_bounded(buf: &mut [f64], filled: usize, w: f64, before: impl Fn(f64, f64) -> bool) {
    let cap = buf.len();
    if cap == 0 {
        return;
    }
    let used = filled.min(cap);
    let mut pos = used;
    if used == cap {
        if !before(w, buf[cap - 1]) {
            return;
        }
        pos = cap - 1;
    }
    while pos > 0 && before(w, buf[pos - 1]) {
        buf[pos] = buf[pos - 1];
        pos -= 1;
    }
    buf[pos] = w;
}

/// Solves `Ŝ = argmin_S E_S` over the `v`-combinations of `candidates`.
///
/// When fewer than `v` candidates exist the whole set is the only subset.
/// Ties in `E_S` keep the lexicographically first subset.
pub fn joint_search(
    joint: &[JointPoly],
    candidates: &JointCandidateSet,
    v: usize,
    spec: &DftCodeSpec,
) -> Result<JointSolution> {
    let needed = joint.iter().map(JointPoly::degree).max().unwrap_or(0);
    if candidates.is_empty() || candidates.len() < needed {
        return Err(AlccError::CandidatesTooSmall {
            size: candidates.len(),
            needed,
        });
    }
    let roots = &candidates.roots;
    let size = v.min(roots.len()).max(needed);
    let points: Vec<_> = roots.iter().map(|&q| spec.locator_point(q)).collect();
    let all_scores: Vec<Vec<f64>> = joint
        .iter()
        .map(|p| points.iter().map(|&x| p.poly.eval(x).norm_sqr()).collect())
        .collect();

    let mut additive = vec![0.0; roots.len()];
    let mut scores = vec![];
    let mut keeps = vec![];
    let mut buf_len = 0;
    for (p, s) in joint.iter().zip(&all_scores) {
        let d = p.degree();
        let k = size - d;
        if k == 0 {
            for (a, w) in additive.iter_mut().zip(s) {
                *a += w;
            }
            continue;
        }
        keeps.push(if k <= d {
            Keep::Largest { k, at: buf_len }
        } else {
            Keep::Smallest { d, at: buf_len }
        });
        buf_len += k.min(d);
        scores.push(s.clone());
    }

    let mut search = Search {
        size,
        additive,
        scores,
        keeps,
        buf_len,
        roots,
        best: None,
        leaves: 0,
    };
    search.run();
    let (energy, picked) = search.best.expect("at least one subset exists");

    let subset: Vec<usize> = picked.iter().map(|&j| roots[j]).collect();
    let root_sets: Vec<Vec<usize>> = all_scores
        .iter()
        .zip(joint)
        .map(|(s, p)| {
            let local: Vec<f64> = picked.iter().map(|&j| s[j]).collect();
            crate::dft::smallest_workers(&local, p.degree())
                .into_iter()
                .map(|i| subset[i - 1])
                .collect::<Vec<_>>()
        })
        .map(|mut r| {
            r.sort_unstable();
            r
        })
        .collect();
    let mut detected: Vec<usize> = root_sets.iter().flatten().copied().collect();
    detected.sort_unstable();
    detected.dedup();
    Ok(JointSolution {
        subset,
        energy,
        root_sets,
        detected,
        enumerated: search.leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{compute_syndrome, solve_locator};
    use crate::rng::{complex_normal, rng_from};
    use num_complex::Complex64;

    fn spec() -> DftCodeSpec {
        DftCodeSpec::new(31, 15).unwrap()
    }

    fn locator_for(sp: &DftCodeSpec, workers: &[usize]) -> LocatorPolynomial {
        let pts: Vec<_> = workers.iter().map(|&q| sp.locator_point(q)).collect();
        LocatorPolynomial::from_roots(&pts)
    }

    fn single(poly: LocatorPolynomial) -> JointPoly {
        JointPoly {
            poly,
            members: vec![0],
        }
    }

    fn batch(polys: Vec<LocatorPolynomial>) -> PolynomialBatch {
        PolynomialBatch {
            entries: polys
                .into_iter()
                .enumerate()
                .map(|(i, poly)| BatchEntry {
                    poly,
                    origin: (i / 5, i % 5),
                })
                .collect(),
        }
    }

    /// Exhaustive oracle: scores every v-combination directly, taking the
    /// d(m) smallest by sorting.
    fn brute_force(
        joint: &[JointPoly],
        cands: &[usize],
        v: usize,
        sp: &DftCodeSpec,
    ) -> (f64, Vec<usize>, u64) {
        let size = v.min(cands.len());
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut count = 0;
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            count += 1;
            let subset: Vec<usize> = idx.iter().map(|&i| cands[i]).collect();
            let e: f64 = joint
                .iter()
                .map(|p| {
                    let mut vals: Vec<f64> = subset
                        .iter()
                        .map(|&q| p.poly.eval(sp.locator_point(q)).norm_sqr())
                        .collect();
                    vals.sort_by(f64::total_cmp);
                    vals[..p.degree()].iter().sum::<f64>()
                })
                .sum();
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                best = Some((e, subset));
            }
            // next combination in lexicographic order
            let mut i = size;
            loop {
                if i == 0 {
                    let (e, s) = best.unwrap();
                    return (e, s, count);
                }
                i -= 1;
                if idx[i] < cands.len() - size + i {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn identical_degree_v_polys_average_to_one() {
        let sp = spec();
        let g = locator_for(&sp, &[1, 4, 9]);
        let joint = partition_and_average(&batch(vec![g.clone(); 6]), 3);
        assert_eq!(joint.len(), 1);
        assert_eq!(joint[0].members, (0..6).collect::<Vec<_>>());
        for (a, b) in joint[0].poly.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn low_degree_batch_is_unchanged() {
        let sp = spec();
        let polys = vec![
            locator_for(&sp, &[1]),
            locator_for(&sp, &[2, 3]),
            locator_for(&sp, &[5]),
        ];
        let joint = partition_and_average(&batch(polys.clone()), 8);
        assert_eq!(joint.len(), 3);
        for (j, p) in joint.iter().zip(&polys) {
            assert_eq!(&j.poly, p);
        }
    }

    #[test]
    fn averaging_two_noisy_polys_halves_variance() {
        let sp = spec();
        let g = locator_for(&sp, &[2, 7]);
        let mut rng = rng_from(&[42]);
        let draws = 10_000;
        let (mut single_var, mut avg_var) = (0.0, 0.0);
        for _ in 0..draws {
            let mut a = g.clone();
            let mut b = g.clone();
            a.perturb(1.0, &mut rng);
            b.perturb(1.0, &mut rng);
            single_var += (a.coeffs()[0] - g.coeffs()[0]).norm_sqr();
            let joint = partition_and_average(&batch(vec![a, b]), 2);
            avg_var += (joint[0].poly.coeffs()[0] - g.coeffs()[0]).norm_sqr();
        }
        let ratio = avg_var / single_var;
        // Sample variance ratio of chi-square(2·10^4) draws: sd ≈ 0.014.
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn candidate_examples() {
        let sp = spec();
        let c = build_candidates(&[single(locator_for(&sp, &[3, 11, 20]))], &sp);
        assert_eq!(c.roots, vec![3, 11, 20]);
        assert_eq!(c.constraint_length, 3);

        let joint = vec![
            single(locator_for(&sp, &[1, 2])),
            single(locator_for(&sp, &[3])),
        ];
        assert_eq!(build_candidates(&joint, &sp).roots, vec![1, 2, 3]);
    }

    #[test]
    fn noisy_candidates_stay_in_range() {
        let sp = spec();
        let mut rng = rng_from(&[5]);
        for _ in 0..50 {
            let mut g = locator_for(&sp, &[4, 5, 6, 30]);
            g.perturb(1.0, &mut rng);
            let c = build_candidates(&[single(g)], &sp);
            assert!(c.roots.iter().all(|&q| (1..=31).contains(&q)));
        }
    }

    #[test]
    fn constraint_examples() {
        let s = JointCandidateSet::new(vec![9, 2, 14, 5, 30]);
        let mut rng = rng_from(&[1]);
        assert_eq!(constrain_candidates(&s, 5, &mut rng).unwrap(), s);
        let one = constrain_candidates(&s, 1, &mut rng).unwrap();
        assert_eq!(one.len(), 1);
        assert!(s.roots.contains(&one.roots[0]));
        let a = constrain_candidates(&s, 3, &mut rng_from(&[9])).unwrap();
        let b = constrain_candidates(&s, 3, &mut rng_from(&[9])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.constraint_length, 3);
        assert!(constrain_candidates(&s, 6, &mut rng).is_err());
    }

    #[test]
    fn single_poly_over_all_workers_reduces_to_independent() {
        let sp = spec();
        let mut rng = rng_from(&[13]);
        for a in [1usize, 3, 8] {
            let mut g = locator_for(&sp, &[2, 9, 10, 17, 23, 24, 28, 31][..a]);
            g.perturb(0.05, &mut rng);
            let joint = vec![single(g.clone())];
            let sol = joint_search(&joint, &JointCandidateSet::all(31), 8, &sp).unwrap();
            assert_eq!(sol.root_sets[0], localize_independent(&g, &sp).locations);
            assert_eq!(sol.enumerated, binomial(31, 8));
        }
    }

    #[test]
    fn noiseless_batch_recovers_adversaries() {
        let sp = spec();
        let mut rng = rng_from(&[3]);
        for trial in 0..500u64 {
            let a = (trial % 8) as usize + 1;
            let mut truth: Vec<usize> =
                sample(&mut rng, 31, a).into_iter().map(|q| q + 1).collect();
            truth.sort_unstable();
            // Each codeword is hit by a random non-empty subset of the adversaries.
            let mut polys = vec![];
            for _ in 0..25 {
                let mut hit: Vec<usize> = truth
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.6))
                    .collect();
                if hit.is_empty() {
                    hit.push(truth[0]);
                }
                let mut r = vec![Complex64::new(0.0, 0.0); 31];
                for &q in &hit {
                    r[q - 1] = complex_normal(&mut rng, Complex64::new(10.0, 0.0), 100.0);
                }
                let s = compute_syndrome(&sp, &r).unwrap();
                polys.push(solve_locator(&s, hit.len()).unwrap());
            }
            let joint = partition_and_average(&batch(polys), 8);
            let cands = build_candidates(&joint, &sp);
            let sol = joint_search(&joint, &cands, 8, &sp).unwrap();
            let mut union_truth: Vec<usize> = sol.detected.clone();
            union_truth.retain(|q| truth.contains(q));
            assert_eq!(
                sol.detected, union_truth,
                "spurious detection, trial {trial}"
            );
            assert!(sol.detected.len() <= a);
        }
    }

    #[test]
    fn joint_resolves_conflicting_independent_minima() {
        // Adversaries {3, 10}, v = 2. t1's second root sits 60% of the way
        // from X_10 to X_11, so on its own it picks {3, 11}; t2 is clean.
        let sp = spec();
        let x = |q| sp.locator_point(q);
        let drifted = crate::params::root_of_unity(31 * 5, 9 * 5 + 3);
        let t1 = LocatorPolynomial::from_roots(&[x(3), drifted]);
        let t2 = LocatorPolynomial::from_roots(&[x(3), x(10)]);
        assert_eq!(localize_independent(&t1, &sp).locations, vec![3, 11]);
        assert_eq!(localize_independent(&t2, &sp).locations, vec![3, 10]);

        let joint = vec![single(t1), single(t2)];
        let cands = build_candidates(&joint, &sp);
        assert_eq!(cands.roots, vec![3, 10, 11]);
        let sol = joint_search(&joint, &cands, 2, &sp).unwrap();
        let (e, subset, count) = brute_force(&joint, &cands.roots, 2, &sp);
        assert_eq!(sol.subset, subset);
        assert_eq!(sol.subset, vec![3, 10]);
        assert_eq!(sol.root_sets, vec![vec![3, 10], vec![3, 10]]);
        assert_eq!(sol.detected, vec![3, 10]);
        assert!((sol.energy - e).abs() <= 1e-9 * e.max(1.0));
        assert_eq!(count, 3);
    }

    #[test]
    fn matches_brute_force_on_random_batches() {
        let sp = spec();
        let mut rng = rng_from(&[77]);
        for trial in 0..40 {
            let polys: Vec<LocatorPolynomial> = (0..6)
                .map(|_| {
                    let d = rng.gen_range(1..=4);
                    let roots: Vec<usize> =
                        sample(&mut rng, 31, d).into_iter().map(|q| q + 1).collect();
                    let mut g = locator_for(&sp, &roots);
                    g.perturb(0.3, &mut rng);
                    g
                })
                .collect();
            let joint = partition_and_average(&batch(polys), 4);
            let cands = build_candidates(&joint, &sp);
            let sol = joint_search(&joint, &cands, 4, &sp).unwrap();
            let (e, subset, count) = brute_force(&joint, &cands.roots, 4, &sp);
            assert_eq!(sol.enumerated, count);
            assert_eq!(sol.enumerated, binomial(cands.len(), 4.min(cands.len())));
            assert!((sol.energy - e).abs() <= 1e-9 * e.max(1.0), "trial {trial}");
            assert_eq!(sol.subset, subset, "trial {trial}");
        }
    }

    #[test]
    fn energy_certificate_holds() {
        let sp = spec();
        let mut rng = rng_from(&[1234]);
        let polys: Vec<LocatorPolynomial> = (0..10)
            .map(|i| {
                let mut g = locator_for(&sp, &[5, 6, 19, 27][..1 + i % 4]);
                g.perturb(0.2, &mut rng);
                g
            })
            .collect();
        let joint = partition_and_average(&batch(polys), 4);
        let cands = JointCandidateSet::new((1..=12).collect());
        let sol = joint_search(&joint, &cands, 4, &sp).unwrap();
        assert!(sol.energy >= 0.0);
        let (e, _, _) = brute_force(&joint, &cands.roots, 4, &sp);
        assert!(sol.energy <= e + 1e-9 * e.max(1.0));
    }

    #[test]
    fn rejects_too_few_candidates() {
        let sp = spec();
        let joint = vec![single(locator_for(&sp, &[1, 2, 3]))];
        let err = joint_search(&joint, &JointCandidateSet::new(vec![1, 2]), 8, &sp).unwrap_err();
        assert_eq!(err, AlccError::CandidatesTooSmall { size: 2, needed: 3 });
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(31, 8), 7_888_725);
        assert_eq!(binomial(8, 8), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(16, 8), 12_870);
    }

    #[test]
    fn bounded_insert_keeps_extremes() {
        let mut buf = [0.0; 3];
        for (i, w) in [5.0, 1.0, 7.0, 3.0, 9.0].into_iter().enumerate() {
            insert_bounded(&mut buf, i, w, |a, b| a > b);
        }
        assert_eq!(buf, [9.0, 7.0, 5.0]);
        let mut buf = [0.0; 2];
        for (i, w) in [5.0, 1.0, 7.0, 3.0].into_iter().enumerate() {
            insert_bounded(&mut buf, i, w, |a, b| a < b);
        }
        assert_eq!(buf, [1.0, 3.0]);
    }
}
