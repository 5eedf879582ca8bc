//! One full ALCC round: encode, compute, attack, perturb, decode, recover.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::adversary::inject;
use crate::alcc::{
    encode_shares, evaluate_at_betas, interpolate_composed, relative_error_blocks, Dataset,
};
use crate::dft::{
    compute_syndrome, correct_codeword, estimate_error_count, estimate_error_values,
    localize_independent, solve_locator, LocatorPolynomial, Syndrome,
};
use crate::error::Result;
use crate::joint::{
    build_candidates, constrain_candidates, joint_search, localize_each, partition_and_average,
    BatchEntry, PolynomialBatch,
};
use crate::matrix::ComplexMatrix;
use crate::rng::{complex_normal, stream, SimRng, Stream};
use crate::sim::config::{CountMode, DecoderMode, Distribution, ExperimentConfig, PrecisionMode};

/// Wall-clock time spent in each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub encode: Duration,
    pub compute: Duration,
    pub attack: Duration,
    pub decode: Duration,
    pub recover: Duration,
}

/// Outcome of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub e_rel: f64,
    /// `20·log10(e_rel)`.
    pub e_rel_db: f64,
    /// Adversaries that corrupted at least one entry, ascending.
    pub true_locations: Vec<usize>,
    /// Union of the locations corrected across all codewords, ascending.
    pub detected_locations: Vec<usize>,
    /// `|true \ detected|`.
    pub localization_misses: usize,
    /// `Σ_m |true_m \ detected_m|` over codewords.
    pub codeword_misses: usize,
    /// `Σ_m |true_m|`, the denominator of the per-codeword miss rate.
    pub codeword_errors: usize,
    /// Locator degree used per codeword (0 when left uncorrected).
    pub locator_degrees: Vec<usize>,
    /// `|S_I|` of the joint search, when run.
    pub candidate_count: Option<usize>,
    /// Subsets scored by the joint search.
    pub subsets_enumerated: u64,
    /// Codewords whose locator system was degenerate (left uncorrected).
    pub degenerate: usize,
    /// Codewords whose error-value system exceeded the condition bound.
    pub ill_conditioned: usize,
    /// Inverse-DFT tail energy over total energy after correction.
    pub tail_ratio: f64,
    /// Norm of the imaginary residue of the recovered results.
    pub imag_residue: f64,
    pub timing: StageTimings,
}

impl TrialResult {
    pub fn mean_locator_degree(&self) -> f64 {
        if self.locator_degrees.is_empty() {
            return 0.0;
        }
        self.locator_degrees.iter().sum::<usize>() as f64 / self.locator_degrees.len() as f64
    }
}

/// `20·log10(e)`, floored at the smallest positive double.
pub fn to_db(e: f64) -> f64 {
    20.0 * e.max(f64::MIN_POSITIVE).log10()
}

fn generate_dataset(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<Dataset> {
    let g = &cfg.dataset_gen;
    let data: Vec<f64> = (0..g.rows * g.cols)
        .map(|_| {
            let x: f64 = match g.distribution {
                Distribution::StandardNormal => rng.sample(StandardNormal),
                Distribution::Uniform => rng.gen_range(-1.0..=1.0),
            };
            x * g.scale
        })
        .collect();
    Dataset::split_rows(g.rows, g.cols, &data, cfg.alcc.k)
}

/// Per-codeword decoding state.
struct Codeword {
    received: Vec<Complex64>,
    syndrome: Syndrome,
    truth: Vec<usize>,
    locator: Option<LocatorPolynomial>,
    locations: Vec<usize>,
}

/// Runs one round of `cfg` with every random draw derived from `trial_seed`.
pub fn run_trial(cfg: &ExperimentConfig, trial_seed: u64) -> Result<TrialResult> {
    let params = &cfg.alcc;
    let spec = params.code();
    let v = spec.radius();
    let mut timing = StageTimings::default();

    let t0 = Instant::now();
    let data = generate_dataset(cfg, &mut stream(trial_seed, Stream::Dataset))?;
    let shares = encode_shares(params, &data, &mut stream(trial_seed, Stream::Privacy))?;
    timing.encode = t0.elapsed();

    let t0 = Instant::now();
    let honest: Vec<ComplexMatrix> = shares.iter().map(|s| cfg.f_spec.apply(s)).collect();
    let reference: Vec<ComplexMatrix> = data
        .blocks()
        .iter()
        .map(|x| cfg.f_spec.apply(x).real_projection())
        .collect();
    timing.compute = t0.elapsed();

    let t0 = Instant::now();
    let (u, h) = honest[0].shape();
    let m = u * h;
    let adversaries = cfg
        .attack
        .pick_adversaries(params.n, &mut stream(trial_seed, Stream::Adversaries));
    let beff = cfg
        .attack
        .pattern(m, &mut stream(trial_seed, Stream::Pattern))?;
    let injection = inject(
        &honest,
        &adversaries,
        &cfg.attack,
        &beff,
        &mut stream(trial_seed, Stream::AttackNoise),
    )?;
    let mut returned = injection.results;
    let mut precision_rng = stream(trial_seed, Stream::Precision);
    if cfg.precision.mode == PrecisionMode::EndToEnd && cfg.precision.variance > 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        for r in &mut returned {
            for z in r.as_mut_slice() {
                *z += complex_normal(&mut precision_rng, zero, cfg.precision.variance);
            }
        }
    }
    timing.attack = t0.elapsed();

    let t0 = Instant::now();
    let mut codewords: Vec<Codeword> = (0..m)
        .map(|r| {
            let received: Vec<Complex64> = returned.iter().map(|w| w.as_slice()[r]).collect();
            let truth: Vec<usize> = adversaries
                .iter()
                .enumerate()
                .filter(|&(a, _)| beff.get(r, a))
                .map(|(_, &q)| q)
                .collect();
            Ok(Codeword {
                syndrome: compute_syndrome(&spec, &received)?,
                received,
                truth,
                locator: None,
                locations: vec![],
            })
        })
        .collect::<Result<_>>()?;

    let mut degenerate = 0;
    let mut candidate_count = None;
    let mut subsets_enumerated = 0;
    if cfg.decoder.mode != DecoderMode::None {
        for cw in &mut codewords {
            let count = match cfg.decoder.error_count {
                CountMode::Oracle => cw.truth.len().min(v),
                CountMode::Estimated => {
                    estimate_error_count(&cw.syndrome, v, cfg.decoder.thresholds())
                }
            };
            if count == 0 {
                continue;
            }
            match solve_locator(&cw.syndrome, count) {
                Ok(mut g) => {
                    if cfg.precision.mode == PrecisionMode::LocatorLevel {
                        g.perturb(cfg.precision.variance, &mut precision_rng);
                    }
                    cw.locator = Some(g);
                }
                Err(_) => degenerate += 1,
            }
        }
        let solved: Vec<usize> = (0..m).filter(|&r| codewords[r].locator.is_some()).collect();
        match cfg.decoder.mode {
            DecoderMode::None => unreachable!(),
            DecoderMode::Independent => {
                for &r in &solved {
                    let g = codewords[r].locator.as_ref().expect("solved");
                    codewords[r].locations = localize_independent(g, &spec).locations;
                }
            }
            DecoderMode::Averaged | DecoderMode::Joint if !solved.is_empty() => {
                let batch = PolynomialBatch {
                    entries: solved
                        .iter()
                        .map(|&r| BatchEntry {
                            poly: codewords[r].locator.clone().expect("solved"),
                            origin: (r / h, r % h),
                        })
                        .collect(),
                };
                let joint = partition_and_average(&batch, v);
                let root_sets = if cfg.decoder.mode == DecoderMode::Averaged {
                    localize_each(&joint, &spec)
                } else {
                    let mut cands = build_candidates(&joint, &spec);
                    candidate_count = Some(cands.len());
                    if let Some(vp) = cfg.decoder.constraint_length {
                        let mut rng = stream(trial_seed, Stream::Subsample);
                        let target = vp.min(cands.len());
                        cands = constrain_candidates(&cands, target, &mut rng)?;
                    }
                    let needed = joint.iter().map(|p| p.degree()).max().unwrap_or(0);
                    if cands.len() < needed {
                        // Too few sampled candidates: fall back to independent roots.
                        localize_each(&joint, &spec)
                    } else {
                        let sol = joint_search(&joint, &cands, v, &spec)?;
                        subsets_enumerated = sol.enumerated;
                        sol.root_sets
                    }
                };
                for (jp, roots) in joint.iter().zip(root_sets) {
                    for &member in &jp.members {
                        codewords[solved[member]].locations = roots.clone();
                    }
                }
            }
            DecoderMode::Averaged | DecoderMode::Joint => {}
        }
    }

    let mut ill_conditioned = 0;
    let mut corrected_entries: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for cw in &codewords {
        if cw.locations.is_empty() {
            corrected_entries.push(cw.received.clone());
            continue;
        }
        let values = estimate_error_values(
            &cw.syndrome,
            &cw.locations,
            &spec,
            cfg.decoder.condition_bound,
        )?;
        if values.ill_conditioned {
            ill_conditioned += 1;
        }
        corrected_entries.push(correct_codeword(
            &cw.received,
            &cw.locations,
            &values.values,
        ));
    }
    timing.decode = t0.elapsed();

    let t0 = Instant::now();
    let corrected: Vec<ComplexMatrix> = (0..params.n)
        .map(|i| {
            let entries = corrected_entries.iter().map(|cw| cw[i]).collect();
            ComplexMatrix::new(u, h, entries)
        })
        .collect::<Result<_>>()?;
    let poly = interpolate_composed(&corrected, params)?;
    let recovered = evaluate_at_betas(&poly.coeffs, params)?;
    let imag_residue = recovered
        .iter()
        .map(|r| r.imag_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    let real: Vec<ComplexMatrix> = recovered
        .iter()
        .map(ComplexMatrix::real_projection)
        .collect();
    let e_rel = relative_error_blocks(&reference, &real)?;
    timing.recover = t0.elapsed();

    let true_locations: Vec<usize> = adversaries
        .iter()
        .enumerate()
        .filter(|&(a, _)| beff.column_weight(a) > 0)
        .map(|(_, &q)| q)
        .collect();
    let mut detected: Vec<usize> = codewords
        .iter()
        .flat_map(|c| c.locations.iter().copied())
        .collect();
    detected.sort_unstable();
    detected.dedup();
    let localization_misses = true_locations
        .iter()
        .filter(|q| !detected.contains(q))
        .count();
    let codeword_misses = codewords
        .iter()
        .map(|c| c.truth.iter().filter(|q| !c.locations.contains(q)).count())
        .sum();
    let codeword_errors = codewords.iter().map(|c| c.truth.len()).sum();
    let locator_degrees = codewords
        .iter()
        .map(|c| c.locator.as_ref().map_or(0, LocatorPolynomial::degree))
        .collect();

    Ok(TrialResult {
        e_rel,
        e_rel_db: to_db(e_rel),
        true_locations,
        detected_locations: detected,
        localization_misses,
        codeword_misses,
        codeword_errors,
        locator_degrees,
        candidate_count,
        subsets_enumerated,
        degenerate,
        ill_conditioned,
        tail_ratio: poly.tail_ratio(),
        imag_residue,
        timing,
    })
}
