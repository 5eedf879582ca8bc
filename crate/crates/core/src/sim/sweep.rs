//! Seeded Monte Carlo sweeps over one configuration axis.

use rayon::prelude::*;

use crate::adversary::AttackModel;
use crate::error::Result;
use crate::rng::derive_seed;
use crate::sim::config::{Axis, DecoderMode, ExperimentConfig};
use crate::sim::stats::{mean, stderr};
use crate::sim::trial::{run_trial, TrialResult};

/// Per-trial outcomes at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub axis: Axis,
    pub axis_value: f64,
    pub decoder: DecoderMode,
    pub attack: AttackModel,
    /// Indexed by trial; trial `i` of every series at this axis value shares a seed.
    pub trials: Vec<TrialResult>,
}

/// Aggregated CSV row of a [`CurvePoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub axis_name: &'static str,
    pub axis_value: f64,
    pub decoder_mode: &'static str,
    pub attack_model: &'static str,
    pub trials: usize,
    pub mean_e_rel: f64,
    pub mean_e_rel_db: f64,
    pub stderr_e_rel: f64,
    pub mean_misses: f64,
    pub mean_locator_degree: f64,
}

impl CurvePoint {
    pub fn e_rel(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.e_rel).collect()
    }

    pub fn e_rel_db(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.e_rel_db).collect()
    }

    pub fn row(&self) -> CurveRow {
        let e = self.e_rel();
        let misses: Vec<f64> = self
            .trials
            .iter()
            .map(|t| t.localization_misses as f64)
            .collect();
        let degrees: Vec<f64> = self
            .trials
            .iter()
            .map(TrialResult::mean_locator_degree)
            .collect();
        CurveRow {
            axis_name: self.axis.name(),
            axis_value: self.axis_value,
            decoder_mode: self.decoder.name(),
            attack_model: self.attack.name(),
            trials: self.trials.len(),
            mean_e_rel: mean(&e),
            mean_e_rel_db: mean(&self.e_rel_db()),
            stderr_e_rel: stderr(&e),
            mean_misses: mean(&misses),
            mean_locator_degree: mean(&degrees),
        }
    }
}

/// Every grid point of a sweep, in axis → decoder → attack order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveSet {
    pub points: Vec<CurvePoint>,
}

impl CurveSet {
    pub fn rows(&self) -> Vec<CurveRow> {
        self.points.iter().map(CurvePoint::row).collect()
    }

    pub fn find(
        &self,
        axis_value: f64,
        decoder: DecoderMode,
        attack: AttackModel,
    ) -> Option<&CurvePoint> {
        self.points
            .iter()
            .find(|p| p.axis_value == axis_value && p.decoder == decoder && p.attack == attack)
    }
}

/// Seed of trial `trial` at grid index `point`.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    derive_seed(&[master, point as u64, trial as u64])
}

/// Runs every grid point of `cfg`. Without a `[sweep]` section the grid is the
/// single base configuration on the adversaries axis.
///
/// Trials run on the current rayon pool and are collected by index, so the
/// result does not depend on scheduling or thread count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<CurveSet> {
    cfg.validate()?;
    let (axis, values, decoders, attacks) = match &cfg.sweep {
        Some(s) => (
            s.axis,
            s.values.clone(),
            if s.decoders.is_empty() {
                vec![cfg.decoder.mode]
            } else {
                s.decoders.clone()
            },
            if s.attacks.is_empty() {
                vec![cfg.attack.model]
            } else {
                s.attacks.clone()
            },
        ),
        None => (
            Axis::Adversaries,
            vec![cfg.attack.adversaries as f64],
            vec![cfg.decoder.mode],
            vec![cfg.attack.model],
        ),
    };
    let mut points = vec![];
    for (pi, &x) in values.iter().enumerate() {
        let base = cfg.with_axis(axis, x);
        for &decoder in &decoders {
            for &attack in &attacks {
                let mut c = base.clone();
                c.decoder.mode = decoder;
                c.attack.model = attack;
                let trials = (0..cfg.trials)
                    .into_par_iter()
                    .map(|ti| run_trial(&c, trial_seed(cfg.seed, pi, ti)))
                    .collect::<Result<Vec<_>>>()?;
                points.push(CurvePoint {
                    axis,
                    axis_value: x,
                    decoder,
                    attack,
                    trials,
                });
            }
        }
    }
    Ok(CurveSet { points })
}
