//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};

use crate::adversary::{AttackConfig, AttackModel};
use crate::dft::{CountThresholds, DEFAULT_CONDITION_BOUND};
use crate::error::{invalid, AlccError, Result};
use crate::function::PolyFunction;
use crate::params::AlccParams;

/// Entry distribution of the synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    StandardNormal,
    /// Uniform on `[-1, 1]`.
    Uniform,
}

/// Shape and distribution of the global data matrix `X`, split row-wise
/// into `k` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetGen {
    #[serde(default)]
    pub distribution: Distribution,
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DatasetGen {
    fn default() -> Self {
        Self {
            distribution: Distribution::StandardNormal,
            rows: 20,
            cols: 5,
            scale: 1.0,
        }
    }
}

/// Where finite-precision errors enter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    /// i.i.d. `CN(0, variance)` on every returned matrix entry.
    EndToEnd,
    /// i.i.d. `CN(0, variance)` on every non-leading locator coefficient.
    LocatorLevel,
    /// Native double-precision rounding only.
    #[default]
    FloatNative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PrecisionConfig {
    #[serde(default)]
    pub mode: PrecisionMode,
    #[serde(default)]
    pub variance: f64,
}

/// Localization strategy applied to the `M` codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// No correction: interpolate the raw results.
    None,
    /// Every codeword localized on its own.
    Independent,
    /// Degree-`v` locators averaged, then every polynomial localized on its own.
    Averaged,
    /// Averaging followed by the joint subset search.
    #[default]
    Joint,
}

impl DecoderMode {
    pub fn name(self) -> &'static str {
        match self {
            DecoderMode::None => "none",
            DecoderMode::Independent => "independent",
            DecoderMode::Averaged => "averaged",
            DecoderMode::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Each codeword's locator degree is its true error count.
    #[default]
    Oracle,
    /// Degree estimated from the syndrome rank.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default)]
    pub mode: DecoderMode,
    /// Set constraint length `v'` for the joint search; the full candidate
    /// union when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_length: Option<usize>,
    #[serde(default)]
    pub error_count: CountMode,
    #[serde(default = "default_count_tol")]
    pub count_tol: f64,
    #[serde(default = "default_count_floor")]
    pub count_floor: f64,
    #[serde(default = "default_condition_bound")]
    pub condition_bound: f64,
}

fn default_count_tol() -> f64 {
    CountThresholds::default().rel_tol
}

fn default_count_floor() -> f64 {
    CountThresholds::default().abs_floor
}

fn default_condition_bound() -> f64 {
    DEFAULT_CONDITION_BOUND
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            mode: DecoderMode::Joint,
            constraint_length: None,
            error_count: CountMode::Oracle,
            count_tol: default_count_tol(),
            count_floor: default_count_floor(),
            condition_bound: default_condition_bound(),
        }
    }
}

impl DecoderConfig {
    pub fn thresholds(&self) -> CountThresholds {
        CountThresholds {
            rel_tol: self.count_tol,
            abs_floor: self.count_floor,
        }
    }
}

/// The quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Number of adversaries `A`.
    Adversaries,
    /// Joint-search constraint length `v'`.
    ConstraintLength,
    /// Precision variance `σ_p²` / `σ_pm²`.
    PrecisionVariance,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Adversaries => "adversaries",
            Axis::ConstraintLength => "constraint_length",
            Axis::PrecisionVariance => "precision_variance",
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, Axis::PrecisionVariance)
    }
}

/// A grid of experiment variants: every axis value × decoder × attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Decoder modes to compare; the base decoder mode when empty.
    #[serde(default)]
    pub decoders: Vec<DecoderMode>,
    /// Attack models to compare; the base attack model when empty.
    #[serde(default)]
    pub attacks: Vec<AttackModel>,
}

/// A complete, self-describing experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub alcc: AlccParams,
    #[serde(default)]
    pub f_spec: PolyFunction,
    #[serde(default)]
    pub dataset_gen: DatasetGen,
    pub attack: AttackConfig,
    #[serde(default)]
    pub precision: PrecisionConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| AlccError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        self.alcc.validate()?;
        if self.f_spec.degree() != self.alcc.d {
            return Err(invalid(
                "alcc.d",
                format!(
                    "f_spec `{:?}` has degree {} but alcc.d = {}",
                    self.f_spec,
                    self.f_spec.degree(),
                    self.alcc.d
                ),
            ));
        }
        let g = &self.dataset_gen;
        if g.rows == 0 || g.cols == 0 || !g.rows.is_multiple_of(self.alcc.k) {
            return Err(invalid(
                "dataset_gen.rows",
                format!(
                    "{} rows cannot be split into k = {} blocks",
                    g.rows, self.alcc.k
                ),
            ));
        }
        if !(g.scale.is_finite() && g.scale > 0.0) {
            return Err(invalid("dataset_gen.scale", "must be positive"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        let v = self.alcc.radius();
        self.attack.validate(self.alcc.n, v)?;
        let p = &self.precision;
        if !(p.variance.is_finite() && p.variance >= 0.0) {
            return Err(invalid("precision.variance", "must be a non-negative real"));
        }
        if let Some(c) = self.decoder.constraint_length {
            if c == 0 || c > self.alcc.n {
                return Err(invalid(
                    "decoder.constraint_length",
                    format!("must lie in 1..={}, got {c}", self.alcc.n),
                ));
            }
        }
        if !(self.decoder.count_tol > 0.0 && self.decoder.count_tol < 1.0) {
            return Err(invalid("decoder.count_tol", "must lie in (0, 1)"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(invalid("sweep.values", "sweep needs at least one value"));
            }
            for &x in &s.values {
                if !x.is_finite() || x < 0.0 || (s.axis.is_integer() && x.fract() != 0.0) {
                    return Err(invalid(
                        "sweep.values",
                        format!("{x} is not a valid {} value", s.axis.name()),
                    ));
                }
                let point = self.with_axis(s.axis, x);
                point.validate_point()?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let mut copy = self.clone();
        copy.sweep = None;
        copy.validate()
    }

    /// This configuration with one axis set to `value`.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            Axis::Adversaries => {
                c.attack.adversaries = value as usize;
                c.attack.adversary_indices = None;
            }
            Axis::ConstraintLength => c.decoder.constraint_length = Some(value as usize),
            Axis::PrecisionVariance => c.precision.variance = value,
        }
        c
    }
}
