//! CSV emission for simulation curves and theory overlays.
//!
//! Floats use Rust's shortest round-trip formatting, so output is
//! byte-stable for bit-identical inputs.

use std::fmt::Write;

use crate::error::Result;
use crate::sim::pep::PepEstimate;
use crate::sim::sweep::CurveRow;
use crate::theory::{lemma1_certificate, log_pep_lower_bound, BoundConstants};

pub const CURVE_HEADER: &str = "axis_name,axis_value,decoder_mode,attack_model,trials,mean_e_rel,mean_e_rel_db,stderr_e_rel,mean_misses,mean_locator_degree";

pub const THEORY_HEADER: &str = "curve,n,a,sigma_p2,value,log10_value,ci_low,ci_high";

fn axis_value(name: &str, x: f64) -> String {
    if name != "precision_variance" && x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.axis_name,
            axis_value(r.axis_name, r.axis_value),
            r.decoder_mode,
            r.attack_model,
            r.trials,
            r.mean_e_rel,
            r.mean_e_rel_db,
            r.stderr_e_rel,
            r.mean_misses,
            r.mean_locator_degree
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// One analytic or empirical point of a PEP / P_error curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub curve: &'static str,
    pub n: usize,
    pub a: usize,
    pub sigma_p2: f64,
    pub value: f64,
    /// Kept separately because `PEP_L` underflows long before its logarithm does.
    pub log10_value: f64,
    pub ci: Option<(f64, f64)>,
}

/// `PEP_L` and `A·PEP_L` for every `σ_p²` in `sigmas` and `A ∈ 1..=v`.
pub fn bound_rows(
    n: usize,
    v: usize,
    sigmas: &[f64],
    constants: &BoundConstants,
) -> Result<Vec<TheoryRow>> {
    constants.validate()?;
    let mut rows = vec![];
    for &s in sigmas {
        for a in 1..=v {
            let ln = log_pep_lower_bound(&constants.at(a, n, s))?;
            let ln_a = ln + (a as f64).ln();
            for (curve, l) in [("pep_l", ln), ("a_pep_l", ln_a)] {
                rows.push(TheoryRow {
                    curve,
                    n,
                    a,
                    sigma_p2: s,
                    value: l.exp(),
                    log10_value: l / std::f64::consts::LN_10,
                    ci: None,
                });
            }
        }
    }
    Ok(rows)
}

/// Whether `A·PEP_L` is non-decreasing in `A` at every `σ_p²` of the grid.
pub fn lemma1_holds(
    n: usize,
    v: usize,
    sigmas: &[f64],
    constants: &BoundConstants,
) -> Result<Vec<bool>> {
    sigmas
        .iter()
        .map(|&s| lemma1_certificate(n, s, constants, v).map(|c| c.non_decreasing))
        .collect()
}

/// Empirical `PEP` and `P_error` rows of one estimate.
pub fn pep_rows(e: &PepEstimate) -> Vec<TheoryRow> {
    [
        ("pep_empirical", e.pep, e.pep_ci),
        ("p_error_empirical", e.p_error, e.p_error_ci),
    ]
    .into_iter()
    .map(|(curve, value, ci)| TheoryRow {
        curve,
        n: e.n,
        a: e.a,
        sigma_p2: e.sigma_p2,
        value,
        log10_value: value.log10(),
        ci: Some(ci),
    })
    .collect()
}

pub fn theory_csv(rows: &[TheoryRow]) -> String {
    let mut out = String::from(THEORY_HEADER);
    out.push('\n');
    for r in rows {
        let (lo, hi) = match r.ci {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.curve, r.n, r.a, r.sigma_p2, r.value, r.log10_value, lo, hi
        )
        .expect("writing to a String cannot fail");
    }
    out
}
