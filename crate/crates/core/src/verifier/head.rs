//! Checks of the symmetrization head that starts the full-cylinder eigenfunction.

use serde::{Deserialize, Serialize};

use super::tolerances::Tolerances;
use crate::assembly::{Timeline, TimelineKind, SLOWDOWN_START};
use crate::error::{Error, Result};
use crate::scalarcore::SQRT_PI;
use crate::segments::{HeadProfile, SegmentKind};

/// Samples of `a'` across the transition.
const SLOPE_SAMPLES: usize = 10_000;
/// Samples of the exponential tail.
const TAIL_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadReport {
    pub mu: f64,
    pub k: f64,
    /// `|f'(0)| / (k |f(0)|)`.
    pub turning_point: f64,
    /// Largest relative deviation of `u` from `e^{-k(t - t0)}` past `t0`.
    pub tail_defect: f64,
    /// `t2 - t1` as built and from its formula.
    pub duration: f64,
    pub duration_formula: f64,
    pub duration_cap: f64,
    /// Sampled `sup |a'|` and its bound.
    pub slope_max: f64,
    pub slope_bound: f64,
    pub t0: f64,
    /// `t0 - (t2 - t1)`; the oscillating stretch has positive length.
    pub clearance: f64,
    pub passed: bool,
}

fn head(tl: &Timeline) -> Result<&HeadProfile> {
    let wrong = || Error::WrongKind { expected: TimelineKind::EigenFull.name(), found: tl.kind.name().into() };
    if tl.kind != TimelineKind::EigenFull {
        return Err(wrong());
    }
    match &tl.segments.first().ok_or_else(wrong)?.segment.kind {
        SegmentKind::SymmetrizeHead(h) => Ok(h),
        _ => Err(wrong()),
    }
}

/// Turning point at 0, exponential tail past `t0`, transition length and steepness.
pub fn verify_symmetrization(tl: &Timeline, tol: &Tolerances) -> Result<HeadReport> {
    let h = head(tl)?;
    let (k, mu) = (h.k, h.mu);
    let start = h.field(0.0).x.expect("head mode");
    let turning_point = start.d[1].abs() / (k * start.d[0].abs());

    let t0 = tl.segments[0].segment.end;
    let amp = tl.segments[0].segment.amp.logmag();
    // Before the perturbation the first block carries the x mode alone.
    let span = SLOWDOWN_START;
    let tail_defect = (0..=TAIL_SAMPLES)
        .map(|i| {
            let t = t0 + span * i as f64 / TAIL_SAMPLES as f64;
            let m = tl.eval(0.0, 0.0, t).expect("tail lies in the chain").field.x.expect("x mode");
            let log = m.log_scale + m.d[0].abs().ln();
            (log - amp + k * (t - t0)).exp_m1().abs()
        })
        .fold(0.0, f64::max);

    let duration = h.t2 - h.t1;
    let duration_formula = SQRT_PI / 10.0 * (1.0 + mu / (2.0 * k * k));
    let duration_cap = 0.4;
    let slope_max = (0..=SLOPE_SAMPLES)
        .map(|i| h.a(h.t1 + duration * i as f64 / SLOPE_SAMPLES as f64)[1].abs())
        .fold(0.0, f64::max);
    let slope_bound = 10.0;
    let clearance = t0 - duration;
    let passed = turning_point <= tol.turning_point
        && tail_defect <= tol.head_tail
        && (duration - duration_formula).abs() <= tol.attained_bound * duration_formula
        && duration <= duration_cap
        && slope_max <= slope_bound * (1.0 + tol.attained_bound)
        && clearance > 0.0;
    Ok(HeadReport {
        mu,
        k,
        turning_point,
        tail_defect,
        duration,
        duration_formula,
        duration_cap,
        slope_max,
        slope_bound,
        t0,
        clearance,
        passed,
    })
}
