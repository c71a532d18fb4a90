//! Running suites over a construction and collecting every measurement with its
//! pass/fail verdict.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::decay::{verify_decay, verify_parabolic_decay, DecayFit, DecayModel};
use super::drift::{verify_drift_bounds, verify_parabolic_junctions, verify_parabolic_residual, DriftReport};
use super::elliptic::{
    verify_c1, verify_ellipticity, verify_fd_derivatives, verify_fd_order, verify_junctions, verify_residual, C1Report,
    EllipticityReport, FdOrderReport, FdReport, JunctionReport, ResidualReport,
};
use super::head::{verify_symmetrization, HeadReport};
use super::holder::{verify_extension_zero, verify_holder, ExtensionReport, HolderReport};
use super::tolerances::Tolerances;
use crate::assembly::{Timeline, TimelineKind};
use crate::construction::Construction;
use crate::error::{Error, Result};
use crate::segments::RegularityClass;

/// Version of the report layout.
pub const REPORT_VERSION: u32 = 1;

/// A group of related checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Residual,
    Regularity,
    Junctions,
    Numerics,
    Decay,
    Holder,
    Extension,
    Symmetrization,
    Drift,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Residual,
        Suite::Regularity,
        Suite::Junctions,
        Suite::Numerics,
        Suite::Decay,
        Suite::Holder,
        Suite::Extension,
        Suite::Symmetrization,
        Suite::Drift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Residual => "residual",
            Suite::Regularity => "regularity",
            Suite::Junctions => "junctions",
            Suite::Numerics => "numerics",
            Suite::Decay => "decay",
            Suite::Holder => "holder",
            Suite::Extension => "extension",
            Suite::Symmetrization => "symmetrization",
            Suite::Drift => "drift",
        }
    }

    /// Whether the suite has anything to measure on this kind.
    pub fn applies_to(self, kind: TimelineKind) -> bool {
        match self {
            Suite::Residual | Suite::Junctions | Suite::Decay => true,
            Suite::Regularity | Suite::Numerics => kind != TimelineKind::Parabolic,
            Suite::Holder | Suite::Extension => kind == TimelineKind::PlisMiller,
            Suite::Symmetrization => kind == TimelineKind::EigenFull,
            Suite::Drift => kind == TimelineKind::Parabolic,
        }
    }

    /// Every suite that applies to `kind`.
    pub fn all_for(kind: TimelineKind) -> Vec<Suite> {
        Self::ALL.into_iter().filter(|s| s.applies_to(kind)).collect()
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}, expected all or one of {}", names.join(", "))
        })
    }
}

/// Sample counts, seed and thresholds of one verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub seed: u64,
    /// Residual samples per segment (per block for the parabolic chain).
    pub residual_samples: usize,
    /// Ellipticity and C1 samples per segment.
    pub regularity_samples: usize,
    pub fd_points: usize,
    pub order_points: usize,
    /// Step of the order test in units of `1/k`.
    pub order_step: f64,
    /// Pair and point samples per block for the Hölder and growth estimates.
    pub holder_samples: usize,
    /// Drift samples per parabolic block.
    pub drift_samples: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 1,
            residual_samples: 1000,
            regularity_samples: 10_000,
            fd_points: 1000,
            order_points: 100,
            order_step: 1e-2,
            holder_samples: 2000,
            drift_samples: 1000,
            tolerances: Tolerances::default(),
        }
    }
}

/// How a measurement is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// One measured quantity against the threshold it is held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    /// Where the threshold comes from: a tolerance field or a fixed bound.
    pub source: String,
    pub passed: bool,
}

impl Check {
    fn at_most(suite: Suite, name: &str, measured: f64, threshold: f64, source: &str) -> Self {
        Self { suite, name: name.into(), measured, comparison: Comparison::AtMost, threshold, source: source.into(), passed: measured <= threshold }
    }

    fn at_least(suite: Suite, name: &str, measured: f64, threshold: f64, source: &str) -> Self {
        Self { suite, name: name.into(), measured, comparison: Comparison::AtLeast, threshold, source: source.into(), passed: measured >= threshold }
    }

    fn flag(suite: Suite, name: &str, ok: bool, source: &str) -> Self {
        Self::at_least(suite, name, if ok { 1.0 } else { 0.0 }, 1.0, source)
    }
}

/// A declared class bound against what was measured for one group of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    /// Segment kind, or `timeline` for the whole construction.
    pub scope: String,
    /// `lambda` or `c1`.
    pub claim: String,
    pub declared: f64,
    pub measured: f64,
    /// Declared over measured; at least 1 inside the class, absent when nothing was measured.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub kind: TimelineKind,
    pub blocks: usize,
    pub suites: Vec<Suite>,
    pub settings: VerifySettings,
    pub residual: Option<ResidualReport>,
    pub ellipticity: Option<EllipticityReport>,
    pub c1: Option<C1Report>,
    pub junctions: Option<JunctionReport>,
    pub fd: Option<FdReport>,
    pub fd_order: Option<FdOrderReport>,
    pub decay: Option<DecayFit>,
    pub holder: Option<HolderReport>,
    pub extension: Option<ExtensionReport>,
    pub symmetrization: Option<HeadReport>,
    pub drift: Option<DriftReport>,
    pub margins: Vec<Margin>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    fn empty(kind: TimelineKind, blocks: usize, suites: Vec<Suite>, settings: VerifySettings) -> Self {
        Self {
            version: REPORT_VERSION,
            kind,
            blocks,
            suites,
            settings,
            residual: None,
            ellipticity: None,
            c1: None,
            junctions: None,
            fd: None,
            fd_order: None,
            decay: None,
            holder: None,
            extension: None,
            symmetrization: None,
            drift: None,
            margins: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `(t, ln sup)` rows of the decay table, if the decay suite ran.
    pub fn decay_table(&self) -> Vec<(f64, f64)> {
        self.decay.as_ref().map_or_else(Vec::new, |d| d.times.iter().copied().zip(d.log_sup.iter().copied()).collect())
    }
}

/// Run `suites` (every applicable one when empty) over a construction.
pub fn verify(c: &Construction, suites: &[Suite], settings: &VerifySettings) -> Result<VerificationReport> {
    let kind = c.kind();
    let mut suites: Vec<Suite> = if suites.is_empty() { Suite::all_for(kind) } else { suites.to_vec() };
    suites.sort();
    suites.dedup();
    if let Some(s) = suites.iter().find(|s| !s.applies_to(kind)) {
        return Err(Error::WrongKind { expected: suite_kinds(*s), found: kind.name().into() });
    }
    let mut report = VerificationReport::empty(kind, c.block_count(), suites.clone(), *settings);
    match c {
        Construction::Elliptic(tl) => elliptic(tl, &suites, settings, &mut report)?,
        Construction::Parabolic(chain) => {
            let (s, tol) = (settings, &settings.tolerances);
            for suite in &suites {
                match suite {
                    Suite::Residual => report.residual = Some(verify_parabolic_residual(chain, s.residual_samples, s.seed, tol)),
                    Suite::Junctions => report.junctions = Some(verify_parabolic_junctions(chain, s.seed, tol)),
                    Suite::Decay => report.decay = Some(verify_parabolic_decay(chain, tol)),
                    Suite::Drift => report.drift = Some(verify_drift_bounds(chain, s.drift_samples, s.seed, tol)),
                    _ => unreachable!("checked against the kind above"),
                }
            }
        }
    }
    report.checks = checks(&report, &settings.tolerances);
    report.passed = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

fn suite_kinds(s: Suite) -> &'static str {
    match s {
        Suite::Regularity | Suite::Numerics => "elliptic",
        Suite::Holder | Suite::Extension => TimelineKind::PlisMiller.name(),
        Suite::Symmetrization => TimelineKind::EigenFull.name(),
        Suite::Drift => TimelineKind::Parabolic.name(),
        _ => "any",
    }
}

fn elliptic(tl: &Timeline, suites: &[Suite], s: &VerifySettings, report: &mut VerificationReport) -> Result<()> {
    let tol = &s.tolerances;
    for suite in suites {
        match suite {
            Suite::Residual => report.residual = Some(verify_residual(tl, s.residual_samples, s.seed, tol)),
            Suite::Regularity => {
                report.ellipticity = Some(verify_ellipticity(tl, s.regularity_samples, s.seed));
                report.c1 = Some(verify_c1(tl, s.regularity_samples, s.seed));
            }
            Suite::Junctions => report.junctions = Some(verify_junctions(tl, s.seed, tol)),
            Suite::Numerics => {
                report.fd = Some(verify_fd_derivatives(tl, s.fd_points, s.seed, tol));
                report.fd_order = Some(verify_fd_order(tl, s.order_points, s.order_step, s.seed, tol));
            }
            Suite::Decay => report.decay = Some(verify_decay(tl, tol)),
            Suite::Holder => report.holder = Some(verify_holder(tl, s.holder_samples, s.seed, tol)?),
            Suite::Extension => report.extension = Some(verify_extension_zero(tl, s.holder_samples, s.seed, tol)?),
            Suite::Symmetrization => report.symmetrization = Some(verify_symmetrization(tl, tol)?),
            Suite::Drift => unreachable!("checked against the kind above"),
        }
    }
    if let (Some(e), Some(c)) = (&report.ellipticity, &report.c1) {
        report.margins = margins(tl, e, c);
    }
    Ok(())
}

fn ratio(declared: f64, measured: f64) -> Option<f64> {
    (measured > 0.0 && measured.is_finite()).then(|| declared / measured)
}

/// One `lambda` and one `c1` entry per segment kind and for the whole timeline.
fn margins(tl: &Timeline, e: &EllipticityReport, c: &C1Report) -> Vec<Margin> {
    let mut groups: BTreeMap<String, (RegularityClass, f64, f64, f64)> = BTreeMap::new();
    for (row, c1) in e.per_segment.iter().zip(&c.per_segment) {
        let declared = tl.segments[row.index].segment.declared;
        let g = groups.entry(row.kind.clone()).or_insert((declared, f64::INFINITY, f64::NEG_INFINITY, 0.0));
        g.0 = g.0.join(declared);
        g.1 = g.1.min(row.lambda_min);
        g.2 = g.2.max(row.lambda_max);
        g.3 = g.3.max(c1.stats.max);
    }
    groups.insert("timeline".into(), (tl.declared, e.lambda_min, e.lambda_max, c.sup));
    let mut out = Vec::new();
    for (scope, (class, lo, hi, c1)) in groups {
        // Distance to the ellipticity bound in the same units as the class: the spectrum fits in [1/L, L] with L = max(1/lo, hi).
        let measured = (1.0 / lo).max(hi);
        let lambda_measured = if lo > 0.0 { measured } else { f64::MAX };
        out.push(Margin { scope: scope.clone(), claim: "lambda".into(), declared: class.lambda, measured: lambda_measured, margin: ratio(class.lambda, lambda_measured) });
        out.push(Margin { scope, claim: "c1".into(), declared: class.c1, measured: c1, margin: ratio(class.c1, c1) });
    }
    out
}

fn max_or_zero(v: f64) -> f64 {
    if v.is_finite() || v.is_nan() {
        v
    } else {
        0.0
    }
}

fn checks(r: &VerificationReport, tol: &Tolerances) -> Vec<Check> {
    use Suite::*;
    let mut out = Vec::new();
    if let Some(res) = &r.residual {
        let source = match r.kind {
            TimelineKind::EigenFull => "tolerances.eigen_residual",
            TimelineKind::Parabolic => "tolerances.parabolic_residual",
            _ => "tolerances.residual",
        };
        out.push(Check::at_most(Residual, "max relative residual", max_or_zero(res.overall.max), res.tolerance, source));
    }
    if let Some(e) = &r.ellipticity {
        out.push(Check::at_least(Regularity, "smallest eigenvalue of A", e.lambda_min, 1.0 / e.declared, "1 / declared lambda"));
        out.push(Check::at_most(Regularity, "largest eigenvalue of A", e.lambda_max, e.declared, "declared lambda"));
    }
    if let Some(c) = &r.c1 {
        out.push(Check::at_most(Regularity, "sup of first partials of A", c.sup, c.declared, "declared c1"));
    }
    if let (Some(res), Some(e)) = (&r.residual, &r.ellipticity) {
        // Completeness: every segment kind has residual and spectrum entries.
        let kinds: std::collections::BTreeSet<&str> = res.per_segment.iter().map(|s| s.kind.as_str()).collect();
        let missing = kinds
            .iter()
            .filter(|k| {
                !res.per_segment.iter().any(|s| s.kind == **k && s.stats.count > 0)
                    || !e.per_segment.iter().any(|s| s.kind == **k && s.lambda_min.is_finite())
            })
            .count();
        out.push(Check::at_most(Residual, "segment kinds without residual or spectrum entries", missing as f64, 0.0, "completeness"));
    }
    if let Some(j) = &r.junctions {
        out.push(Check::at_most(Junctions, "relative jump of u and its derivatives", j.max_u, tol.junction_u, "tolerances.junction_u"));
        let (name, limit, source) = if r.kind == TimelineKind::Parabolic {
            ("jump of the drift", tol.drift_defect, "tolerances.drift_defect")
        } else {
            ("jump of A and its first partials", tol.junction_a, "tolerances.junction_a")
        };
        out.push(Check::at_most(Junctions, name, j.max_a, limit, source));
    }
    if let Some(f) = &r.fd {
        out.push(Check::at_most(Numerics, "analytic vs difference derivatives", f.max, tol.fd_relative, "tolerances.fd_relative"));
    }
    if let Some(o) = &r.fd_order {
        out.push(Check::at_least(Numerics, "smallest step-halving ratio", o.min_ratio, tol.fd_ratio_min, "tolerances.fd_ratio_min"));
        out.push(Check::at_most(Numerics, "largest step-halving ratio", o.max_ratio, tol.fd_ratio_max, "tolerances.fd_ratio_max"));
    }
    if let Some(d) = &r.decay {
        out.push(Check::at_most(Decay, "largest relative increase of ln sup", d.worst_increase, tol.monotone, "tolerances.monotone"));
        if !d.closed_form.is_empty() {
            out.push(Check::at_most(Decay, "recursion vs closed form", d.closed_form_max, tol.closed_form, "tolerances.closed_form"));
        }
        match (d.model, &d.fit) {
            (DecayModel::DoubleExponential, Some(f)) => {
                if let Some(target) = d.target_slope {
                    let ratio = f.slope() / target;
                    out.push(Check::at_least(Decay, "slope of ln(-ln sup) vs t over ln2/402", ratio, 1.0 - tol.slope_fraction, "1 - tolerances.slope_fraction"));
                }
            }
            (DecayModel::Gaussian, Some(f)) => {
                out.push(Check::at_least(Decay, "R^2 of -ln sup vs t^2", f.r2, tol.gaussian_r2, "tolerances.gaussian_r2"));
            }
            (DecayModel::Quadratic, Some(f)) if r.kind == TimelineKind::PlisMiller => {
                out.push(Check::at_least(Decay, "R^2 of ln sup vs quadratic in n", f.r2, tol.holder_r2, "tolerances.holder_r2"));
                out.push(Check::at_most(Decay, "quadratic coefficient of ln sup", f.coef[2], 0.0, "negative"));
            }
            _ => {}
        }
        if let Some(excess) = d.claim_excess {
            out.push(Check::at_most(Decay, "max of ln C_n + 7n(n-1)/4", excess, 0.0, "fixed bound"));
        }
    }
    if let Some(h) = &r.holder {
        let worst = h.blocks.iter().filter(|b| b.bound > 0.0).map(|b| b.estimate / b.bound).fold(0.0, f64::max);
        out.push(Check::at_most(Holder, "sampled seminorm over interpolation bound", worst, tol.holder_factor, "tolerances.holder_factor"));
        out.push(Check::at_most(Holder, "largest block seminorm over the first", max_or_zero(h.uniformity), tol.holder_factor, "tolerances.holder_factor"));
        let first = h.blocks.first().map_or(f64::NAN, |b| b.deviation);
        out.push(Check::at_most(Holder, "|A - Id| in block 1", first, tol.holder_margin, "tolerances.holder_margin"));
        out.push(Check::at_most(Holder, "trend of |A - Id| across blocks", h.deviation_trend, 0.0, "non-increasing"));
    }
    if let Some(x) = &r.extension {
        for (name, v) in [("ln |u|", x.log_u), ("ln |du|", x.log_du), ("ln |A grad u|", x.log_flux), ("ln |d(A grad u)|", x.log_dflux)] {
            out.push(Check::at_most(Extension, &format!("{name} at the chain end"), v, x.threshold, "tolerances.extension_logmag"));
        }
        let r2 = x.growth.as_ref().map_or(f64::NAN, |f| f.r2);
        out.push(Check::at_least(Extension, "R^2 of power-law growth of |grad A|", r2, tol.growth_r2, "tolerances.growth_r2"));
    }
    if let Some(h) = &r.symmetrization {
        out.push(Check::at_most(Symmetrization, "|f'(0)| / (k |f(0)|)", h.turning_point, tol.turning_point, "tolerances.turning_point"));
        out.push(Check::at_most(Symmetrization, "deviation from e^{-k(t - t0)}", h.tail_defect, tol.head_tail, "tolerances.head_tail"));
        let rel = (h.duration - h.duration_formula).abs() / h.duration_formula;
        out.push(Check::at_most(Symmetrization, "t2 - t1 vs its formula", rel, tol.attained_bound, "tolerances.attained_bound"));
        out.push(Check::at_most(Symmetrization, "t2 - t1", h.duration, h.duration_cap, "fixed bound"));
        out.push(Check::at_most(Symmetrization, "sup |a'|", h.slope_max, h.slope_bound * (1.0 + tol.attained_bound), "fixed bound with tolerances.attained_bound"));
        out.push(Check::at_least(Symmetrization, "t0 - (t2 - t1)", h.clearance, 0.0, "positive"));
        out.push(Check::flag(Symmetrization, "head checks", h.passed, "all of the above"));
    }
    if let Some(d) = &r.drift {
        let worst = d.blocks.iter().map(|b| b.sup / b.envelope).fold(0.0, f64::max);
        out.push(Check::at_most(Drift, "sampled |B| over the block envelope", worst, 1.0, "fixed bound"));
        out.push(Check::at_most(Drift, "sampled |B| over the chain", d.chain_sup, d.chain_envelope, "fixed bound"));
        out.push(Check::at_most(Drift, "jump of B at window edges", d.edge_defect, tol.drift_defect, "tolerances.drift_defect"));
        out.push(Check::at_most(Drift, "conjugation symmetry defect", d.conjugation_defect, tol.attained_bound, "tolerances.attained_bound"));
    }
    out
}
