//! Pointwise checks over elliptic timelines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::sampling::QuasiSampler;
use super::stats::Stats;
use super::tolerances::Tolerances;
use crate::assembly::{Eval, Side, Timeline};
use crate::segments::{elliptic_residual, ModeJet, PointValues, SegmentKind, Sym2};

/// Junction neighbourhoods excluded from interior sampling.
const JUNCTION_GAP: f64 = 1e-9;

/// Measurement attached to one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub index: usize,
    pub kind: String,
    pub block: Option<usize>,
    pub stats: Stats,
}

/// Interior sample `i` of segment `seg`; alternates sides on reflected timelines.
fn interior_point(tl: &Timeline, seg: usize, q: &QuasiSampler<3>, i: usize, margin: f64) -> (f64, f64, f64) {
    let s = &tl.segments[seg].segment;
    let p = q.point(i);
    let lo = s.start + margin;
    let span = (s.end - margin - lo).max(0.0);
    let mut t = lo + span * p[0];
    if tl.reflected && i % 2 == 1 {
        t = -t;
    }
    (TAU * p[1], TAU * p[2], t)
}

fn per_segment<F>(tl: &Timeline, samples: usize, seed: u64, margin: f64, measure: F) -> Vec<SegmentStats>
where
    F: Fn(&Eval, f64, f64) -> f64 + Sync,
{
    (0..tl.segments.len())
        .into_par_iter()
        .map(|seg| {
            let q = QuasiSampler::<3>::new(seed, seg as u64);
            let values = (0..samples).map(|i| {
                let (x, y, t) = interior_point(tl, seg, &q, i, margin);
                let e = tl.eval(x, y, t).expect("interior sample lies in the timeline");
                measure(&e, x, y)
            });
            let placed = &tl.segments[seg];
            SegmentStats { index: seg, kind: placed.segment.kind.name().into(), block: placed.block, stats: Stats::of(values) }
        })
        .collect()
}

fn overall(rows: &[SegmentStats]) -> Stats {
    rows.iter().fold(Stats::default(), |acc, r| acc.merge(r.stats))
}

fn max_or_zero(s: Stats) -> f64 {
    if s.count == 0 {
        0.0
    } else {
        s.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub per_segment: Vec<SegmentStats>,
    pub overall: Stats,
    pub tolerance: f64,
    pub passed: bool,
}

/// Analytic residual `u_tt + div(A grad u) + mu u` relative to `sup|u| (1 + k^2)`.
pub fn verify_residual(tl: &Timeline, samples_per_segment: usize, seed: u64, tol: &Tolerances) -> ResidualReport {
    let per_segment = per_segment(tl, samples_per_segment, seed, JUNCTION_GAP, |e, x, y| {
        elliptic_residual(&e.field, &e.coeff, x, y, e.mu).relative()
    });
    let overall = overall(&per_segment);
    let has_head = tl.segments.iter().any(|p| matches!(p.segment.kind, SegmentKind::SymmetrizeHead(_)));
    let tolerance = if has_head { tol.eigen_residual } else { tol.residual };
    ResidualReport { passed: max_or_zero(overall) <= tolerance, per_segment, overall, tolerance }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub kind: String,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Declared `Lambda` of the segment.
    pub declared: f64,
    /// `min(lambda_min * Lambda, Lambda / lambda_max)`; at least 1 inside the class.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub per_segment: Vec<SpectrumRow>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub declared: f64,
    pub samples: usize,
    pub passed: bool,
}

fn margin(lo: f64, hi: f64, lambda: f64) -> f64 {
    (lo * lambda).min(lambda / hi)
}

/// Sampled eigenvalues of `A` against the declared class.
pub fn verify_ellipticity(tl: &Timeline, samples_per_segment: usize, seed: u64) -> EllipticityReport {
    let lows = per_segment(tl, samples_per_segment, seed ^ 0xE1, JUNCTION_GAP, |e, _, _| e.coeff.value.eigenvalues().0);
    let highs = per_segment(tl, samples_per_segment, seed ^ 0xE1, JUNCTION_GAP, |e, _, _| e.coeff.value.eigenvalues().1);
    let per_segment: Vec<SpectrumRow> = lows
        .iter()
        .zip(&highs)
        .map(|(l, h)| {
            let declared = tl.segments[l.index].segment.declared.lambda;
            let (lo, hi) = (l.stats.min, h.stats.max);
            SpectrumRow { index: l.index, kind: l.kind.clone(), lambda_min: lo, lambda_max: hi, declared, margin: margin(lo, hi, declared) }
        })
        .collect();
    let lambda_min = per_segment.iter().map(|r| r.lambda_min).fold(f64::INFINITY, f64::min);
    let lambda_max = per_segment.iter().map(|r| r.lambda_max).fold(f64::NEG_INFINITY, f64::max);
    let declared = tl.declared.lambda;
    let passed = lambda_min >= 1.0 / declared && lambda_max <= declared;
    EllipticityReport { per_segment, lambda_min, lambda_max, declared, samples: samples_per_segment * tl.segments.len(), passed }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub per_segment: Vec<SegmentStats>,
    pub sup: f64,
    pub declared: f64,
    pub passed: bool,
}

/// Largest of the nine first partials of the coefficient entries.
pub fn verify_c1(tl: &Timeline, samples_per_segment: usize, seed: u64) -> C1Report {
    let per_segment = per_segment(tl, samples_per_segment, seed ^ 0xC1, JUNCTION_GAP, |e, _, _| e.coeff.c1_sup());
    let sup = max_or_zero(overall(&per_segment));
    C1Report { sup, declared: tl.declared.c1, passed: sup <= tl.declared.c1, per_segment }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionRow {
    pub t: f64,
    pub left: String,
    pub right: String,
    /// Largest `|jump of d^j u| / (sup|u| k^j)` over `j <= 2` and all partials.
    pub u_defect: f64,
    /// Largest jump of `A` and of its first partials.
    pub a_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionReport {
    pub rows: Vec<JunctionRow>,
    pub max_u: f64,
    pub max_a: f64,
    pub passed: bool,
}

/// Spatial probes used at every junction.
const JUNCTION_PROBES: usize = 8;

fn jump(l: &Eval, r: &Eval, x: f64, y: f64) -> (f64, f64) {
    let scale = l.field.common_scale();
    let (a, b) = (l.field.point(x, y, scale), r.field.point(x, y, scale));
    let sup = l.field.sup_native(scale).max(r.field.sup_native(scale));
    let k = l.field.k_max().max(r.field.k_max()).max(1.0);
    let orders: [(fn(&PointValues) -> f64, i32); 10] = [
        (|p| p.u, 0),
        (|p| p.u_t, 1),
        (|p| p.u_x, 1),
        (|p| p.u_y, 1),
        (|p| p.u_tt, 2),
        (|p| p.u_xx, 2),
        (|p| p.u_yy, 2),
        (|p| p.u_xy, 2),
        (|p| p.u_tx, 2),
        (|p| p.u_ty, 2),
    ];
    let u = orders
        .iter()
        .map(|(f, j)| (f(&a) - f(&b)).abs() / (sup * k.powi(*j)))
        .fold(0.0, f64::max);
    let (ca, cb) = (&l.coeff, &r.coeff);
    let d = |p: Sym2, q: Sym2| p.sub(q).max_abs();
    let am = d(ca.value, cb.value).max(d(ca.dx, cb.dx)).max(d(ca.dy, cb.dy)).max(d(ca.dt, cb.dt));
    (u, am)
}

/// One-sided limits at every segment boundary and internal phase boundary.
pub fn verify_junctions(tl: &Timeline, seed: u64, tol: &Tolerances) -> JunctionReport {
    let q = QuasiSampler::<2>::new(seed ^ 0x1A, 0);
    let probes: Vec<(f64, f64)> = (0..JUNCTION_PROBES).map(|i| q.point(i)).map(|p| (TAU * p[0], TAU * p[1])).collect();
    let mut sites: Vec<(usize, usize, f64)> = tl.junctions().into_iter().map(|(i, t)| (i, i + 1, t)).collect();
    for (i, p) in tl.segments.iter().enumerate() {
        sites.extend(p.segment.internal_boundaries().into_iter().map(|t| (i, i, t)));
    }
    sites.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut rows: Vec<JunctionRow> = sites
        .par_iter()
        .map(|&(li, ri, t)| {
            let (mut u, mut a) = (0.0_f64, 0.0_f64);
            for &(x, y) in &probes {
                let l = tl.eval_in_side(li, x, y, t, Side::Left).expect("junction lies in the left segment");
                let r = tl.eval_in_side(ri, x, y, t, Side::Right).expect("junction lies in the right segment");
                let (du, da) = jump(&l, &r, x, y);
                u = u.max(du);
                a = a.max(da);
            }
            let name = |i: usize| tl.segments[i].segment.kind.name().to_string();
            JunctionRow { t, left: name(li), right: name(ri), u_defect: u, a_defect: a }
        })
        .collect();
    if tl.reflected {
        // The even extension meets itself at t = 0.
        let (mut u, mut a) = (0.0_f64, 0.0_f64);
        for &(x, y) in &probes {
            let r = tl.eval_in(0, x, y, 0.0).expect("head starts at zero");
            let l = Eval { field: r.field.reflected(), coeff: r.coeff.reflected(), ..r };
            let (du, da) = jump(&l, &r, x, y);
            u = u.max(du);
            a = a.max(da);
        }
        let name = tl.segments[0].segment.kind.name().to_string();
        rows.insert(0, JunctionRow { t: 0.0, left: format!("{name} (mirrored)"), right: name, u_defect: u, a_defect: a });
    }
    let max_u = rows.iter().map(|r| r.u_defect).fold(0.0, f64::max);
    let max_a = rows.iter().map(|r| r.a_defect).fold(0.0, f64::max);
    JunctionReport { rows, max_u, max_a, passed: max_u <= tol.junction_u && max_a <= tol.junction_a }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    /// Largest relative mismatch per derivative name.
    pub per_derivative: Vec<(String, f64)>,
    pub max: f64,
    pub points: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Centre of a finite-difference stencil.
struct Site {
    seg: usize,
    tau: f64,
    x: f64,
    y: f64,
    k: f64,
    h: f64,
}

/// Place a stencil of half-width `reach * h` at quasi-random point `p`.
///
/// The centre stays inside one smooth piece of the segment, clear of its ends
/// and of internal switches where only two derivatives match. `u` and `A`
/// depend on `x` and `y` only through the phases of the x- and y-modes, so the
/// spatial point is drawn from one period of each, which keeps the phases
/// small enough for steps of `1e-6 / k` to resolve.
fn stencil_site(tl: &Timeline, p: [f64; 4], step: impl Fn(f64) -> f64, reach: f64, snap: bool) -> Site {
    let seg = ((p[3] * tl.segments.len() as f64) as usize).min(tl.segments.len() - 1);
    let s = &tl.segments[seg].segment;
    let len = s.duration();
    let mid = tl.eval_local(seg, 0.0, 0.0, 0.5 * len).expect("midpoint");
    let k = mid.field.k_max().max(1.0);
    let h = step(k);
    let mut cuts = vec![0.0];
    cuts.extend(s.internal_boundaries().into_iter().map(|b| b - s.start));
    cuts.push(len);
    // Pick a piece in proportion to its length, then a point inside it.
    let target = p[0] * len;
    let piece = cuts.windows(2).position(|w| target <= w[1]).unwrap_or(cuts.len() - 2);
    let (lo, hi) = (cuts[piece], cuts[piece + 1]);
    let margin = (reach * h).min(0.25 * (hi - lo));
    let frac = ((target - lo) / (hi - lo)).clamp(0.0, 1.0);
    let mut tau = lo + margin + (hi - lo - 2.0 * margin) * frac;
    if snap {
        tau = ((tau / h).round() * h).clamp(lo + margin, hi - margin);
    }
    let period = |m: Option<ModeJet>| m.map_or(TAU, |m| TAU / m.k);
    Site { seg, tau, x: period(mid.field.x) * p[1], y: period(mid.field.y) * p[2], k, h }
}


/// Every analytic partial the residual consumes against a central difference of
/// the next lower one, with step `fd_step / k`.
pub fn verify_fd_derivatives(tl: &Timeline, points: usize, seed: u64, tol: &Tolerances) -> FdReport {
    const NAMES: [&str; 10] = ["u_t", "u_tt", "u_x", "u_xx", "u_y", "u_yy", "u_tx", "A_x", "A_y", "A_t"];
    let q = QuasiSampler::<4>::new(seed ^ 0xFD, 0);
    let worst: Vec<[f64; 10]> = (0..points)
        .into_par_iter()
        .map(|i| {
            let p = q.point(i);
            let Site { seg, tau, x, y, k, h } = stencil_site(tl, p, |k| tol.fd_step / k, 4.0, false);
            // Time stencil in local coordinates; the divisor is the spacing actually represented.
            let (hp, hm) = ((tau + h) - tau, (tau - h) - tau);
            let span_t = hp - hm;
            let at = |dx: f64, dy: f64, dt: f64| {
                let step = if dt > 0.0 { hp } else if dt < 0.0 { hm } else { 0.0 };
                tl.eval_rebased(seg, x + dx, y + dy, tau, step).expect("stencil stays in segment")
            };
            let c = at(0.0, 0.0, 0.0);
            let scale = 0.0;
            let pv = |e: &Eval, dx: f64, dy: f64| e.field.point(x + dx, y + dy, scale);
            let sup = c.field.sup_native(scale);
            let span_x = (x + h) - (x - h);
            let span_y = (y + h) - (y - h);
            let dx = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / span_x;
            let dy = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / span_y;
            let dt = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / span_t;
            let here = pv(&c, 0.0, 0.0);
            let rel = |fd: f64, exact: f64, order: i32| (fd - exact).abs() / (sup * k.powi(order)).max(exact.abs());
            let ut = dt(&|s| pv(&at(0.0, 0.0, s), 0.0, 0.0).u);
            let utt = dt(&|s| pv(&at(0.0, 0.0, s), 0.0, 0.0).u_t);
            let ux = dx(&|s| pv(&at(s, 0.0, 0.0), s, 0.0).u);
            let uxx = dx(&|s| pv(&at(s, 0.0, 0.0), s, 0.0).u_x);
            let uy = dy(&|s| pv(&at(0.0, s, 0.0), 0.0, s).u);
            let uyy = dy(&|s| pv(&at(0.0, s, 0.0), 0.0, s).u_y);
            let utx = dt(&|s| pv(&at(0.0, 0.0, s), 0.0, 0.0).u_x);
            let a_scale = c.coeff.value.max_abs() * k;
            let arel = |fd: Sym2, exact: Sym2| fd.sub(exact).max_abs() / a_scale.max(exact.max_abs());
            let dsym = |f: &dyn Fn(f64) -> Sym2, span: f64| f(h).sub(f(-h)).scale(1.0 / span);
            let ax = dsym(&|s| at(s, 0.0, 0.0).coeff.value, span_x);
            let ay = dsym(&|s| at(0.0, s, 0.0).coeff.value, span_y);
            let at_ = at(0.0, 0.0, h).coeff.value.sub(at(0.0, 0.0, -h).coeff.value).scale(1.0 / span_t);
            [
                rel(ut, here.u_t, 1),
                rel(utt, here.u_tt, 2),
                rel(ux, here.u_x, 1),
                rel(uxx, here.u_xx, 2),
                rel(uy, here.u_y, 1),
                rel(uyy, here.u_yy, 2),
                rel(utx, here.u_tx, 2),
                arel(ax, c.coeff.dx),
                arel(ay, c.coeff.dy),
                arel(at_, c.coeff.dt),
            ]
        })
        .collect();
    let mut per = [0.0_f64; 10];
    for w in &worst {
        for (p, v) in per.iter_mut().zip(w) {
            *p = if v.is_nan() { f64::NAN } else { p.max(*v) };
        }
    }
    let max = per.iter().copied().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    FdReport {
        per_derivative: NAMES.iter().map(|s| s.to_string()).zip(per).collect(),
        max,
        points,
        tolerance: tol.fd_relative,
        passed: max <= tol.fd_relative,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdOrderReport {
    /// `R(h) / R(h/2)` per sampled point.
    pub ratios: Stats,
    /// The resolved sample whose ratio strays furthest from 4.
    pub worst: Option<OrderSample>,
    /// Samples whose difference residual at `h/2` sits within a factor
    /// [`RESOLUTION_FACTOR`] of the rounding floor, so no ratio can be read off.
    pub unresolved: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub points: usize,
    /// Step in units of `1/k`.
    pub step: f64,
    pub passed: bool,
}

/// A ratio is read only where the residual exceeds its rounding floor by this factor.
///
/// With a true second-order residual `r` at `h/2` and rounding at most `r / 10`
/// on each level, the ratio stays within `[39/11, 41/9]`, inside `[3, 5]`.
pub const RESOLUTION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSample {
    pub segment: usize,
    pub kind: String,
    /// Time from the segment start.
    pub tau: f64,
    pub ratio: f64,
    pub resolved: bool,
}

/// Residual assembled purely from values of `u` and `A` by second-order differences.
fn fd_residual(tl: &Timeline, seg: usize, x: f64, y: f64, tau: f64, h: f64) -> f64 {
    let scale = 0.0;
    let e = |dx: f64, dy: f64, dt: f64| tl.eval_rebased(seg, x + dx, y + dy, tau, dt).expect("stencil stays in segment");
    let u = |dx: f64, dy: f64, dt: f64| e(dx, dy, dt).field.point(x + dx, y + dy, scale).u;
    let a = |dx: f64, dy: f64| e(dx, dy, 0.0).coeff.value;
    let u0 = u(0.0, 0.0, 0.0);
    let h2 = h * h;
    let utt = (u(0.0, 0.0, h) - 2.0 * u0 + u(0.0, 0.0, -h)) / h2;
    let dxx = (a(0.5 * h, 0.0).xx * (u(h, 0.0, 0.0) - u0) - a(-0.5 * h, 0.0).xx * (u0 - u(-h, 0.0, 0.0))) / h2;
    let dyy = (a(0.0, 0.5 * h).yy * (u(0.0, h, 0.0) - u0) - a(0.0, -0.5 * h).yy * (u0 - u(0.0, -h, 0.0))) / h2;
    let (upp, upm, ump, umm) = (u(h, h, 0.0), u(h, -h, 0.0), u(-h, h, 0.0), u(-h, -h, 0.0));
    let dxy = (a(h, 0.0).xy * (upp - upm) - a(-h, 0.0).xy * (ump - umm)) / (4.0 * h2);
    let dyx = (a(0.0, h).xy * (upp - ump) - a(0.0, -h).xy * (upm - umm)) / (4.0 * h2);
    utt + dxx + dyy + dxy + dyx + tl.mu * u0
}

/// Second-order convergence of the difference residual under step halving.
pub fn verify_fd_order(tl: &Timeline, points: usize, step: f64, seed: u64, tol: &Tolerances) -> FdOrderReport {
    let q = QuasiSampler::<4>::new(seed ^ 0x0D, 0);
    let samples: Vec<OrderSample> = (0..points)
        .into_par_iter()
        .map(|i| {
            let p = q.point(i);
            // A power-of-two step with the centre on its grid keeps every stencil node exact.
            let Site { seg, tau, x, y, k, h } = stencil_site(tl, p, |k| (step / k).log2().round().exp2(), 2.0, true);
            let c = tl.eval_rebased(seg, x, y, tau, 0.0).expect("sample");
            let scale = 0.0;
            let size = c.field.sup_native(scale) * (1.0 + k * k);
            let r1 = fd_residual(tl, seg, x, y, tau, h).abs() / size;
            let r2 = fd_residual(tl, seg, x, y, tau, 0.5 * h).abs() / size;
            // About sixteen rounded values of the size `u` takes on the stencil, times
            // max(1, |A|), over the squared step; rounding is relative to each value.
            let half = 0.5 * h;
            let pv = c.field.point(x, y, scale);
            let local = pv.u.abs() + 2.0 * h * (pv.u_t.abs() + pv.u_x.abs() + pv.u_y.abs());
            let floor = 16.0 * f64::EPSILON * c.coeff.value.max_abs().max(1.0) * local / (half * half * size);
            let kind = tl.segments[seg].segment.kind.name().to_string();
            OrderSample { segment: seg, kind, tau, ratio: r1 / r2, resolved: r2 >= RESOLUTION_FACTOR * floor }
        })
        .collect();
    let unresolved = samples.iter().filter(|s| !s.resolved).count();
    let ratios: Vec<f64> = samples.iter().filter(|s| s.resolved).map(|s| s.ratio).collect();
    let worst = samples
        .iter()
        .filter(|s| s.resolved)
        .max_by(|a, b| (a.ratio / 4.0).ln().abs().total_cmp(&(b.ratio / 4.0).ln().abs()))
        .cloned();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    FdOrderReport {
        ratios: Stats::of(ratios.iter().copied()),
        worst,
        unresolved,
        min_ratio,
        max_ratio,
        points,
        step,
        passed: min_ratio >= tol.fd_ratio_min && max_ratio <= tol.fd_ratio_max,
    }
}
