//! Checks specific to the Hölder chain: sampled seminorms, the size of
//! `A - Id`, and the state at the end of the finite chain.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::sampling::rng;
use super::stats::Fit;
use super::tolerances::Tolerances;
use crate::assembly::{Timeline, TimelineKind};
use crate::error::{Error, Result};
use crate::scalarcore::LogScalar;
use crate::segments::{CoeffJet, Sym2};

fn require_holder_chain(tl: &Timeline) -> Result<f64> {
    match (tl.kind, tl.alpha) {
        (TimelineKind::PlisMiller, Some(alpha)) => Ok(alpha),
        _ => Err(Error::WrongKind { expected: TimelineKind::PlisMiller.name(), found: tl.kind.name().into() }),
    }
}

/// Largest Euclidean gradient in `(x, y, t)` over the three entries.
fn gradient(c: &CoeffJet) -> f64 {
    let e = |f: fn(&Sym2) -> f64| f(&c.dx).hypot(f(&c.dy)).hypot(f(&c.dt));
    e(|s| s.xx).max(e(|s| s.xy)).max(e(|s| s.yy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderBlock {
    pub n: usize,
    /// Sampled `sup |A - Id|` (largest entry).
    pub deviation: f64,
    /// Sampled `sup |grad A|`.
    pub gradient: f64,
    /// Largest sampled `|A(p) - A(q)| / |p - q|^alpha`.
    pub estimate: f64,
    /// Interpolation bound `a^alpha (2b)^{1 - alpha}` from the two sampled sups.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub blocks: Vec<HolderBlock>,
    /// Largest quotient over pairs straddling block boundaries.
    pub across: f64,
    /// Largest estimate over everything sampled.
    pub global: f64,
    /// `max_n estimate_n / estimate_1`.
    pub uniformity: f64,
    /// Every block within `holder_factor` times its bound.
    pub bounded: bool,
    /// `uniformity <= holder_factor`.
    pub uniform: bool,
    /// `|A - Id| <= holder_margin` in the first block.
    pub margin_ok: bool,
    /// Slope of the per-block deviation against the block index; not positive when decreasing.
    pub deviation_trend: f64,
    pub passed: bool,
}

fn point_in(tl: &Timeline, b: usize, r: &mut impl Rng) -> [f64; 3] {
    let blk = &tl.blocks[b];
    [TAU * r.random::<f64>(), TAU * r.random::<f64>(), blk.start + (blk.end - blk.start) * r.random::<f64>()]
}

fn unit_direction(r: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| 2.0 * r.random::<f64>() - 1.0);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn coeff(tl: &Timeline, p: [f64; 3]) -> CoeffJet {
    tl.eval(p[0], p[1], p[2]).expect("sample lies in the chain").coeff
}

fn quotient(tl: &Timeline, p: [f64; 3], q: [f64; 3], alpha: f64) -> f64 {
    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
    if d == 0.0 {
        return 0.0;
    }
    coeff(tl, p).value.sub(coeff(tl, q).value).max_abs() / d.powf(alpha)
}

/// Pair separations are drawn log-uniformly around `2b/a`, where the quotient of
/// a function with slope `a` and oscillation `2b` peaks.
fn separation(peak: f64, r: &mut impl Rng) -> f64 {
    peak * 10f64.powf(r.random_range(-2.0..1.0))
}

/// Randomized pairwise Hölder seminorm of `A` per block, across block boundaries and globally.
pub fn verify_holder(tl: &Timeline, pair_samples: usize, seed: u64, tol: &Tolerances) -> Result<HolderReport> {
    let alpha = require_holder_chain(tl)?;
    let blocks: Vec<HolderBlock> = (0..tl.blocks.len())
        .into_par_iter()
        .map(|b| {
            let mut r = rng(seed ^ 0x401D, b as u64);
            let (start, end) = (tl.blocks[b].start, tl.blocks[b].end);
            let (mut dev, mut grad) = (0.0_f64, 0.0_f64);
            for _ in 0..pair_samples {
                let c = coeff(tl, point_in(tl, b, &mut r));
                dev = dev.max(c.value.sub(Sym2::identity()).max_abs());
                grad = grad.max(gradient(&c));
            }
            let peak = if grad > 0.0 { (2.0 * dev / grad).min(end - start) } else { end - start };
            let mut est = 0.0_f64;
            for _ in 0..pair_samples {
                let p = point_in(tl, b, &mut r);
                let (dir, s) = (unit_direction(&mut r), separation(peak, &mut r));
                let mut q = std::array::from_fn(|i| p[i] + s * dir[i]);
                if !(start..=end).contains(&q[2]) {
                    q = std::array::from_fn(|i| p[i] - s * dir[i]);
                }
                if (start..=end).contains(&q[2]) {
                    est = est.max(quotient(tl, p, q, alpha));
                }
            }
            let bound = grad.powf(alpha) * (2.0 * dev).powf(1.0 - alpha);
            HolderBlock { n: tl.blocks[b].n, deviation: dev, gradient: grad, estimate: est, bound }
        })
        .collect();
    let across = (1..tl.blocks.len())
        .into_par_iter()
        .map(|b| {
            let mut r = rng(seed ^ 0xAC05, b as u64);
            let edge = tl.blocks[b].start;
            let peak = [&blocks[b - 1], &blocks[b]]
                .iter()
                .filter(|h| h.gradient > 0.0)
                .map(|h| 2.0 * h.deviation / h.gradient)
                .fold(tl.blocks[b].end - edge, f64::min)
                .min(edge - tl.blocks[b - 1].start);
            let mut est = 0.0_f64;
            for _ in 0..pair_samples {
                let (s1, s2) = (separation(peak, &mut r), separation(peak, &mut r));
                let p = [TAU * r.random::<f64>(), TAU * r.random::<f64>(), (edge - s1).max(tl.blocks[b - 1].start)];
                let dir = unit_direction(&mut r);
                let q = [p[0] + s2 * dir[0], p[1] + s2 * dir[1], (edge + s2 * dir[2].abs()).min(tl.blocks[b].end)];
                est = est.max(quotient(tl, p, q, alpha));
            }
            est
        })
        .reduce(|| 0.0, f64::max);
    let global = blocks.iter().map(|b| b.estimate).fold(across, f64::max);
    let first = blocks.first().map_or(0.0, |b| b.estimate);
    let uniformity = if first > 0.0 { blocks.iter().map(|b| b.estimate / first).fold(0.0, f64::max) } else { f64::INFINITY };
    let bounded = blocks.iter().all(|b| b.estimate <= tol.holder_factor * b.bound);
    let uniform = uniformity <= tol.holder_factor;
    let margin_ok = blocks.first().is_some_and(|b| b.deviation <= tol.holder_margin);
    let deviation_trend = if blocks.len() >= 2 {
        let xs: Vec<f64> = blocks.iter().map(|b| b.n as f64).collect();
        let ys: Vec<f64> = blocks.iter().map(|b| b.deviation).collect();
        Fit::linear(&xs, &ys).slope()
    } else {
        0.0
    };
    let passed = bounded && uniform && margin_ok && deviation_trend <= 0.0;
    Ok(HolderReport { alpha, blocks, across, global, uniformity, bounded, uniform, margin_ok, deviation_trend, passed })
}

/// Log magnitudes of the solution data at the end of the finite chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub t: f64,
    pub horizon: f64,
    pub log_u: f64,
    pub log_du: f64,
    pub log_flux: f64,
    pub log_dflux: f64,
    /// `|grad A|` per block against the distance to the horizon, fitted as a power law.
    pub growth: Option<Fit>,
    /// Exponent `d` of `|grad A| ~ (T - t)^{-d}`.
    pub growth_exponent: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

fn ln(v: f64) -> f64 {
    LogScalar::from_f64(v).logmag()
}

/// The chain is extended by zero past its horizon: `u`, its derivatives, the flux
/// `A grad u` and its derivatives must all be negligible at the last block boundary,
/// while `|grad A|` may grow only polynomially towards the horizon.
pub fn verify_extension_zero(tl: &Timeline, samples_per_block: usize, seed: u64, tol: &Tolerances) -> Result<ExtensionReport> {
    require_holder_chain(tl)?;
    let t = tl.t_end();
    let horizon = tl.horizon.unwrap_or(t);
    let e = tl.eval_side(0.0, 0.0, t, crate::assembly::Side::Left)?;
    // Log-domain bounds over the torus: each mode contributes |f^(j)| k^i to a partial of total order i + j.
    let order = |total: usize| {
        e.field
            .modes()
            .map(|(_, m)| {
                (0..=total.min(2))
                    .map(|j| m.deriv(j).abs() * LogScalar::exp((total - j) as f64 * m.k.ln()))
                    .fold(LogScalar::ZERO, |a, b| if a.cmp_abs(b).is_ge() { a } else { b })
            })
            .fold(LogScalar::ZERO, |a, b| a + b)
            .logmag()
    };
    let (log_u, log_du, log_d2u) = (order(0), order(1), order(2));
    let a = e.coeff.value.max_abs();
    let da = e.coeff.c1_sup();
    let log_flux = ln(2.0 * a) + log_du;
    let log_dflux = (LogScalar::exp(ln(2.0 * da) + log_du) + LogScalar::exp(ln(2.0 * a) + log_d2u)).logmag();
    let threshold = tol.extension_logmag;
    let small = [log_u, log_du, log_flux, log_dflux].iter().all(|&l| l <= threshold);

    let rows: Vec<(f64, f64)> = (0..tl.blocks.len())
        .into_par_iter()
        .map(|b| {
            let mut r = rng(seed ^ 0x6E0, b as u64);
            let sup = (0..samples_per_block).map(|_| gradient(&coeff(tl, point_in(tl, b, &mut r)))).fold(0.0, f64::max);
            ((horizon - tl.blocks[b].start).ln(), sup.ln())
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).unzip();
    let growth = (xs.len() >= 3).then(|| Fit::linear(&xs, &ys));
    let growth_exponent = growth.as_ref().map(|f| -f.slope());
    let polynomial = growth.as_ref().is_some_and(|f| f.r2 >= tol.growth_r2 && f.slope().is_finite());
    Ok(ExtensionReport {
        t,
        horizon,
        log_u,
        log_du,
        log_flux,
        log_dflux,
        growth,
        growth_exponent,
        threshold,
        passed: small && polynomial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{harmonic_half_cylinder, plis_miller_chain, PackingMode};

    #[test]
    fn wrong_kind_is_rejected() {
        let tl = harmonic_half_cylinder(12, 1, PackingMode::Strict).unwrap();
        let tol = Tolerances::default();
        assert!(matches!(verify_holder(&tl, 10, 1, &tol), Err(Error::WrongKind { .. })));
        assert!(matches!(verify_extension_zero(&tl, 10, 1, &tol), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn sampled_quotients_respect_the_interpolation_bound() {
        let tl = plis_miller_chain(1.0 / 3.0, 50, 4).unwrap();
        let rep = verify_holder(&tl, 400, 3, &Tolerances::default()).unwrap();
        for b in &rep.blocks {
            assert!(b.estimate > 0.0 && b.estimate <= 2.0 * b.bound, "{b:?}");
        }
        assert!(rep.bounded);
    }

    #[test]
    fn interpolation_bound_arithmetic() {
        // f(x) = b sin(a x / b): slope a, oscillation 2b.
        let (a, b, alpha) = (3.0_f64, 0.5_f64, 1.0 / 3.0);
        let f = |x: f64| b * (a * x / b).sin();
        let bound = a.powf(alpha) * (2.0 * b).powf(1.0 - alpha);
        let mut best = 0.0_f64;
        for i in 1..2000 {
            let d = i as f64 * 1e-3;
            best = best.max((f(d) - f(0.0)).abs() / d.powf(alpha));
        }
        assert!(best <= bound);
    }

    #[test]
    fn chain_end_is_negligible() {
        let tl = plis_miller_chain(1.0 / 3.0, 50, 40).unwrap();
        let rep = verify_extension_zero(&tl, 200, 1, &Tolerances::default()).unwrap();
        assert!(rep.log_dflux <= -69.0, "{rep:?}");
        assert!(rep.growth_exponent.unwrap() > 0.0);
        assert!(rep.passed, "{rep:?}");
    }
}
