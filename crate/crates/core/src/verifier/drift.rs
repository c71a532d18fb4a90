//! Checks over the parabolic chain: residual, drift bounds and continuity, junctions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::elliptic::{JunctionReport, JunctionRow, ResidualReport, SegmentStats};
use super::sampling::QuasiSampler;
use super::stats::Stats;
use super::tolerances::Tolerances;
use crate::parabolic::{ParabolicBlock, ParabolicChain, ParabolicPoint};
use crate::scalarcore::SQRT_PI;

/// Offset of the one-sided probes at window edges.
const EDGE_OFFSET: f64 = 1e-9;
/// Spatial probes per edge or junction.
const PROBES: usize = 8;

fn block_point(chain: &ParabolicChain, b: usize, q: &QuasiSampler<3>, i: usize) -> (f64, f64, f64) {
    let blk = &chain.blocks[b];
    let p = q.point(i);
    (TAU * p[1], TAU * p[2], blk.start + blk.length() * p[0])
}

/// `u_t - Δu - B·∇u` relative to `sup|u| (1 + k^2)` at quasi-random points of every block.
pub fn verify_parabolic_residual(chain: &ParabolicChain, samples_per_block: usize, seed: u64, tol: &Tolerances) -> ResidualReport {
    let per_segment: Vec<SegmentStats> = (0..chain.blocks.len())
        .into_par_iter()
        .map(|b| {
            let q = QuasiSampler::<3>::new(seed ^ 0x9A, b as u64);
            let values = (0..samples_per_block).map(|i| {
                let (x, y, t) = block_point(chain, b, &q, i);
                chain.eval_in(b, x, y, t).point.relative_residual()
            });
            SegmentStats { index: b, kind: "parabolic_block".into(), block: Some(b), stats: Stats::of(values) }
        })
        .collect();
    let overall = per_segment.iter().fold(Stats::default(), |a, r| a.merge(r.stats));
    let max = if overall.count == 0 { 0.0 } else { overall.max };
    ResidualReport { passed: max <= tol.parabolic_residual, per_segment, overall, tolerance: tol.parabolic_residual }
}

fn drift_norm(p: &ParabolicPoint) -> f64 {
    p.drift[0].norm().hypot(p.drift[1].norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftBlock {
    pub n: usize,
    pub k: f64,
    pub kprime: f64,
    /// Sampled `sup |B|`.
    pub sup: f64,
    /// `sqrt(pi) e^{3(k'^2 - k^2)/k}`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub blocks: Vec<DriftBlock>,
    /// Sampled sup over the chain and the envelope at `k = 1`, `k' = 2`.
    pub chain_sup: f64,
    pub chain_envelope: f64,
    /// Largest one-sided jump of `B` at window edges and block junctions.
    pub edge_defect: f64,
    /// Largest `|u(-x, -y) - conj u(x, y)|` relative to `sup |u|`.
    pub conjugation_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn edges(b: &ParabolicBlock) -> [f64; 6] {
    let (add, rem) = (b.add_window(), b.remove_window());
    [b.start, add.start, add.end(), rem.start, rem.end(), b.end()]
}

/// Sampled sup of `|B|` per block against its envelope, and continuity at every window edge.
pub fn verify_drift_bounds(chain: &ParabolicChain, samples_per_block: usize, seed: u64, tol: &Tolerances) -> DriftReport {
    let blocks: Vec<DriftBlock> = (0..chain.blocks.len())
        .into_par_iter()
        .map(|b| {
            let q = QuasiSampler::<3>::new(seed ^ 0xD7, b as u64);
            let blk = &chain.blocks[b];
            let sup = (0..samples_per_block)
                .map(|i| {
                    let (x, y, t) = block_point(chain, b, &q, i);
                    drift_norm(&chain.eval_in(b, x, y, t).point)
                })
                .fold(0.0, f64::max);
            DriftBlock { n: blk.n, k: blk.k, kprime: blk.kprime, sup, envelope: blk.drift_envelope() }
        })
        .collect();
    let chain_sup = blocks.iter().map(|b| b.sup).fold(0.0, f64::max);
    let chain_envelope = SQRT_PI * 9f64.exp();

    let q = QuasiSampler::<2>::new(seed ^ 0xED, 0);
    let probes: Vec<(f64, f64)> = (0..PROBES).map(|i| q.point(i)).map(|p| (TAU * p[0], TAU * p[1])).collect();
    let edge_defect = (0..chain.blocks.len())
        .into_par_iter()
        .map(|b| {
            let blk = &chain.blocks[b];
            let mut worst = 0.0_f64;
            for e in edges(blk) {
                for &(x, y) in &probes {
                    let at = |t: f64| blk.point(x, y, t, blk.scale(t)).drift;
                    let here = at(e);
                    for t in [e - EDGE_OFFSET, e + EDGE_OFFSET] {
                        // Probes beyond the block are taken from the neighbouring block.
                        let other = if t < blk.start {
                            b.checked_sub(1).map(|p| chain.eval_in(p, x, y, t).point.drift)
                        } else if t > blk.end() {
                            chain.blocks.get(b + 1).map(|_| chain.eval_in(b + 1, x, y, t).point.drift)
                        } else {
                            Some(at(t))
                        };
                        if let Some(o) = other {
                            worst = worst.max((o[0] - here[0]).norm()).max((o[1] - here[1]).norm());
                        }
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let qc = QuasiSampler::<3>::new(seed ^ 0xC0, 0);
    let conjugation_defect = (0..chain.blocks.len() * PROBES * 8)
        .into_par_iter()
        .map(|i| {
            let p = qc.point(i);
            let t = chain.t_start() + (chain.t_end() - chain.t_start()) * p[0];
            let (x, y) = (TAU * p[1], TAU * p[2]);
            let a = chain.eval(x, y, t).expect("inside the chain").point;
            let b = chain.eval(-x, -y, t).expect("inside the chain").point;
            (a.u - b.u.conj()).norm() / a.sup.max(f64::MIN_POSITIVE)
        })
        .reduce(|| 0.0, f64::max);

    let envelope_ok = blocks.iter().all(|b| b.sup <= b.envelope) && chain_sup <= chain_envelope;
    let passed = envelope_ok && edge_defect <= tol.drift_defect && conjugation_defect <= tol.attained_bound;
    DriftReport { blocks, chain_sup, chain_envelope, edge_defect, conjugation_defect, tolerance: tol.drift_defect, passed }
}

/// One-sided jumps of `u`, `u_t`, `∇u`, `Δu` and `B` at every block junction.
pub fn verify_parabolic_junctions(chain: &ParabolicChain, seed: u64, tol: &Tolerances) -> JunctionReport {
    let q = QuasiSampler::<2>::new(seed ^ 0x1B, 0);
    let probes: Vec<(f64, f64)> = (0..PROBES).map(|i| q.point(i)).map(|p| (TAU * p[0], TAU * p[1])).collect();
    let rows: Vec<JunctionRow> = chain
        .blocks
        .windows(2)
        .map(|w| {
            let (l, r) = (&w[0], &w[1]);
            let t = r.start;
            let scale = l.scale(t);
            let (mut u, mut a) = (0.0_f64, 0.0_f64);
            for &(x, y) in &probes {
                let (pl, pr) = (l.point(x, y, t, scale), r.point(x, y, t, scale));
                let k = l.kprime.max(r.kprime);
                let sup = pl.sup.max(pr.sup);
                let d = |p: Complex64, q: Complex64, order: i32| (p - q).norm() / (sup * k.powi(order));
                u = u
                    .max(d(pl.u, pr.u, 0))
                    .max(d(pl.u_t, pr.u_t, 2))
                    .max(d(pl.grad[0], pr.grad[0], 1))
                    .max(d(pl.grad[1], pr.grad[1], 1))
                    .max(d(pl.laplacian, pr.laplacian, 2));
                a = a.max((pl.drift[0] - pr.drift[0]).norm()).max((pl.drift[1] - pr.drift[1]).norm());
            }
            JunctionRow { t, left: format!("parabolic_block {}", l.n), right: format!("parabolic_block {}", r.n), u_defect: u, a_defect: a }
        })
        .collect();
    let max_u = rows.iter().map(|r| r.u_defect).fold(0.0, f64::max);
    let max_a = rows.iter().map(|r| r.a_defect).fold(0.0, f64::max);
    JunctionReport { rows, max_u, max_a, passed: max_u <= tol.junction_u && max_a <= tol.drift_defect }
}
