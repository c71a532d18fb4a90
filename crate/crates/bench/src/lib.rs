//! Fixtures shared by the benchmarks: the reference constructions and evaluation points.

use std::f64::consts::TAU;

use superdecay::parabolic::{parabolic_chain, ParabolicChain};
use superdecay::verifier::QuasiSampler;
use superdecay::{BuildParams, Construction, PackingMode, Timeline, TimelineKind};

fn elliptic(kind: TimelineKind, n0: u32, blocks: usize) -> Timeline {
    let params = BuildParams { kind, n0, blocks, mode: PackingMode::Strict, ..BuildParams::default() };
    match params.build().expect("reference parameters are admissible") {
        Construction::Elliptic(tl) => tl,
        Construction::Parabolic(_) => unreachable!("elliptic kind"),
    }
}

/// Harmonic half-cylinder with `n0 = 12`.
pub fn harmonic(blocks: usize) -> Timeline {
    elliptic(TimelineKind::Harmonic, 12, blocks)
}

/// Full-cylinder eigenfunction with `mu = 1`, `n0 = 12`; includes the integrated head.
pub fn eigen_full(blocks: usize) -> Timeline {
    elliptic(TimelineKind::EigenFull, 12, blocks)
}

pub fn parabolic(blocks: usize) -> ParabolicChain {
    parabolic_chain(blocks).expect("reference parameters are admissible")
}

/// `count` points spread over the torus and the time span `[t0, t1]`.
pub fn points(t0: f64, t1: f64, count: usize) -> Vec<(f64, f64, f64)> {
    let q = QuasiSampler::<3>::new(0xBE7C, 0);
    (0..count)
        .map(|i| {
            let p = q.point(i);
            (TAU * p[0], TAU * p[1], t0 + (t1 - t0) * p[2])
        })
        .collect()
}
