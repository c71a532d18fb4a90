//! Seedable low-discrepancy points: an additive recurrence with generalized
//! golden-ratio steps, shifted by a ChaCha draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Root of `x^{d+1} = x + 1` by fixed-point iteration.
fn harmonious(d: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

#[derive(Debug, Clone)]
pub struct QuasiSampler<const D: usize> {
    step: [f64; D],
    shift: [f64; D],
}

impl<const D: usize> QuasiSampler<D> {
    /// Independent sequence for each `(seed, stream)`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let g = harmonious(D);
        let mut step = [0.0; D];
        let mut p = 1.0;
        for s in &mut step {
            p /= g;
            *s = p;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut shift = [0.0; D];
        for s in &mut shift {
            *s = rng.random::<f64>();
        }
        Self { step, shift }
    }

    /// `i`-th point in `[0, 1)^D`.
    pub fn point(&self, i: usize) -> [f64; D] {
        let mut out = [0.0; D];
        for ((o, s), a) in out.iter_mut().zip(&self.shift).zip(&self.step) {
            *o = (s + a * i as f64).fract();
        }
        out
    }
}

/// Seeded generator for pair sampling and random directions.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
