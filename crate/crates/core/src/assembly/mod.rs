//! Chains of segments: the harmonic and eigenfunction half-cylinders, the
//! full-cylinder eigenfunction, and the Hölder and Gaussian chains.

mod block;
mod chains;

use serde::{Deserialize, Serialize};

pub use block::{
    block_log_constant, building_block, building_block_at, BlockBuild, PackingMode, SlowdownLayout, ACCELERATION_START,
    BLOCK_LENGTH, CHANGE_END, ENTRY_HOLD, SLOWDOWN_PAUSE, SLOWDOWN_START, SLOW_B,
};
pub use chains::{
    eigen_full_cylinder, eigen_half_cylinder, gaussian_chain, harmonic_half_cylinder, harmonic_log_decay_closed_form,
    lift_floor, plis_miller_chain, plis_miller_constant, EIGEN_CLASS, HARMONIC_CLASS, HEAD_SWITCH_TIME,
};

use crate::error::{Error, Result};
use crate::scalarcore::{theta_jet, LogScalar};
pub use crate::segments::Side;
use crate::segments::{CoeffJet, FieldJet, RegularityClass, Segment};

/// Version of the serialized timeline layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimelineKind {
    Harmonic,
    EigenHalf,
    EigenFull,
    PlisMiller,
    Gaussian,
    Parabolic,
}

impl TimelineKind {
    pub fn name(self) -> &'static str {
        match self {
            TimelineKind::Harmonic => "harmonic",
            TimelineKind::EigenHalf => "eigen_half",
            TimelineKind::EigenFull => "eigen_full",
            TimelineKind::PlisMiller => "plis_miller",
            TimelineKind::Gaussian => "gaussian",
            TimelineKind::Parabolic => "parabolic",
        }
    }

    pub const ALL: [TimelineKind; 6] = [
        TimelineKind::Harmonic,
        TimelineKind::EigenHalf,
        TimelineKind::EigenFull,
        TimelineKind::PlisMiller,
        TimelineKind::Gaussian,
        TimelineKind::Parabolic,
    ];
}

impl std::str::FromStr for TimelineKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let wanted = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == wanted).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown construction kind {s:?}, expected one of {}", names.join(", "))
        })
    }
}

/// Bookkeeping for one block `n` on `[start, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// 1-based block index.
    pub n: usize,
    pub start: f64,
    pub end: f64,
    pub k: f64,
    pub kprime: f64,
    /// `c_n` in `c_n cos(k_n x) e^{-k_n (t - origin)}`.
    pub c: LogScalar,
    /// `sup |u(start)| = c_n e^{-k_n t_n}`.
    pub entry: LogScalar,
    /// Block coordinates are `(y, x)` of the cylinder.
    pub swapped: bool,
    /// Index range into the timeline's segments.
    pub first_segment: usize,
    pub segment_count: usize,
}

/// A segment together with the block it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedSegment {
    pub segment: Segment,
    /// `None` for segments outside any block (the symmetrization head).
    pub block: Option<usize>,
    pub swapped: bool,
}

/// Diagonal addition turning an `A`-harmonic two-mode field into a `-mu` eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenLift {
    pub mu: f64,
    /// Wavenumbers `k_1 .. k_{N+2}`.
    pub ks: Vec<f64>,
}

impl EigenLift {
    /// Lift entries in block coordinates `(x, y)` with their time derivatives, for
    /// block `n` ending at `end`.
    pub fn entries(&self, n: usize, end: f64, t: f64) -> ([f64; 2], [f64; 2]) {
        let k = |i: usize| self.ks[i - 1];
        let (hi, lo) = (self.mu / (k(n) * k(n)), self.mu / (k(n + 2) * k(n + 2)));
        let w = theta_jet(100.0 * (t - end) + 1.0);
        let x = (hi - lo) * w[0] + lo;
        let dx = (hi - lo) * 100.0 * w[1];
        ([x, self.mu / (k(n + 1) * k(n + 1))], [dx, 0.0])
    }
}

/// Field and coefficient at a point, in cylinder coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub field: FieldJet,
    pub coeff: CoeffJet,
    pub mu: f64,
    pub segment: usize,
}

/// Immutable chain of segments tiling `[t_start, t_end]` (mirrored to negative
/// times when `reflected`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub version: u32,
    pub kind: TimelineKind,
    pub mode: PackingMode,
    pub n0: u32,
    pub mu: f64,
    /// Hölder exponent for the Plis-Miller chain.
    pub alpha: Option<f64>,
    /// Hypothesis constant used for the PML frequency/width conditions.
    pub pml_constant: Option<f64>,
    pub blocks: Vec<Block>,
    pub segments: Vec<PlacedSegment>,
    pub lift: Option<EigenLift>,
    /// Even extension `u(t) = u(-t)`.
    pub reflected: bool,
    /// Limit of the block times when the chain has a finite horizon (extension by zero beyond).
    pub horizon: Option<f64>,
    /// Time at which the block chain starts (0, or the head length for the full cylinder).
    pub origin: f64,
    /// `sup |u|` at the end of the last block.
    pub final_sup: LogScalar,
    /// Union of the declared classes of the parts.
    pub declared: RegularityClass,
}

impl Timeline {
    pub fn t_start(&self) -> f64 {
        let s = self.segments.first().map_or(0.0, |p| p.segment.start);
        if self.reflected {
            -self.t_end()
        } else {
            s
        }
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |p| p.segment.end)
    }

    /// Internal segment boundaries (positive side only for reflected timelines, plus 0).
    pub fn junctions(&self) -> Vec<(usize, f64)> {
        self.segments.windows(2).enumerate().map(|(i, w)| (i, w[0].segment.end)).collect()
    }

    /// Block starts `t_n` in chain time.
    pub fn block_times(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.start).collect()
    }

    /// Index of the segment owning `t >= 0` (the later one on a boundary).
    pub fn locate(&self, t: f64, side: Side) -> Result<usize> {
        let (lo, hi) = (self.segments[0].segment.start, self.t_end());
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfInterval { t, start: self.t_start(), end: hi });
        }
        let idx = self.segments.partition_point(|p| p.segment.start <= t);
        let mut i = idx.saturating_sub(1);
        if side == Side::Left && i > 0 && self.segments[i].segment.start == t {
            i -= 1;
        }
        Ok(i)
    }

    /// Field and coefficient at `(x, y, t)` taken from segment `i`.
    pub fn eval_in(&self, i: usize, x: f64, y: f64, t: f64) -> Result<Eval> {
        self.eval_in_side(i, x, y, t, Side::Right)
    }

    /// As [`Timeline::eval_in`], with a one-sided limit at phase boundaries inside the segment.
    pub fn eval_in_side(&self, i: usize, x: f64, y: f64, t: f64, side: Side) -> Result<Eval> {
        let placed = &self.segments[i];
        let seg = &placed.segment;
        let (xs, ys) = if placed.swapped { (y, x) } else { (x, y) };
        let (mut field, mut coeff) = seg.eval_side(xs, ys, t, side)?;
        if let (Some(lift), Some(b)) = (&self.lift, placed.block) {
            let block = &self.blocks[b];
            let (v, d) = lift.entries(block.n, block.end, t);
            coeff = coeff.add_diag(v[0], v[1], d[0], d[1]);
        }
        if placed.swapped {
            field = field.swapped();
            coeff = coeff.swapped();
        }
        Ok(Eval { field, coeff, mu: self.mu, segment: i })
    }

    /// As [`Timeline::eval_in`] with time given relative to the segment start
    /// and the segment amplitude renormalized to one.
    pub fn eval_local(&self, i: usize, x: f64, y: f64, tau: f64) -> Result<Eval> {
        self.check_local(i, tau)?;
        self.finish_local(i, x, y, tau, self.segments[i].segment.unit_field_local(tau))
    }

    /// Stencil evaluation at local time `tau + dt`, with log scales measured
    /// from the field at `tau`.
    ///
    /// Absolute times near the end of a long chain, log amplitudes of size 1e6,
    /// and exponents like `k tau` inside one long segment all dwarf the change
    /// across a step of `1e-6 / k`; this keeps only the change.
    pub fn eval_rebased(&self, i: usize, x: f64, y: f64, tau: f64, dt: f64) -> Result<Eval> {
        self.check_local(i, tau)?;
        self.check_local(i, tau + dt)?;
        let field = self.segments[i].segment.unit_field_rebased(tau, dt);
        self.finish_local(i, x, y, tau + dt, field)
    }

    fn check_local(&self, i: usize, tau: f64) -> Result<()> {
        let seg = &self.segments[i].segment;
        if (0.0..=seg.duration()).contains(&tau) {
            Ok(())
        } else {
            Err(Error::OutOfInterval { t: seg.start + tau, start: seg.start, end: seg.end })
        }
    }

    fn finish_local(&self, i: usize, x: f64, y: f64, tau: f64, mut field: FieldJet) -> Result<Eval> {
        let placed = &self.segments[i];
        let seg = &placed.segment;
        let (xs, ys) = if placed.swapped { (y, x) } else { (x, y) };
        let mut coeff = seg.coeff_local(xs, ys, tau);
        if let (Some(lift), Some(b)) = (&self.lift, placed.block) {
            let block = &self.blocks[b];
            let (v, d) = lift.entries(block.n, block.end, seg.start + tau);
            coeff = coeff.add_diag(v[0], v[1], d[0], d[1]);
        }
        if placed.swapped {
            field = field.swapped();
            coeff = coeff.swapped();
        }
        Ok(Eval { field, coeff, mu: self.mu, segment: i })
    }

    /// Evaluate at `(x, y, t)`, taking the given one-sided limit on boundaries.
    pub fn eval_side(&self, x: f64, y: f64, t: f64, side: Side) -> Result<Eval> {
        if self.reflected && t < 0.0 {
            let mirrored = match side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            let i = self.locate(-t, mirrored)?;
            let e = self.eval_in_side(i, x, y, -t, mirrored)?;
            return Ok(Eval { field: e.field.reflected(), coeff: e.coeff.reflected(), ..e });
        }
        let i = self.locate(t, side)?;
        self.eval_in_side(i, x, y, t, side)
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<Eval> {
        self.eval_side(x, y, t, Side::Right)
    }

    /// `sup` over the torus of `|u(t)|`.
    pub fn sup(&self, t: f64) -> Result<LogScalar> {
        Ok(self.eval(0.0, 0.0, t)?.field.sup())
    }

    /// Log-sup at every block start and at the end of the chain.
    pub fn block_sups(&self) -> Vec<(f64, LogScalar)> {
        let mut out: Vec<_> = self.blocks.iter().map(|b| (b.start, b.entry)).collect();
        if let Some(last) = self.blocks.last() {
            out.push((last.end, self.final_sup));
        }
        out
    }
}

/// Collects segments and blocks while a chain is built.
#[derive(Debug, Default)]
pub(crate) struct Assembler {
    pub blocks: Vec<Block>,
    pub segments: Vec<PlacedSegment>,
    pub declared: Option<RegularityClass>,
}

impl Assembler {
    pub fn push_loose(&mut self, segment: Segment) {
        self.note(segment.declared);
        self.segments.push(PlacedSegment { segment, block: None, swapped: false });
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_block(&mut self, k: f64, kprime: f64, c: LogScalar, entry: LogScalar, swapped: bool, segs: Vec<Segment>) {
        let n = self.blocks.len() + 1;
        let first = self.segments.len();
        let start = segs.first().map_or(0.0, |s| s.start);
        let end = segs.last().map_or(start, |s| s.end);
        let count = segs.len();
        for segment in segs {
            self.note(segment.declared);
            self.segments.push(PlacedSegment { segment, block: Some(n - 1), swapped });
        }
        self.blocks.push(Block { n, start, end, k, kprime, c, entry, swapped, first_segment: first, segment_count: count });
    }

    fn note(&mut self, class: RegularityClass) {
        self.declared = Some(match self.declared {
            Some(d) => d.join(class),
            None => class,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn slowdown_duration_and_block_constant() {
        let layout = SlowdownLayout::new(4096.0, 8192.0);
        // Independent evaluation: 2^-16 + 8 ln 4096/(4096 - 8192/3) + sqrt(4 ln 4096)/8192^(1/3) + 1/100.
        let ln_k = 12.0 * std::f64::consts::LN_2;
        let oracle = 2f64.powi(-16) + 8.0 * ln_k * 3.0 / 4096.0 + (4.0 * ln_k).sqrt() / 8192f64.powf(1.0 / 3.0) + 0.01;
        assert!(rel(layout.duration(), oracle) < 1e-12);
        assert!((layout.duration() - 0.3450).abs() < 2e-4, "{}", layout.duration());
        assert!((block_log_constant(4096.0, 8192.0) - 4778.667).abs() < 1e-3);
        let k = 100.0;
        assert!(rel(block_log_constant(k, 2.0 * k), 7.0 * k / 6.0) < 1e-15);
    }

    #[test]
    fn block_constant_relates_entry_and_exit() {
        let c1 = LogScalar::exp(-3.0);
        let (segs, c2) = building_block(4096.0, 8192.0, 402.0, c1, PackingMode::Strict).unwrap();
        assert_eq!(segs.last().unwrap().end, 804.0);
        let want = c1.logmag() + block_log_constant(4096.0, 8192.0) - 4096.0 * 402.0 + 8192.0 * 402.0;
        assert!(rel(c2.logmag(), want) < 1e-12);
    }

    #[test]
    fn segments_tile_the_block() {
        let build = building_block_at(4096.0, 8192.0, 0.0, LogScalar::ONE, PackingMode::Strict).unwrap();
        for w in build.segments.windows(2) {
            assert_eq!(w[0].end, w[1].start, "{} -> {}", w[0].kind.name(), w[1].kind.name());
        }
        assert_eq!(build.segments[0].start, 0.0);
        assert_eq!(build.segments.last().unwrap().end, BLOCK_LENGTH);
    }

    #[test]
    fn strict_packing_rejects_small_frequencies() {
        assert!(matches!(
            building_block_at(64.0, 128.0, 0.0, LogScalar::ONE, PackingMode::Strict),
            Err(Error::PackingViolation { .. })
        ));
        let flex = building_block_at(64.0, 128.0, 0.0, LogScalar::ONE, PackingMode::Flexible).unwrap();
        assert!(flex.length > BLOCK_LENGTH);
        assert!(matches!(harmonic_half_cylinder(8, 2, PackingMode::Strict), Err(Error::FrequencyFloor(_))));
    }

    #[test]
    fn field_is_continuous_across_junctions() {
        let tl = harmonic_half_cylinder(12, 2, PackingMode::Strict).unwrap();
        for (i, t) in tl.junctions() {
            let l = tl.eval_in(i, 0.3, 0.7, t).unwrap();
            let r = tl.eval_in(i + 1, 0.3, 0.7, t).unwrap();
            let s = l.field.common_scale();
            let (pl, pr) = (l.field.point(0.3, 0.7, s), r.field.point(0.3, 0.7, s));
            let size = l.field.sup_native(s);
            let k = l.field.k_max().max(r.field.k_max());
            assert!((pl.u - pr.u).abs() <= 1e-8 * size, "u at {t}");
            assert!((pl.u_t - pr.u_t).abs() <= 1e-8 * size * k, "u_t at {t}");
            assert!((pl.u_tt - pr.u_tt).abs() <= 1e-8 * size * k * k, "u_tt at {t}");
            assert!(l.coeff.value.sub(r.coeff.value).max_abs() <= 1e-8, "A at {t}");
            assert!(l.coeff.dt.sub(r.coeff.dt).max_abs() <= 1e-8, "A_t at {t}");
        }
    }

    #[test]
    fn first_stretch_is_the_pure_mode() {
        let tl = harmonic_half_cylinder(12, 1, PackingMode::Strict).unwrap();
        let e = tl.eval(0.0, 0.0, 0.005).unwrap();
        assert_eq!(e.coeff.value, crate::segments::Sym2::identity());
        let m = e.field.x.unwrap();
        assert!(e.field.y.is_none());
        assert!(rel(m.deriv(0).logmag(), -4096.0 * 0.005) < 1e-14);
    }

    #[test]
    fn second_block_is_swapped() {
        let tl = harmonic_half_cylinder(12, 2, PackingMode::Strict).unwrap();
        let b2 = &tl.blocks[1];
        assert!(b2.swapped);
        let e = tl.eval(0.0, 0.0, b2.start + 0.005).unwrap();
        assert!(e.field.x.is_none());
        assert_eq!(e.field.y.unwrap().k, b2.k);
    }

    #[test]
    fn lift_values() {
        let tl = eigen_half_cylinder(1.0, 12, 2, PackingMode::Strict).unwrap();
        let e = tl.eval(0.0, 0.0, 0.005).unwrap();
        let k = 4096.0_f64;
        assert!(rel(e.coeff.value.xx, 1.0 + 1.0 / (k * k)) < 1e-15);
        assert!(rel(e.coeff.value.yy, 1.0 + 1.0 / (4.0 * k * k)) < 1e-15);
        assert!(matches!(eigen_half_cylinder(1e6, 12, 1, PackingMode::Strict), Err(Error::FrequencyFloor(_))));
    }

    #[test]
    fn full_cylinder_is_even() {
        let tl = eigen_full_cylinder(1.0, 12, 1, PackingMode::Strict).unwrap();
        for t in [0.01, 0.3, 5.0] {
            let a = tl.eval(0.4, 1.1, t).unwrap();
            let b = tl.eval(0.4, 1.1, -t).unwrap();
            let s = a.field.common_scale();
            let (pa, pb) = (a.field.point(0.4, 1.1, s), b.field.point(0.4, 1.1, s));
            assert_eq!(pa.u, pb.u);
            assert_eq!(pa.u_t, -pb.u_t);
            assert_eq!(a.coeff.value, b.coeff.value);
        }
    }

    #[test]
    fn holder_chain_domain() {
        assert!(matches!(plis_miller_chain(0.6, 50, 3), Err(Error::ParameterDomain(_))));
        let tl = plis_miller_chain(1.0 / 3.0, 50, 5).unwrap();
        assert!(tl.horizon.unwrap() > tl.t_end());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let tl = eigen_full_cylinder(1.0, 12, 1, PackingMode::Strict).unwrap();
        let text = serde_json::to_string(&tl).unwrap();
        let back: Timeline = serde_json::from_str(&text).unwrap();
        assert_eq!(back, tl);
    }
}
