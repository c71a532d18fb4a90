//! The elliptic building block: `cos(kx) e^{-kt}` into `c cos(k'y) e^{-k't}` in block-local time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalarcore::LogScalar;
use crate::segments::{
    accelerate_segment, Axis, change_coeff_segment, perturb_add_segment, perturb_remove_segment, remove_constant_segment,
    remove_constant_width, wait_segment, ExpMode, Segment, WaitParams,
};

/// Block length when every phase keeps its fixed slot.
pub const BLOCK_LENGTH: f64 = 402.0;
/// Identity hold at the start of a block.
pub const ENTRY_HOLD: f64 = 1.0 / 100.0;
/// End of the coefficient change.
pub const CHANGE_END: f64 = 1.0 / 3.0;
/// Start of the slow-down.
pub const SLOWDOWN_START: f64 = 0.5;
/// Start of the acceleration in strict packing.
pub const ACCELERATION_START: f64 = 1.0;
/// Pause between the perturbation removal and the remove-constant phase.
pub const SLOWDOWN_PAUSE: f64 = 1.0 / 100.0;
/// Target of the coefficient change: `diag(1, 1/9)`.
pub const SLOW_B: f64 = 1.0 / 9.0;

/// Whether phases keep their fixed slots or idle windows stretch to fit small frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum PackingMode {
    #[default]
    Strict,
    Flexible,
}

impl std::str::FromStr for PackingMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strict" => Ok(Self::Strict),
            "flexible" => Ok(Self::Flexible),
            other => Err(format!("unknown packing mode {other:?}, expected strict or flexible")),
        }
    }
}

/// Durations of the slow-down phases for a frequency pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowdownLayout {
    /// `ln eps = -4 ln k`.
    pub log_eps: f64,
    /// Perturbation width `eps^{1/3} = k^{-4/3}`.
    pub perturb_width: f64,
    /// Time of the removal, `8 ln k / (k - k'/3)`, from the slow-down start.
    pub removal_time: f64,
    pub remove_constant_width: f64,
}

impl SlowdownLayout {
    pub fn new(k: f64, kprime: f64) -> Self {
        let ln_k = k.ln();
        let log_eps = -4.0 * ln_k;
        Self {
            log_eps,
            perturb_width: (log_eps / 3.0).exp(),
            removal_time: 8.0 * ln_k / (k - kprime / 3.0),
            remove_constant_width: remove_constant_width(k, kprime),
        }
    }

    /// `k^{-4/3} + 8 ln k/(k - k'/3) + sqrt(4 ln k)/k'^{1/3} + 1/100`.
    pub fn duration(&self) -> f64 {
        self.removal_time + self.perturb_width + SLOWDOWN_PAUSE + self.remove_constant_width
    }
}

/// `ln c = -k/2 + 5k'/6`.
pub fn block_log_constant(k: f64, kprime: f64) -> f64 {
    -k / 2.0 + 5.0 * kprime / 6.0
}

/// Segments of one block together with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBuild {
    pub segments: Vec<Segment>,
    /// Amplitude of the outgoing unit profile `cos(k'y) e^{-k'(t - end)}` at the block end.
    pub exit: LogScalar,
    /// `end - t1` as represented in floating point.
    pub length: f64,
    pub slowdown: SlowdownLayout,
    pub acceleration_start: f64,
}

/// Log amplitude of the given mode at the end of a segment.
///
/// Each segment's unit profile is exactly 1 at its start, so seeding the next
/// segment with this value makes both one-sided limits bit-identical.
fn end_log(seg: &Segment, axis: Axis) -> f64 {
    let field = seg.field(seg.end).expect("segment end lies in the segment");
    field.mode(axis).map(|m| m.log_scale + m.d[0].abs().ln()).expect("mode present at the segment end")
}

/// Build a block starting at `t1`. `entry` multiplies `cos(kx) e^{-k(t - t1)}`.
pub fn building_block_at(k: f64, kprime: f64, t1: f64, entry: LogScalar, mode: PackingMode) -> Result<BlockBuild> {
    if !(k > 1.0 && k < kprime && kprime <= 2.0 * k) {
        return Err(Error::ParameterDomain(format!("building block needs 1 < k < k' <= 2k, got {k}, {kprime}")));
    }
    let layout = SlowdownLayout::new(k, kprime);
    let slow = layout.duration();
    if !(layout.removal_time > layout.perturb_width) {
        return Err(Error::ParameterDomain(format!(
            "removal time {} precedes the end of the perturbation {}",
            layout.removal_time, layout.perturb_width
        )));
    }
    let acc_start = match mode {
        PackingMode::Strict if SLOWDOWN_START + slow >= ACCELERATION_START => {
            return Err(Error::PackingViolation { duration: slow })
        }
        PackingMode::Strict => ACCELERATION_START,
        PackingMode::Flexible => ACCELERATION_START.max(SLOWDOWN_START + slow + SLOWDOWN_PAUSE),
    };
    let sign = LogScalar::new(entry.sign(), 0.0);
    let amp = |log: f64| sign * LogScalar::exp(log);
    let unit = |kk: f64, rate: f64| Some(ExpMode { k: kk, rate, weight: LogScalar::ONE });
    let b_rate = kprime * SLOW_B.sqrt();
    let (x, y) = (Axis::X, Axis::Y);

    let mut segs: Vec<Segment> = Vec::with_capacity(11);
    let last = |segs: &Vec<Segment>| segs.last().expect("block has segments").clone();
    segs.push(wait_segment(WaitParams { x: unit(k, k), y: None, a: 1.0, b: 1.0 }, t1, ENTRY_HOLD, entry)?);
    let s = last(&segs);
    segs.push(change_coeff_segment(1.0, SLOW_B, k, s.end, t1 + CHANGE_END - s.end, amp(end_log(&s, x)))?);
    let s = last(&segs);
    segs.push(wait_segment(
        WaitParams { x: unit(k, k), y: None, a: 1.0, b: SLOW_B },
        s.end,
        t1 + SLOWDOWN_START - s.end,
        amp(end_log(&s, x)),
    )?);

    // Slow-down, with times measured from its start `s0`.
    let s = last(&segs);
    let s0 = s.end;
    segs.push(perturb_add_segment(k, kprime, 1.0, SLOW_B, layout.log_eps, s0, amp(end_log(&s, x)))?);
    let s = last(&segs);
    let (xl, yl) = (end_log(&s, x), end_log(&s, y));
    let both = WaitParams {
        x: unit(k, k),
        y: Some(ExpMode { k: kprime, rate: b_rate, weight: LogScalar::exp(yl - xl) }),
        a: 1.0,
        b: SLOW_B,
    };
    // The removal starts when the x-mode has fallen to eps times the y-mode.
    segs.push(wait_segment(both, s.end, s0 + layout.removal_time - s.end, amp(xl))?);
    let s = last(&segs);
    segs.push(perturb_remove_segment(k, kprime, 1.0, SLOW_B, layout.log_eps, s.end, amp(end_log(&s, y)))?);
    let s = last(&segs);
    let slow_b = WaitParams { x: None, y: unit(kprime, b_rate), a: 1.0, b: SLOW_B };
    segs.push(wait_segment(slow_b, s.end, SLOWDOWN_PAUSE, amp(end_log(&s, y)))?);
    let s = last(&segs);
    segs.push(remove_constant_segment(
        kprime,
        1.0,
        SLOW_B,
        layout.log_eps,
        layout.remove_constant_width,
        s.end,
        amp(end_log(&s, y)),
    )?);
    let s = last(&segs);
    segs.push(wait_segment(slow_b, s.end, t1 + acc_start - s.end, amp(end_log(&s, y)))?);
    let s = last(&segs);
    segs.push(accelerate_segment(kprime, 1.0, SLOW_B, 1.0, s.end, amp(end_log(&s, y)))?);
    let s = last(&segs);
    segs.push(wait_segment(WaitParams { x: None, y: unit(kprime, kprime), a: 1.0, b: 1.0 }, s.end, 1.0, amp(end_log(&s, y)))?);
    let s = last(&segs);
    let exit = amp(end_log(&s, y));
    Ok(BlockBuild { length: s.end - t1, segments: segs, exit, slowdown: layout, acceleration_start: acc_start })
}

/// Build a block on `[t1, t1 + length]` carrying `c1 cos(kx) e^{-kt}` in global time.
/// Returns the segments and `c2` with `c1 c e^{-k t1} = c2 e^{-k' t1}` (strict packing).
pub fn building_block(k: f64, kprime: f64, t1: f64, c1: LogScalar, mode: PackingMode) -> Result<(Vec<Segment>, LogScalar)> {
    let entry = c1 * LogScalar::exp(-k * t1);
    let build = building_block_at(k, kprime, t1, entry, mode)?;
    let end = build.segments.last().map_or(t1, |s| s.end);
    let c2 = build.exit * LogScalar::exp(kprime * end);
    Ok((build.segments, c2))
}
