//! Global chains built from blocks.

use super::block::{building_block_at, PackingMode, BLOCK_LENGTH};
use super::{Assembler, EigenLift, Timeline, TimelineKind, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::scalarcore::{LogScalar, SQRT_PI};
use crate::segments::{pml_segment_with_constant, Segment, symmetrize_head_segment, RegularityClass, PML_DEFAULT_CONSTANT};

/// Amplitude of the outgoing mode at the end of a PML segment, read from its own evaluator.
fn chain_exit(seg: &Segment) -> LogScalar {
    let field = seg.field(seg.end).expect("segment end lies in the segment");
    let m = field.y.expect("outgoing mode present");
    LogScalar::new(if m.d[0] < 0.0 { -1 } else { 1 }, m.log_scale + m.d[0].abs().ln())
}

/// Class of the harmonic half-cylinder coefficient.
pub const HARMONIC_CLASS: RegularityClass = RegularityClass::new(80.0, 60.0);
/// Class of the lifted eigenfunction coefficient.
pub const EIGEN_CLASS: RegularityClass = RegularityClass::new(100.0, 61.0);
/// Default switch time `t1` of the symmetrization head.
pub const HEAD_SWITCH_TIME: f64 = 1.0 / 100.0;
/// Smallest `n0` for which every strict block fits its slots.
const STRICT_N0: u32 = 12;

fn dyadic(n0: u32, n: usize) -> f64 {
    2f64.powi(n as i32 + n0 as i32 - 1)
}

fn check_blocks(n_blocks: usize) -> Result<()> {
    if n_blocks == 0 {
        return Err(Error::ParameterDomain("a chain needs at least one block".into()));
    }
    Ok(())
}

fn check_strict(n0: u32, mode: PackingMode) -> Result<()> {
    if mode == PackingMode::Strict && n0 < STRICT_N0 {
        return Err(Error::FrequencyFloor(format!(
            "strict packing needs n0 >= {STRICT_N0} (k_1 >= 2^12), got n0 = {n0}; use flexible mode"
        )));
    }
    Ok(())
}

/// Dyadic blocks from `origin`; returns the final sup.
fn dyadic_blocks(asm: &mut Assembler, n0: u32, n_blocks: usize, mode: PackingMode, origin: f64) -> Result<LogScalar> {
    let mut entry = LogScalar::ONE;
    let mut t = origin;
    for n in 1..=n_blocks {
        let (k, kp) = (dyadic(n0, n), dyadic(n0, n + 1));
        let build = building_block_at(k, kp, t, entry, mode)?;
        let c = entry * LogScalar::exp(k * (t - origin));
        t = build.segments.last().map_or(t, |s| s.end);
        asm.push_block(k, kp, c, entry, n % 2 == 0, build.segments);
        entry = build.exit;
    }
    Ok(entry)
}

fn finish(asm: Assembler, kind: TimelineKind, mode: PackingMode, n0: u32, final_sup: LogScalar) -> Timeline {
    Timeline {
        version: FORMAT_VERSION,
        kind,
        mode,
        n0,
        mu: 0.0,
        alpha: None,
        pml_constant: None,
        declared: asm.declared.unwrap_or(RegularityClass::new(1.0, 0.0)),
        blocks: asm.blocks,
        segments: asm.segments,
        lift: None,
        reflected: false,
        horizon: None,
        origin: 0.0,
        final_sup,
    }
}

/// `A`-harmonic solution on the half-cylinder with `k_n = 2^{n + n0 - 1}`.
pub fn harmonic_half_cylinder(n0: u32, n_blocks: usize, mode: PackingMode) -> Result<Timeline> {
    check_blocks(n_blocks)?;
    check_strict(n0, mode)?;
    let mut asm = Assembler::default();
    let last = dyadic_blocks(&mut asm, n0, n_blocks, mode, 0.0)?;
    let mut tl = finish(asm, TimelineKind::Harmonic, mode, n0, last);
    tl.declared = HARMONIC_CLASS;
    Ok(tl)
}

/// Closed form of `ln C_n`, `C_n = c_n e^{-k_n (t_n - 7/6)}`, for strict dyadic blocks.
pub fn harmonic_log_decay_closed_form(k1: f64, kn: f64) -> f64 {
    let c = BLOCK_LENGTH;
    k1 * (2.0 * c - 7.0 / 6.0) - (2.0 * c - 14.0 / 6.0) * kn
}

/// Smallest `2^{n0}` that keeps the lift derivative below 1/100: `10 sqrt(mu) sqrt(300 sqrt(pi))`.
pub fn lift_floor(mu: f64) -> f64 {
    10.0 * mu.sqrt() * (300.0 * SQRT_PI).sqrt()
}

fn eigen_checks(mu: f64, n0: u32) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::ParameterDomain(format!("eigenvalue must be positive, got {mu}")));
    }
    let floor = lift_floor(mu);
    if 2f64.powi(n0 as i32) < floor {
        return Err(Error::FrequencyFloor(format!(
            "2^n0 = {} is below the lift floor 10 sqrt(mu) sqrt(300 sqrt(pi)) = {floor:.3} for mu = {mu}",
            2f64.powi(n0 as i32)
        )));
    }
    Ok(())
}

fn lift(mu: f64, n0: u32, n_blocks: usize) -> EigenLift {
    EigenLift { mu, ks: (1..=n_blocks + 2).map(|n| dyadic(n0, n)).collect() }
}

/// Eigenfunction `div(A grad u) = -mu u` on the half-cylinder.
pub fn eigen_half_cylinder(mu: f64, n0: u32, n_blocks: usize, mode: PackingMode) -> Result<Timeline> {
    check_blocks(n_blocks)?;
    check_strict(n0, mode)?;
    eigen_checks(mu, n0)?;
    let mut asm = Assembler::default();
    let last = dyadic_blocks(&mut asm, n0, n_blocks, mode, 0.0)?;
    let mut tl = finish(asm, TimelineKind::EigenHalf, mode, n0, last);
    tl.mu = mu;
    tl.lift = Some(lift(mu, n0, n_blocks));
    tl.declared = EIGEN_CLASS;
    Ok(tl)
}

/// Eigenfunction on the whole cylinder: symmetrization head, shifted half-cylinder, even reflection.
pub fn eigen_full_cylinder(mu: f64, n0: u32, n_blocks: usize, mode: PackingMode) -> Result<Timeline> {
    check_blocks(n_blocks)?;
    check_strict(n0, mode)?;
    eigen_checks(mu, n0)?;
    let (head, t0) = symmetrize_head_segment(mu, dyadic(n0, 1), HEAD_SWITCH_TIME)?;
    let head_class = head.declared;
    let mut asm = Assembler::default();
    asm.push_loose(head);
    let last = dyadic_blocks(&mut asm, n0, n_blocks, mode, t0)?;
    let mut tl = finish(asm, TimelineKind::EigenFull, mode, n0, last);
    tl.mu = mu;
    tl.lift = Some(lift(mu, n0, n_blocks));
    tl.reflected = true;
    tl.origin = t0;
    tl.declared = EIGEN_CLASS.join(head_class);
    Ok(tl)
}

/// Hypothesis constant for `k_{n+1} - k_n <= c / w_n` under `k_n = (n + n0)^{1/alpha}`.
pub fn plis_miller_constant(alpha: f64, n0: u32) -> f64 {
    let n0 = n0 as f64;
    (1.0 / alpha) * ((n0 + 2.0) / (n0 + 1.0)).powf(1.0 / alpha - 1.0)
}

/// Chain of two-sided transformations with `k_n = (n + n0)^{1/alpha}` and widths `w_n = (n + n0)^{(alpha - 1)/alpha}`.
pub fn plis_miller_chain(alpha: f64, n0: u32, n_blocks: usize) -> Result<Timeline> {
    check_blocks(n_blocks)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::ParameterDomain(format!("Hölder exponent must satisfy 0 < alpha < 1/2, got {alpha}")));
    }
    if n0 == 0 {
        return Err(Error::ParameterDomain("n0 must be positive".into()));
    }
    let constant = plis_miller_constant(alpha, n0);
    let m = |n: usize| n as f64 + n0 as f64;
    let k = |n: usize| m(n).powf(1.0 / alpha);
    let w = |n: usize| m(n).powf((alpha - 1.0) / alpha);
    let mut asm = Assembler::default();
    let (mut a, mut entry) = (0.0, LogScalar::ONE);
    for n in 1..=n_blocks {
        let seg = pml_segment_with_constant(k(n), k(n + 1), w(n), entry, a, constant)?;
        let next = chain_exit(&seg);
        let end = seg.end;
        asm.push_block(k(n), k(n + 1), entry * LogScalar::exp(k(n) * a), entry, n % 2 == 0, vec![seg]);
        (a, entry) = (end, next);
    }
    // Tail of sum 2 w_n beyond the last block by the midpoint integral.
    let p = (1.0 - alpha) / alpha;
    let tail = 2.0 * (m(n_blocks) + 0.5).powf(1.0 - p) / (p - 1.0);
    let mut tl = finish(asm, TimelineKind::PlisMiller, PackingMode::Strict, n0, entry);
    tl.alpha = Some(alpha);
    tl.pml_constant = Some(constant);
    tl.horizon = Some(a + tail);
    Ok(tl)
}

/// Chain with `k_n = n + n0`, unit widths and block length 2, decaying like `e^{-c t^2}`.
pub fn gaussian_chain(n0: u32, n_blocks: usize) -> Result<Timeline> {
    check_blocks(n_blocks)?;
    if n0 == 0 {
        return Err(Error::ParameterDomain("n0 must be positive".into()));
    }
    let k = |n: usize| (n as u32 + n0) as f64;
    let mut asm = Assembler::default();
    let (mut a, mut entry) = (0.0, LogScalar::ONE);
    for n in 1..=n_blocks {
        let seg = pml_segment_with_constant(k(n), k(n + 1), 1.0, entry, a, PML_DEFAULT_CONSTANT)?;
        let next = chain_exit(&seg);
        let end = seg.end;
        asm.push_block(k(n), k(n + 1), entry * LogScalar::exp(k(n) * a), entry, n % 2 == 0, vec![seg]);
        (a, entry) = (end, next);
    }
    let mut tl = finish(asm, TimelineKind::Gaussian, PackingMode::Strict, n0, entry);
    tl.pml_constant = Some(PML_DEFAULT_CONSTANT);
    Ok(tl)
}
