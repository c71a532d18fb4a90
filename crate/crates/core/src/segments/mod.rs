//! Transformation segments: a time interval, a construction kind and an entry
//! amplitude, with closed-form evaluators for the field and the coefficient.

mod field;
mod kinds;
pub mod ode;
mod symmetrize;

use serde::{Deserialize, Serialize};

pub use field::{elliptic_residual, Axis, CoeffJet, FieldJet, ModeJet, PointValues, Residual, Sym2};
pub use kinds::{
    AccelerateParams, ChangeCoeffParams, ExpMode, PerturbParams, PmlParams, RemoveConstantParams, WaitParams,
};
pub use symmetrize::HeadProfile;

use crate::error::{Error, Result};
use crate::planarlemma::Variant;
use crate::scalarcore::{LogScalar, SQRT_PI};

/// Which one-sided limit to take at a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Ellipticity bound `lambda` and bound `c1` on first derivatives of the coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityClass {
    pub lambda: f64,
    pub c1: f64,
}

impl RegularityClass {
    pub const fn new(lambda: f64, c1: f64) -> Self {
        Self { lambda, c1 }
    }

    pub fn contains_spectrum(&self, lo: f64, hi: f64) -> bool {
        lo >= 1.0 / self.lambda && hi <= self.lambda
    }

    /// Smallest class containing both.
    pub fn join(self, other: Self) -> Self {
        Self { lambda: self.lambda.max(other.lambda), c1: self.c1.max(other.c1) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum SegmentKind {
    Wait(WaitParams),
    ChangeCoeff(ChangeCoeffParams),
    PerturbAdd(PerturbParams),
    PerturbRemove(PerturbParams),
    Pml(PmlParams),
    RemoveConstant(RemoveConstantParams),
    Accelerate(AccelerateParams),
    SymmetrizeHead(Box<HeadProfile>),
}

impl SegmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentKind::Wait(_) => "wait",
            SegmentKind::ChangeCoeff(_) => "change_coeff",
            SegmentKind::PerturbAdd(_) => "perturb_add",
            SegmentKind::PerturbRemove(_) => "perturb_remove",
            SegmentKind::Pml(_) => "pml",
            SegmentKind::RemoveConstant(_) => "remove_constant",
            SegmentKind::Accelerate(_) => "accelerate",
            SegmentKind::SymmetrizeHead(_) => "symmetrize_head",
        }
    }

    /// Whether the coefficient depends on the spatial variables.
    pub fn is_spatial(&self) -> bool {
        matches!(self, SegmentKind::PerturbAdd(_) | SegmentKind::PerturbRemove(_) | SegmentKind::Pml(_))
    }
}

/// A self-contained piece of a construction on `[start, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Multiplies the unit-normalized local field.
    pub amp: LogScalar,
    pub kind: SegmentKind,
    pub declared: RegularityClass,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    fn local(&self, t: f64) -> Result<f64> {
        if t < self.start || t > self.end || t.is_nan() {
            return Err(Error::OutOfInterval { t, start: self.start, end: self.end });
        }
        Ok(t - self.start)
    }

    /// Field profiles at global time `t`, amplitude included.
    pub fn field(&self, t: f64) -> Result<FieldJet> {
        let tau = self.local(t)?;
        Ok(self.field_local(tau))
    }

    pub(crate) fn field_local(&self, tau: f64) -> FieldJet {
        self.unit_field_local(tau).scaled_by(self.amp)
    }

    /// Unit field at `tau + dt` with log scales measured from the largest mode
    /// scale at `tau`, each mode's change over the step taken from its
    /// cancellation-free increment where the kind supplies one.
    pub(crate) fn unit_field_rebased(&self, tau: f64, dt: f64) -> FieldJet {
        let mut f = self.unit_field_local(tau + dt);
        let r = self.unit_field_local(tau);
        let base = r.common_scale();
        let steps = match &self.kind {
            SegmentKind::Wait(p) => Some(p.log_steps(dt)),
            SegmentKind::ChangeCoeff(p) => Some(p.log_steps(dt)),
            SegmentKind::PerturbAdd(p) | SegmentKind::PerturbRemove(p) => Some(p.log_steps(dt)),
            SegmentKind::Pml(p) => p.log_steps(tau, dt),
            SegmentKind::RemoveConstant(p) => Some(p.log_steps(tau, dt)),
            SegmentKind::Accelerate(p) => Some(p.log_steps(tau, dt)),
            SegmentKind::SymmetrizeHead(_) => None,
        };
        let rebase = |m: &mut Option<ModeJet>, rm: Option<ModeJet>, step: Option<f64>| {
            if let Some(m) = m {
                m.log_scale = match (rm, step) {
                    (Some(rm), Some(d)) => (rm.log_scale - base) + d,
                    _ => m.log_scale - base,
                };
            }
        };
        let [sx, sy] = steps.unwrap_or([None, None]);
        rebase(&mut f.x, r.x, sx);
        rebase(&mut f.y, r.y, sy);
        f
    }

    /// Field at local time with unit amplitude.
    pub(crate) fn unit_field_local(&self, tau: f64) -> FieldJet {
        match &self.kind {
            SegmentKind::Wait(p) => p.field(tau),
            SegmentKind::ChangeCoeff(p) => p.field(tau),
            SegmentKind::PerturbAdd(p) | SegmentKind::PerturbRemove(p) => p.field(tau),
            SegmentKind::Pml(p) => p.field(tau),
            SegmentKind::RemoveConstant(p) => p.field(tau),
            SegmentKind::Accelerate(p) => p.field(tau),
            SegmentKind::SymmetrizeHead(h) => h.field(tau),
        }
    }

    /// Coefficient jet at `(x, y, t)`.
    pub fn coeff(&self, x: f64, y: f64, t: f64) -> Result<CoeffJet> {
        let tau = self.local(t)?;
        Ok(self.coeff_local(x, y, tau))
    }

    pub(crate) fn coeff_local(&self, x: f64, y: f64, tau: f64) -> CoeffJet {
        match &self.kind {
            SegmentKind::Wait(p) => p.coeff(),
            SegmentKind::ChangeCoeff(p) => p.coeff(tau),
            SegmentKind::PerturbAdd(p) | SegmentKind::PerturbRemove(p) => p.coeff(x, y, tau),
            SegmentKind::Pml(p) => p.coeff(x, y, tau),
            SegmentKind::RemoveConstant(p) => p.coeff(tau),
            SegmentKind::Accelerate(p) => p.coeff(tau),
            SegmentKind::SymmetrizeHead(h) => h.coeff(tau),
        }
    }

    /// Phase boundaries strictly inside the segment, in global time.
    pub fn internal_boundaries(&self) -> Vec<f64> {
        match &self.kind {
            SegmentKind::Pml(p) => vec![self.start + p.width],
            SegmentKind::SymmetrizeHead(h) => h.switches().iter().map(|s| self.start + s).collect(),
            _ => Vec::new(),
        }
    }

    /// Field and coefficient at `(x, y, t)` taking the given one-sided limit at internal boundaries.
    pub fn eval_side(&self, x: f64, y: f64, t: f64, side: Side) -> Result<(FieldJet, CoeffJet)> {
        let tau = self.local(t)?;
        match &self.kind {
            SegmentKind::Pml(p) if tau == p.width => {
                let first = side == Side::Left;
                Ok((p.field_in(tau, first).scaled_by(self.amp), p.coeff_in(x, y, tau, first)))
            }
            SegmentKind::SymmetrizeHead(h) if h.switches().contains(&tau) => {
                Ok((h.field_side(tau, side == Side::Left).scaled_by(self.amp), self.coeff_local(x, y, tau)))
            }
            _ => Ok((self.field_local(tau), self.coeff_local(x, y, tau))),
        }
    }

    /// Relative residual at a point; `mu` is the eigenvalue (0 for harmonic).
    pub fn residual(&self, x: f64, y: f64, t: f64, mu: f64) -> Result<f64> {
        let tau = self.local(t)?;
        let field = self.field_local(tau);
        let coeff = self.coeff_local(x, y, tau);
        Ok(elliptic_residual(&field, &coeff, x, y, mu).relative())
    }

    /// Same segment with the amplitude multiplied by `factor`.
    pub fn rescaled(mut self, factor: LogScalar) -> Self {
        self.amp = self.amp * factor;
        self
    }

    /// Same segment translated in time.
    pub fn shifted(mut self, dt: f64) -> Self {
        self.start += dt;
        self.end += dt;
        self
    }
}

fn check_diag(name: &str, v: f64) -> Result<()> {
    if v > 0.1 && v < 10.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} = {v} must lie in (1/10, 10)")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} = {v} must be positive and finite")))
    }
}

/// Constant diagonal coefficient with pure exponential modes; checks the dispersion relation.
pub fn wait_segment(params: WaitParams, start: f64, duration: f64, amp: LogScalar) -> Result<Segment> {
    check_positive("duration", duration)?;
    for (axis, m, c) in [(Axis::X, params.x, params.a), (Axis::Y, params.y, params.b)] {
        if let Some(m) = m {
            let want = m.k * m.k * c;
            if ((m.rate * m.rate - want) / want).abs() > 1e-12 {
                return Err(Error::IncompatibleField(format!(
                    "{axis:?} mode with k = {} decays at rate {} but the coefficient {c} needs {}",
                    m.k,
                    m.rate,
                    want.sqrt()
                )));
            }
        }
    }
    let lambda = [params.a, params.b, 1.0 / params.a, 1.0 / params.b].into_iter().fold(1.0, f64::max);
    Ok(Segment { start, end: start + duration, amp, kind: SegmentKind::Wait(params), declared: RegularityClass::new(lambda, 0.0) })
}

/// Slide the second diagonal entry from `a` to `b` over `duration`.
pub fn change_coeff_segment(a: f64, b: f64, k: f64, start: f64, duration: f64, amp: LogScalar) -> Result<Segment> {
    check_diag("a", a)?;
    check_diag("b", b)?;
    check_positive("duration", duration)?;
    check_positive("k", k)?;
    Ok(Segment {
        start,
        end: start + duration,
        amp,
        kind: SegmentKind::ChangeCoeff(ChangeCoeffParams { k, a, b, duration }),
        declared: RegularityClass::new(10.0, 10.0 * SQRT_PI / duration),
    })
}

fn perturb_checks(k: f64, kprime: f64, a: f64, b: f64, log_eps: f64) -> Result<()> {
    check_diag("a", a)?;
    check_diag("b", b)?;
    if !(k >= 1.0 && k <= kprime && kprime <= 2.0 * k) {
        return Err(Error::ParameterDomain(format!("perturbation needs 1 <= k <= k' <= 2k, got {k}, {kprime}")));
    }
    // eps^{-1/4} <= k, k' <= eps^{-1/3}, checked on logs with a small rounding allowance.
    let lo = -log_eps / 4.0;
    let hi = -log_eps / 3.0;
    let slack = 1e-12 * (1.0 + hi.abs());
    for (name, v) in [("k", k), ("k'", kprime)] {
        let lv = v.ln();
        if lv < lo - slack || lv > hi + slack {
            return Err(Error::ParameterDomain(format!(
                "perturbation needs eps^(-1/4) <= {name} <= eps^(-1/3); {name} = {v}, eps = e^{log_eps}"
            )));
        }
    }
    Ok(())
}

/// Insert `eps u2` next to `u1` over the width `eps^{1/3}`.
pub fn perturb_add_segment(k: f64, kprime: f64, a: f64, b: f64, log_eps: f64, start: f64, amp: LogScalar) -> Result<Segment> {
    perturb_checks(k, kprime, a, b, log_eps)?;
    let width = (log_eps / 3.0).exp();
    Ok(Segment {
        start,
        end: start + width,
        amp,
        kind: SegmentKind::PerturbAdd(PerturbParams { variant: Variant::Add, k, kprime, a, b, log_eps, width }),
        declared: RegularityClass::new(20.0, 10.0),
    })
}

/// Remove `eps u1` from `eps u1 + u2` over the width `eps^{1/3}`.
pub fn perturb_remove_segment(k: f64, kprime: f64, a: f64, b: f64, log_eps: f64, start: f64, amp: LogScalar) -> Result<Segment> {
    perturb_checks(k, kprime, a, b, log_eps)?;
    let width = (log_eps / 3.0).exp();
    Ok(Segment {
        start,
        end: start + width,
        amp,
        kind: SegmentKind::PerturbRemove(PerturbParams { variant: Variant::Remove, k, kprime, a, b, log_eps, width }),
        declared: RegularityClass::new(20.0, 10.0),
    })
}

/// Constant used for the PML frequency/width hypotheses `k' - k <= c/w` and `1/w <= c k`.
pub const PML_DEFAULT_CONSTANT: f64 = 1.0;

/// The two-sided transformation `cos(kx) e^{-kt} -> cos(k'y) e^{-k't}` on `[start, start + 2w]`.
pub fn pml_segment(k: f64, kprime: f64, width: f64, amp: LogScalar, start: f64) -> Result<Segment> {
    pml_segment_with_constant(k, kprime, width, amp, start, PML_DEFAULT_CONSTANT)
}

/// As [`pml_segment`] with an explicit hypothesis constant.
pub fn pml_segment_with_constant(k: f64, kprime: f64, width: f64, amp: LogScalar, start: f64, constant: f64) -> Result<Segment> {
    check_positive("width", width)?;
    if !(kprime > k && k >= 1.0) {
        return Err(Error::ParameterDomain(format!("PML needs 1 <= k < k', got {k}, {kprime}")));
    }
    if kprime - k > constant / width {
        return Err(Error::ParameterDomain(format!(
            "PML needs k' - k <= c/w; k' - k = {}, c/w = {}",
            kprime - k,
            constant / width
        )));
    }
    if 1.0 / width > constant * k {
        return Err(Error::ParameterDomain(format!("PML needs 1/w <= c k; 1/w = {}, c k = {}", 1.0 / width, constant * k)));
    }
    let params = PmlParams { k, kprime, width };
    let declared = pml_envelope(&params);
    Ok(Segment { start, end: start + 2.0 * width, amp, kind: SegmentKind::Pml(params), declared })
}

/// Declared class of a PML segment from closed-form bounds on every factor.
///
/// `|theta'| <= sqrt(pi)`, `|theta''| <= 13`, `|theta'''| <= 130`, planar entries
/// bounded by `(1 + 2|s|)/k^2` and their gradients by `(1 + 4|s|) k'/k^2`.
fn pml_envelope(p: &PmlParams) -> RegularityClass {
    const D1: f64 = SQRT_PI;
    const D2: f64 = 13.0;
    const D3: f64 = 130.0;
    let w = p.width;
    let r = (p.kprime - p.k) * w;
    let (k, kp) = (p.k, p.kprime);
    // First half: eps = 1, growth e^{-(k'-k) tau} <= 1.
    let g1 = D2 / (w * w) + 2.0 * kp * D1 / w;
    let g1_dot = D3 / (w * w * w) + 2.0 * kp * D2 / (w * w) + g1 * (kp - k);
    let s1 = 1.0;
    // Second half: eps = e^r, growth e^{(k'-k) tau} <= e^r.
    let amp2 = (2.0 * r).exp();
    let g2 = amp2 * (2.0 * k * D1 / w + D2 / (w * w));
    let g2_dot = amp2 * (2.0 * k * D2 / (w * w) + D3 / (w * w * w)) + g2 * (kp - k);
    let s2 = amp2;
    let entries = |g: f64, s: f64, kk: f64| g * (1.0 + 2.0 * s) / (kk * kk);
    let off = (entries(g1, s1, k) + 2.0 * g1 / (k * kp)).max(entries(g2, s2, kp) + 2.0 * g2 / (k * kp));
    let lambda = if off < 1.0 { 1.0 / (1.0 - off) } else { f64::MAX };
    let grad = |g: f64, s: f64| g * (1.0 + 4.0 * s) * kp / (k * k) + 2.0 * g / k;
    let dt = |g: f64, gd: f64, s: f64, sd: f64, kk: f64| gd * (1.0 + 2.0 * s) / (kk * kk) + g * 2.0 * sd / (kk * kk);
    let s1_dot = D1 / w + (kp - k);
    let s2_dot = amp2 * (D1 / w + (kp - k));
    let c1 = grad(g1, s1)
        .max(grad(g2, s2))
        .max(dt(g1, g1_dot, s1, s1_dot, k) + 2.0 * g1_dot / (k * kp))
        .max(dt(g2, g2_dot, s2, s2_dot, kp) + 2.0 * g2_dot / (k * kp));
    RegularityClass::new(lambda.max(1.0 + off), c1)
}

/// Multiply a single mode by `e^{factor}` through `b~ = (h'' + h'^2)/k'^2`.
pub fn remove_constant_segment(kprime: f64, a: f64, b: f64, log_factor: f64, width: f64, start: f64, amp: LogScalar) -> Result<Segment> {
    check_diag("a", a)?;
    check_diag("b", b)?;
    check_positive("width", width)?;
    Ok(Segment {
        start,
        end: start + width,
        amp,
        kind: SegmentKind::RemoveConstant(RemoveConstantParams { kprime, a, b, log_factor, width }),
        declared: RegularityClass::new(20.0, 1.0),
    })
}

/// Width of the remove-constant phase, `sqrt(4 ln k)/k'^{1/3}`.
pub fn remove_constant_width(k: f64, kprime: f64) -> f64 {
    (4.0 * k.ln()).sqrt() / kprime.cbrt()
}

/// Fixed duration of the acceleration phase.
pub const ACCELERATION_WIDTH: f64 = 400.0;

/// Speed up the decay of `cos(ky) e^{-k sqrt(b) t}` to `e^{-k sqrt(b') t}`.
pub fn accelerate_segment(k: f64, a: f64, b: f64, bprime: f64, start: f64, amp: LogScalar) -> Result<Segment> {
    check_diag("a", a)?;
    check_diag("b", b)?;
    check_diag("b'", bprime)?;
    check_positive("k", k)?;
    if b > bprime {
        return Err(Error::ParameterDomain(format!("acceleration needs b <= b', got {b} > {bprime}")));
    }
    Ok(Segment {
        start,
        end: start + ACCELERATION_WIDTH,
        amp,
        kind: SegmentKind::Accelerate(AccelerateParams { k, a, b, bprime, width: ACCELERATION_WIDTH }),
        declared: RegularityClass::new(80.0, 10.0),
    })
}

/// Build the symmetrization head on `[0, t0]`; returns the segment and `t0`.
pub fn symmetrize_head_segment(mu: f64, k: f64, t1: f64) -> Result<(Segment, f64)> {
    let head = HeadProfile::build(mu, k, t1)?;
    let t0 = head.t0();
    let declared = RegularityClass::new(5.0 * k * k / mu, 10.0);
    Ok((Segment { start: 0.0, end: t0, amp: LogScalar::ONE, kind: SegmentKind::SymmetrizeHead(Box::new(head)), declared }, t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn max_residual(seg: &Segment, mu: f64, n: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..n)
            .map(|_| {
                let t = seg.start + seg.duration() * rng.random_range(1e-6..1.0 - 1e-6);
                let (x, y) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
                seg.residual(x, y, t, mu).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn pml_is_exact_and_starts_at_identity() {
        let seg = pml_segment(64.0, 65.0, 1.0, LogScalar::ONE, 3.0).unwrap();
        assert!(max_residual(&seg, 0.0, 1000) < 1e-9);
        let c = seg.coeff(0.3, 0.4, 3.0).unwrap();
        assert_eq!(c.value, Sym2::identity());
        assert!(pml_segment(64.0, 66.5, 1.0, LogScalar::ONE, 0.0).is_err());
        assert!(pml_segment(1.0, 1.5, 0.5, LogScalar::ONE, 0.0).is_err());
    }

    #[test]
    fn pml_halves_meet_smoothly() {
        let seg = pml_segment(64.0, 65.0, 1.0, LogScalar::exp(-30.0), 0.0).unwrap();
        let w = 1.0;
        let left = seg.field_local(w - 1e-12).point(0.2, 0.9, -30.0);
        let right = seg.field_local(w).point(0.2, 0.9, -30.0);
        assert!((left.u - right.u).abs() < 1e-9 * left.u.abs().max(1e-300));
        assert!((left.u_t - right.u_t).abs() < 1e-8 * (1.0 + left.u_t.abs()));
    }

    #[test]
    fn change_coeff_examples() {
        let dur = 1.0 / 3.0 - 1.0 / 100.0;
        let seg = change_coeff_segment(1.0, 1.0 / 9.0, 4096.0, 0.0, dur, LogScalar::ONE).unwrap();
        assert_eq!(seg.coeff(0.0, 0.0, 0.0).unwrap().value.yy, 1.0);
        assert_eq!(seg.coeff(0.0, 0.0, dur).unwrap().value.yy, 1.0 / 9.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bound = 10.0 * SQRT_PI / dur;
        for _ in 0..1000 {
            let t = rng.random_range(0.0..dur);
            assert!(seg.coeff(0.0, 0.0, t).unwrap().c1_sup() <= bound);
        }
        assert!(max_residual(&seg, 0.0, 1000) < 1e-10);
        assert!(change_coeff_segment(11.0, 1.0, 1.0, 0.0, 1.0, LogScalar::ONE).is_err());
    }

    #[test]
    fn perturbations_are_exact() {
        let k = 4096.0_f64;
        let log_eps = -4.0 * k.ln();
        for seg in [
            perturb_add_segment(k, 2.0 * k, 1.0, 1.0 / 9.0, log_eps, 0.0, LogScalar::ONE).unwrap(),
            perturb_remove_segment(k, 2.0 * k, 1.0, 1.0 / 9.0, log_eps, 0.0, LogScalar::ONE).unwrap(),
        ] {
            assert!(max_residual(&seg, 0.0, 1000) < 1e-9, "{}", seg.kind.name());
            let c = seg.coeff(0.1, 0.2, 0.0).unwrap();
            assert_eq!(c.value, Sym2::diag(1.0, 1.0 / 9.0));
        }
        // eps too small for these frequencies
        assert!(perturb_add_segment(4.0, 8.0, 1.0, 1.0, -40.0, 0.0, LogScalar::ONE).is_err());
    }

    #[test]
    fn wait_checks_dispersion() {
        let good = WaitParams { x: Some(ExpMode { k: 3.0, rate: 3.0, weight: LogScalar::ONE }), y: None, a: 1.0, b: 1.0 };
        let seg = wait_segment(good, 0.0, 1.0, LogScalar::ONE).unwrap();
        assert_eq!(max_residual(&seg, 0.0, 100), 0.0);
        let bad = WaitParams { x: Some(ExpMode { k: 3.0, rate: 6.0, weight: LogScalar::ONE }), ..good };
        assert!(matches!(wait_segment(bad, 0.0, 1.0, LogScalar::ONE), Err(Error::IncompatibleField(_))));
    }

    #[test]
    fn remove_constant_endpoints() {
        let (k, kp) = (4096.0_f64, 8192.0);
        let w = remove_constant_width(k, kp);
        let seg = remove_constant_segment(kp, 1.0, 1.0 / 9.0, -4.0 * k.ln(), w, 0.0, LogScalar::ONE).unwrap();
        let SegmentKind::RemoveConstant(p) = &seg.kind else { unreachable!() };
        assert_eq!(p.exponent(0.0)[0], -4.0 * k.ln());
        assert!((p.b_tilde(w).0 - 1.0 / 9.0).abs() < 1e-15);
        assert!(max_residual(&seg, 0.0, 1000) < 1e-9);
    }

    #[test]
    fn accelerate_stays_in_class() {
        let seg = accelerate_segment(8192.0, 1.0, 1.0 / 9.0, 1.0, 0.0, LogScalar::ONE).unwrap();
        let SegmentKind::Accelerate(p) = &seg.kind else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let tau = rng.random_range(0.0..ACCELERATION_WIDTH);
            let (b, db) = p.b_tilde(tau);
            assert!((1.0 / 80.0..=80.0).contains(&b));
            assert!(db.abs() <= 10.0);
        }
        assert!(max_residual(&seg, 0.0, 1000) < 1e-9);
        assert!(accelerate_segment(1.0, 1.0, 1.0, 0.5, 0.0, LogScalar::ONE).is_err());
    }

    #[test]
    fn head_has_turning_point_and_exponential_tail() {
        let k = 4096.0;
        let (seg, t0) = symmetrize_head_segment(1.0, k, 0.01).unwrap();
        let f0 = seg.field(0.0).unwrap();
        let m = f0.x.unwrap();
        assert!(m.d[1].abs() <= 1e-8 * k * m.d[0].abs());
        let SegmentKind::SymmetrizeHead(h) = &seg.kind else { unreachable!() };
        assert!(t0 - (h.t2 - h.t1) > 0.0);
        assert!(h.t2 - h.t1 <= 0.4);
        assert!(max_residual(&seg, 1.0, 1000) < 1e-8);
        // Both branch switches join to second order.
        for b in seg.internal_boundaries() {
            let (l, _) = seg.eval_side(0.0, 0.0, b, Side::Left).unwrap();
            let (r, _) = seg.eval_side(0.0, 0.0, b, Side::Right).unwrap();
            let (lm, rm) = (l.x.unwrap(), r.x.unwrap());
            let sc = lm.log_scale.max(rm.log_scale);
            for j in 0..3 {
                let size = lm.native(0, sc).abs() * k.powi(j as i32);
                assert!((lm.native(j, sc) - rm.native(j, sc)).abs() <= 1e-8 * size, "switch {b} order {j}");
            }
        }
    }

    #[test]
    fn out_of_interval_is_reported() {
        let seg = change_coeff_segment(1.0, 1.0, 1.0, 1.0, 1.0, LogScalar::ONE).unwrap();
        assert!(matches!(seg.field(0.5), Err(Error::OutOfInterval { .. })));
    }
}
