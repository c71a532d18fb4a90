//! Closed-form profiles and coefficients of every segment kind, in segment-local time.

use serde::{Deserialize, Serialize};

use super::field::{CoeffJet, FieldJet, ModeJet, Sym2};
use crate::planarlemma::{matrix_jet, PlanarParams, Variant};
use crate::scalarcore::{LogScalar, Window};

/// Change of each mode's log scale (x, y) over a short step.
pub type LogSteps = [Option<f64>; 2];

/// `w * e^{-rate tau}` on a fixed wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMode {
    pub k: f64,
    pub rate: f64,
    pub weight: LogScalar,
}

impl ExpMode {
    fn jet(&self, tau: f64) -> ModeJet {
        ModeJet::pure_exp(self.k, -self.rate * tau, self.rate).scaled_by(self.weight)
    }
}

/// Constant diagonal coefficient with pure exponential modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitParams {
    pub x: Option<ExpMode>,
    pub y: Option<ExpMode>,
    pub a: f64,
    pub b: f64,
}

impl WaitParams {
    pub fn field(&self, tau: f64) -> FieldJet {
        FieldJet { x: self.x.map(|m| m.jet(tau)), y: self.y.map(|m| m.jet(tau)) }
    }

    pub fn coeff(&self) -> CoeffJet {
        CoeffJet::constant_diag(self.a, self.b)
    }

    pub fn log_steps(&self, dt: f64) -> LogSteps {
        [self.x.map(|m| -m.rate * dt), self.y.map(|m| -m.rate * dt)]
    }
}

/// `A = diag(a, c(tau))` with `c` sliding from `a` to `b`; `u = cos(kx) e^{-k sqrt(a) tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeCoeffParams {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub duration: f64,
}

impl ChangeCoeffParams {
    fn window(&self) -> Window {
        Window::descending(0.0, self.duration)
    }

    pub fn field(&self, tau: f64) -> FieldJet {
        FieldJet { x: Some(ModeJet::pure_exp(self.k, -self.k * self.a.sqrt() * tau, self.k * self.a.sqrt())), y: None }
    }

    pub fn log_steps(&self, dt: f64) -> LogSteps {
        [Some(-self.k * self.a.sqrt() * dt), None]
    }

    pub fn coeff(&self, tau: f64) -> CoeffJet {
        let w = self.window().jet(tau);
        let gap = self.a - self.b;
        CoeffJet {
            value: Sym2::diag(self.a, gap * w[0] + self.b),
            dt: Sym2::diag(0.0, gap * w[1]),
            ..CoeffJet::default()
        }
    }
}

/// Smooth insertion (`Add`) or removal (`Remove`) of a second mode through a
/// perturbation of `diag(a, b)` by the planar-lemma matrix.
///
/// Add:    `u = u1 + (1 - alpha) eps u2`.
/// Remove: `u = eps alpha u1 + u2`.
/// with `u1 = cos(kx) e^{-k sqrt(a) tau}`, `u2 = cos(k'y) e^{-k' sqrt(b) tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbParams {
    pub variant: Variant,
    pub k: f64,
    pub kprime: f64,
    pub a: f64,
    pub b: f64,
    /// `ln eps`.
    pub log_eps: f64,
    pub width: f64,
}

/// Time-only factors of a perturbation phase.
struct PerturbState {
    /// Window value and derivatives.
    win: [f64; 4],
    gamma: f64,
    gamma_dot: f64,
    s: f64,
    s_dot: f64,
}

impl PerturbParams {
    fn rates(&self) -> (f64, f64) {
        (self.k * self.a.sqrt(), self.kprime * self.b.sqrt())
    }

    fn window(&self) -> Window {
        Window::descending(0.0, self.width)
    }

    fn state(&self, tau: f64) -> PerturbState {
        let (r1, r2) = self.rates();
        let eps = self.log_eps.exp();
        let win = self.window().jet(tau);
        match self.variant {
            Variant::Add => {
                let growth = r1 - r2;
                let e = (growth * tau).exp();
                let gamma = eps * (win[2] - 2.0 * win[1] * r2) * e;
                let gamma_dot = eps * (win[3] - 2.0 * win[2] * r2) * e + gamma * growth;
                let s = eps * (1.0 - win[0]) * e;
                let s_dot = -eps * win[1] * e + s * growth;
                PerturbState { win, gamma, gamma_dot, s, s_dot }
            }
            Variant::Remove => {
                let growth = r2 - r1;
                let e = (growth * tau).exp();
                let gamma = eps * (2.0 * r1 * win[1] - win[2]) * e;
                let gamma_dot = eps * (2.0 * r1 * win[2] - win[3]) * e + gamma * growth;
                let s = eps * win[0] * e;
                let s_dot = eps * win[1] * e + s * growth;
                PerturbState { win, gamma, gamma_dot, s, s_dot }
            }
        }
    }

    pub fn field(&self, tau: f64) -> FieldJet {
        let (r1, r2) = self.rates();
        let win = self.window().jet(tau);
        match self.variant {
            Variant::Add => {
                let rising = [1.0 - win[0], -win[1], -win[2]];
                FieldJet {
                    x: Some(ModeJet::pure_exp(self.k, -r1 * tau, r1)),
                    y: Some(ModeJet::windowed_exp(self.kprime, self.log_eps - r2 * tau, r2, rising)),
                }
            }
            Variant::Remove => FieldJet {
                x: Some(ModeJet::windowed_exp(self.k, self.log_eps - r1 * tau, r1, [win[0], win[1], win[2]])),
                y: Some(ModeJet::pure_exp(self.kprime, -r2 * tau, r2)),
            },
        }
    }

    pub fn log_steps(&self, dt: f64) -> LogSteps {
        let (r1, r2) = self.rates();
        [Some(-r1 * dt), Some(-r2 * dt)]
    }

    pub fn coeff(&self, x: f64, y: f64, tau: f64) -> CoeffJet {
        let st = self.state(tau);
        let base = CoeffJet::constant_diag(self.a, self.b);
        if st.gamma == 0.0 && st.gamma_dot == 0.0 {
            return base;
        }
        let params = PlanarParams { k: self.k, kprime: self.kprime, s: st.s };
        let jet = matrix_jet(self.variant, &params, x, y);
        let sym = |m: crate::planarlemma::PlanarMatrix| Sym2 { xx: m.a, xy: m.b, yy: m.d };
        let (v, dx, dy, ds) = (sym(jet.value), sym(jet.dx), sym(jet.dy), sym(jet.ds));
        CoeffJet {
            value: base.value.add(v.scale(st.gamma)),
            dx: dx.scale(st.gamma),
            dy: dy.scale(st.gamma),
            dt: v.scale(st.gamma_dot).add(ds.scale(st.gamma * st.s_dot)),
        }
    }

    /// Time factor `gamma` multiplying the planar matrix (exposed for checks).
    pub fn gamma(&self, tau: f64) -> f64 {
        self.state(tau).gamma
    }

    /// Mixing amplitude `s(tau)` fed to the planar matrix.
    pub fn mixing(&self, tau: f64) -> f64 {
        self.state(tau).s
    }

    /// Window value at `tau` (1 at the start, 0 at the end).
    pub fn window_value(&self, tau: f64) -> f64 {
        self.state(tau).win[0]
    }
}

/// Two perturbation halves: `f -> f + g` then `f + g -> g`, with `a = b = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlParams {
    pub k: f64,
    pub kprime: f64,
    pub width: f64,
}

impl PmlParams {
    pub fn add_half(&self) -> PerturbParams {
        PerturbParams { variant: Variant::Add, k: self.k, kprime: self.kprime, a: 1.0, b: 1.0, log_eps: 0.0, width: self.width }
    }

    pub fn remove_half(&self) -> PerturbParams {
        PerturbParams {
            variant: Variant::Remove,
            k: self.k,
            kprime: self.kprime,
            a: 1.0,
            b: 1.0,
            log_eps: (self.kprime - self.k) * self.width,
            width: self.width,
        }
    }

    /// Amplitude factor carried into the second half.
    pub fn second_half_amp(&self) -> LogScalar {
        LogScalar::exp(-self.kprime * self.width)
    }

    pub fn field(&self, tau: f64) -> FieldJet {
        self.field_in(tau, tau < self.width)
    }

    pub fn coeff(&self, x: f64, y: f64, tau: f64) -> CoeffJet {
        self.coeff_in(x, y, tau, tau < self.width)
    }

    /// Steps that stay inside one half; `None` when the step crosses the midpoint.
    pub fn log_steps(&self, tau: f64, dt: f64) -> Option<LogSteps> {
        ((tau < self.width) == (tau + dt < self.width)).then(|| self.add_half().log_steps(dt))
    }

    /// Field from the first or the second half, whichever `first` selects.
    pub fn field_in(&self, tau: f64, first: bool) -> FieldJet {
        if first {
            self.add_half().field(tau)
        } else {
            self.remove_half().field(tau - self.width).scaled_by(self.second_half_amp())
        }
    }

    pub fn coeff_in(&self, x: f64, y: f64, tau: f64, first: bool) -> CoeffJet {
        if first {
            self.add_half().coeff(x, y, tau)
        } else {
            self.remove_half().coeff(x, y, tau - self.width)
        }
    }
}

/// `u = cos(k'y) e^{h}`, `h = -k' sqrt(b) tau + lambda alpha(tau)`, `A = diag(a, b~)`.
/// The segment amplitude multiplies `e^{h - lambda}`, which is 1 at the start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemoveConstantParams {
    pub kprime: f64,
    pub a: f64,
    pub b: f64,
    /// `lambda = ln(factor)`, e.g. `-4 ln k`.
    pub log_factor: f64,
    pub width: f64,
}

impl RemoveConstantParams {
    /// `(h, h', h'', h''')`.
    pub fn exponent(&self, tau: f64) -> [f64; 4] {
        let w = Window::descending(0.0, self.width).jet(tau);
        let r = self.kprime * self.b.sqrt();
        let lam = self.log_factor;
        [-r * tau + lam * w[0], -r + lam * w[1], lam * w[2], lam * w[3]]
    }

    /// `b~` and its time derivative.
    pub fn b_tilde(&self, tau: f64) -> (f64, f64) {
        let h = self.exponent(tau);
        let k2 = self.kprime * self.kprime;
        ((h[2] + h[1] * h[1]) / k2, (h[3] + 2.0 * h[1] * h[2]) / k2)
    }

    pub fn log_steps(&self, tau: f64, dt: f64) -> LogSteps {
        let r = self.kprime * self.b.sqrt();
        let dw = Window::descending(0.0, self.width).increment(tau, dt);
        [None, Some(-r * dt + self.log_factor * dw)]
    }

    /// Profile normalized to 1 at the start, `e^{h(tau) - lambda}`.
    pub fn field(&self, tau: f64) -> FieldJet {
        let h = self.exponent(tau);
        let log_scale = h[0] - self.log_factor;
        FieldJet { x: None, y: Some(ModeJet { k: self.kprime, log_scale, d: [1.0, h[1], h[1] * h[1] + h[2]] }) }
    }

    pub fn coeff(&self, tau: f64) -> CoeffJet {
        let (bt, bt_dot) = self.b_tilde(tau);
        CoeffJet { value: Sym2::diag(self.a, bt), dt: Sym2::diag(0.0, bt_dot), ..CoeffJet::default() }
    }
}

/// `u = cos(ky) e^{-g}`, `g = (sqrt(b') + (sqrt(b) - sqrt(b')) alpha) k tau`, `A = diag(a, b~)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelerateParams {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub bprime: f64,
    pub width: f64,
}

impl AccelerateParams {
    /// `(g, g', g'', g''')`.
    pub fn exponent(&self, tau: f64) -> [f64; 4] {
        let w = Window::descending(0.0, self.width).jet(tau);
        let (sb, sbp) = (self.b.sqrt(), self.bprime.sqrt());
        let gap = sb - sbp;
        let k = self.k;
        [
            (sbp + gap * w[0]) * k * tau,
            gap * w[1] * k * tau + (sbp + gap * w[0]) * k,
            gap * (w[2] * k * tau + 2.0 * w[1] * k),
            gap * (w[3] * k * tau + 3.0 * w[2] * k),
        ]
    }

    /// `g(tau) - g(tau + dt)` from the window increment, free of the cancellation
    /// between two exponents of size `k tau`.
    pub fn log_steps(&self, tau: f64, dt: f64) -> LogSteps {
        let win = Window::descending(0.0, self.width);
        let w1 = win.jet(tau + dt)[0];
        let dw = win.increment(tau, dt);
        let (sb, sbp) = (self.b.sqrt(), self.bprime.sqrt());
        let dg = self.k * (sbp * dt + (sb - sbp) * (dt * w1 + tau * dw));
        [None, Some(-dg)]
    }

    pub fn b_tilde(&self, tau: f64) -> (f64, f64) {
        let g = self.exponent(tau);
        let k2 = self.k * self.k;
        ((g[1] * g[1] - g[2]) / k2, (2.0 * g[1] * g[2] - g[3]) / k2)
    }

    pub fn field(&self, tau: f64) -> FieldJet {
        let g = self.exponent(tau);
        FieldJet { x: None, y: Some(ModeJet { k: self.k, log_scale: -g[0], d: [1.0, -g[1], g[1] * g[1] - g[2]] }) }
    }

    pub fn coeff(&self, tau: f64) -> CoeffJet {
        let (bt, bt_dot) = self.b_tilde(tau);
        CoeffJet { value: Sym2::diag(self.a, bt), dt: Sym2::diag(0.0, bt_dot), ..CoeffJet::default() }
    }
}
