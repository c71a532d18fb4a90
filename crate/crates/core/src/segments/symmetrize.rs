//! The symmetrization head: a profile with `f'(0) = 0` that joins `e^{-k(t - t0)}`.
//!
//! Unshifted, `g'' = (k^2 a(s) - mu) g` with
//! `a(s) = 1 + mu/k^2 - (mu/(2k^2) + 1) theta((s - t1)/(t2 - t1))`,
//! `g(t2) = 1`, `g'(t2) = -k`. Below `t1` the equation has constant coefficients
//! and `g` is a pure oscillation, so a shift `sigma <= 0` puts a turning point at 0.

use serde::{Deserialize, Serialize};

use super::field::{CoeffJet, FieldJet, ModeJet, Sym2};
use super::ode::{integrate, interpolate, Node, OdeConfig};
use crate::error::{Error, Result};
use crate::scalarcore::{theta_jet, SQRT_PI};

/// Step cap in the scaled time `k s`.
const STEP_CAP: f64 = 0.004;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadProfile {
    pub mu: f64,
    pub k: f64,
    pub t1: f64,
    pub t2: f64,
    /// Shift applied to the unshifted profile: `f(tau) = g(tau + sigma)`.
    pub sigma: f64,
    /// Log scale of the oscillation coefficients below `t1`.
    pub osc_log_scale: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Integrator nodes on `[t1, t2]` in the scaled time `k s`, increasing,
    /// with derivatives taken in that time.
    pub nodes: Vec<Node>,
    pub max_error_ratio: f64,
}

impl HeadProfile {
    /// Transition duration `t2 - t1 = (sqrt(pi)/10)(1 + mu/(2k^2))`.
    pub fn transition_duration(mu: f64, k: f64) -> f64 {
        SQRT_PI / 10.0 * (1.0 + mu / (2.0 * k * k))
    }

    pub fn build(mu: f64, k: f64, t1: f64) -> Result<Self> {
        if !(mu > 0.0) || !(k > 0.0) || k * k < 100.0 * mu {
            return Err(Error::ParameterDomain(format!("symmetrization needs mu > 0 and k^2 >= 100 mu, got mu = {mu}, k = {k}")));
        }
        if !(t1 > 0.0) {
            return Err(Error::ParameterDomain(format!("symmetrization switch time must be positive, got {t1}")));
        }
        let t2 = t1 + Self::transition_duration(mu, k);
        let mut head = Self {
            mu,
            k,
            t1,
            t2,
            sigma: 0.0,
            osc_log_scale: 0.0,
            alpha: 0.0,
            beta: 0.0,
            nodes: Vec::new(),
            max_error_ratio: 0.0,
        };
        // Integrate in `sigma = k s`, where `g` and `dg/dsigma` are of one size;
        // renormalizing a state `(g, g')` with `|g'| ~ k |g|` would cost `g` a factor `k` in precision.
        let cfg = OdeConfig::new(STEP_CAP);
        let k2 = k * k;
        let sweep = integrate(|sig| head.potential(sig / k) / k2, k * t2, k * t1, [1.0, -1.0], &cfg)?;
        let start = sweep.nodes[0];
        let omega = head.omega();
        let (sn, cs) = (omega * t1).sin_cos();
        let (g, gd) = (start.d[0], start.d[1] * k / omega);
        let alpha = g * cs - gd * sn;
        let beta = g * sn + gd * cs;
        if !(alpha.is_finite() && beta.is_finite()) || alpha.abs() + beta.abs() == 0.0 {
            return Err(Error::DegenerateMatch);
        }
        head.sigma = (2.0 / mu).sqrt() * (-std::f64::consts::PI + beta.atan2(alpha));
        head.osc_log_scale = start.log();
        head.alpha = alpha;
        head.beta = beta;
        head.nodes = sweep.nodes;
        head.max_error_ratio = sweep.max_error_ratio;
        Ok(head)
    }

    pub fn omega(&self) -> f64 {
        (self.mu / 2.0).sqrt()
    }

    /// End of the head in shifted time, where it meets `e^{-k(t - t0)}`.
    pub fn t0(&self) -> f64 {
        self.t2 - self.sigma
    }

    /// Unshifted `a(s)` and `a'(s)`.
    pub fn a(&self, s: f64) -> [f64; 2] {
        let k2 = self.k * self.k;
        let span = self.t2 - self.t1;
        let drop = self.mu / (2.0 * k2) + 1.0;
        let w = theta_jet((s - self.t1) / span);
        [1.0 + self.mu / k2 - drop * w[0], -drop * w[1] / span]
    }

    fn potential(&self, s: f64) -> f64 {
        self.k * self.k * self.a(s)[0] - self.mu
    }

    /// Unshifted profile `(log_scale, [g, g', g''])`.
    pub fn g(&self, s: f64) -> (f64, [f64; 3]) {
        self.g_from(s, s <= self.t1, s >= self.t2)
    }

    /// Unshifted profile with the branch chosen explicitly, for one-sided limits at `t1` and `t2`.
    fn g_from(&self, s: f64, oscillating: bool, decaying: bool) -> (f64, [f64; 3]) {
        if oscillating {
            let w = self.omega();
            let (sn, cs) = (w * s).sin_cos();
            let v = self.alpha * cs + self.beta * sn;
            (self.osc_log_scale, [v, w * (self.beta * cs - self.alpha * sn), -w * w * v])
        } else if decaying {
            let k = self.k;
            (-k * (s - self.t2), [1.0, -k, k * k])
        } else {
            let k = self.k;
            let (log, d) = interpolate(&self.nodes, (k * s).clamp(k * self.t1, k * self.t2));
            (log, [d[0], d[1] * k, d[2] * k * k])
        }
    }

    /// Branch switches in shifted time: the end of the oscillation and the start of the tail.
    pub fn switches(&self) -> [f64; 2] {
        [self.t1 - self.sigma, self.t2 - self.sigma]
    }

    /// Shifted profile `f(tau) = g(tau + sigma)` as a mode on the x axis.
    pub fn field(&self, tau: f64) -> FieldJet {
        let (log_scale, d) = self.g(tau + self.sigma);
        FieldJet { x: Some(ModeJet { k: self.k, log_scale, d }), y: None }
    }

    /// As [`HeadProfile::field`], taking the left or right branch exactly at a switch.
    pub fn field_side(&self, tau: f64, left: bool) -> FieldJet {
        let s = tau + self.sigma;
        let [a, b] = self.switches();
        let (oscillating, decaying) = if tau == a {
            (left, false)
        } else if tau == b {
            (false, !left)
        } else {
            (s <= self.t1, s >= self.t2)
        };
        let (log_scale, d) = self.g_from(s, oscillating, decaying);
        FieldJet { x: Some(ModeJet { k: self.k, log_scale, d }), y: None }
    }

    pub fn coeff(&self, tau: f64) -> CoeffJet {
        let a = self.a(tau + self.sigma);
        let side = 1.0 + self.mu / (4.0 * self.k * self.k);
        CoeffJet { value: Sym2::diag(a[0], side), dt: Sym2::diag(a[1], 0.0), ..CoeffJet::default() }
    }
}
