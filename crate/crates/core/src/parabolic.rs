//! Complex-valued drifted heat blocks `u_t = Δu + B·∇u` and their chain.
//!
//! A block carries `u = f(t) e^{ikx} + g(t) e^{ik'y}` and first switches on the
//! second mode with drift along `x`, then switches off the first with drift
//! along `y`. Complex carriers never vanish, so the drift is a plain quotient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{Side, TimelineKind, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::scalarcore::{LogScalar, Window, SQRT_PI};

/// Largest allowed frequency step `k' - k`.
pub const MAX_STEP: f64 = 10.0;

/// Block length in units of `1/k`.
pub const BLOCK_SPAN: f64 = 3.5;

/// One block in block coordinates; `entry` multiplies `e^{ikx} e^{-k^2 (t - start)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicBlock {
    pub n: usize,
    pub start: f64,
    pub k: f64,
    pub kprime: f64,
    /// `c_n` in `c_n e^{ik_n x} e^{-k_n^2 t}`.
    pub c: LogScalar,
    /// `C_n = c_n e^{-k_n^2 t_n}`.
    pub entry: LogScalar,
    pub swapped: bool,
}

/// Time profile of one mode: `e^{log_scale} (d[0], d[1])` for value and time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Profile {
    pub log_scale: f64,
    pub d: [f64; 2],
}

/// Values at a point relative to `e^{scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPoint {
    pub u: Complex64,
    pub u_t: Complex64,
    pub grad: [Complex64; 2],
    pub laplacian: Complex64,
    pub drift: [Complex64; 2],
    /// `sup |u|` over the torus at this time.
    pub sup: f64,
    pub k_max: f64,
}

impl ParabolicPoint {
    /// `u_t - Δu - B·∇u` relative to `sup|u| (1 + k^2)`.
    pub fn relative_residual(&self) -> f64 {
        let r = self.u_t - self.laplacian - self.drift[0] * self.grad[0] - self.drift[1] * self.grad[1];
        let size = self.sup * (1.0 + self.k_max * self.k_max);
        if size == 0.0 {
            r.norm()
        } else {
            r.norm() / size
        }
    }
}

impl ParabolicBlock {
    pub fn length(&self) -> f64 {
        BLOCK_SPAN / self.k
    }

    pub fn end(&self) -> f64 {
        self.start + self.length()
    }

    /// Window switching on the second mode, over `[1/(2k), 3/(2k)]`.
    pub fn add_window(&self) -> Window {
        Window::descending(self.start + 0.5 / self.k, 1.0 / self.k)
    }

    /// Window switching off the first mode, over `[2/k, 3/k]`.
    pub fn remove_window(&self) -> Window {
        Window::descending(self.start + 2.0 / self.k, 1.0 / self.k)
    }

    /// Profiles of the first and second mode at `t`.
    pub fn profiles(&self, t: f64) -> (Profile, Profile) {
        let tau = t - self.start;
        let (k2, kp2) = (self.k * self.k, self.kprime * self.kprime);
        let add = self.add_window().jet(t);
        let rem = self.remove_window().jet(t);
        let base = self.entry.logmag();
        let sign = self.entry.sign() as f64;
        let f = Profile { log_scale: base - k2 * tau, d: [sign * rem[0], sign * (rem[1] - k2 * rem[0])] };
        let rise = 1.0 - add[0];
        let g = Profile { log_scale: base - kp2 * tau, d: [sign * rise, sign * (-add[1] - kp2 * rise)] };
        (f, g)
    }

    /// Drift magnitude `|B|` at `t` (independent of the point).
    pub fn drift_magnitude(&self, t: f64) -> f64 {
        let tau = t - self.start;
        let gap = self.kprime * self.kprime - self.k * self.k;
        let add = self.add_window().eval(t, 1);
        let rem = self.remove_window().eval(t, 1);
        if add != 0.0 {
            add.abs() / self.k * (-gap * tau).exp()
        } else if rem != 0.0 {
            rem.abs() / self.kprime * (gap * tau).exp()
        } else {
            0.0
        }
    }

    /// Analytic bound `sqrt(pi) e^{3(k'^2 - k^2)/k}` on `|B|` over the block.
    pub fn drift_envelope(&self) -> f64 {
        SQRT_PI * (3.0 * (self.kprime * self.kprime - self.k * self.k) / self.k).exp()
    }

    /// All quantities at `(x, y, t)` in block coordinates, relative to `e^{scale}`.
    fn point_local(&self, x: f64, y: f64, t: f64, scale: f64) -> ParabolicPoint {
        let tau = t - self.start;
        let (k, kp) = (self.k, self.kprime);
        let (f, g) = self.profiles(t);
        let nat = |p: &Profile, j: usize| {
            let w = (p.log_scale - scale).exp();
            if w == 0.0 {
                0.0
            } else {
                p.d[j] * w
            }
        };
        let ex = Complex64::from_polar(1.0, k * x);
        let ey = Complex64::from_polar(1.0, kp * y);
        let (f0, f1, g0, g1) = (nat(&f, 0), nat(&f, 1), nat(&g, 0), nat(&g, 1));
        let i = Complex64::i();
        let u = ex * f0 + ey * g0;
        let u_t = ex * f1 + ey * g1;
        let grad = [i * k * f0 * ex, i * kp * g0 * ey];
        let laplacian = -(ex * (k * k * f0) + ey * (kp * kp * g0));
        let gap = kp * kp - k * k;
        let add = self.add_window().eval(t, 1);
        let rem = self.remove_window().eval(t, 1);
        let mut drift = [Complex64::new(0.0, 0.0); 2];
        if add != 0.0 {
            drift[0] = -(ey / ex) * (add * (-gap * tau).exp()) / (i * k);
        }
        if rem != 0.0 {
            drift[1] = (ex / ey) * (rem * (gap * tau).exp()) / (i * kp);
        }
        ParabolicPoint { u, u_t, grad, laplacian, drift, sup: f0.abs() + g0.abs(), k_max: kp }
    }

    /// Largest log scale of the present modes at `t`.
    pub fn scale(&self, t: f64) -> f64 {
        let (f, g) = self.profiles(t);
        match (f.d[0] != 0.0 || f.d[1] != 0.0, g.d[0] != 0.0 || g.d[1] != 0.0) {
            (true, true) => f.log_scale.max(g.log_scale),
            (true, false) => f.log_scale,
            (false, true) => g.log_scale,
            (false, false) => 0.0,
        }
    }

    /// All quantities at `(x, y, t)` in cylinder coordinates.
    pub fn point(&self, x: f64, y: f64, t: f64, scale: f64) -> ParabolicPoint {
        if !self.swapped {
            return self.point_local(x, y, t, scale);
        }
        let p = self.point_local(y, x, t, scale);
        ParabolicPoint { grad: [p.grad[1], p.grad[0]], drift: [p.drift[1], p.drift[0]], ..p }
    }

    /// `sup |u(t)|` over the torus.
    pub fn sup(&self, t: f64) -> LogScalar {
        let (f, g) = self.profiles(t);
        let abs = |p: Profile| LogScalar::from_f64(p.d[0].abs()) * LogScalar::exp(p.log_scale);
        abs(f) + abs(g)
    }
}

/// Build one block on `[t1, t1 + 7/(2k)]` carrying `c1 e^{ikx} e^{-k^2 t}`; returns it and `c2`
/// with `c1 e^{-k^2 t1} = c2 e^{-k'^2 t1}`.
pub fn parabolic_block(k: f64, kprime: f64, c1: LogScalar, t1: f64) -> Result<(ParabolicBlock, LogScalar)> {
    if !(k >= 1.0 && k <= kprime && kprime - k <= MAX_STEP) {
        return Err(Error::ParameterDomain(format!("parabolic block needs 1 <= k <= k' <= k + 10, got {k}, {kprime}")));
    }
    let entry = c1 * LogScalar::exp(-k * k * t1);
    let block = ParabolicBlock { n: 1, start: t1, k, kprime, c: c1, entry, swapped: false };
    let c2 = entry * LogScalar::exp(kprime * kprime * t1);
    Ok((block, c2))
}

/// Chain of parabolic blocks with `k_n = n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicChain {
    pub version: u32,
    pub kind: TimelineKind,
    pub blocks: Vec<ParabolicBlock>,
    /// `C_{N+1}` at the end of the chain.
    pub final_entry: LogScalar,
}

/// Values of the chain at a point together with the owning block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicEval {
    pub point: ParabolicPoint,
    pub block: usize,
    pub scale: f64,
}

impl ParabolicChain {
    pub fn t_start(&self) -> f64 {
        self.blocks.first().map_or(0.0, |b| b.start)
    }

    pub fn t_end(&self) -> f64 {
        self.blocks.last().map_or(0.0, |b| b.end())
    }

    pub fn locate(&self, t: f64, side: Side) -> Result<usize> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return Err(Error::OutOfInterval { t, start: self.t_start(), end: self.t_end() });
        }
        let mut i = self.blocks.partition_point(|b| b.start <= t).saturating_sub(1);
        if side == Side::Left && i > 0 && self.blocks[i].start == t {
            i -= 1;
        }
        Ok(i)
    }

    /// Evaluate in block `i` relative to that block's scale at `t`.
    pub fn eval_in(&self, i: usize, x: f64, y: f64, t: f64) -> ParabolicEval {
        let b = &self.blocks[i];
        let scale = b.scale(t);
        ParabolicEval { point: b.point(x, y, t, scale), block: i, scale }
    }

    pub fn eval_side(&self, x: f64, y: f64, t: f64, side: Side) -> Result<ParabolicEval> {
        let i = self.locate(t, side)?;
        Ok(self.eval_in(i, x, y, t))
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<ParabolicEval> {
        self.eval_side(x, y, t, Side::Right)
    }

    /// `(t_n, C_n)` for every block and the end of the chain.
    pub fn block_sups(&self) -> Vec<(f64, LogScalar)> {
        let mut out: Vec<_> = self.blocks.iter().map(|b| (b.start, b.entry)).collect();
        out.push((self.t_end(), self.final_entry));
        out
    }
}

/// Chain of `n_blocks` blocks with `k_n = n`, `t_n = sum_{l<n} 7/(2 k_l)`, `c_1 = 1`.
pub fn parabolic_chain(n_blocks: usize) -> Result<ParabolicChain> {
    if n_blocks == 0 {
        return Err(Error::ParameterDomain("a chain needs at least one block".into()));
    }
    let mut blocks = Vec::with_capacity(n_blocks);
    let (mut t, mut c) = (0.0, LogScalar::ONE);
    for n in 1..=n_blocks {
        let (mut block, next) = parabolic_block(n as f64, (n + 1) as f64, c, t)?;
        block.n = n;
        block.swapped = n % 2 == 0;
        t = block.end();
        c = next;
        blocks.push(block);
    }
    let k_last = (n_blocks + 1) as f64;
    let final_entry = c * LogScalar::exp(-k_last * k_last * t);
    Ok(ParabolicChain { version: FORMAT_VERSION, kind: TimelineKind::Parabolic, blocks, final_entry })
}

/// Closed-form recursion `ln C_{n+1} = ln C_n - 7 k_{n+1}^2 / (2 k_n)` with `k_n = n`, `C_1 = 1`.
pub fn parabolic_log_decay(n: usize) -> f64 {
    (1..n).map(|m| -3.5 * ((m + 1) * (m + 1)) as f64 / m as f64).sum()
}
