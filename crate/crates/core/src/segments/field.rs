//! Two-mode fields `F(t) cos(k x) + G(t) cos(k' y)` and symmetric coefficient jets.

use serde::{Deserialize, Serialize};

use crate::scalarcore::LogScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Self {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// One mode's time profile at a single instant: `f^(j) = e^{log_scale} * d[j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeJet {
    pub k: f64,
    pub log_scale: f64,
    pub d: [f64; 3],
}

impl ModeJet {
    /// Product `w(t) * e^{L(t)}` where `w` has derivatives `win` and `L` is
    /// affine with slope `-rate`.
    pub fn windowed_exp(k: f64, log_scale: f64, rate: f64, win: [f64; 3]) -> Self {
        let d = [
            win[0],
            win[1] - rate * win[0],
            win[2] - 2.0 * rate * win[1] + rate * rate * win[0],
        ];
        Self { k, log_scale, d }
    }

    pub fn pure_exp(k: f64, log_scale: f64, rate: f64) -> Self {
        Self::windowed_exp(k, log_scale, rate, [1.0, 0.0, 0.0])
    }

    /// Multiply by a log-domain constant.
    pub fn scaled_by(mut self, amp: LogScalar) -> Self {
        if amp.is_zero() {
            self.d = [0.0; 3];
            return self;
        }
        self.log_scale += amp.logmag();
        if amp.sign() < 0 {
            for v in &mut self.d {
                *v = -*v;
            }
        }
        self
    }

    /// Profile derivative of order `j` as a log scalar.
    pub fn deriv(&self, j: usize) -> LogScalar {
        LogScalar::from_f64(self.d[j]) * LogScalar::exp(self.log_scale)
    }

    /// Profile derivative of order `j` relative to `e^{scale}`.
    pub fn native(&self, j: usize, scale: f64) -> f64 {
        let w = (self.log_scale - scale).exp();
        if w == 0.0 {
            0.0
        } else {
            self.d[j] * w
        }
    }

    /// Flip the sign of odd time derivatives (time reflection).
    pub fn reflected(mut self) -> Self {
        self.d[1] = -self.d[1];
        self
    }
}

/// At most one mode per axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub x: Option<ModeJet>,
    pub y: Option<ModeJet>,
}

impl FieldJet {
    pub fn mode(&self, axis: Axis) -> Option<&ModeJet> {
        match axis {
            Axis::X => self.x.as_ref(),
            Axis::Y => self.y.as_ref(),
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (Axis, &ModeJet)> {
        self.x.iter().map(|m| (Axis::X, m)).chain(self.y.iter().map(|m| (Axis::Y, m)))
    }

    /// Largest log scale among present modes; 0 for the empty field.
    pub fn common_scale(&self) -> f64 {
        let s = self.modes().map(|(_, m)| m.log_scale).fold(f64::NEG_INFINITY, f64::max);
        if s.is_finite() {
            s
        } else {
            0.0
        }
    }

    pub fn k_max(&self) -> f64 {
        self.modes().map(|(_, m)| m.k).fold(0.0, f64::max)
    }

    /// `sup` over the torus of `|u|`, which is `|F| + |G|` for integer wavenumbers.
    pub fn sup(&self) -> LogScalar {
        self.modes().fold(LogScalar::ZERO, |acc, (_, m)| acc + m.deriv(0).abs())
    }

    pub fn scaled_by(mut self, amp: LogScalar) -> Self {
        self.x = self.x.map(|m| m.scaled_by(amp));
        self.y = self.y.map(|m| m.scaled_by(amp));
        self
    }

    pub fn swapped(self) -> Self {
        Self { x: self.y, y: self.x }
    }

    pub fn reflected(self) -> Self {
        Self { x: self.x.map(ModeJet::reflected), y: self.y.map(ModeJet::reflected) }
    }

    /// All partials at `(x, y)` relative to `e^{scale}`.
    pub fn point(&self, x: f64, y: f64, scale: f64) -> PointValues {
        let mut p = PointValues::default();
        if let Some(m) = &self.x {
            let (s, c) = (m.k * x).sin_cos();
            let f = [m.native(0, scale), m.native(1, scale), m.native(2, scale)];
            p.u += f[0] * c;
            p.u_t += f[1] * c;
            p.u_tt += f[2] * c;
            p.u_x += -m.k * f[0] * s;
            p.u_xx += -m.k * m.k * f[0] * c;
            p.u_tx += -m.k * f[1] * s;
        }
        if let Some(m) = &self.y {
            let (s, c) = (m.k * y).sin_cos();
            let f = [m.native(0, scale), m.native(1, scale), m.native(2, scale)];
            p.u += f[0] * c;
            p.u_t += f[1] * c;
            p.u_tt += f[2] * c;
            p.u_y += -m.k * f[0] * s;
            p.u_yy += -m.k * m.k * f[0] * c;
            p.u_ty += -m.k * f[1] * s;
        }
        p
    }

    /// `sup |u|` relative to `e^{scale}`.
    pub fn sup_native(&self, scale: f64) -> f64 {
        self.modes().map(|(_, m)| m.native(0, scale).abs()).sum()
    }
}

/// Partials of `u` at one point; `u_xy` vanishes identically for two-mode fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointValues {
    pub u: f64,
    pub u_t: f64,
    pub u_tt: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_xx: f64,
    pub u_yy: f64,
    pub u_xy: f64,
    pub u_tx: f64,
    pub u_ty: f64,
}

/// Symmetric 2x2 entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Self = Self { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn diag(a: f64, b: f64) -> Self {
        Self { xx: a, xy: 0.0, yy: b }
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn swapped(self) -> Self {
        Self { xx: self.yy, xy: self.xy, yy: self.xx }
    }

    pub fn add(self, o: Self) -> Self {
        Self { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }

    pub fn sub(self, o: Self) -> Self {
        Self { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }

    pub fn scale(self, f: f64) -> Self {
        Self { xx: self.xx * f, xy: self.xy * f, yy: self.yy * f }
    }

    pub fn max_abs(self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    /// Closed-form eigenvalues, ascending.
    pub fn eigenvalues(self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_gap = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - half_gap, mean + half_gap)
    }

    /// Spectral norm of a symmetric matrix.
    pub fn norm(self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    pub fn apply(self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }
}

/// Coefficient matrix with its first partials in `x`, `y`, `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffJet {
    pub value: Sym2,
    pub dx: Sym2,
    pub dy: Sym2,
    pub dt: Sym2,
}

impl CoeffJet {
    /// `t`-independent diagonal matrix.
    pub fn constant_diag(a: f64, b: f64) -> Self {
        Self { value: Sym2::diag(a, b), ..Self::default() }
    }

    pub fn swapped(self) -> Self {
        Self { value: self.value.swapped(), dx: self.dy.swapped(), dy: self.dx.swapped(), dt: self.dt.swapped() }
    }

    pub fn reflected(mut self) -> Self {
        self.dt = self.dt.scale(-1.0);
        self
    }

    pub fn add_diag(mut self, a: f64, b: f64, da: f64, db: f64) -> Self {
        self.value.xx += a;
        self.value.yy += b;
        self.dt.xx += da;
        self.dt.yy += db;
        self
    }

    /// Largest absolute value among the nine first partials.
    pub fn c1_sup(&self) -> f64 {
        self.dx.max_abs().max(self.dy.max_abs()).max(self.dt.max_abs())
    }
}

/// `u_tt + div(A grad u) + mu u` relative to `e^{scale}`, with its natural size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    /// `sup |u| * (1 + k_max^2)` relative to the same scale.
    pub size: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.size == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.size
        }
    }
}

/// Analytic residual of the elliptic equation on the cylinder.
pub fn elliptic_residual(field: &FieldJet, coeff: &CoeffJet, x: f64, y: f64, mu: f64) -> Residual {
    let scale = field.common_scale();
    let p = field.point(x, y, scale);
    let a = &coeff.value;
    let div = (coeff.dx.xx + coeff.dy.xy) * p.u_x
        + (coeff.dx.xy + coeff.dy.yy) * p.u_y
        + a.xx * p.u_xx
        + 2.0 * a.xy * p.u_xy
        + a.yy * p.u_yy;
    let k = field.k_max();
    Residual { value: p.u_tt + div + mu * p.u, size: field.sup_native(scale) * (1.0 + k * k) }
}
