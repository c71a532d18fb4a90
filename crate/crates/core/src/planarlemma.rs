//! Explicit 2D matrices `A_s` with `A_s grad(u) = V` and `div V` a prescribed cosine.
//!
//! Adding variant: `u = cos(kx) + s cos(k'y)`, `div V = cos(k'y)`, sparsity `[[a, b], [b, 0]]`.
//! Removing variant: `v = s cos(kx) + cos(k'y)`, `div V = cos(kx)`, sparsity `[[0, b], [b, d]]`.
//! The removing formulas are the exact mirror `(x, y, k, k') -> (y, x, k', k)` of the adding ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Add,
    Remove,
}

/// Wavenumbers and mixing amplitude. Wavenumbers are real so that non-integer
/// schedules can be evaluated too; the torus periodicity needs integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarParams {
    pub k: f64,
    pub kprime: f64,
    pub s: f64,
}

impl PlanarParams {
    /// Checked constructor for `1 <= k <= k' <= 2k`.
    pub fn new(k: f64, kprime: f64, s: f64) -> Result<Self> {
        if !(k >= 1.0 && k <= kprime && kprime <= 2.0 * k) || !s.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "planar lemma needs 1 <= k <= k' <= 2k, got k = {k}, k' = {kprime}, s = {s}"
            )));
        }
        Ok(Self { k, kprime, s })
    }
}

/// Symmetric 2x2 matrix `[[a, b], [c, d]]` with `b == c` in every constructed instance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PlanarMatrix {
    pub fn symmetric(a: f64, b: f64, d: f64) -> Self {
        Self { a, b, c: b, d }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Row/column swap `P M P` with `P` the exchange matrix.
    pub fn swapped(&self) -> Self {
        Self { a: self.d, b: self.c, c: self.b, d: self.a }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// Matrix together with its partials in `x`, `y` and `s`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarJet {
    pub value: PlanarMatrix,
    pub dx: PlanarMatrix,
    pub dy: PlanarMatrix,
    pub ds: PlanarMatrix,
}

struct Trig {
    sin_p: f64,
    cos_p: f64,
    sin_q: f64,
    cos_q: f64,
}

impl Trig {
    fn at(p: &PlanarParams, x: f64, y: f64) -> Self {
        let (sin_p, cos_p) = (p.k * x).sin_cos();
        let (sin_q, cos_q) = (p.kprime * y).sin_cos();
        Self { sin_p, cos_p, sin_q, cos_q }
    }
}

pub fn vector_field_add(p: &PlanarParams, x: f64, y: f64) -> [f64; 2] {
    let t = Trig::at(p, x, y);
    [
        2.0 * t.sin_p * t.cos_p * t.cos_q / (2.0 * p.k),
        2.0 * t.sin_q * (t.sin_p * t.sin_p) / p.kprime,
    ]
}

pub fn vector_field_remove(p: &PlanarParams, x: f64, y: f64) -> [f64; 2] {
    let t = Trig::at(p, x, y);
    [
        2.0 * t.sin_p * (t.sin_q * t.sin_q) / p.k,
        2.0 * t.sin_q * t.cos_q * t.cos_p / (2.0 * p.kprime),
    ]
}

pub fn matrix_add(p: &PlanarParams, x: f64, y: f64) -> PlanarMatrix {
    matrix_jet(Variant::Add, p, x, y).value
}

pub fn matrix_remove(p: &PlanarParams, x: f64, y: f64) -> PlanarMatrix {
    matrix_jet(Variant::Remove, p, x, y).value
}

/// `d A_s / d s`; only the term linear in `s` survives.
pub fn matrix_s_derivative(variant: Variant, p: &PlanarParams, x: f64, y: f64) -> PlanarMatrix {
    matrix_jet(variant, p, x, y).ds
}

/// Value and first partials of `A_s` at `(x, y)`.
pub fn matrix_jet(variant: Variant, p: &PlanarParams, x: f64, y: f64) -> PlanarJet {
    let t = Trig::at(p, x, y);
    let (k, kp, s) = (p.k, p.kprime, p.s);
    match variant {
        Variant::Add => {
            let k2 = k * k;
            let a = (-(t.cos_q * t.cos_p) + 2.0 * s * (t.sin_q * t.sin_q)) / k2;
            let b = -2.0 * (t.sin_q * t.sin_p) / (k * kp);
            let a_x = t.cos_q * t.sin_p / k;
            let a_y = kp * (t.sin_q * t.cos_p + 4.0 * s * (t.sin_q * t.cos_q)) / k2;
            let b_x = -2.0 * (t.sin_q * t.cos_p) / kp;
            let b_y = -2.0 * (t.cos_q * t.sin_p) / k;
            PlanarJet {
                value: PlanarMatrix::symmetric(a, b, 0.0),
                dx: PlanarMatrix::symmetric(a_x, b_x, 0.0),
                dy: PlanarMatrix::symmetric(a_y, b_y, 0.0),
                ds: PlanarMatrix::symmetric(2.0 * (t.sin_q * t.sin_q) / k2, 0.0, 0.0),
            }
        }
        Variant::Remove => {
            let kp2 = kp * kp;
            let d = (-(t.cos_p * t.cos_q) + 2.0 * s * (t.sin_p * t.sin_p)) / kp2;
            let b = -2.0 * (t.sin_p * t.sin_q) / (kp * k);
            let d_y = t.cos_p * t.sin_q / kp;
            let d_x = k * (t.sin_p * t.cos_q + 4.0 * s * (t.sin_p * t.cos_p)) / kp2;
            let b_y = -2.0 * (t.sin_p * t.cos_q) / k;
            let b_x = -2.0 * (t.cos_p * t.sin_q) / kp;
            PlanarJet {
                value: PlanarMatrix::symmetric(0.0, b, d),
                dx: PlanarMatrix::symmetric(0.0, b_x, d_x),
                dy: PlanarMatrix::symmetric(0.0, b_y, d_y),
                ds: PlanarMatrix::symmetric(0.0, 0.0, 2.0 * (t.sin_p * t.sin_p) / kp2),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn add_examples() {
        let p = PlanarParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(vector_field_add(&p, 0.0, 0.0), [0.0, 0.0]);
        let p = PlanarParams::new(2.0, 3.0, 0.0).unwrap();
        let v = vector_field_add(&p, PI / 8.0, PI / 6.0);
        assert!(v[0].abs() < 1e-16);
        assert!((v[1] - 1.0 / 3.0).abs() < 1e-15);
        let m = matrix_add(&p, PI / 4.0, PI / 6.0);
        assert!((m.b + 1.0 / 3.0).abs() < 1e-15);
        assert!(m.a.abs() < 1e-16);
        assert_eq!(m.b, m.c);
    }

    #[test]
    fn origin_values() {
        for (k, kp, s) in [(1.0, 2.0, 0.3), (5.0, 7.0, 1.5)] {
            let p = PlanarParams::new(k, kp, s).unwrap();
            let m = matrix_add(&p, 0.0, 0.0);
            assert_eq!(m.b, 0.0);
            assert_eq!(m.a, -1.0 / (k * k));
        }
    }

    #[test]
    fn remove_example() {
        let p = PlanarParams::new(2.0, 3.0, 1.0).unwrap();
        let m = matrix_remove(&p, PI / 4.0, PI / 6.0);
        assert!((m.b + 1.0 / 3.0).abs() < 1e-15);
        assert!((m.d - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(matrix_remove(&p, PI / 4.0, 0.0).b, 0.0);
    }

    #[test]
    fn s_derivative_examples() {
        let p = PlanarParams::new(2.0, 3.0, 0.7).unwrap();
        let ds = matrix_s_derivative(Variant::Add, &p, 0.1, PI / 6.0);
        assert!((ds.a - 0.5).abs() < 1e-15);
        assert_eq!(matrix_s_derivative(Variant::Remove, &p, 0.0, 0.4).d, 0.0);
    }

    #[test]
    fn domain_is_checked() {
        assert!(PlanarParams::new(2.0, 5.0, 0.0).is_err());
        assert!(PlanarParams::new(0.5, 0.5, 0.0).is_err());
    }
}
