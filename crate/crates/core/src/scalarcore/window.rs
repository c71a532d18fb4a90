use serde::{Deserialize, Serialize};

use super::theta::{theta_increment, theta_jet};

/// Which way a window travels across its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// 1 at the start, 0 at the end.
    Descending,
    /// 0 at the start, 1 at the end.
    Ascending,
}

/// A rescaled copy of the smooth step supported on `[start, start + width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub width: f64,
    pub direction: Direction,
}

impl Window {
    pub fn descending(start: f64, width: f64) -> Self {
        Self { start, width, direction: Direction::Descending }
    }

    pub fn ascending(start: f64, width: f64) -> Self {
        Self { start, width, direction: Direction::Ascending }
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// Value and time derivatives up to order 3.
    pub fn jet(&self, t: f64) -> [f64; 4] {
        let raw = theta_jet((t - self.start) / self.width);
        let inv = 1.0 / self.width;
        let mut out = [raw[0], raw[1] * inv, raw[2] * inv * inv, raw[3] * inv * inv * inv];
        if self.direction == Direction::Ascending {
            out[0] = 1.0 - out[0];
            for d in &mut out[1..] {
                *d = -*d;
            }
        }
        out
    }

    /// Change in value from `t` to `t + dt`, without cancellation for short steps.
    pub fn increment(&self, t: f64, dt: f64) -> f64 {
        let raw = theta_increment((t - self.start) / self.width, dt / self.width);
        match self.direction {
            Direction::Descending => raw,
            Direction::Ascending => -raw,
        }
    }

    /// Derivative of the given order (0 gives the value).
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        assert!(order <= 3, "window derivative order {order} not supported");
        self.jet(t)[order]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarcore::theta::SQRT_PI;

    #[test]
    fn descending_examples() {
        let w = Window::descending(0.0, 2.0);
        assert_eq!(w.eval(0.0, 0), 1.0);
        assert!((w.eval(1.0, 0) - 0.5).abs() < 1e-15);
        assert!((w.eval(1.0, 1) + SQRT_PI / 2.0).abs() < 1e-14);
        assert_eq!(w.eval(2.0, 0), 0.0);
    }

    #[test]
    fn ascending_mirrors_descending() {
        let d = Window::descending(3.0, 0.5);
        let a = Window::ascending(3.0, 0.5);
        for i in 0..=50 {
            let t = 3.0 + i as f64 / 100.0;
            let (jd, ja) = (d.jet(t), a.jet(t));
            assert!((jd[0] + ja[0] - 1.0).abs() < 1e-15);
            for o in 1..4 {
                assert_eq!(jd[o], -ja[o]);
            }
        }
    }
}
