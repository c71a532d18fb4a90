//! Adaptive Dormand-Prince 4(5) integration of `g'' = q(t) g` with renormalized
//! propagation, plus quintic Hermite interpolation of the stored nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub atol: f64,
    pub rtol: f64,
    /// Upper bound on the step length.
    pub max_step: f64,
    /// Below this step length the integration is abandoned.
    pub min_step: f64,
}

impl OdeConfig {
    pub fn new(max_step: f64) -> Self {
        Self { atol: 1e-12, rtol: 1e-10, max_step, min_step: 1e-14 }
    }
}

/// A stored solution point: `g^(j)(t) = e^{log_scale} 2^{pow2} d[j]`.
///
/// Renormalization moves whole powers of two into `pow2`, so neighbouring
/// nodes rescale onto each other exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub log_scale: f64,
    #[serde(default)]
    pub pow2: i32,
    pub d: [f64; 3],
}

impl Node {
    /// Natural log of the node's scale.
    pub fn log(&self) -> f64 {
        self.log_scale + f64::from(self.pow2) * std::f64::consts::LN_2
    }
}

/// Output of a sweep: nodes ordered by increasing `t` and the largest accepted error ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub nodes: Vec<Node>,
    pub max_error_ratio: f64,
    pub steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step of size `h` (signed). Returns the 5th-order state and error estimate.
fn dp_step<Q: Fn(f64) -> f64>(q: &Q, t: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let rhs = |t: f64, y: [f64; 2]| [y[1], q(t) * y[0]];
    let mut k = [[0.0f64; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = rhs(t + C[i] * h, yi);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for c in 0..2 {
            y5[c] += h * B5[i] * k[i][c];
            err[c] += h * (B5[i] - B4[i]) * k[i][c];
        }
    }
    (y5, err)
}

/// Integrate from `t_from` to `t_to` (either direction) starting at `(g, g')`.
/// The state is renormalized by `max(|g|, |g'|)` after every accepted step.
pub fn integrate<Q: Fn(f64) -> f64>(q: Q, t_from: f64, t_to: f64, init: [f64; 2], cfg: &OdeConfig) -> Result<Sweep> {
    let dir = if t_to >= t_from { 1.0 } else { -1.0 };
    let mut t = t_from;
    let norm0 = init[0].abs().max(init[1].abs());
    let log_scale = norm0.ln();
    let mut pow2 = 0i32;
    let mut y = [init[0] / norm0, init[1] / norm0];
    let mut nodes = vec![Node { t, log_scale, pow2, d: [y[0], y[1], q(t) * y[0]] }];
    let mut h = cfg.max_step;
    let mut max_ratio: f64 = 0.0;
    let mut steps = 0usize;
    while (t_to - t) * dir > 0.0 {
        let remaining = (t_to - t).abs();
        let last = h >= remaining;
        // Split the final stretch evenly rather than leave a sliver: interpolating
        // second derivatives across a tiny interval amplifies node rounding.
        let step = if last {
            remaining
        } else if 2.0 * h > remaining {
            0.5 * remaining
        } else {
            h
        };
        // Step by the spacing the stored times actually have, so interpolation
        // between nodes sees exactly the interval that was integrated.
        let t_next = if last { t_to } else { t + dir * step };
        let (y5, err) = dp_step(&q, t, y, t_next - t);
        let ratio = (0..2)
            .map(|c| err[c].abs() / (cfg.atol + cfg.rtol * y[c].abs().max(y5[c].abs())))
            .fold(0.0, f64::max);
        if ratio <= 1.0 {
            t = t_next;
            // Exact rescaling by a power of two keeping the state in [1, 2).
            let shift = y5[0].abs().max(y5[1].abs()).log2().floor() as i32;
            let unit = 2f64.powi(-shift);
            y = [y5[0] * unit, y5[1] * unit];
            pow2 += shift;
            nodes.push(Node { t, log_scale, pow2, d: [y[0], y[1], q(t) * y[0]] });
            max_ratio = max_ratio.max(ratio);
            steps += 1;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (step * factor).min(cfg.max_step);
        if h < cfg.min_step {
            return Err(Error::OdeTolerance { estimate: ratio * cfg.atol, budget: cfg.atol });
        }
    }
    if dir < 0.0 {
        nodes.reverse();
    }
    Ok(Sweep { nodes, max_error_ratio: max_ratio, steps })
}

/// Quintic Hermite interpolation between two nodes, returned on the left node's scale.
pub fn hermite(left: &Node, right: &Node, t: f64) -> [f64; 3] {
    let h = right.t - left.t;
    let w = (right.log_scale - left.log_scale).exp() * 2f64.powi(right.pow2 - left.pow2);
    let (y0, y1) = (left.d, [right.d[0] * w, right.d[1] * w, right.d[2] * w]);
    let s = (t - left.t) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let basis = [
        [1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5, -30.0 * s2 + 60.0 * s3 - 30.0 * s4, -60.0 * s + 180.0 * s2 - 120.0 * s3],
        [s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5, 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4, -36.0 * s + 96.0 * s2 - 60.0 * s3],
        [
            0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
            0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
            0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3),
        ],
        [10.0 * s3 - 15.0 * s4 + 6.0 * s5, 30.0 * s2 - 60.0 * s3 + 30.0 * s4, 60.0 * s - 180.0 * s2 + 120.0 * s3],
        [-4.0 * s3 + 7.0 * s4 - 3.0 * s5, -12.0 * s2 + 28.0 * s3 - 15.0 * s4, -24.0 * s + 84.0 * s2 - 60.0 * s3],
        [0.5 * (s3 - 2.0 * s4 + s5), 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4), 0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3)],
    ];
    let coef = [y0[0], h * y0[1], h * h * y0[2], y1[0], h * y1[1], h * h * y1[2]];
    let mut out = [0.0; 3];
    for (c, b) in coef.iter().zip(basis.iter()) {
        out[0] += c * b[0];
        out[1] += c * b[1];
        out[2] += c * b[2];
    }
    out[1] /= h;
    out[2] /= h * h;
    out
}

/// Interpolated `(log_scale, [g, g', g''])` at `t` inside the node range.
pub fn interpolate(nodes: &[Node], t: f64) -> (f64, [f64; 3]) {
    let idx = nodes.partition_point(|n| n.t <= t);
    let i = idx.clamp(1, nodes.len() - 1) - 1;
    let (l, r) = (&nodes[i], &nodes[i + 1]);
    if t == l.t {
        return (l.log(), l.d);
    }
    if t == r.t {
        return (r.log(), r.d);
    }
    (l.log(), hermite(l, r, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |t: f64| [
            1.0 + 2.0 * t - t.powi(3) + 0.5 * t.powi(5),
            2.0 - 3.0 * t * t + 2.5 * t.powi(4),
            -6.0 * t + 10.0 * t.powi(3),
        ];
        let l = Node { t: 0.3, log_scale: 0.0, pow2: 0, d: p(0.3) };
        let r = Node { t: 0.8, log_scale: 0.0, pow2: 0, d: p(0.8) };
        for i in 0..=10 {
            let t = 0.3 + 0.05 * i as f64;
            let got = hermite(&l, &r, t);
            let want = p(t);
            for j in 0..3 {
                assert!((got[j] - want[j]).abs() < 1e-12, "{j} {t}");
            }
        }
    }

    #[test]
    fn hermite_respects_scales() {
        let l = Node { t: 0.0, log_scale: 0.0, pow2: 0, d: [1.0, 1.0, 1.0] };
        let r = Node { t: 0.1, log_scale: 0.1, pow2: 0, d: [1.0, 1.0, 1.0] };
        let mid = hermite(&l, &r, 0.05);
        assert!((mid[0] - 0.05f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_backward() {
        let cfg = OdeConfig::new(0.01);
        let sweep = integrate(|_| -1.0, 1.0, 0.0, [1f64.cos(), -1f64.sin()], &cfg).unwrap();
        let first = sweep.nodes.first().unwrap();
        assert_eq!(first.t, 0.0);
        let g = first.log().exp() * first.d[0];
        assert!((g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn growth_survives_renormalization() {
        let k = 5000.0;
        let cfg = OdeConfig::new(0.004 / k);
        let sweep = integrate(|_| k * k, 0.3, 0.0, [1.0, -k], &cfg).unwrap();
        let first = sweep.nodes.first().unwrap();
        let log_g = first.log() + first.d[0].ln();
        assert!((log_g - 0.3 * k).abs() / (0.3 * k) < 1e-10);
    }

    #[test]
    fn no_sliver_step_and_power_of_two_scales() {
        // Steps sit at the cap; a plain schedule would end 0.3, 0.3, 0.3, 0.1.
        let cfg = OdeConfig::new(0.3);
        let flat = integrate(|_| 0.0, 0.0, 1.0, [1.0, 2.0], &cfg).unwrap();
        let gaps: Vec<f64> = flat.nodes.windows(2).map(|w| w[1].t - w[0].t).collect();
        let shortest = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(shortest >= 0.15, "sliver step {shortest}");
        let sweep = integrate(|_| 400.0, 0.0, 1.0, [1.0, 20.0], &OdeConfig::new(0.01)).unwrap();
        assert!(sweep.nodes.last().unwrap().pow2 > 10);
        for n in &sweep.nodes {
            let top = n.d[0].abs().max(n.d[1].abs());
            assert!((1.0..2.0).contains(&top) || n.pow2 == 0);
            assert_eq!(n.log_scale, sweep.nodes[0].log_scale);
        }
    }
}
