//! The canonical smooth step and its closed-form derivatives.
//!
//! With `x = tan(pi (t - 1/2))` the step is `theta(t) = erfc(x) / 2`, which
//! equals one for `t <= 0`, zero for `t >= 1` and falls monotonically between.
//! Every derivative is `exp(-x^2)` times a polynomial in `x`, so the flat
//! extension outside `[0, 1]` is smooth.

use std::f64::consts::PI;

/// Half-width of the band next to 0 and 1 where exact limits are returned.
pub const GUARD_BAND: f64 = 1e-9;

/// `sqrt(pi)`, the supremum of `|theta'|`, attained at `t = 1/2`.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

#[inline]
fn phase(t: f64) -> f64 {
    (PI * (t - 0.5)).tan()
}

/// The step itself.
pub fn theta(t: f64) -> f64 {
    if t <= GUARD_BAND {
        1.0
    } else if t >= 1.0 - GUARD_BAND {
        0.0
    } else {
        0.5 * libm::erfc(phase(t))
    }
}

/// Closed-form derivative of order 1, 2 or 3; zero outside the open unit interval.
///
/// # Panics
/// On an order outside `1..=3`.
pub fn theta_deriv(t: f64, order: u8) -> f64 {
    assert!((1..=3).contains(&order), "theta derivative order {order} not supported");
    if t <= GUARD_BAND || t >= 1.0 - GUARD_BAND {
        return 0.0;
    }
    let x = phase(t);
    let x2 = x * x;
    let gauss = (-x2).exp();
    if gauss == 0.0 {
        return 0.0;
    }
    let sec2 = 1.0 + x2;
    match order {
        1 => -SQRT_PI * gauss * sec2,
        2 => 2.0 * PI * SQRT_PI * x * x2 * sec2 * gauss,
        _ => 2.0 * PI * PI * SQRT_PI * sec2 * x2 * (3.0 + 3.0 * x2 - 2.0 * x2 * x2) * gauss,
    }
}

/// Steps longer than this are differenced directly.
const SHORT_STEP: f64 = 1e-3;

/// Upper limit on quadrature panels before falling back to the plain difference.
const MAX_PANELS: f64 = 256.0;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] =
    [0.568_888_888_888_889, 0.478_628_670_499_366, 0.478_628_670_499_366, 0.236_926_885_056_189, 0.236_926_885_056_189];

/// `theta(t + dt) - theta(t)`, accurate relative to itself for short steps.
///
/// The plain difference of two step values loses every digit below the ulp of
/// the values; here the phase gap comes from `tan a - tan b = sin(a - b) / (cos a cos b)`
/// and the gap in `erfc` from quadrature of `exp(-s^2)` across it.
pub fn theta_increment(t: f64, dt: f64) -> f64 {
    let t1 = t + dt;
    let inside = |v: f64| v > GUARD_BAND && v < 1.0 - GUARD_BAND;
    if dt.abs() > SHORT_STEP || !inside(t) || !inside(t1) {
        return theta(t1) - theta(t);
    }
    let (a0, a1) = (PI * (t - 0.5), PI * (t1 - 0.5));
    let x0 = a0.tan();
    let dx = (PI * dt).sin() / (a0.cos() * a1.cos());
    let gauss = (-x0 * x0).exp();
    if gauss == 0.0 {
        return 0.0;
    }
    // Panels short enough that the exponent moves by at most 0.05 across each.
    let spread = dx.abs() * (2.0 * x0.abs() + dx.abs());
    let panels = (spread / 0.05).ceil().clamp(1.0, MAX_PANELS);
    if spread > 0.05 * MAX_PANELS {
        return theta(t1) - theta(t);
    }
    let width = dx / panels;
    let half = 0.5 * width;
    let mut sum = 0.0;
    for p in 0..panels as usize {
        let left = p as f64 * width;
        for (&xi, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let s = left + half * (1.0 + xi);
            sum += w * (-(2.0 * x0 + s) * s).exp();
        }
    }
    -gauss * half * sum / SQRT_PI
}

/// Value and the first three derivatives in one call.
pub fn theta_jet(t: f64) -> [f64; 4] {
    if t <= GUARD_BAND {
        return [1.0, 0.0, 0.0, 0.0];
    }
    if t >= 1.0 - GUARD_BAND {
        return [0.0; 4];
    }
    let x = phase(t);
    let x2 = x * x;
    let gauss = (-x2).exp();
    let sec2 = 1.0 + x2;
    [
        0.5 * libm::erfc(x),
        -SQRT_PI * gauss * sec2,
        2.0 * PI * SQRT_PI * x * x2 * sec2 * gauss,
        2.0 * PI * PI * SQRT_PI * sec2 * x2 * (3.0 + 3.0 * x2 - 2.0 * x2 * x2) * gauss,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_matches_plain_difference_for_moderate_steps() {
        for &t in &[0.05, 0.3, 0.5, 0.77, 0.95] {
            for &dt in &[1e-4, -3e-4, 8e-4] {
                let plain = theta(t + dt) - theta(t);
                let inc = theta_increment(t, dt);
                // The plain difference itself carries an error of a few ulps of theta.
                let slack = 1e-12 * plain.abs() + 4.0 * f64::EPSILON * theta(t).max(theta(t + dt));
                assert!((inc - plain).abs() <= slack, "t={t} dt={dt}: {inc} vs {plain}");
            }
        }
    }

    #[test]
    fn increment_is_first_order_in_the_step() {
        // Independent oracle: theta' times dt, corrected by the quadratic Taylor term.
        for &t in &[0.1, 0.4, 0.5, 0.83] {
            let dt = 1e-11;
            let taylor = theta_deriv(t, 1) * dt + 0.5 * theta_deriv(t, 2) * dt * dt;
            let inc = theta_increment(t, dt);
            assert!((inc - taylor).abs() <= 1e-12 * taylor.abs(), "t={t}: {inc} vs {taylor}");
        }
    }

    #[test]
    fn limits_and_midpoint() {
        assert_eq!(theta(-1.0), 1.0);
        assert_eq!(theta(2.0), 0.0);
        assert!((theta(0.5) - 0.5).abs() < 1e-15);
        assert!((theta_deriv(0.5, 1) + SQRT_PI).abs() < 1e-14);
        assert_eq!(theta_deriv(0.0, 1), 0.0);
        assert_eq!(theta_deriv(1.0, 3), 0.0);
    }

    #[test]
    fn jet_matches_individual_calls() {
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let jet = theta_jet(t);
            assert_eq!(jet[0], theta(t));
            for order in 1..=3u8 {
                assert_eq!(jet[order as usize], theta_deriv(t, order));
            }
        }
    }
}
