//! Every pass/fail threshold in one record.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual for the harmonic and PML constructions.
    pub residual: f64,
    /// Relative residual when an integrated head is present.
    pub eigen_residual: f64,
    /// Relative residual of the parabolic chain.
    pub parabolic_residual: f64,
    /// Relative one-sided defect of `u` and its derivatives up to order two.
    pub junction_u: f64,
    /// Absolute one-sided defect of `A` and `A_t`.
    pub junction_a: f64,
    /// Drift continuity defect.
    pub drift_defect: f64,
    /// Relative analytic-vs-FD derivative mismatch.
    pub fd_relative: f64,
    /// FD step in units of `1/k`.
    pub fd_step: f64,
    /// Accepted band for the FD residual ratio under step halving.
    pub fd_ratio_min: f64,
    pub fd_ratio_max: f64,
    /// Largest `|f'(0)| / (k |f(0)|)` at the symmetric point.
    pub turning_point: f64,
    /// Relative mismatch with the exponential past the head.
    pub head_tail: f64,
    /// Relative logmag agreement of recursions with their closed forms.
    pub closed_form: f64,
    /// Fraction by which the decay slope may fall short of its target.
    pub slope_fraction: f64,
    /// Coefficient of determination for the Gaussian and Hölder-chain fits.
    pub gaussian_r2: f64,
    pub holder_r2: f64,
    /// Factor on the interpolation bound for the sampled Hölder seminorm.
    pub holder_factor: f64,
    /// Largest `|A - Id|` in the first Hölder block.
    pub holder_margin: f64,
    /// Largest logmag of the solution data at the end of a finite chain.
    pub extension_logmag: f64,
    /// Fit quality required for polynomial growth of `|dA|`.
    pub growth_r2: f64,
    /// Slack on logmags when checking monotone decay.
    pub monotone: f64,
    /// Relative slack on bounds that are attained exactly.
    pub attained_bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            eigen_residual: 1e-8,
            parabolic_residual: 1e-9,
            junction_u: 1e-8,
            junction_a: 1e-8,
            drift_defect: 1e-10,
            fd_relative: 1e-5,
            fd_step: 1e-6,
            fd_ratio_min: 3.0,
            fd_ratio_max: 5.0,
            turning_point: 1e-8,
            head_tail: 1e-8,
            closed_form: 1e-12,
            slope_fraction: 0.1,
            gaussian_r2: 0.999,
            holder_r2: 0.99,
            holder_factor: 2.0,
            holder_margin: 1e-2,
            extension_logmag: -69.0,
            growth_r2: 0.9,
            monotone: 1e-12,
            attained_bound: 1e-12,
        }
    }
}
