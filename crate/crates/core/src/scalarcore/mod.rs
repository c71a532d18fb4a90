//! Foundational numerics: the smooth step, scaled windows and log-domain scalars.

mod logscalar;
mod theta;
mod window;

pub use logscalar::LogScalar;
pub use theta::{theta, theta_deriv, theta_increment, theta_jet, GUARD_BAND, SQRT_PI};
pub use window::{Direction, Window};
