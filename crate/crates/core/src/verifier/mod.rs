//! Measured pass/fail checks over built constructions.

mod decay;
mod drift;
mod elliptic;
mod head;
mod holder;
mod report;
mod sampling;
mod stats;
mod tolerances;

pub use decay::{verify_decay, verify_parabolic_decay, ClosedFormRow, DecayFit, DecayModel, TRANSIENT_BLOCKS};
pub use drift::{verify_drift_bounds, verify_parabolic_junctions, verify_parabolic_residual, DriftBlock, DriftReport};
pub use elliptic::{
    verify_c1, verify_ellipticity, verify_fd_derivatives, verify_fd_order, verify_junctions, verify_residual, C1Report,
    EllipticityReport, FdOrderReport, FdReport, JunctionReport, JunctionRow, OrderSample, ResidualReport, SegmentStats,
    SpectrumRow, RESOLUTION_FACTOR,
};
pub use head::{verify_symmetrization, HeadReport};
pub use holder::{verify_extension_zero, verify_holder, ExtensionReport, HolderBlock, HolderReport};
pub use report::{verify, Check, Comparison, Margin, Suite, VerificationReport, VerifySettings, REPORT_VERSION};
pub use sampling::{rng, QuasiSampler};
pub use stats::{Fit, Stats};
pub use tolerances::Tolerances;
