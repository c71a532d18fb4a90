//! Explicit constructions of double-exponentially decaying solutions to
//! divergence-form elliptic and parabolic equations on `T^2 x R`, with the
//! numerical checks that certify them at desk scale.

pub mod construction;
pub mod error;
pub mod parabolic;
pub mod planarlemma;
pub mod scalarcore;
pub mod assembly;
pub mod segments;
pub mod verifier;

pub use construction::{BuildParams, Construction, ConstructionFile};
pub use error::{Error, Result};
pub use scalarcore::LogScalar;
pub use assembly::{PackingMode, Side, Timeline, TimelineKind};
pub use parabolic::ParabolicChain;
pub use verifier::{verify, Suite, Tolerances, VerificationReport, VerifySettings};
