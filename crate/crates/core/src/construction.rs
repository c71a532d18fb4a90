//! Build parameters for every construction and the versioned file envelope.
//!
//! A construction file is JSON of the form
//!
//! ```text
//! { "format": "superdecay-construction", "version": 1,
//!   "params": { ... },
//!   "construction": { "family": "elliptic" | "parabolic", "data": { ... } } }
//! ```
//!
//! `data` is the full block and segment table. Floats are written with
//! round-trip precision and log-domain scalars as `[sign, logmag]`, so a loaded
//! construction evaluates bit-identically to the one that was saved.

use serde::{Deserialize, Serialize};

use crate::assembly::{
    eigen_full_cylinder, eigen_half_cylinder, gaussian_chain, harmonic_half_cylinder, plis_miller_chain, PackingMode,
    Timeline, TimelineKind, FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::parabolic::{parabolic_chain, ParabolicChain};

/// Tag identifying construction files.
pub const FORMAT_NAME: &str = "superdecay-construction";

/// Everything needed to build one construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildParams {
    pub kind: TimelineKind,
    /// Frequency offset; its meaning depends on the kind (see [`BuildParams::first_frequency`]).
    pub n0: u32,
    /// Number of blocks `N`.
    pub blocks: usize,
    /// Eigenvalue for the eigenfunction kinds.
    pub mu: f64,
    /// Hölder exponent for the Plis-Miller chain.
    pub alpha: f64,
    pub mode: PackingMode,
    /// Overrides `n0` through the first frequency `k_1`, which must lie on the kind's schedule.
    pub k_first: Option<f64>,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self { kind: TimelineKind::Harmonic, n0: 12, blocks: 3, mu: 1.0, alpha: 1.0 / 3.0, mode: PackingMode::Strict, k_first: None }
    }
}

impl BuildParams {
    /// `k_1` of the kind's frequency schedule for a given `n0`.
    pub fn first_frequency(kind: TimelineKind, n0: u32, alpha: f64) -> f64 {
        match kind {
            TimelineKind::Harmonic | TimelineKind::EigenHalf | TimelineKind::EigenFull => 2f64.powi(n0 as i32),
            TimelineKind::PlisMiller => (1.0 + n0 as f64).powf(1.0 / alpha),
            TimelineKind::Gaussian => 1.0 + n0 as f64,
            TimelineKind::Parabolic => 1.0,
        }
    }

    /// `n0` after applying the `k_first` override.
    pub fn resolved_n0(&self) -> Result<u32> {
        let Some(k) = self.k_first else { return Ok(self.n0) };
        let raw = match self.kind {
            TimelineKind::Harmonic | TimelineKind::EigenHalf | TimelineKind::EigenFull => k.log2(),
            TimelineKind::PlisMiller => k.powf(self.alpha) - 1.0,
            TimelineKind::Gaussian => k - 1.0,
            TimelineKind::Parabolic => {
                return if k == 1.0 {
                    Ok(self.n0)
                } else {
                    Err(Error::ParameterDomain(format!("the parabolic chain has k_n = n, so k_1 = 1; got {k}")))
                }
            }
        };
        let n0 = raw.round();
        let back = Self::first_frequency(self.kind, n0.max(0.0) as u32, self.alpha);
        if !(n0 >= 0.0 && n0 <= u32::MAX as f64) || (back - k).abs() > 1e-9 * k {
            return Err(Error::ParameterDomain(format!(
                "k_1 = {k} is not on the {} frequency schedule",
                self.kind.name()
            )));
        }
        Ok(n0 as u32)
    }

    pub fn build(&self) -> Result<Construction> {
        let n0 = self.resolved_n0()?;
        let (n, mode) = (self.blocks, self.mode);
        Ok(match self.kind {
            TimelineKind::Harmonic => Construction::Elliptic(harmonic_half_cylinder(n0, n, mode)?),
            TimelineKind::EigenHalf => Construction::Elliptic(eigen_half_cylinder(self.mu, n0, n, mode)?),
            TimelineKind::EigenFull => Construction::Elliptic(eigen_full_cylinder(self.mu, n0, n, mode)?),
            TimelineKind::PlisMiller => Construction::Elliptic(plis_miller_chain(self.alpha, n0, n)?),
            TimelineKind::Gaussian => Construction::Elliptic(gaussian_chain(n0, n)?),
            TimelineKind::Parabolic => Construction::Parabolic(parabolic_chain(n)?),
        })
    }
}

/// A built construction of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "data", rename_all = "snake_case")]
pub enum Construction {
    Elliptic(Timeline),
    Parabolic(ParabolicChain),
}

impl Construction {
    pub fn kind(&self) -> TimelineKind {
        match self {
            Construction::Elliptic(t) => t.kind,
            Construction::Parabolic(c) => c.kind,
        }
    }

    pub fn block_count(&self) -> usize {
        match self {
            Construction::Elliptic(t) => t.blocks.len(),
            Construction::Parabolic(c) => c.blocks.len(),
        }
    }

    /// `(k_n, k'_n, ln C_n)` per block, for summaries.
    pub fn block_table(&self) -> Vec<(f64, f64, f64)> {
        match self {
            Construction::Elliptic(t) => t.blocks.iter().map(|b| (b.k, b.kprime, b.entry.logmag())).collect(),
            Construction::Parabolic(c) => c.blocks.iter().map(|b| (b.k, b.kprime, b.entry.logmag())).collect(),
        }
    }

    pub fn t_range(&self) -> (f64, f64) {
        match self {
            Construction::Elliptic(t) => (t.t_start(), t.t_end()),
            Construction::Parabolic(c) => (c.t_start(), c.t_end()),
        }
    }
}

/// A construction file as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionFile {
    pub format: String,
    pub version: u32,
    pub params: BuildParams,
    pub construction: Construction,
}

impl ConstructionFile {
    pub fn new(params: BuildParams, construction: Construction) -> Self {
        Self { format: FORMAT_NAME.into(), version: FORMAT_VERSION, params, construction }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Parse and check the format tag and version.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.format != FORMAT_NAME {
            return Err(Error::Format(format!("expected format {FORMAT_NAME:?}, found {:?}", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {} (this build reads {FORMAT_VERSION})", file.version)));
        }
        Ok(file)
    }
}
