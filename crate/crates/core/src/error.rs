//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Register sizes outside 1..=8 blow past the dense-kernel budget.
    #[error("invalid register layout: n_bits = {n_bits}, must be between 1 and 8")]
    InvalidLayout { n_bits: u32 },

    #[error("layout mismatch: {left} vs {right} bits per register")]
    LayoutMismatch { left: u32, right: u32 },

    #[error("invalid measurement spec: {0}")]
    InvalidMeasurementSpec(String),

    /// Projection onto a (numerically) null subspace.
    #[error("impossible outcome: projection probability {probability:.3e} below threshold")]
    ImpossibleOutcome { probability: f64 },

    #[error("measurement spec carries no forced outcome")]
    MissingForcedOutcome,

    #[error("invalid drawer count {n}: must be a power of two with 2..=256 drawers")]
    InvalidDrawerCount { n: u64 },

    #[error("invalid bitstring {input:?}: expected {expected} binary digits")]
    InvalidBitstring { input: String, expected: u32 },

    #[error("invalid sharing: {0}")]
    InvalidSharing(String),

    #[error(
        "half-info strategy contract violated: known subset does not contain setting {setting}"
    )]
    StrategyContract { setting: u64 },

    #[error("search phase calibration failed: success probability {success} below 1 - 1e-9")]
    CertaintyNotReached { success: f64 },

    #[error("identity check {identity:?} failed: fidelity {fidelity}")]
    IdentityCheckFailed { identity: String, fidelity: f64 },

    #[error(
        "separation program must commute with both computational projectors; step {step} does not"
    )]
    NonCommutingSeparation { step: String },

    #[error("setting {setting} out of range for {n_drawers} drawers")]
    InvalidSetting { setting: u64, n_drawers: u64 },

    #[error("trace has no state labeled {label}")]
    MissingTraceState { label: &'static str },

    #[error("record parse error: {0}")]
    Parse(String),
}
