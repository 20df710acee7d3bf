//! Discrete quantization on circles of the unit sphere.
//!
//! This crate computes optimal discrete quantizers, and the exact mean-square
//! geodesic quantization errors they achieve, for uniform point sets supported
//! on great and small circles of the unit sphere. Three configurations are
//! covered:
//!
//! - **equator**: `N` equally spaced points on the great circle at latitude 0;
//! - **one small circle**: `N` equally spaced points at latitude `phi0`;
//! - **two small circles**: antipodally symmetric parallels at latitudes
//!   `±phi0`, each carrying `M` equally spaced points.
//!
//! On any of these supports, an optimal partition into `n` cells consists of
//! contiguous arcs of near-equal size represented by their azimuthal
//! midpoints. The closed forms built on that structure live in [`models`];
//! the one-dimensional block machinery behind them lives in [`engine`]; the
//! geodesic kernels live in [`geometry`].
//!
//! Every closed form is checked against independent brute-force verifiers in
//! [`oracle`]: an exact dynamic program over contiguous cyclic partitions, an
//! exhaustive set-partition search on tiny instances, and a Lloyd-style
//! fixed-point iteration. [`verify`] bundles those cross-checks, plus the
//! geometric identities and bounds, into a runnable suite.

pub mod engine;
pub mod geometry;
pub mod models;
pub mod oracle;
pub mod report;
pub mod verify;

pub use engine::{BlockLayout, BlockStat, GridSpec};
pub use geometry::{AngularOffset, Latitude, LatitudeKernel, SpherePoint};
pub use models::{Codebook, CodebookEntry, CircleTag, DistortionReport, ModelKind, ModelSpec};
pub use oracle::{OracleMethod, OracleResult, PerturbationReport};
pub use report::{CurveSample, Metadata, OutputDocument, Payload};

/// Errors surfaced by the quantization toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An exact integer intermediate exceeded the available width.
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// An exhaustive search was asked for an instance beyond its budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    /// Failure writing to an output sink.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Failure serializing a document.
    #[error("serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
