//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometry that cannot describe a physical section or defect.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Material constants outside the admissible range.
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    /// Defect amplitude beyond the first-order model's demonstrated range.
    #[error("defect amplitude |gamma| = {gamma:.4} exceeds the hard cap {cap}")]
    AmplitudeCap { gamma: f64, cap: f64 },

    /// Jitter moments that no bounded shape function can realize.
    #[error("unrealizable jitter moments: {0}")]
    UnrealizableMoments(String),

    /// Reference configurations the closed-form solver does not cover
    /// (pre-curved rods, off-center ideal sections).
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// Inputs that belong to different rods or profiles.
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    /// Boundary sets that leave rigid-body modes or no dynamic freedom.
    #[error("boundary condition error: {0}")]
    Boundary(String),

    /// Mesh-extrapolation harness misuse (too few points, one mesh, ...).
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// Linear-algebra breakdown (singular system, indefinite matrix).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
