use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid grid specification: {0}")]
    InvalidGrid(String),

    #[error("direction ({azimuth_deg}, {elevation_deg}) is not on the lattice; nearest lattice point is ({nearest_azimuth_deg}, {nearest_elevation_deg})")]
    OffLattice {
        azimuth_deg: f64,
        elevation_deg: f64,
        nearest_azimuth_deg: f64,
        nearest_elevation_deg: f64,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    #[error("no tabulated fit for {0}")]
    OutOfTable(String),

    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
