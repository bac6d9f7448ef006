use thiserror::Error;

/// Failures raised anywhere in the construction or verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resonant part of the right-hand side does not vanish (sup norm {resonant_norm:.3e})")]
    ResonantRhs { resonant_norm: f64 },

    #[error("degenerate speed: |r'| = {speed:.3e} at s = {s:.6}")]
    DegenerateSpeed { s: f64, speed: f64 },

    #[error("curve is not strictly convex: {0}")]
    ConvexityLoss(String),

    #[error("resolution limit reached: {0}")]
    Resolution(String),

    #[error("singular chord between s = {s:.6} and s' = {s_next:.6}")]
    SingularChord { s: f64, s_next: f64 },

    #[error("degenerate chord family: {0}")]
    DegenerateChord(String),

    #[error("billiard step failed at s = {s:.6}, angle = {angle:.3e}: {reason}")]
    GeometricFailure { s: f64, angle: f64, reason: String },

    #[error("jet extraction failed: {0}")]
    JetExtraction(String),

    #[error("normal form construction failed: {0}")]
    NormalForm(String),

    #[error("initial circle map failed at theta = {theta:.6}: {reason}")]
    Initializer { theta: f64, reason: String },

    #[error("KAM step failed: {0}")]
    StepFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate envelope: {0}")]
    DegenerateEnvelope(String),

    #[error("invalid boundary file: field `{field}`: {reason}")]
    InvalidBoundary { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
