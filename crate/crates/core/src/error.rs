use thiserror::Error;

/// Errors produced while building fractal skeletons or evaluating forms on them.
#[derive(Debug, Error)]
pub enum FractalError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid similitude: {0}")]
    InvalidSimilitude(String),

    #[error("condition {condition} violated: {detail}")]
    ConditionViolation { condition: u8, detail: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("interior block of the Laplacian is not positive definite")]
    SingularInterior,

    #[error("renormalization did not converge after {iterations} iterations (last gap {last_gap:e})")]
    NoConvergence {
        iterations: usize,
        last_gap: f64,
        trace: Vec<(f64, f64)>,
    },

    #[error("approximation level {level} does not resolve coefficient index {m}")]
    ResolutionTooCoarse { m: usize, level: usize },

    #[error("level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("level {requested} exceeds the built maximum {max}")]
    LevelOverflow { requested: usize, max: usize },

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("inconsistent harmonic extension at vertex {vertex} (difference {difference:e})")]
    InconsistentExtension { vertex: usize, difference: f64 },

    #[error("degenerate structure: {0}")]
    DegenerateStructure(String),

    #[error("unsupported dimension {0}; only planar systems can be rendered")]
    UnsupportedDimension(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("function corpus is empty")]
    EmptyCorpus,
}

impl FractalError {
    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FractalError::SingularInterior
                | FractalError::NoConvergence { .. }
                | FractalError::InconsistentExtension { .. }
                | FractalError::DegenerateStructure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, FractalError>;
