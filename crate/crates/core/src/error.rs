use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Numeric payloads are carried as `f64`
/// regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} is below the minimum {min}")]
    DimensionTooSmall { dim: usize, min: usize },
    #[error("vector norm deviates from 1 by {deviation:e}")]
    NotNormalized { deviation: f64 },
    #[error("vector is zero or not finite")]
    DegenerateVector,
    #[error("not a rank-one projection: {0}")]
    InvalidProjection(String),
    #[error("not a density operator: {0}")]
    InvalidDensity(String),
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("tolerance `{name}` must be finite and strictly positive")]
    InvalidTolerance { name: &'static str },
    #[error("sample design is rank deficient (smallest singular value {sigma_min:e})")]
    DesignDeficient { sigma_min: f64 },
    #[error("fitted operator has eigenvalue {eigen_floor:e}; samples are not a frame function")]
    NegativeSpectrum { eigen_floor: f64 },
    #[error("inconsistent samples: residual {residual:e}")]
    InconsistentSamples { residual: f64 },
    #[error("fitted trace {trace} differs from 1; samples are not a frame function")]
    TraceDeficit { trace: f64 },
    #[error("antilinearity witness is ambiguous")]
    AmbiguousWitness,
    #[error("map does not preserve transition probabilities (deviation {deviation:e})")]
    NotTransitionPreserving { deviation: f64 },
    #[error("verification failed: max deviation {deviation:e}")]
    VerificationFailed { deviation: f64 },
    #[error("map does not preserve orthogonality (max transition {max_transition:e})")]
    OrthogonalityViolated { max_transition: f64 },
    #[error("image family is not a COSP")]
    ImageNotCosp,
    #[error("block leakage {energy:e} exceeds tolerance")]
    Leakage { energy: f64 },
    #[error("block operator is not diagonal (off-diagonal mass {mass:e})")]
    NonDiagonalBlock { mass: f64 },
    #[error("blocks mix unitary and antiunitary operators")]
    MixedLinearity,
    #[error("block phases disagree at index {index} (gap {gap:e})")]
    OverlapPhaseMismatch { index: usize, gap: f64 },
    #[error("index {0} is not covered by any block")]
    UncoveredIndex(usize),
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("projection lies {distance:e} from every tabulated input (radius {radius:e})")]
    TableMiss { distance: f64, radius: f64 },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unsupported schema version {0}")]
    UnsupportedSchema(u64),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable machine-readable code, used in report documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DimensionTooSmall { .. } => "dimension-too-small",
            Error::NotNormalized { .. } => "not-normalized",
            Error::DegenerateVector => "degenerate-vector",
            Error::InvalidProjection(_) => "invalid-projection",
            Error::InvalidDensity(_) => "invalid-density",
            Error::NotUnitary { .. } => "not-unitary",
            Error::InvalidTolerance { .. } => "invalid-tolerance",
            Error::DesignDeficient { .. } => "design-deficient",
            Error::NegativeSpectrum { .. } => "negative-spectrum",
            Error::InconsistentSamples { .. } => "inconsistent-samples",
            Error::TraceDeficit { .. } => "trace-deficit",
            Error::AmbiguousWitness => "ambiguous-witness",
            Error::NotTransitionPreserving { .. } => "not-transition-preserving",
            Error::VerificationFailed { .. } => "verification-failed",
            Error::OrthogonalityViolated { .. } => "orthogonality-violated",
            Error::ImageNotCosp => "image-not-cosp",
            Error::Leakage { .. } => "block-leakage",
            Error::NonDiagonalBlock { .. } => "non-diagonal-block",
            Error::MixedLinearity => "mixed-linearity",
            Error::OverlapPhaseMismatch { .. } => "overlap-phase-mismatch",
            Error::UncoveredIndex(_) => "uncovered-index",
            Error::InvalidBlock(_) => "invalid-block",
            Error::TableMiss { .. } => "table-miss",
            Error::UnknownGenerator(_) => "unknown-generator",
            Error::Malformed(_) => "malformed-syntax",
            Error::UnsupportedSchema(_) => "unsupported-schema",
            Error::Schema(_) => "schema-violation",
            Error::InvariantViolation(_) => "invariant-violation",
            Error::Numerical(_) => "numerical-failure",
        }
    }

    /// True for failures that reflect a bug or breakdown in the numerics
    /// rather than a property of the input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    /// True for document-level failures (syntax, schema, load-time invariants).
    pub fn is_document(&self) -> bool {
        matches!(
            self,
            Error::Malformed(_)
                | Error::UnsupportedSchema(_)
                | Error::Schema(_)
                | Error::InvariantViolation(_)
                | Error::UnknownGenerator(_)
        )
    }
}
