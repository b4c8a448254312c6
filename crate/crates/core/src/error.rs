use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("box carries zero mass")]
    ZeroMassBox,
    #[error("measure has no lattice point: every unit box is massless")]
    EmptyMeasure,
    #[error("origin is not in the support of the measure")]
    OriginNotInSupport,
    #[error("importance weight would become zero (null density at the origin)")]
    DegenerateWeight,
    #[error("density is not strictly positive at cell {0}")]
    NonpositiveDensity(usize),
    #[error("measure has atoms where a diffuse measure is required")]
    AtomicInput,
    #[error("line integral {available} is smaller than the requested mass {requested}")]
    InsufficientMass { available: f64, requested: f64 },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("sample has zero total weight or too few points")]
    DegenerateSample,
    #[error("weight must be finite and strictly positive, got {0}")]
    InvalidWeight(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a density grid is required")]
    MissingDensity,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
