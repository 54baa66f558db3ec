use thiserror::Error;

/// Every failure mode of the library.
///
/// Variants are grouped by the module that raises them. [`Error::exit_class`]
/// maps them onto the CLI's exit-code classes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // linear algebra
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("eigenvalues not simple: separation {separation:e} below {threshold:e}")]
    MultipleRoots { separation: f64, threshold: f64 },
    #[error("eigenvalue ({re}, {im}) lies outside the function's domain")]
    DomainViolation { re: f64, im: f64 },
    #[error("integration contour leaves the function's domain")]
    ContourLeavesDomain,
    #[error("matrix function result is not real: imaginary residue {0:e}")]
    NotReal(f64),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    // distributions
    #[error("exponential terms are not closed under conjugation: {0}")]
    ConjugationViolation(String),
    #[error("invalid matrix-exponential representation: {0}")]
    InvalidRepresentation(String),
    #[error("cannot sample a defective distribution (total mass {0})")]
    DefectiveSample(f64),
    #[error("horizon is not phase-type: {0}")]
    NotPhaseType(String),

    // models
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument on the branch cut of the Laplace exponent")]
    BranchCut,
    #[error("root continuation left the right half-plane")]
    LeftHalfPlane,
    #[error("matrix equation residual {residual:e} exceeds {threshold:e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },

    // special functions
    #[error("series cancellation {0:e} exceeds the accuracy envelope")]
    CancellationWarning(f64),

    // scale functions and identities
    #[error("roots of psi(z) = q are not distinct")]
    ConfluentRoots,
    #[error("derivative is singular at zero")]
    SingularAtZero,
    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("scale matrix is singular")]
    SingularScaleMatrix,
    #[error("eigenvalue collision makes a resolvent singular")]
    EigenvalueCollision,
    #[error("tilt parameter outside the admissible domain: {0}")]
    BetaDomain(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    // simulation
    #[error("{capped} of {total} paths hit the horizon cap")]
    HorizonCapExceeded { capped: usize, total: usize },
    #[error("not enough first-passage transitions observed ({0})")]
    InsufficientPassages(usize),

    // io
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("unknown operation '{0}'")]
    UnknownOperation(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Bad input or a domain violation.
    Input,
    /// The numerics failed on valid input.
    Numeric,
}

impl Error {
    pub fn exit_class(&self) -> ExitClass {
        use Error::*;
        match self {
            DimensionMismatch { .. }
            | DomainViolation { .. }
            | ContourLeavesDomain
            | ConjugationViolation(_)
            | InvalidRepresentation(_)
            | DefectiveSample(_)
            | NotPhaseType(_)
            | InvalidParameter(_)
            | BranchCut
            | BetaDomain(_)
            | Parse { .. }
            | UnknownOperation(_)
            | Io(_) => ExitClass::Input,
            _ => ExitClass::Numeric,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
