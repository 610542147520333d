use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: achieved error estimate {estimate:e} above tolerance")]
    Quadrature { estimate: f64 },

    /// Point too close to the light cone for a trustworthy Bessel evaluation.
    #[error("masked near light cone: |zeta| = {zeta_abs:e}")]
    Masked { zeta_abs: f64 },

    /// Point outside the right Rindler wedge.
    #[error("outside right Rindler wedge: T = {t}, Z = {z}")]
    Wedge { t: f64, z: f64 },

    /// Series or table range exceeded.
    #[error("range error: {0}")]
    Range(String),

    /// Rapidity-line quadrature requested with no exponential damping.
    #[error("no damping: rapidity quadrature requires abar > 0")]
    NoDamping,

    /// Forward map is not monotone on the bracket, inverse is multivalued.
    #[error("multivalued inverse on bracket [{lo}, {hi}]")]
    MultivaluedInverse { lo: f64, hi: f64 },

    /// Matrix numerically singular.
    #[error("singular matrix: |det| = {det_abs:e}")]
    Singular { det_abs: f64 },

    /// Grid or sweep had no usable (unmasked) cells.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// Configuration / usage problem (maps to CLI exit code 2).
    #[error("usage error: {0}")]
    Usage(String),

    /// I/O wrapper for CLI output paths.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
