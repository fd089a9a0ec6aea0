use crate::iterate::IterationTrace;

/// Errors shared by every module of the crate.
///
/// Each variant corresponds to exactly one documented failure condition and
/// maps to its own process exit code in the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The characteristic cubic has a repeated root or a complex pair, so the
    /// piecewise-exponential kernel construction does not apply.
    #[error("three distinct real roots required: {0}")]
    DistinctRealRootsRequired(String),

    /// The delayed characteristic has no pair of positive real roots on the
    /// scan interval. Signals a wave speed below the minimal speed for the
    /// chosen diffusion coefficient.
    #[error("no positive root pair: {0}")]
    NoPositivePair(String),

    /// The offset eps does not fit in the window (0, eta2 - eta1).
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),

    /// The subsolution plateau d1 fell outside (0, 1).
    #[error("invalid subsolution plateau: {0}")]
    InvalidPlateau(String),

    /// Two profiles do not share the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The grid has too few points for the requested stencil.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// Profile values left the admissible range [0, K] beyond tolerance.
    #[error("range violation: {0}")]
    RangeViolation(String),

    /// A declared kink location lies outside the open computational domain.
    #[error("kink outside domain: {0}")]
    KinkOutsideDomain(String),

    /// The weight exponent mu is at or above the kernel decay rate, so the
    /// weighted kernel integral diverges.
    #[error("mu too large: {0}")]
    MuTooLarge(String),

    /// A monotone-iteration step rose above its predecessor or dipped below
    /// the lower envelope by more than the ordering tolerance.
    #[error("ordering violated: {0}")]
    OrderingViolated(String),

    /// The fixed-point iteration hit the iteration cap before the gap
    /// tolerance was met. The trace is returned for diagnosis.
    #[error("max iterations exceeded after {} steps", .0.rows.len())]
    MaxIterExceeded(Box<IterationTrace>),

    /// The delay scan cannot start because the r = 0 configuration already
    /// fails construction or verification.
    #[error("base case r = 0 fails: {0}")]
    BaseCaseFails(String),

    /// The tridiagonal solve hit a vanishing pivot (cannot occur for the
    /// sign conventions used; kept as a diagnostic).
    #[error("singular tridiagonal system: {0}")]
    SingularSystem(String),

    /// The profile grid does not cover the PDE domain plus delay history.
    #[error("profile domain too small: {0}")]
    DomainTooSmall(String),

    /// A PDE slice does not cross the half level exactly once.
    #[error("non-monotone front: {0}")]
    NonMonotoneFront(String),

    /// A type invariant on input parameters was violated.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
