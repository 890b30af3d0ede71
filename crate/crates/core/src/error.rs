use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input matrix contains NaN or infinite entries.
    #[error("matrix contains non-finite entries")]
    NonFinite,
    /// The iterative eigensolver did not converge.
    #[error("eigendecomposition failed to converge")]
    ConvergenceFailure,
    /// The smallest eigenvalue is not simple enough for derivative formulas.
    #[error("smallest eigenvalue is not simple (gap {gap:.3e})")]
    NotSimple { gap: f64 },
    /// KKT radicand vanished: the gradient and the eigenvalue are both
    /// (numerically) zero, so the update rule is undefined.
    #[error("degenerate stationary point (lambda {lambda:.3e}, gradient norm {grad_norm:.3e})")]
    Degenerate { lambda: f64, grad_norm: f64 },
    /// A zero gradient has no well-defined orthogonal complement.
    #[error("zero gradient")]
    ZeroGradient,
    /// The starting point violates the eigenvalue constraint.
    #[error("infeasible start: lambda_min = {lambda:.6e} exceeds tolerance {tol:.1e}")]
    InfeasibleStart { lambda: f64, tol: f64 },
    /// Not enough iterates to compute the requested trace statistics.
    #[error("insufficient trace: {len} usable iterates, requested tail {tail}")]
    InsufficientTrace { len: usize, tail: usize },
    /// No grid point lies inside the pseudospectrum.
    #[error("no grid point lies inside the epsilon-pseudospectrum")]
    EmptyRegion,
    /// Malformed argument (dimensions, tolerances, grid spec, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
