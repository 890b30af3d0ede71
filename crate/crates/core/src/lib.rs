//! Maximization of a linear objective subject to a smallest-eigenvalue
//! constraint on an analytic Hermitian matrix family.
//!
//! The solver replaces the eigenvalue constraint with a quadratic support
//! function built from the eigenvalue, its gradient, and a global curvature
//! bound, then takes the closed-form KKT step of the resulting convex
//! subproblem. Builders for the epsilon-pseudospectral abscissa and radius
//! problems, curvature-bound machinery, convergence-rate diagnostics, and a
//! brute-force grid oracle round out the library.

pub mod eigderiv;
pub mod error;
pub mod gammabound;
pub mod matfun;
pub mod oracle;
pub mod pseudospectra;
pub mod ratediag;
pub mod sample;
pub mod solver;

pub use error::{Error, Result};
pub use matfun::{hermitian_eig, lambda_min, spectral_norm, CMatrix, CVector, EigenPair, MatrixFamily};
pub use ratediag::RateDiagnostics;
pub use solver::{solve, Iterate, Problem, SolveResult, SolveStatus, SolverConfig};
