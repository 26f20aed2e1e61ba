//! Entanglement of formation for symmetric two-mode Gaussian states.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`symplectic`]: covariance-matrix algebra (validity, standard form,
//!   balancing squeezing, PSD ordering).
//! - [`closed_form`]: scalar formulas: EPR-uncertainty, `f(Δ)`, the
//!   two-mode squeezed state entropy and the symmetric EoF report.
//! - [`schmidt`]: functionals on ordered Schmidt sequences, the
//!   Euler-Lagrange recursion and a constrained entropy minimizer.
//! - [`fock`]: truncated Fock-space states used as an independent oracle
//!   for every claim above.
//! - [`suites`]: seeded property suites shared by the CLI and the tests.
//!
//! Conventions: quadratures satisfy `[X, P] = i`, `a = (X + iP)/√2`, and
//! covariance matrices are ordered `(X_A, P_A, X_B, P_B)` and normalized so
//! that the vacuum has `γ = I`. Entropies are in bits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod fock;
pub mod schmidt;
pub mod suites;
pub mod symplectic;

pub use closed_form::{
    c_plus_minus, delta_of_tmss, entropy_of_tmss, eof_symmetric, epr_uncertainty_of_standard_form,
    f_of_delta, is_entangled, r_of_delta, EntanglementReport, EprUncertainty,
};
pub use error::{Error, Result};
pub use schmidt::SchmidtSequence;
pub use symplectic::{CovarianceMatrix, StandardFormParams};

/// Default absolute tolerance for symmetry, PSD and criterion tests.
pub const DEFAULT_TOL: f64 = 1e-9;
