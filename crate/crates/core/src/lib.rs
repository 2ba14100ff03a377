//! Optimal reversal of Gaussian channels, and asymptotic reversal rates of
//! qudit channels through their local Gaussian models.
//!
//! - [`gaussian`]: hybrid quantum-classical Gaussian states and channels.
//! - [`reversal`]: the optimal factor `k★`, the reversing channel and an LMI
//!   bisection cross-check.
//! - [`qudit`]: local Gaussian models of qudit states, the Gaussian channel a
//!   qudit channel induces on them, and the rate `Γ★ = k★²`.
//! - [`phase_flip`]: closed forms and sweeps for the qubit phase flip.

pub mod error;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod phase_flip;
pub mod qudit;
pub mod reversal;

pub use error::{Result, RevertError};
pub use gaussian::{
    apply, compose, is_cp, validate_state, GaussianChannel, HybridGaussianState, ModeSignature,
    Tolerances, ValidityReport,
};
pub use reversal::{
    build_pencil, build_reverser, dmax, k_by_bisection, optimal_k, ReversalProblem,
    ReversalSolution,
};
