//! Gaussian steady states of linearized optomechanical networks.
//!
//! The crate compiles a quadratic open-system generator (bilinear Hamiltonian,
//! linear jump operators with a dissipation matrix, thermal baths) into drift
//! and diffusion matrices over quadratures, solves for the steady-state
//! covariance, and evaluates two-mode logarithmic negativity and correlators.
//!
//! Conventions used throughout:
//!
//! * quadratures `q = (a + a†)/√2`, `p = -i(a - a†)/√2`, ordered
//!   `(q1, p1, q2, p2, ...)` following the mode registry;
//! * covariance `V_ij = <{Δr_i, Δr_j}>/2`, so the vacuum is `I/2`;
//! * symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`;
//! * logarithmic negativity uses the natural logarithm.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod models;
pub mod numerics;
pub mod slh;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type RMatrix = nalgebra::DMatrix<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
