//! Numerical laboratory for orthogonal polynomials on the unit circle (OPUC)
//! and the large-n asymptotics of Toeplitz determinants.
//!
//! The crate computes `log D_n(e^L)` for real Laurent-polynomial log-weights
//! `L` through three independent routes:
//!
//! * a Hermitian Cholesky factorization of the Toeplitz matrix ([`toeplitz`]),
//! * the norm product `D_n = Π ‖Φ_j‖²` driven by the Szegő recursion ([`opuc`]),
//! * the Coulomb gas integral over the `(n+1)`-torus ([`coulomb`]),
//!
//! and checks them against `(n+1) L̂_0 + Σ_{k≥1} k |L̂_k|²`. The supporting
//! machinery (Szegő function, Christoffel–Darboux kernels, Bernstein–Szegő
//! approximants, Feynman–Hellman identities) lives in [`szego_fn`],
//! [`cdkernel`] and [`verify`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cdkernel;
pub mod coulomb;
pub mod error;
pub mod opuc;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod symbol;
pub mod szego_fn;
pub mod toeplitz;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use opuc::RecursionState;
pub use poly::MonicPoly;
pub use quadrature::QuadratureConfig;
pub use symbol::{LaurentSymbol, MomentSequence};
pub use szego_fn::SzegoSeries;
pub use toeplitz::{DeterminantLedger, ToeplitzMatrix};
