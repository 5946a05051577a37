//! Numerical laboratory for observability, control and non-observability of
//! electromagnetic Schrödinger operators
//!
//! ```text
//! H_{A,V} = (D - A)^2 + V,   D = -i∇,   on T² = R² / (2πZ)²
//! ```
//!
//! The crate is organised by subsystem:
//!
//! - [`fields`]: band-limited functions on the torus, directional averages,
//!   the magnetic field, the first gauge transform and critical points of
//!   functions on a circle.
//! - [`geometry`]: rational directions, rectangle-union control regions,
//!   their projections, the GCC / magnetic GCC checkers and the
//!   non-observability witness detector.
//! - [`weyl`]: Weyl quantization on the torus, commutators, exact matrix
//!   conjugations, Wigner samples and the second averaging normal form.
//! - [`spectral`]: Galerkin assembly of `H_{A,V}`, eigendecomposition,
//!   unitary propagation, spectral projectors, separable blocks and the
//!   damped operator.
//! - [`obs`]: mass matrices, observability Gramians and constants, resolvent
//!   constants and HUM control synthesis.
//! - [`quasimode`]: Hermite algebra, WKB quasimodes concentrated at a
//!   non-degenerate critical point and the 2D witness experiment.
//! - [`runner`]: the config-driven experiment runner behind the `magobs` binary.
//!
//! States are coefficient vectors over a [`basis::ModeBasis`]; the
//! coefficient `u_k` multiplies the orthonormal mode `e^{ik·z}/(2π)`.
//! Fields ([`fields::FourierField2D`]) use the plain expansion
//! `f(z) = Σ f̂(k) e^{ik·z}`.

extern crate blas_src;
extern crate openblas_src;

pub mod basis;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod obs;
pub mod quasimode;
pub mod runner;
pub mod smooth;
pub mod spectral;
pub mod stats;
pub mod weyl;

pub use basis::{Mode, ModeBasis, ModeVector};
pub use error::{Error, Result};
pub use fields::{CircleFunction, CriticalPoint, CriticalSet, FourierField2D, VectorPotential};
pub use geometry::{ArcSet, Direction, Region};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
