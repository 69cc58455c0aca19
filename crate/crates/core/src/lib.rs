//! Numerical toolkit for semilinear problems `−Δu = f(u)` on cylinders
//! `ω × (0, 1)` with a Dirichlet top and Neumann elsewhere.
//!
//! The pipeline runs bottom-up:
//!
//! * [`nonlinearity`]: the admissible reaction terms and their checks.
//! * [`ode_shooting`]: the one-dimensional profile `u_ω(x_N)` by shooting.
//! * [`sturm_liouville`]: the linearized 1D spectrum `αᵢ` and eigenfunctions.
//! * [`base_spectrum`]: Neumann eigenvalues `λⱼ` of interval, rectangle and disk bases.
//! * [`morse_bifurcation`]: Morse index of `u_ω`, degeneracy and bifurcation scalings.
//! * [`pde_rectangle`]: 2D finite differences for the transported problem,
//!   direct spectra and branch continuation past a degeneracy.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base_spectrum;
pub mod bessel;
pub mod error;
pub mod morse_bifurcation;
pub mod nonlinearity;
pub mod ode_shooting;
pub mod pde_rectangle;
pub mod richardson;
pub mod sturm_liouville;
pub mod tridiagonal;

pub use error::{Error, Result};
