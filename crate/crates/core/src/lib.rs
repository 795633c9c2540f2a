//! Spectral curves, Riemann theta functions and Nahm data for SU(2) monopoles
//! of charge 2 and 3, following the Ercolani-Sinha construction.
//!
//! The crate is layered bottom-up:
//!
//! * [`scalar_special`]: Gauss hypergeometric, Gamma, elliptic and Jacobi functions.
//! * [`riemann_theta`]: genus 1..4 theta functions with rational characteristics.
//! * [`trigonal_curve`]: periods of `w^3 = z^6 + b z^3 - 1` and related curve data.
//! * [`es_solver`]: the Ercolani-Sinha constraints for the symmetric family.
//! * [`reduction`]: integer symplectic reduction of the period matrix.
//! * [`nahm_flow`]: `Q0(z)`, the gauge flow and reconstructed Nahm triples.
//! * [`cli`]: the `monopole` batch front end.

// `!(x < tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod es_solver;
pub mod linalg;
pub mod nahm_flow;
pub mod reduction;
pub mod riemann_theta;
pub mod scalar_special;
pub mod trigonal_curve;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
