//! Riemann integration of functions valued in an incomplete normed space.
//!
//! The crate builds an explicit odd, continuous, piecewise-affine function
//! `f : [-1, 1] -> E`, where `E` is the space of real polynomials on `[0, 1]`
//! with the sup norm. Its regular Riemann sums converge in `E` on `[-1, 1]`
//! (to the zero polynomial) but on `[0, 1]` they converge to the exponential,
//! which lives only in the completion `C([0, 1])`. Interval additivity of the
//! integral therefore fails in `E`.
//!
//! Modules:
//!
//! * [`vecspace`]: the normed-space contract, completion points given by a
//!   Cauchy sequence plus modulus, and fast-Cauchy subsequence extraction.
//! * [`polyfun`]: polynomials on `[0, 1]` with a certified sup norm.
//! * [`tentmap`]: the tent-map counterexample, its exact integrals and the
//!   general construction over any incomplete space.
//! * [`riemann`]: tagged partitions, deterministic vector-valued Riemann sums,
//!   Cauchy diagnostics and the additivity checker.
//! * [`labcli`]: experiment commands that emit CSV/JSON data and the
//!   verification suite behind the `chasles-lab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod labcli;
pub mod polyfun;
pub mod riemann;
pub mod tentmap;
pub mod vecspace;

pub use error::{Error, Result};
pub use polyfun::Polynomial;
pub use vecspace::NormedSpace;
