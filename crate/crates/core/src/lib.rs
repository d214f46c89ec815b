//! Numerical core for continuous spontaneous localization (CSL) collapse
//! experiments.
//!
//! Everything here is pure computation over `alloc` collections, so the crate
//! builds without `std`. File formats, the command line and thread-level
//! parallelism live in the `csl-lab` companion crate.
//!
//! Module map:
//!
//! * [`physconst`] quoted physical constants and bounds (SI units).
//! * [`hilbert`] dense complex state vectors and operators.
//! * [`noise`] white and Gaussian-cutoff colored noise, correlation functions
//!   and their boosted forms.
//! * [`dynamics`] the norm-preserving nonlinear collapse equation.
//! * [`scenarios`] Stern-Gerlach, EPR and frame-comparison experiments.
//! * [`mott`] conditional excitation amplitude and its angular collimation.
//! * [`heating`] bulk-heating effective coupling and bound checks.
//! * [`relativity`] event boosts, temporal ordering, minimum inversion boost.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod fft;
pub mod heating;
pub mod hilbert;
pub mod mott;
pub mod noise;
pub mod physconst;
pub mod quad;
pub mod relativity;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
