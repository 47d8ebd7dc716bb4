//! Entropy production at the onset of interactions.
//!
//! Dense numerics for finite-dimensional systems evolving under product
//! interactions `exp(i ε t A⊗B)`: purities, Rényi and von Neumann entropies,
//! 2-norm coherence, variances and the n-fragilities that set the initial
//! rate of entropy growth, together with closed-form models (qubit pairs,
//! a qubit coupled to a single field mode, thermal modes) to check them
//! against.
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod figures;
pub mod fragility;
pub mod matrix;
pub mod scenarios;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
pub use states::DensityMatrix;
