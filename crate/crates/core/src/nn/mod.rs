//! Dense numeric kernel: matrices, affine layers, softmax, dropout,
//! seeded randomness and a finite-difference gradient checker.
//!
//! All gradients in the crate are derived by hand, layer by layer, and
//! verified with [`grad_check`].

mod gradcheck;
mod matrix;
mod ops;
mod rng;

pub use gradcheck::{grad_check, BlockCheck, GradCheckReport, ParamSet};
pub use matrix::{axpy, dot, Matrix};
pub use ops::{affine, affine_backward, sigmoid, softmax, softmax_backward, DropoutMask};
pub use rng::Rng;
