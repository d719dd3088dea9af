//! Exact-arithmetic engine for isotropic fourth-order tensor-valued polynomial
//! functions of a symmetric second-order tensor.
//!
//! The crate is layered bottom-up:
//!
//! * [`rational`] and [`tensor`]: exact rationals and dense tensors with
//!   contraction, permutation and trace operations.
//! * [`isomer`]: perfect matchings of index slots, i.e. the distinct isomers of
//!   outer products of Kronecker deltas.
//! * [`linalg`]: fraction-free rank, nullspace and span solving.
//! * [`delta`]: generalized Kronecker determinant tensors and the grouped
//!   identities they produce when contracted with `T ⊗ T`.
//! * [`basis`]: the 9 linear and 19 quadratic representation terms.
//! * [`closure`]: the contracted pressure/velocity-gradient closure.
//!
//! No floating point is used anywhere; every identity is checked exactly.

pub mod basis;
pub mod closure;
pub mod delta;
mod error;
pub mod isomer;
pub mod json;
pub mod linalg;
pub mod rational;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use rational::Rational;
pub use tensor::DenseTensor;
