//! Numerical kernels built only from additions and multiplications over
//! emulated ciphertexts: Newton-Schulz matrix inversion, an iterative square
//! root, and polynomial comparison, max and argmax.
//!
//! Iteration counts and depths come from closed-form convergence bounds in
//! [`params`]; [`depth`] gives the exact number of levels each kernel
//! consumes so callers can budget a leveled computation ahead of time.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod comparator;
pub mod depth;
mod error;
mod inverse;
pub mod params;
mod sqrt;

pub use comparator::{
    acomp, acomp_with, amax, f_n, new_comp, new_comp_plain, new_max, pack_scalars, trace_compare,
    trace_compare_depth,
};
pub use error::{KernelError, Result};
pub use inverse::newton_inverse;
pub use params::{ComparatorParams, InverseParams, SqrtParams};
pub use sqrt::he_sqrt;
