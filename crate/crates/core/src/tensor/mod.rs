//! Dense arrays, differentiable kernels and the reverse-mode tape.

mod array;
pub mod checkpoint;
mod gradcheck;
pub mod kernels;
mod params;
mod tape;

pub use array::NumArray;
pub use gradcheck::{grad_check, relative_error, GradCheckConfig, GradCheckReport};
pub use kernels::{batch_matmul, concat_last, layer_norm, matmul, matmul_nt, relu, sigmoid, softmax_rows, tanh};
pub use params::{Bound, ParameterSet};
pub use tape::{Gradients, Tape, Var};

#[cfg(test)]
mod tests;
