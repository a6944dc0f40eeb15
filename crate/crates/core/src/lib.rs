//! Loan default detection with a residual-enhanced attention encoder feeding a
//! bidirectional LSTM, plus the data pipeline, training loop, evaluation and
//! attribution tooling around it.

pub mod attribution;
pub mod error;
pub mod evaluation;
pub mod layers;
pub mod models;
pub mod pipeline;
pub mod synth;
pub mod tensor;
pub mod training;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
