//! A small dense reverse-mode differentiation engine with Adam and gradient clipping.

mod gradcheck;
mod optim;
mod params;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, relative_error};
pub use optim::{clip_global_norm, AdamConfig, AdamState};
pub use params::{ParamId, ParamStore};
pub use tape::{differentiate, sigmoid, softplus, Gradients, Tape, Var};
pub use tensor::Tensor;
