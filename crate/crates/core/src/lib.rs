//! Group-sparse network compression at desk scale: the l2p-norm channel
//! regularizer with its closed-form proximal operators, a proximal
//! alternating minimization solver, an elementwise-lp ADMM baseline, and a
//! prune/fine-tune pipeline over small built-in models.

pub mod admm;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod exec;
pub mod model;
pub mod pam;
pub mod pipeline;
pub mod prox;
pub mod prune;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
pub use pam::HyperParams;
pub use tensor::{Dims, LayerSet, Tensor4};
