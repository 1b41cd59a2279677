//! Grant-free random access laboratory for cell-free massive MIMO: uplink
//! pilot observations under 3GPP UMa propagation, a multilayer-perceptron
//! activity detector trained from scratch, cluster majority fusion and the
//! robustness studies (input perturbation, fixed-point inputs).
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airlink;
pub mod channel;
pub mod dataset;
pub mod detect;
pub mod dmlp;
pub mod error;
pub mod experiment;
pub mod io;
pub mod numerics;
pub mod robustness;
pub mod scenario;
pub mod topology;

pub use error::{Error, Result};
