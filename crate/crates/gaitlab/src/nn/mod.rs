//! From-scratch differentiable network: dense matrices, a reverse-mode
//! tape, and the spatiotemporal graph classifier built on top of them.

pub mod mat;
pub mod model;
pub mod tape;

pub use mat::Mat;
pub use model::{
    forward, gcn_forward, gru_step, predict, temporal_attention, BoundParams, ModelParams,
    ParamGrads, PARAM_NAMES,
};
pub use tape::{Gradients, NodeId, Tape};
