//! A small ReLU MLP trained by mini-batch SGD with Nesterov momentum under any loss.

mod model;
mod trainer;

pub use model::{init_model, Gradients, MlpModel};
pub use trainer::{
    batch_gradient, consistency_rate, evaluate, predict, train_loop, train_loop_with, train_step, LrDrop, MetricsRecord,
    Optimizer, TrainConfig, TrainOutcome,
};
