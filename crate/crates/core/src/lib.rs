//! Jensen-Shannon and generalized Jensen-Shannon losses for learning with
//! noisy labels, together with numerical checks of their bounds and a small
//! MLP trainer for synthetic noisy-label experiments.

pub mod divergence;
pub mod error;
pub mod loss;
pub mod data;
pub mod par;
pub mod seed;
pub mod simplex;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use loss::{LossEval, LossKind, LossSpec, ZMode};
pub use simplex::{LogitVec, ProbVec, WeightVec};
