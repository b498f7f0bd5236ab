//! Multiple-input operator networks, their training and evaluation.

mod io;
mod mionet;
mod mlp;
mod train;

pub use io::{ModelHeader, MODEL_FORMAT};
pub use mionet::{Framework, MioNet, ModelConfig, Normalization};
pub use mlp::{Activation, MlpSpec};
pub use train::{
    dataset_loss, evaluate, grad_check, predict_sample, relative_l2, train, EvalReport, SampleError, TrainConfig,
    TrainHistory,
};
