//! Optimization and experiment orchestration.

pub mod adamw;
pub mod experiment;
pub mod trainer;

pub use adamw::{AdamW, AdamWConfig};
pub use experiment::{
    cell_train_seed, model_init_seed, run_experiment, CellResult, ExperimentConfig, GroupVideos,
    LabeledVideo,
};
pub use trainer::{
    mean_loss, train_model, EarlyStopper, EpochLog, StopDecision, TrainConfig, TrainOutcome,
    IMPROVEMENT_THRESHOLD,
};
