//! Mini-batch training loop with validation-based early stopping.
//!
//! Each epoch shuffles the training windows with an epoch-derived seed,
//! accumulates mean-scaled gradients over batches, applies one AdamW step
//! per batch, then scores the validation set. The returned parameters are
//! the checkpoint from the epoch with the lowest validation loss.

use rand::seq::SliceRandom;

use crate::data::GraphSample;
use crate::error::{Error, Result};
use crate::nn::mat::Mat;
use crate::nn::model::{forward, BoundParams, ModelParams, ParamGrads};
use crate::nn::tape::Tape;
use crate::seed::{derive_seed, rng_from_seed};
use crate::train::adamw::{AdamW, AdamWConfig};

/// A validation loss must drop below the previous best by more than this
/// amount to count as an improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Tracks the best validation loss and how long it has been stale.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best_loss: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Feeds one epoch's validation loss; epochs are 1-based.
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best_loss - IMPROVEMENT_THRESHOLD {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            StopDecision::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: AdamWConfig,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Seed for epoch shuffles; each epoch derives its own stream.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: AdamWConfig::default(),
            batch_size: 8,
            max_epochs: 30,
            patience: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Checkpoint from the epoch with the lowest validation loss.
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub epochs_run: usize,
}

fn check_sample(sample: &GraphSample, params: &ModelParams, role: &str) -> Result<()> {
    if sample.frames.is_empty() {
        return Err(Error::Contract(format!("{role} sample has no frames")));
    }
    for frame in &sample.frames {
        if frame.cols() != params.input_dim {
            return Err(Error::Contract(format!(
                "{role} sample has {} feature channels, model expects {}",
                frame.cols(),
                params.input_dim
            )));
        }
    }
    Ok(())
}

/// Mean binary-cross-entropy of `params` over `samples` (no gradients).
pub fn mean_loss(params: &ModelParams, adj: &Mat, samples: &[GraphSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Protocol("cannot evaluate loss on an empty set".into()));
    }
    let mut total = 0.0;
    for sample in samples {
        let mut tape = Tape::new();
        let bound = BoundParams::bind_frozen(&mut tape, params)?;
        let adj_id = tape.constant(adj.clone())?;
        let logit = forward(&mut tape, &bound, adj_id, &sample.frames)?;
        let loss = tape.bce_with_logits(logit, sample.label as f64)?;
        total += tape.value(loss).item();
    }
    Ok(total / samples.len() as f64)
}

/// Trains from `init`, returning the lowest-validation-loss checkpoint.
pub fn train_model(
    init: &ModelParams,
    adj: &Mat,
    train: &[GraphSample],
    validation: &[GraphSample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if train.is_empty() {
        return Err(Error::Protocol("training set is empty".into()));
    }
    if validation.is_empty() {
        return Err(Error::Protocol("validation set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Parameter("batch size must be at least 1".into()));
    }
    if cfg.max_epochs == 0 {
        return Err(Error::Parameter("max epochs must be at least 1".into()));
    }
    if cfg.patience == 0 {
        return Err(Error::Parameter("patience must be at least 1".into()));
    }
    if adj.rows() != adj.cols() {
        return Err(Error::Contract(format!(
            "adjacency must be square, got {:?}",
            adj.shape()
        )));
    }
    for sample in train {
        check_sample(sample, init, "training")?;
    }
    for sample in validation {
        check_sample(sample, init, "validation")?;
    }

    let mut params = init.clone();
    let mut optimizer = AdamW::new(cfg.optimizer.clone(), &params)?;
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut best_params = params.clone();
    let mut log = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        let shuffle_seed = derive_seed(cfg.seed, "epoch-shuffle", &[epoch as u64]);
        order.shuffle(&mut rng_from_seed(shuffle_seed));

        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = ParamGrads::zeros_like(&params);
            let inv = 1.0 / batch.len() as f64;
            for &idx in batch {
                let sample = &train[idx];
                let mut tape = Tape::new();
                let bound = BoundParams::bind(&mut tape, &params)?;
                let adj_id = tape.constant(adj.clone())?;
                let logit = forward(&mut tape, &bound, adj_id, &sample.frames)?;
                let loss = tape.bce_with_logits(logit, sample.label as f64)?;
                loss_sum += tape.value(loss).item();
                let grad = tape.backward_scaled(loss, inv)?;
                bound.accumulate_grads(&grad, &mut grads);
            }
            optimizer.step(&mut params, &grads)?;
        }
        let train_loss = loss_sum / train.len() as f64;
        let val_loss = mean_loss(&params, adj, validation)?;
        log.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
        });

        match stopper.observe(epoch, val_loss) {
            StopDecision::Improved => best_params = params.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        best_epoch: stopper.best_epoch(),
        best_val_loss: stopper.best_loss(),
        epochs_run: log.len(),
        log,
    })
}
