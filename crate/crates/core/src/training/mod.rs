//! BPR training shared by the graph model and the factorization baselines.

mod adam;
pub mod checkpoint;
mod loss;
mod pup;
mod sampler;

use std::io::Write;
use std::path::Path;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::Rng;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use loss::{bpr_loss, bpr_margin_gradient, sigmoid, softplus_neg};
pub use pup::{PupModel, PupScorer};
pub use sampler::sample_negative;

use crate::dataset::Dataset;
use crate::error::{PupError, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub user: usize,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub total_dim: usize,
    /// (global branch, category branch) embedding sizes.
    pub dim_split: (usize, usize),
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub neg_rate: usize,
    pub lambda_reg: f64,
    pub alpha: f64,
    pub dropout_p: f64,
    /// Graph-convolution rounds in the encoder.
    pub layers: usize,
    pub seed: u64,
    /// Epochs at which the learning rate is divided by 10. `None` means
    /// `⌊0.5·epochs⌋` and `⌊0.75·epochs⌋`.
    pub lr_decay_epochs: Option<(usize, usize)>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            total_dim: 64,
            dim_split: (48, 16),
            learning_rate: 1e-2,
            batch_size: 1024,
            epochs: 200,
            neg_rate: 1,
            lambda_reg: 1e-4,
            alpha: 1.0,
            dropout_p: 0.1,
            layers: 1,
            seed: 42,
            lr_decay_epochs: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PupError::InvalidArgument(m));
        if self.dim_split.0 + self.dim_split.1 != self.total_dim {
            return bad(format!(
                "dim split {}/{} does not add up to total_dim {}",
                self.dim_split.0, self.dim_split.1, self.total_dim
            ));
        }
        if self.dim_split.0 == 0 || self.dim_split.1 == 0 {
            return bad("both branch dimensions must be positive".into());
        }
        if self.batch_size == 0 || self.neg_rate == 0 || self.layers == 0 {
            return bad("batch_size, neg_rate and layers must be positive".into());
        }
        if self.learning_rate.is_nan()
            || self.learning_rate < 0.0
            || self.lambda_reg.is_nan()
            || self.lambda_reg < 0.0
            || !self.alpha.is_finite()
        {
            return bad("learning_rate and lambda_reg must be >= 0 and alpha finite".into());
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return bad(format!(
                "dropout_p must be in [0, 1), got {}",
                self.dropout_p
            ));
        }
        Ok(())
    }

    pub fn decay_epochs(&self) -> (usize, usize) {
        self.lr_decay_epochs
            .unwrap_or((self.epochs / 2, (3 * self.epochs) / 4))
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let (a, b) = self.decay_epochs();
        let decays = [a, b].iter().filter(|&&d| epoch >= d).count() as i32;
        self.learning_rate / 10f64.powi(decays)
    }
}

#[derive(Debug, Clone)]
pub struct Gradients {
    /// Mean BPR loss over the batch plus the regularizer.
    pub loss: f64,
    pub grads: Vec<Matrix>,
}

/// A model trainable by the shared BPR loop.
pub trait BprModel {
    fn parameters(&self) -> &[Matrix];

    fn parameters_mut(&mut self) -> &mut [Matrix];

    /// Exact gradient of `mean_batch_bpr + λ · reg` w.r.t. every parameter
    /// tensor. `dropout_seed` is `None` for a deterministic forward pass.
    fn compute_gradients(
        &self,
        batch: &[Triplet],
        lambda: f64,
        dropout_seed: Option<u64>,
    ) -> Result<Gradients>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub learning_rate: f64,
}

/// Runs `config.epochs` epochs of shuffled mini-batch BPR with Adam.
///
/// Each epoch shuffles the deduplicated training pairs, draws fresh
/// negatives and re-encodes per batch (inside `compute_gradients`).
pub fn train_model<M: BprModel>(
    model: &mut M,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<Vec<EpochStats>> {
    config.validate()?;
    if config.epochs == 0 {
        return Ok(Vec::new());
    }
    let positives = dataset.train_items_by_user();
    let item_count = dataset.item_count();
    let pairs: Vec<(usize, usize)> = dataset
        .unique_train_pairs()
        .into_iter()
        .filter(|&(u, _)| positives[u].len() < item_count)
        .collect();
    if pairs.is_empty() {
        return Err(PupError::InvalidArgument(
            "no trainable (user, item) pairs in the training split".into(),
        ));
    }
    let saturated = positives.iter().filter(|p| p.len() >= item_count).count();
    if saturated > 0 {
        warn!("{saturated} users interacted with every item and are skipped");
    }

    let mut shuffle_rng = rng::stream(config.seed, Stream::Shuffle);
    let mut sampling_rng = rng::stream(config.seed, Stream::Sampling);
    let mut dropout_rng = rng::stream(config.seed, Stream::Dropout);
    let mut adam = AdamState::new(model.parameters());
    let mut history = Vec::with_capacity(config.epochs);
    let mut order = pairs;
    let mut triplets = Vec::with_capacity(order.len() * config.neg_rate);

    for epoch in 0..config.epochs {
        let lr = config.learning_rate_at(epoch);
        order.shuffle(&mut shuffle_rng);
        triplets.clear();
        for &(u, i) in &order {
            for _ in 0..config.neg_rate {
                let j = sample_negative(u, &positives[u], item_count, &mut sampling_rng)?;
                triplets.push(Triplet {
                    user: u,
                    positive: i,
                    negative: j,
                });
            }
        }

        let mut loss_sum = 0.0;
        for batch in triplets.chunks(config.batch_size) {
            let seed = (config.dropout_p > 0.0).then(|| dropout_rng.random::<u64>());
            let g = model.compute_gradients(batch, config.lambda_reg, seed)?;
            if !g.loss.is_finite() {
                return Err(PupError::Diverged {
                    epoch,
                    what: "loss",
                });
            }
            if !g.grads.iter().all(Matrix::is_finite) {
                return Err(PupError::Diverged {
                    epoch,
                    what: "gradient",
                });
            }
            adam_step(model.parameters_mut(), &g.grads, &mut adam, lr);
            loss_sum += g.loss * batch.len() as f64;
        }
        let mean_loss = loss_sum / triplets.len() as f64;
        debug!("epoch {epoch}: loss {mean_loss:.6} lr {lr:e}");
        history.push(EpochStats {
            epoch,
            mean_loss,
            learning_rate: lr,
        });
    }
    Ok(history)
}

/// `epoch,mean_loss,learning_rate`
pub fn write_loss_history(path: impl AsRef<Path>, history: &[EpochStats]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,mean_loss,learning_rate\n");
    for h in history {
        out.push_str(&format!(
            "{},{},{}\n",
            h.epoch, h.mean_loss, h.learning_rate
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| PupError::io(path, e))
}
