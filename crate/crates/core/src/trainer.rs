//! Mini-batch training with online triplet mining.

use std::io::{self, Write};
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::adam::{adam_step, AdamConfig, AdamState};
use crate::config::SamplerConfig;
use crate::data::Dataset;
use crate::embedder::{backward, Embedder};
use crate::error::{Error, Result};
use crate::rng::seeded_stream;
use crate::sampler::{mine, mine_traced, MiningTrace};
use crate::types::BatchView;

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub decay_every_epochs: usize,
    pub decay_factor: f64,
    /// Triplet margin on raw embedding distances.
    pub alpha: f64,
    pub adam: AdamConfig,
    pub sampler: SamplerConfig,
    /// Hidden layer widths between the input features and the embedding.
    pub hidden: Vec<usize>,
    pub embedding_size: usize,
    pub normalize_embeddings: bool,
    /// Seeds weight initialization and shuffling. Mining draws from `sampler.seed`.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 100,
            lr0: 0.001,
            decay_every_epochs: 5,
            decay_factor: 0.95,
            alpha: 0.2,
            adam: AdamConfig::default(),
            sampler: SamplerConfig::default(),
            hidden: vec![512],
            embedding_size: 1024,
            normalize_embeddings: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn layer_dims(&self, feature_dim: usize) -> Vec<usize> {
        let mut dims = vec![feature_dim];
        dims.extend(&self.hidden);
        dims.push(self.embedding_size);
        dims
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::config("batch size must be at least 2"));
        }
        if self.lr0.is_nan() || self.lr0 <= 0.0 || self.decay_every_epochs == 0 {
            return Err(Error::config(
                "learning rate and decay interval must be positive",
            ));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::config(format!(
                "decay factor {} outside (0, 1]",
                self.decay_factor
            )));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::config(format!("margin {} must be >= 0", self.alpha)));
        }
        if self.embedding_size == 0 || self.hidden.contains(&0) {
            return Err(Error::config("layer widths must be positive"));
        }
        self.sampler.validate(self.batch_size)
    }

    /// Weights before any training step.
    pub fn initial_embedder(&self, feature_dim: usize) -> Result<Embedder> {
        let mut rng = seeded_stream(self.seed, INIT_STREAM);
        Embedder::init(
            &self.layer_dims(feature_dim),
            self.normalize_embeddings,
            &mut rng,
        )
    }
}

/// `lr0 * decay_factor ^ floor(epoch / decay_every_epochs)`, epochs counted from 0.
pub fn lr_schedule(epoch: usize, cfg: &TrainConfig) -> f64 {
    let steps = (epoch / cfg.decay_every_epochs.max(1)) as i32;
    cfg.lr0 * cfg.decay_factor.powi(steps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean over batches of the summed triplet loss.
    pub mean_loss: f64,
    pub cum_triplets: u64,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainLog {
    pub fn total_triplets(&self) -> u64 {
        self.epochs.last().map_or(0, |e| e.cum_triplets)
    }

    /// CSV with columns `epoch,mean_loss,cum_triplets,lr,seconds`. Without
    /// `with_time` the `seconds` field is left empty so the file is a pure
    /// function of the configuration.
    pub fn write_csv<W: Write>(&self, w: &mut W, with_time: bool) -> io::Result<()> {
        writeln!(w, "epoch,mean_loss,cum_triplets,lr,seconds")?;
        for e in &self.epochs {
            write!(
                w,
                "{},{},{},{},",
                e.epoch, e.mean_loss, e.cum_triplets, e.lr
            )?;
            if with_time {
                write!(w, "{:.3}", e.seconds)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_trainable(ds: &Dataset, cfg: &TrainConfig) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let n = ds.splits.train.len();
    if n == 0 {
        return Err(Error::Empty("training split"));
    }
    if cfg.batch_size > n {
        return Err(Error::config(format!(
            "batch size {} exceeds the {} training samples",
            cfg.batch_size, n
        )));
    }
    cfg.validate()
}

/// Replays the batching and mining of the first `n_batches` batches of
/// epoch 0 against `net`, drawing from the same rng streams as `train`.
/// With `net` equal to the initial weights the traces are exactly what
/// training mines.
pub fn mining_dump(
    ds: &Dataset,
    cfg: &TrainConfig,
    net: &Embedder,
    n_batches: usize,
) -> Result<Vec<MiningTrace>> {
    check_trainable(ds, cfg)?;
    let mut shuffle_rng = seeded_stream(cfg.seed, SHUFFLE_STREAM);
    let mut mining_rng = seeded_stream(cfg.sampler.seed, 0);
    let mut order = ds.splits.train.clone();
    order.shuffle(&mut shuffle_rng);
    order
        .chunks_exact(cfg.batch_size)
        .take(n_batches)
        .map(|batch| {
            let embeddings = net.forward(&ds.features(batch))?;
            let view = BatchView::new(batch.to_vec(), embeddings, ds.labels(batch))?;
            Ok(mine_traced(&view, &cfg.sampler, &mut mining_rng)?.1)
        })
        .collect()
}

pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(Embedder, TrainLog)> {
    train_with_observer(ds, cfg, |_, _| Ok(()))
}

/// Trains and calls `observer` after every epoch with the current weights.
pub fn train_with_observer<F>(
    ds: &Dataset,
    cfg: &TrainConfig,
    mut observer: F,
) -> Result<(Embedder, TrainLog)>
where
    F: FnMut(&Embedder, &EpochLog) -> Result<()>,
{
    check_trainable(ds, cfg)?;
    let train_idx = &ds.splits.train;
    let mut net = cfg.initial_embedder(ds.feature_dim())?;
    let mut shuffle_rng = seeded_stream(cfg.seed, SHUFFLE_STREAM);
    let mut mining_rng = seeded_stream(cfg.sampler.seed, 0);
    let mut adam = AdamState::new(net.param_slices_mut().iter().map(|s| s.len()));
    let mut log = TrainLog::default();
    let mut order = train_idx.clone();
    let mut cum_triplets = 0u64;
    let start = Instant::now();

    for epoch in 0..cfg.epochs {
        let lr = lr_schedule(epoch, cfg);
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks_exact(cfg.batch_size) {
            let features = ds.features(batch);
            let embeddings = net.forward(&features)?;
            let view = BatchView::new(batch.to_vec(), embeddings, ds.labels(batch))?;
            let triplets = mine(&view, &cfg.sampler, &mut mining_rng)?;
            cum_triplets += triplets.len() as u64;

            let grads = backward(&net, &features, &triplets, cfg.alpha)?;
            if !grads.loss.is_finite() {
                return Err(Error::NonFinite("training loss"));
            }
            loss_sum += grads.loss;
            batches += 1;
            let g = grads.slices();
            adam_step(&mut net.param_slices_mut(), &g, &mut adam, &cfg.adam, lr)?;
        }
        let entry = EpochLog {
            epoch,
            mean_loss: loss_sum / batches as f64,
            cum_triplets,
            lr,
            seconds: start.elapsed().as_secs_f64(),
        };
        observer(&net, &entry)?;
        log.epochs.push(entry);
    }
    Ok((net, log))
}
