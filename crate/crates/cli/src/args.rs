use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tripsel::config::{AnchorStrategy, Combination, DiversityRule, ImageStrategy, LabelSimilarity};

use crate::settings::Preset;

#[derive(Debug, Parser)]
#[command(
    name = "tripsel",
    version,
    about = "Triplet sampling for multi-label metric learning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an embedder; writes model.ckpt, train_log.csv and manifest.txt.
    Train(TrainArgs),
    /// Score a checkpoint by k-nn retrieval from the validation split into the test split.
    Evaluate(EvaluateArgs),
    /// Train and evaluate every anchor/image strategy pair; writes grid.csv.
    Ablate(AblateArgs),
    /// Print what the sampler picks in the first batches of epoch 0.
    MineDebug(MineDebugArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Checkpoint to score [default: <out>/model.ckpt]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also evaluate after every epoch and write curve.csv.
    #[arg(long)]
    pub curve: bool,
}

#[derive(Debug, Args)]
pub struct MineDebugArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Weights to mine with [default: the initial weights for the seed]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Number of batches to dump.
    #[arg(long, default_value_t = 1)]
    pub batches: usize,
    /// Print every informativeness score instead of the extremes.
    #[arg(long)]
    pub full: bool,
}

/// Settings shared by every command. Each flag overrides the key of the
/// same name (dashes become underscores) from the preset and `--config`.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// key=value settings file, e.g. a previous manifest.txt
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "tripsel-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub preset: Option<Preset>,

    /// Generate a synthetic dataset instead of reading files.
    #[arg(long, conflicts_with_all = ["features", "labels"])]
    pub synthetic: bool,
    /// Feature file: CSV (id, then values) or the binary format.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Label CSV: header of class names, then id and one 0/1 column per class.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub n_classes: Option<usize>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub n_prototypes: Option<usize>,
    #[arg(long)]
    pub label_noise_rate: Option<f64>,
    #[arg(long)]
    pub feature_noise_sigma: Option<f64>,
    #[arg(long)]
    pub nuisance_scale: Option<f64>,
    /// Train,val,test fractions, e.g. 0.6,0.2,0.2
    #[arg(long)]
    pub split: Option<String>,

    /// Seeds data generation, splitting, initialization, shuffling and mining.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Initial learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub decay_every_epochs: Option<usize>,
    #[arg(long)]
    pub decay_factor: Option<f64>,
    /// Triplet margin.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated hidden layer widths; empty for none.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub embedding_size: Option<usize>,
    /// L2-normalize embeddings.
    #[arg(long)]
    pub normalize: bool,

    /// Anchor and image strategies together, e.g. das-rhdis.
    #[arg(long, value_parser = parse_sampler)]
    pub sampler: Option<(AnchorStrategy, ImageStrategy)>,
    #[arg(long)]
    pub anchor_strategy: Option<AnchorStrategy>,
    #[arg(long)]
    pub image_strategy: Option<ImageStrategy>,
    /// Fraction of each batch used as anchors.
    #[arg(long)]
    pub anchors_fraction: Option<f64>,
    /// Positives per anchor (C).
    #[arg(long)]
    pub positives: Option<usize>,
    /// Negatives per anchor.
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Relevancy vs hardness weight.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Informativeness vs diversity weight.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub combination: Option<Combination>,
    #[arg(long)]
    pub label_similarity: Option<LabelSimilarity>,
    #[arg(long)]
    pub diversity: Option<DiversityRule>,

    /// Retrieval depth, or `auto` (10, or 30 for archives of 10000 or more).
    #[arg(long)]
    pub k: Option<String>,
    /// Rewrite model.ckpt every N epochs during training.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Record wall-clock seconds in train_log.csv (makes it non-reproducible).
    #[arg(long)]
    pub wall_time: bool,
}

fn parse_sampler(s: &str) -> Result<(AnchorStrategy, ImageStrategy), String> {
    let (a, i) = s
        .split_once('-')
        .ok_or("expected <anchors>-<images>, e.g. das-rhdis")?;
    Ok((
        a.parse().map_err(|e| format!("{e}"))?,
        i.parse().map_err(|e| format!("{e}"))?,
    ))
}

impl RunArgs {
    /// The flags that were given, as settings overrides.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, Option<String>)> = vec![
            ("preset", self.preset.map(|p| p.to_string())),
            ("synthetic", self.synthetic.then(|| "true".into())),
            (
                "features",
                self.features.as_ref().map(|p| p.display().to_string()),
            ),
            (
                "labels",
                self.labels.as_ref().map(|p| p.display().to_string()),
            ),
            ("n_samples", self.n_samples.map(|v| v.to_string())),
            ("n_classes", self.n_classes.map(|v| v.to_string())),
            ("feature_dim", self.feature_dim.map(|v| v.to_string())),
            ("n_prototypes", self.n_prototypes.map(|v| v.to_string())),
            (
                "label_noise_rate",
                self.label_noise_rate.map(|v| v.to_string()),
            ),
            (
                "feature_noise_sigma",
                self.feature_noise_sigma.map(|v| v.to_string()),
            ),
            ("nuisance_scale", self.nuisance_scale.map(|v| v.to_string())),
            ("split", self.split.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("epochs", self.epochs.map(|v| v.to_string())),
            ("batch_size", self.batch_size.map(|v| v.to_string())),
            ("lr", self.lr.map(|v| v.to_string())),
            (
                "decay_every_epochs",
                self.decay_every_epochs.map(|v| v.to_string()),
            ),
            ("decay_factor", self.decay_factor.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("hidden", self.hidden.clone()),
            ("embedding_size", self.embedding_size.map(|v| v.to_string())),
            ("normalize", self.normalize.then(|| "true".into())),
        ];
        if let Some((a, i)) = self.sampler {
            out.push(("anchor_strategy", Some(a.to_string())));
            out.push(("image_strategy", Some(i.to_string())));
        }
        out.extend([
            (
                "anchor_strategy",
                self.anchor_strategy.map(|v| v.to_string()),
            ),
            ("image_strategy", self.image_strategy.map(|v| v.to_string())),
            (
                "anchors_fraction",
                self.anchors_fraction.map(|v| v.to_string()),
            ),
            ("positives", self.positives.map(|v| v.to_string())),
            ("negatives", self.negatives.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("combination", self.combination.map(|v| v.to_string())),
            (
                "label_similarity",
                self.label_similarity.map(|v| v.to_string()),
            ),
            ("diversity", self.diversity.map(|v| v.to_string())),
            ("k", self.k.clone()),
            (
                "checkpoint_every",
                self.checkpoint_every.map(|v| v.to_string()),
            ),
            ("wall_time", self.wall_time.then(|| "true".into())),
        ]);
        out.into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect()
    }
}
