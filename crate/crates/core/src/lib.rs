//! Informative and representative triplet sampling for multi-label metric
//! learning.
//!
//! The sampler picks a small, diverse set of anchors from each mini-batch
//! ([`sampler::select_anchors_das`]) and, for every anchor, positives and
//! negatives that are relevant in label space, hard in embedding space and
//! diverse among themselves ([`sampler::select_positives_rhdis`],
//! [`sampler::select_negatives_rhdis`]). Random and exhaustive baselines
//! live next to them. Around the sampler sit a small MLP embedder with
//! analytic triplet-loss gradients, an Adam training loop, exact k-nn
//! retrieval with multi-label metrics, and dataset IO.

pub mod adam;
pub mod config;
pub mod data;
pub mod embedder;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod retrieval;
pub mod rng;
pub mod sampler;
pub mod similarity;
pub mod trainer;
pub mod types;

pub use config::{
    validate_config, AnchorStrategy, Combination, DiversityRule, ImageStrategy, LabelSimilarity,
    SamplerConfig,
};
pub use data::{Dataset, Splits, SyntheticSpec};
pub use embedder::{Embedder, GradientBundle};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use retrieval::{MetricReport, PairMetrics};
pub use rng::{seeded_rng, SeededRng};
pub use trainer::{TrainConfig, TrainLog};
pub use types::{AnchorSelection, BatchView, LabelVector, Sample, Triplet, TripletSet};

/// Tool version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
