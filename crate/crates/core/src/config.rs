use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Declares a fieldless enum with a stable lowercase name per variant,
/// used by `Display`, `FromStr` and the config/manifest files.
macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::config(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

named_enum!(
    /// How anchors are drawn from a mini-batch.
    AnchorStrategy { Das => "das", Ras => "ras", Bas => "bas" }
);

named_enum!(
    /// How positives and negatives are drawn for each anchor.
    ImageStrategy { Rhdis => "rhdis", Ris => "ris", Bis => "bis" }
);

named_enum!(
    /// How per-anchor positive and negative lists are combined into triplets.
    Combination { Cartesian => "cartesian", Paired => "paired" }
);

named_enum!(
    LabelSimilarity { Cosine => "cosine", Jaccard => "jaccard" }
);

named_enum!(
    /// Aggregation of distances to the already selected set in the
    /// iterative diversity terms. `MaxOfMax` is the default; `MaxOfMin`
    /// is classic farthest-point sampling, kept for comparison.
    DiversityRule { MaxOfMax => "max-of-max", MaxOfMin => "max-of-min" }
);

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub anchor_strategy: AnchorStrategy,
    pub image_strategy: ImageStrategy,
    /// Fraction of the batch used as anchors by DAS and RAS; H = ceil(fraction * B).
    pub anchor_fraction: f64,
    pub positives_per_anchor: usize,
    pub negatives_per_anchor: usize,
    /// Relevancy vs hardness weight in the informativeness scores.
    pub beta: f64,
    /// Informativeness vs diversity weight in positive/negative selection.
    pub gamma: f64,
    pub combination: Combination,
    pub label_similarity: LabelSimilarity,
    pub diversity_rule: DiversityRule,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            anchor_strategy: AnchorStrategy::Das,
            image_strategy: ImageStrategy::Rhdis,
            anchor_fraction: 0.1,
            positives_per_anchor: 5,
            negatives_per_anchor: 5,
            beta: 0.5,
            gamma: 0.1,
            combination: Combination::Cartesian,
            label_similarity: LabelSimilarity::Cosine,
            diversity_rule: DiversityRule::MaxOfMax,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    /// Number of anchors H for a batch of `batch_size` under DAS or RAS.
    pub fn anchor_count(&self, batch_size: usize) -> usize {
        // The epsilon absorbs representation error, so that 0.1 * 100 stays 10.
        let raw = self.anchor_fraction * batch_size as f64;
        (raw - 1e-9).ceil().max(0.0) as usize
    }

    /// Checks every invariant against a concrete batch size.
    pub fn validate(&self, batch_size: usize) -> Result<()> {
        if !(self.anchor_fraction > 0.0 && self.anchor_fraction <= 1.0) {
            return Err(Error::config(format!(
                "anchor fraction {} outside (0, 1]",
                self.anchor_fraction
            )));
        }
        let h = self.anchor_count(batch_size);
        if h > batch_size {
            return Err(Error::config(format!(
                "H = {h} anchors exceeds batch size {batch_size}"
            )));
        }
        for (name, c) in [
            ("positives", self.positives_per_anchor),
            ("negatives", self.negatives_per_anchor),
        ] {
            if c < 1 {
                return Err(Error::config(format!("{name} per anchor must be >= 1")));
            }
            if c + 1 > batch_size {
                return Err(Error::config(format!(
                    "{name} per anchor C = {c} exceeds B - 1 = {}",
                    batch_size.saturating_sub(1)
                )));
            }
        }
        let both = self.positives_per_anchor + self.negatives_per_anchor;
        if matches!(
            self.image_strategy,
            ImageStrategy::Rhdis | ImageStrategy::Ris
        ) && both + 1 > batch_size
        {
            // positives and negatives of one anchor are disjoint
            return Err(Error::config(format!(
                "{} needs {both} distinct images per anchor but B - 1 = {}",
                self.image_strategy,
                batch_size.saturating_sub(1)
            )));
        }
        if self.image_strategy == ImageStrategy::Bis && self.combination == Combination::Paired {
            return Err(Error::config(
                "bis uses identical positive and negative lists, so paired combination yields no triplets",
            ));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Returns `cfg` unchanged when it is valid for `batch_size`.
pub fn validate_config(cfg: SamplerConfig, batch_size: usize) -> Result<SamplerConfig> {
    cfg.validate(batch_size)?;
    Ok(cfg)
}
