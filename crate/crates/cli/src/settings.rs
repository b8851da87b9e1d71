//! Run settings: a flat key=value view over every knob of a run.
//!
//! Settings are resolved in three layers. The preset picks the starting
//! values, then a `--config` file, then command-line flags. The manifest
//! written after each command uses the same keys, so it can be fed back as
//! `--config` to repeat the run.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use tripsel::data::{generate_synthetic, load_dataset, split_dataset};
use tripsel::{seeded_rng, Dataset, SyntheticSpec, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Full-size defaults: 100 epochs, batch 100, one 512-wide hidden layer, 1024-d output.
    Full,
    /// Desk-scale defaults used by the test suite.
    Ci,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::Ci => "ci",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Preset::Full),
            "ci" => Ok(Preset::Ci),
            other => bail!("unknown preset `{other}` (expected full or ci)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub preset: Preset,
    /// Use the synthetic generator instead of `features`/`labels`.
    pub synthetic: bool,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub spec: SyntheticSpec,
    pub split: (f64, f64, f64),
    pub seed: u64,
    pub train: TrainConfig,
    /// Retrieval depth; `None` picks it from the archive size.
    pub k: Option<usize>,
    /// Rewrite the checkpoint every this many epochs; 0 writes only the final one.
    pub checkpoint_every: usize,
    /// Fill the `seconds` column of the training log.
    pub wall_time: bool,
}

/// Keys a manifest may carry that do not affect the run.
const INFORMATIONAL: &[&str] = &["tool_version", "command"];

impl Settings {
    pub fn preset(preset: Preset) -> Self {
        let mut train = TrainConfig::default();
        if preset == Preset::Ci {
            train.epochs = 30;
            train.batch_size = 40;
            train.hidden = vec![32];
            train.embedding_size = 16;
        }
        let mut s = Settings {
            preset,
            synthetic: true,
            features: None,
            labels: None,
            spec: SyntheticSpec::default(),
            split: (0.6, 0.2, 0.2),
            seed: 0,
            train,
            k: None,
            checkpoint_every: 0,
            wall_time: false,
        };
        s.set_seed(0);
        s
    }

    fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.spec.seed = seed;
        self.train.seed = seed;
        self.train.sampler.seed = seed;
    }

    /// Resolves layered overrides. The last `preset` in either layer wins
    /// and is applied before anything else.
    pub fn resolve(config: &[(String, String)], flags: &[(String, String)]) -> Result<Self> {
        let preset = config
            .iter()
            .chain(flags)
            .rfind(|(k, _)| k == "preset")
            .map(|(_, v)| v.parse())
            .transpose()?
            .unwrap_or(Preset::Full);
        let mut s = Settings::preset(preset);
        for (key, value) in config.iter().chain(flags) {
            if key != "preset" {
                s.set(key, value)?;
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = |e: &dyn fmt::Display| anyhow!("invalid value `{v}` for `{key}`: {e}");
        macro_rules! parse {
            () => {
                v.parse().map_err(|e| bad(&e))?
            };
        }
        let sampler = &mut self.train.sampler;
        match key {
            "preset" => self.preset = parse!(),
            "synthetic" => self.synthetic = parse_bool(v).map_err(|e| bad(&e))?,
            "features" => {
                self.features = Some(PathBuf::from(v));
                self.synthetic = false;
            }
            "labels" => {
                self.labels = Some(PathBuf::from(v));
                self.synthetic = false;
            }
            "n_samples" => self.spec.n_samples = parse!(),
            "n_classes" => self.spec.n_classes = parse!(),
            "feature_dim" => self.spec.feature_dim = parse!(),
            "n_prototypes" => self.spec.n_prototypes = parse!(),
            "label_noise_rate" => self.spec.label_noise_rate = parse!(),
            "feature_noise_sigma" => self.spec.feature_noise_sigma = parse!(),
            "nuisance_scale" => self.spec.nuisance_scale = parse!(),
            "split" => self.split = parse_split(v).map_err(|e| bad(&e))?,
            "seed" => self.set_seed(parse!()),
            "epochs" => self.train.epochs = parse!(),
            "batch_size" => self.train.batch_size = parse!(),
            "lr" => self.train.lr0 = parse!(),
            "decay_every_epochs" => self.train.decay_every_epochs = parse!(),
            "decay_factor" => self.train.decay_factor = parse!(),
            "alpha" => self.train.alpha = parse!(),
            "adam_beta1" => self.train.adam.beta1 = parse!(),
            "adam_beta2" => self.train.adam.beta2 = parse!(),
            "adam_eps" => self.train.adam.eps = parse!(),
            "anchor_strategy" => sampler.anchor_strategy = parse!(),
            "image_strategy" => sampler.image_strategy = parse!(),
            "anchors_fraction" => sampler.anchor_fraction = parse!(),
            "positives" => sampler.positives_per_anchor = parse!(),
            "negatives" => sampler.negatives_per_anchor = parse!(),
            "beta" => sampler.beta = parse!(),
            "gamma" => sampler.gamma = parse!(),
            "combination" => sampler.combination = parse!(),
            "label_similarity" => sampler.label_similarity = parse!(),
            "diversity" => sampler.diversity_rule = parse!(),
            "hidden" => self.train.hidden = parse_list(v).map_err(|e| bad(&e))?,
            "embedding_size" => self.train.embedding_size = parse!(),
            "normalize" => self.train.normalize_embeddings = parse_bool(v).map_err(|e| bad(&e))?,
            "k" => {
                self.k = match v {
                    "auto" => None,
                    _ => Some(parse!()),
                }
            }
            "checkpoint_every" => self.checkpoint_every = parse!(),
            "wall_time" => self.wall_time = parse_bool(v).map_err(|e| bad(&e))?,
            k if INFORMATIONAL.contains(&k) || k.starts_with("artifact.") => {}
            other => bail!("unknown setting `{other}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.synthetic && (self.features.is_none() || self.labels.is_none()) {
            bail!("both --features and --labels are required unless --synthetic is set");
        }
        if self.synthetic {
            self.spec.validate()?;
        }
        self.train.validate()?;
        if self.k == Some(0) {
            bail!("k must be positive");
        }
        Ok(())
    }

    /// Every setting as key/value pairs, in a fixed order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        let s = &t.sampler;
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut out = vec![
            ("preset", self.preset.to_string()),
            ("synthetic", self.synthetic.to_string()),
        ];
        if !self.synthetic {
            out.push(("features", path(&self.features)));
            out.push(("labels", path(&self.labels)));
        }
        out.extend([
            ("n_samples", self.spec.n_samples.to_string()),
            ("n_classes", self.spec.n_classes.to_string()),
            ("feature_dim", self.spec.feature_dim.to_string()),
            ("n_prototypes", self.spec.n_prototypes.to_string()),
            ("label_noise_rate", self.spec.label_noise_rate.to_string()),
            (
                "feature_noise_sigma",
                self.spec.feature_noise_sigma.to_string(),
            ),
            ("nuisance_scale", self.spec.nuisance_scale.to_string()),
            (
                "split",
                format!("{},{},{}", self.split.0, self.split.1, self.split.2),
            ),
            ("seed", self.seed.to_string()),
            ("epochs", t.epochs.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("lr", t.lr0.to_string()),
            ("decay_every_epochs", t.decay_every_epochs.to_string()),
            ("decay_factor", t.decay_factor.to_string()),
            ("alpha", t.alpha.to_string()),
            ("adam_beta1", t.adam.beta1.to_string()),
            ("adam_beta2", t.adam.beta2.to_string()),
            ("adam_eps", t.adam.eps.to_string()),
            ("anchor_strategy", s.anchor_strategy.to_string()),
            ("image_strategy", s.image_strategy.to_string()),
            ("anchors_fraction", s.anchor_fraction.to_string()),
            ("positives", s.positives_per_anchor.to_string()),
            ("negatives", s.negatives_per_anchor.to_string()),
            ("beta", s.beta.to_string()),
            ("gamma", s.gamma.to_string()),
            ("combination", s.combination.to_string()),
            ("label_similarity", s.label_similarity.to_string()),
            ("diversity", s.diversity_rule.to_string()),
            (
                "hidden",
                t.hidden
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("embedding_size", t.embedding_size.to_string()),
            ("normalize", t.normalize_embeddings.to_string()),
            ("k", self.k.map_or("auto".into(), |k| k.to_string())),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("wall_time", self.wall_time.to_string()),
        ]);
        out
    }

    /// Loads or generates the dataset and splits it with the run seed.
    pub fn dataset(&self) -> Result<Dataset> {
        let ds = if self.synthetic {
            generate_synthetic(&self.spec)?
        } else {
            let (f, l) = (
                self.features.as_deref().unwrap(),
                self.labels.as_deref().unwrap(),
            );
            load_dataset(f, l)?
        };
        Ok(split_dataset(ds, self.split, &mut seeded_rng(self.seed))?)
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|x| x.trim().parse().map_err(|e| format!("{e}")))
        .collect()
}

fn parse_split(v: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|x| x.trim().parse().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected three comma-separated fractions".into()),
    }
}

/// Parses a key=value file. Blank lines and lines starting with `#` are
/// skipped; keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got `{line}`", n + 1))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", path.display()))
}

/// Manifest text: the tool version, the command, every resolved setting
/// and the artifacts written.
pub fn manifest_text(settings: &Settings, command: &str, artifacts: &[(&str, &Path)]) -> String {
    let mut text = format!("tool_version={}\ncommand={command}\n", tripsel::VERSION);
    for (k, v) in settings.pairs() {
        text.push_str(&format!("{k}={v}\n"));
    }
    for (name, path) in artifacts {
        text.push_str(&format!("artifact.{name}={}\n", path.display()));
    }
    text
}
