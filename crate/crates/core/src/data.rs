//! Datasets: file formats, splitting and a synthetic multi-label generator.
//!
//! # Files
//!
//! Features CSV: one row per sample, first column the sample id, then `F`
//! real values. A header row is optional and recognized by a non-numeric
//! second field.
//!
//! Labels CSV: a header row `id,<class 1>,..,<class N>`, then one row per
//! sample with `0`/`1` entries. Every row needs at least one `1`.
//!
//! Binary features (little-endian): magic `TSFEAT01`, `M: u64`, `F: u64`,
//! then `M x F` row-major `f32`. Row `i` belongs to the `i`-th sample of
//! the labels file.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded_rng;
use crate::types::{LabelVector, Sample};

pub const BINARY_FEATURES_MAGIC: &[u8; 8] = b"TSFEAT01";

/// Disjoint index lists into [`Dataset::samples`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub class_names: Vec<String>,
    pub splits: Splits,
}

impl Dataset {
    /// Checks that every sample shares the feature length and class count,
    /// and that features are finite. Splits start empty.
    pub fn new(samples: Vec<Sample>, class_names: Vec<String>) -> Result<Self> {
        let f = samples.first().map_or(0, |s| s.features.len());
        for s in &samples {
            if s.features.len() != f {
                return Err(Error::Dimension {
                    expected: f,
                    actual: s.features.len(),
                    context: "feature length",
                });
            }
            if s.labels.len() != class_names.len() {
                return Err(Error::Dimension {
                    expected: class_names.len(),
                    actual: s.labels.len(),
                    context: "label length",
                });
            }
            if !s.features.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("features"));
            }
        }
        Ok(Dataset {
            samples,
            class_names,
            splits: Splits::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self, indices: &[usize]) -> Matrix {
        let f = self.feature_dim();
        let mut data = Vec::with_capacity(indices.len() * f);
        for &i in indices {
            data.extend_from_slice(&self.samples[i].features);
        }
        Matrix::from_vec(indices.len(), f, data).expect("uniform feature length")
    }

    pub fn labels(&self, indices: &[usize]) -> Vec<LabelVector> {
        indices
            .iter()
            .map(|&i| self.samples[i].labels.clone())
            .collect()
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_feature_csv(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    let mut width = None;
    for (line, rec) in csv_reader(&text).records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        if rec.len() < 2 {
            return Err(Error::format(
                path,
                format!("row {}: need an id and at least one value", line + 1),
            ));
        }
        if line == 0 && rec[1].parse::<f64>().is_err() {
            continue;
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::format(path, format!("row {}: {e}", line + 1)))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(
                path,
                format!("row {}: non-finite feature", line + 1),
            ));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::format(
                    path,
                    format!(
                        "row {}: ragged row with {} values, expected {w}",
                        line + 1,
                        values.len()
                    ),
                ))
            }
            _ => {}
        }
        rows.push((rec[0].to_string(), values));
    }
    Ok(rows)
}

/// Class names and `(id, labels)` rows.
type LabelTable = (Vec<String>, Vec<(String, LabelVector)>);

fn parse_label_csv(path: &Path) -> Result<LabelTable> {
    let text = read_to_string(path)?;
    let mut records = csv_reader(&text).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::format(path, "missing header row"))?
        .map_err(|e| Error::format(path, e.to_string()))?;
    if header.len() < 2 {
        return Err(Error::format(
            path,
            "header needs an id column and at least one class",
        ));
    }
    let classes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        if rec.len() != classes.len() + 1 {
            return Err(Error::format(
                path,
                format!(
                    "row {line}: {} label columns, expected {}",
                    rec.len() - 1,
                    classes.len()
                ),
            ));
        }
        let bits = rec
            .iter()
            .skip(1)
            .map(|v| match v {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::format(
                    path,
                    format!("row {line}: non-binary label `{other}`"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = LabelVector::new(bits).map_err(|_| {
            Error::format(
                path,
                format!("row {line} (id {}): sample has no class label", &rec[0]),
            )
        })?;
        rows.push((rec[0].to_string(), labels));
    }
    Ok((classes, rows))
}

fn read_binary_features(path: &Path, bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let bad = |m: &str| Error::format(path, m.to_string());
    if bytes.len() < 24 {
        return Err(bad("truncated binary features header"));
    }
    let m = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let f = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
    let body = &bytes[24..];
    let expected = m
        .checked_mul(f)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("size overflow"))?;
    if body.len() != expected {
        return Err(bad(&format!(
            "expected {expected} bytes of f32 data for {m}x{f}, found {}",
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite feature"));
    }
    Ok(values
        .chunks(f.max(1))
        .take(m)
        .map(<[f64]>::to_vec)
        .collect())
}

/// Loads features (CSV or binary) and labels (CSV) and joins them on id.
pub fn load_dataset(features_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let (class_names, label_rows) = parse_label_csv(labels_path)?;
    let raw = fs::read(features_path).map_err(|e| Error::io(features_path, e))?;
    let feature_rows: Vec<(String, Vec<f64>)> = if raw.starts_with(BINARY_FEATURES_MAGIC) {
        let rows = read_binary_features(features_path, &raw)?;
        if rows.len() != label_rows.len() {
            return Err(Error::format(
                features_path,
                format!(
                    "{} feature rows but {} label rows",
                    rows.len(),
                    label_rows.len()
                ),
            ));
        }
        label_rows
            .iter()
            .map(|(id, _)| id.clone())
            .zip(rows)
            .collect()
    } else {
        parse_feature_csv(features_path)?
    };

    let mut by_id: HashMap<&str, &LabelVector> = HashMap::with_capacity(label_rows.len());
    for (id, l) in &label_rows {
        if by_id.insert(id.as_str(), l).is_some() {
            return Err(Error::format(labels_path, format!("duplicate id `{id}`")));
        }
    }
    let mut seen = HashMap::with_capacity(feature_rows.len());
    let mut samples = Vec::with_capacity(feature_rows.len());
    for (id, features) in feature_rows {
        let labels = by_id.get(id.as_str()).ok_or_else(|| {
            Error::format(labels_path, format!("id `{id}` has features but no labels"))
        })?;
        if seen.insert(id.clone(), ()).is_some() {
            return Err(Error::format(features_path, format!("duplicate id `{id}`")));
        }
        samples.push(Sample {
            id,
            features,
            labels: (*labels).clone(),
        });
    }
    if let Some((id, _)) = label_rows.iter().find(|(id, _)| !seen.contains_key(id)) {
        return Err(Error::format(
            features_path,
            format!("id `{id}` has labels but no features"),
        ));
    }
    Dataset::new(samples, class_names)
}

/// Writes the two CSV files read by [`load_dataset`].
pub fn write_dataset_csv(ds: &Dataset, features_path: &Path, labels_path: &Path) -> Result<()> {
    let mut feats = String::from("id");
    for j in 0..ds.feature_dim() {
        feats.push_str(&format!(",f{j}"));
    }
    feats.push('\n');
    for s in &ds.samples {
        feats.push_str(&s.id);
        for v in &s.features {
            // `Display` for f64 is the shortest string that parses back exactly
            feats.push_str(&format!(",{v}"));
        }
        feats.push('\n');
    }
    let mut labels = String::from("id");
    for c in &ds.class_names {
        labels.push(',');
        labels.push_str(c);
    }
    labels.push('\n');
    for s in &ds.samples {
        labels.push_str(&s.id);
        for &b in s.labels.bits() {
            labels.push_str(if b { ",1" } else { ",0" });
        }
        labels.push('\n');
    }
    fs::write(features_path, feats).map_err(|e| Error::io(features_path, e))?;
    fs::write(labels_path, labels).map_err(|e| Error::io(labels_path, e))
}

/// Writes features in the binary layout (values rounded to `f32`).
pub fn write_features_binary(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(24 + 4 * ds.len() * ds.feature_dim());
    out.extend_from_slice(BINARY_FEATURES_MAGIC);
    out.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    out.extend_from_slice(&(ds.feature_dim() as u64).to_le_bytes());
    for s in &ds.samples {
        for &v in &s.features {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Random train/validation/test split.
///
/// Train and validation sizes are `floor(fraction * M)`. When the fractions
/// sum to one the test split takes the remainder, otherwise it is
/// `floor(test * M)`.
pub fn split_dataset<R: Rng + ?Sized>(
    mut ds: Dataset,
    fractions: (f64, f64, f64),
    rng: &mut R,
) -> Result<Dataset> {
    let (tr, va, te) = fractions;
    let sum = tr + va + te;
    if !(tr > 0.0 && va > 0.0 && te > 0.0) || sum > 1.0 + 1e-9 {
        return Err(Error::config(format!(
            "split fractions {tr}/{va}/{te} must be positive and sum to at most 1"
        )));
    }
    let m = ds.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let n_train = (tr * m as f64 + 1e-9).floor() as usize;
    let n_val = (va * m as f64 + 1e-9).floor() as usize;
    let rest = m - n_train - n_val;
    let n_test = if (sum - 1.0).abs() <= 1e-9 {
        rest
    } else {
        ((te * m as f64 + 1e-9).floor() as usize).min(rest)
    };
    ds.splits = Splits {
        train: order[..n_train].to_vec(),
        val: order[n_train..n_train + n_val].to_vec(),
        test: order[n_train + n_val..n_train + n_val + n_test].to_vec(),
    };
    Ok(ds)
}

/// Parameters of the synthetic multi-label generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_classes: usize,
    pub feature_dim: usize,
    pub n_prototypes: usize,
    pub label_noise_rate: f64,
    pub feature_noise_sigma: f64,
    /// Scale of a label-independent offset added to every sample, drawn
    /// from `n_prototypes` nuisance centroids. 0 disables it.
    pub nuisance_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_samples: 200,
            n_classes: 8,
            feature_dim: 16,
            n_prototypes: 4,
            label_noise_rate: 0.05,
            feature_noise_sigma: 0.1,
            nuisance_scale: 1.0,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_prototypes < 2 {
            return Err(Error::config("synthetic data needs at least 2 prototypes"));
        }
        if self.n_samples == 0 || self.n_classes == 0 || self.feature_dim == 0 {
            return Err(Error::config(
                "synthetic sample, class and feature counts must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.label_noise_rate) {
            return Err(Error::config(format!(
                "label noise rate {} outside [0, 1]",
                self.label_noise_rate
            )));
        }
        if !(self.feature_noise_sigma >= 0.0 && self.feature_noise_sigma.is_finite()) {
            return Err(Error::config(format!(
                "feature noise {} must be >= 0",
                self.feature_noise_sigma
            )));
        }
        if !(self.nuisance_scale >= 0.0 && self.nuisance_scale.is_finite()) {
            return Err(Error::config(format!(
                "nuisance scale {} must be >= 0",
                self.nuisance_scale
            )));
        }
        Ok(())
    }
}

/// One generated sample before label noise, for inspection and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSource {
    pub prototypes: Vec<usize>,
    pub clean_labels: LabelVector,
}

/// Generates a dataset whose label similarity tracks feature geometry.
///
/// Each prototype has a Gaussian centroid and a random set of 1 to 3
/// classes. A sample mixes one prototype (probability 0.6) or two, with
/// weights drawn from [0.3, 0.7], adds one of `n_prototypes` label-independent
/// nuisance offsets (uniformly chosen) and isotropic Gaussian noise, and carries
/// the union of its prototypes' classes. Each label bit then flips with
/// probability `label_noise_rate`; if that leaves no bit set, one class is
/// set uniformly at random.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    Ok(generate_synthetic_with_sources(spec)?.0)
}

pub fn generate_synthetic_with_sources(
    spec: &SyntheticSpec,
) -> Result<(Dataset, Vec<SyntheticSource>)> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let (n, f, p) = (spec.n_classes, spec.feature_dim, spec.n_prototypes);

    let centroids: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..f)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let nuisance: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..f)
                .map(|_| spec.nuisance_scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let proto_labels: Vec<Vec<usize>> = (0..p)
        .map(|_| {
            let k = rng.random_range(1..=3usize.min(n));
            rand::seq::index::sample(&mut rng, n, k).into_vec()
        })
        .collect();

    let mut samples = Vec::with_capacity(spec.n_samples);
    let mut sources = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let protos: Vec<usize> = if rng.random_bool(0.6) {
            vec![rng.random_range(0..p)]
        } else {
            rand::seq::index::sample(&mut rng, p, 2).into_vec()
        };
        let weights: Vec<f64> = if protos.len() == 1 {
            vec![1.0]
        } else {
            let w = rng.random_range(0.3..=0.7);
            vec![w, 1.0 - w]
        };
        let mut features = vec![0.0; f];
        for (&pi, &w) in protos.iter().zip(&weights) {
            for (x, c) in features.iter_mut().zip(&centroids[pi]) {
                *x += w * c;
            }
        }
        let style = &nuisance[rng.random_range(0..p)];
        for (x, s) in features.iter_mut().zip(style) {
            *x += s + spec.feature_noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }

        let mut clean = vec![false; n];
        for &pi in &protos {
            for &c in &proto_labels[pi] {
                clean[c] = true;
            }
        }
        let mut noisy: Vec<bool> = clean
            .iter()
            .map(|&b| {
                if rng.random_bool(spec.label_noise_rate) {
                    !b
                } else {
                    b
                }
            })
            .collect();
        if !noisy.iter().any(|&b| b) {
            noisy[rng.random_range(0..n)] = true;
        }
        samples.push(Sample {
            id: format!("s{i:05}"),
            features,
            labels: LabelVector::new(noisy)?,
        });
        sources.push(SyntheticSource {
            prototypes: protos,
            clean_labels: LabelVector::new(clean)?,
        });
    }
    let class_names = (0..n).map(|c| format!("class{c}")).collect();
    Ok((Dataset::new(samples, class_names)?, sources))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn loads_toy_pair() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "id,a,b\nx,1.0,2.0\ny,3,4\nz,-1,0.5\n");
        let l = write(
            dir.path(),
            "l.csv",
            "id,sea,forest,road\nz,0,0,1\nx,1,1,0\ny,0,1,0\n",
        );
        let ds = load_dataset(&f, &l).unwrap();
        assert_eq!((ds.len(), ds.feature_dim(), ds.n_classes()), (3, 2, 3));
        assert_eq!(ds.samples[0].id, "x");
        assert_eq!(
            ds.samples[0].labels.classes().collect::<Vec<_>>(),
            vec![0, 1]
        );
        assert_eq!(ds.samples[2].features, vec![-1.0, 0.5]);
        assert_eq!(ds.class_names, vec!["sea", "forest", "road"]);
    }

    #[test]
    fn headerless_features() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "x,1.0\ny,3\n");
        let l = write(dir.path(), "l.csv", "id,c\nx,1\ny,1\n");
        assert_eq!(load_dataset(&f, &l).unwrap().len(), 2);
    }

    #[test]
    fn all_zero_label_row_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "x,1.0\ny,3\n");
        let l = write(dir.path(), "l.csv", "id,a,b\nx,1,0\ny,0,0\n");
        let err = load_dataset(&f, &l).unwrap_err().to_string();
        assert!(err.contains("no class label"), "{err}");
    }

    #[test]
    fn missing_label_names_the_id() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "f.csv", "x,1.0\nghost,3\n");
        let l = write(dir.path(), "l.csv", "id,a\nx,1\n");
        let err = load_dataset(&f, &l).unwrap_err().to_string();
        assert!(err.contains("ghost"), "{err}");
    }

    #[test]
    fn malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let l = write(dir.path(), "l.csv", "id,a\nx,1\ny,1\n");
        let ragged = write(dir.path(), "r.csv", "x,1.0,2.0\ny,3\n");
        assert!(load_dataset(&ragged, &l).is_err());
        let f = write(dir.path(), "f.csv", "x,1.0\ny,3\n");
        let nonbin = write(dir.path(), "nb.csv", "id,a\nx,1\ny,2\n");
        assert!(load_dataset(&f, &nonbin)
            .unwrap_err()
            .to_string()
            .contains("non-binary"));
        let extra = write(dir.path(), "e.csv", "id,a\nx,1\ny,1\nw,1\n");
        assert!(load_dataset(&f, &extra)
            .unwrap_err()
            .to_string()
            .contains("`w`"));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_dataset(&missing, &l), Err(Error::Io { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let ds = generate_synthetic(&SyntheticSpec {
            n_samples: 30,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (f, l) = (dir.path().join("f.csv"), dir.path().join("l.csv"));
        write_dataset_csv(&ds, &f, &l).unwrap();
        let back = load_dataset(&f, &l).unwrap();
        assert_eq!(back.class_names, ds.class_names);
        for (a, b) in back.samples.iter().zip(&ds.samples) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.labels, b.labels);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn binary_features_round_trip_to_f32() {
        let ds = generate_synthetic(&SyntheticSpec {
            n_samples: 12,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (f, l, bin) = (
            dir.path().join("f.csv"),
            dir.path().join("l.csv"),
            dir.path().join("f.bin"),
        );
        write_dataset_csv(&ds, &f, &l).unwrap();
        write_features_binary(&ds, &bin).unwrap();
        let raw = fs::read(&bin).unwrap();
        assert_eq!(&raw[..8], BINARY_FEATURES_MAGIC);
        assert_eq!(raw.len(), 24 + 4 * 12 * 16);
        let back = load_dataset(&bin, &l).unwrap();
        for (a, b) in back.samples.iter().zip(&ds.samples) {
            assert_eq!(a.id, b.id);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert_eq!(*x, *y as f32 as f64);
            }
        }
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = generate_synthetic(&SyntheticSpec {
            n_samples: 10,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let a = split_dataset(ds.clone(), (0.6, 0.2, 0.2), &mut seeded_rng(4)).unwrap();
        let s = &a.splits;
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.val)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let b = split_dataset(ds.clone(), (0.6, 0.2, 0.2), &mut seeded_rng(4)).unwrap();
        assert_eq!(a.splits, b.splits);
        let partial = split_dataset(ds.clone(), (0.5, 0.2, 0.1), &mut seeded_rng(4)).unwrap();
        assert_eq!(partial.splits.test.len(), 1);
        assert!(split_dataset(ds.clone(), (0.7, 0.3, 0.2), &mut seeded_rng(4)).is_err());
        assert!(split_dataset(ds, (0.0, 0.5, 0.5), &mut seeded_rng(4)).is_err());
    }

    #[test]
    fn noiseless_labels_equal_prototype_union() {
        let spec = SyntheticSpec {
            label_noise_rate: 0.0,
            feature_noise_sigma: 0.0,
            ..SyntheticSpec::default()
        };
        let (ds, sources) = generate_synthetic_with_sources(&spec).unwrap();
        for (s, src) in ds.samples.iter().zip(&sources) {
            assert_eq!(s.labels, src.clean_labels);
        }
    }

    #[test]
    fn full_flip_single_class_is_redrawn() {
        let spec = SyntheticSpec {
            n_classes: 1,
            label_noise_rate: 1.0,
            n_samples: 20,
            ..SyntheticSpec::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert!(ds.samples.iter().all(|s| s.labels.bits() == [true]));
    }

    #[test]
    fn synthetic_is_deterministic_and_validated() {
        let spec = SyntheticSpec::default();
        assert_eq!(
            generate_synthetic(&spec).unwrap(),
            generate_synthetic(&spec).unwrap()
        );
        let other = SyntheticSpec {
            seed: 2,
            ..spec.clone()
        };
        assert_ne!(
            generate_synthetic(&other).unwrap(),
            generate_synthetic(&spec).unwrap()
        );
        assert!(generate_synthetic(&SyntheticSpec {
            n_prototypes: 1,
            ..spec.clone()
        })
        .is_err());
        assert!(generate_synthetic(&SyntheticSpec {
            label_noise_rate: 1.5,
            ..spec
        })
        .is_err());
    }
}
