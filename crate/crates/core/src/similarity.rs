//! Label-space similarity and embedding-space distances.

use crate::config::LabelSimilarity;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::types::LabelVector;

/// Soft similarity of two multi-label vectors, in `[0, 1]`.
///
/// Cosine: `|a ∩ b| / sqrt(|a| |b|)`. Jaccard: `|a ∩ b| / |a ∪ b|`.
pub fn label_similarity(a: &LabelVector, b: &LabelVector, kind: LabelSimilarity) -> Result<f64> {
    let inter = a.intersection(b)? as f64;
    let (na, nb) = (a.count(), b.count());
    if na == 0 || nb == 0 {
        return Err(Error::EmptyLabels);
    }
    Ok(match kind {
        LabelSimilarity::Cosine => inter / ((na * nb) as f64).sqrt(),
        LabelSimilarity::Jaccard => inter / a.union(b)? as f64,
    })
}

/// Full `B x B` label similarity matrix for a batch.
pub fn label_similarity_matrix(labels: &[LabelVector], kind: LabelSimilarity) -> Result<Matrix> {
    let b = labels.len();
    let mut out = Matrix::zeros(b, b);
    for i in 0..b {
        out.set(i, i, label_similarity(&labels[i], &labels[i], kind)?);
        for j in i + 1..b {
            let s = label_similarity(&labels[i], &labels[j], kind)?;
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    Ok(out)
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Raw Euclidean distances between every pair of rows.
pub fn pairwise_euclidean(embeddings: &Matrix) -> Result<Matrix> {
    if !embeddings.is_finite() {
        return Err(Error::NonFinite("embeddings"));
    }
    let b = embeddings.rows();
    let mut out = Matrix::zeros(b, b);
    for i in 0..b {
        for j in i + 1..b {
            let d = euclidean(embeddings.row(i), embeddings.row(j));
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    Ok(out)
}

/// Min-max rescaling of a distance matrix using off-diagonal statistics.
///
/// The diagonal is forced to 0. When every off-diagonal entry is equal the
/// result is all zeros.
pub fn minmax_normalize(dist_raw: &Matrix) -> Result<Matrix> {
    let b = dist_raw.rows();
    if b < 2 {
        return Err(Error::BatchTooSmall(b));
    }
    if dist_raw.cols() != b {
        return Err(Error::Dimension {
            expected: b,
            actual: dist_raw.cols(),
            context: "square distance matrix",
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..b {
        for j in 0..b {
            if i != j {
                let v = dist_raw.get(i, j);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let range = hi - lo;
    let mut out = Matrix::zeros(b, b);
    if range > 0.0 {
        for i in 0..b {
            for j in 0..b {
                if i != j {
                    let v = (dist_raw.get(i, j) - lo) / range;
                    out.set(i, j, v.clamp(0.0, 1.0));
                }
            }
        }
    }
    Ok(out)
}
