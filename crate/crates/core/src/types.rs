//! Domain types shared by the sampler, loss, trainer and retrieval code.
//!
//! Indices inside a [`BatchView`] and a [`TripletSet`] are batch-local
//! (`0..B`). Dataset indices only appear in [`BatchView::sample_indices`].

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::{minmax_normalize, pairwise_euclidean};

/// Binary multi-label annotation of one sample. Always has at least one set bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelVector {
    bits: Vec<bool>,
}

impl LabelVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if !bits.iter().any(|&b| b) {
            return Err(Error::EmptyLabels);
        }
        Ok(LabelVector { bits })
    }

    /// Builds a vector of length `n_classes` with the listed classes set.
    pub fn from_indices(n_classes: usize, classes: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n_classes];
        for &c in classes {
            if c >= n_classes {
                return Err(Error::Dimension {
                    expected: n_classes,
                    actual: c + 1,
                    context: "label class index",
                });
            }
            bits[c] = true;
        }
        LabelVector::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn classes(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    fn check_len(&self, other: &LabelVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                actual: other.len(),
                context: "label vector length",
            });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &LabelVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count())
    }

    pub fn union(&self, other: &LabelVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a || b)
            .count())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub labels: LabelVector,
}

/// One mini-batch as seen by the sampler.
#[derive(Clone, Debug)]
pub struct BatchView {
    pub sample_indices: Vec<usize>,
    pub embeddings: Matrix,
    pub labels: Vec<LabelVector>,
    pub dist_raw: Matrix,
    pub dist_norm: Matrix,
}

impl BatchView {
    /// Computes the raw and min-max normalized distance matrices from `embeddings`.
    pub fn new(
        sample_indices: Vec<usize>,
        embeddings: Matrix,
        labels: Vec<LabelVector>,
    ) -> Result<Self> {
        let b = embeddings.rows();
        if sample_indices.len() != b || labels.len() != b {
            return Err(Error::Dimension {
                expected: b,
                actual: sample_indices.len().min(labels.len()),
                context: "batch rows",
            });
        }
        let dist_raw = pairwise_euclidean(&embeddings)?;
        let dist_norm = minmax_normalize(&dist_raw)?;
        Ok(BatchView {
            sample_indices,
            embeddings,
            labels,
            dist_raw,
            dist_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_indices.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Positives and negatives chosen for one anchor, in selection order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorSelection {
    pub anchor: usize,
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripletSet {
    pub triplets: Vec<Triplet>,
    /// One entry per anchor, in anchor selection order.
    pub per_anchor: Vec<AnchorSelection>,
}

impl TripletSet {
    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn anchors(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_anchor.iter().map(|s| s.anchor)
    }

    pub fn selection_for(&self, anchor: usize) -> Option<&AnchorSelection> {
        self.per_anchor.iter().find(|s| s.anchor == anchor)
    }

    /// Largest batch-local index referenced anywhere, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.triplets
            .iter()
            .flat_map(|t| [t.anchor, t.positive, t.negative])
            .max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_vector_requires_a_set_bit() {
        assert!(matches!(
            LabelVector::new(vec![false, false]),
            Err(Error::EmptyLabels)
        ));
        assert!(LabelVector::new(vec![false, true]).is_ok());
    }

    #[test]
    fn label_set_ops() {
        let a = LabelVector::from_indices(4, &[0, 1]).unwrap();
        let b = LabelVector::from_indices(4, &[1, 3]).unwrap();
        assert_eq!(a.intersection(&b).unwrap(), 1);
        assert_eq!(a.union(&b).unwrap(), 3);
        assert_eq!(b.classes().collect::<Vec<_>>(), vec![1, 3]);
        let c = LabelVector::from_indices(3, &[0]).unwrap();
        assert!(a.intersection(&c).is_err());
    }

    #[test]
    fn batch_view_distances() {
        let emb = Matrix::from_rows(&[[0.0, 0.0], [3.0, 4.0], [0.0, 1.0]]).unwrap();
        let l = LabelVector::from_indices(2, &[0]).unwrap();
        let view = BatchView::new(vec![7, 8, 9], emb, vec![l.clone(), l.clone(), l]).unwrap();
        assert_eq!(view.dist_raw.get(0, 1), 5.0);
        assert_eq!(view.dist_norm.get(0, 2), 0.0);
        assert_eq!(view.dist_norm.get(0, 1), 1.0);
    }
}
