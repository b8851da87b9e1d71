//! Exact k-nn retrieval and multi-label retrieval metrics.
//!
//! For a query with label set `Q` and a retrieved item with label set `R`,
//! with `I = |Q ∩ R|`:
//! accuracy `I / |Q ∪ R|`, precision `I / |R|`, recall `I / |Q|`, and F1
//! the harmonic mean of precision and recall (0 when both are 0). Each is
//! averaged over the top-k retrieved items of a query, then over queries.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::data::Dataset;
use crate::embedder::Embedder;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::euclidean;
use crate::types::LabelVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub archive_index: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalResult {
    pub query_id: String,
    /// Nearest first; ties by lowest archive index.
    pub neighbors: Vec<Neighbor>,
}

/// The `k` archive rows closest to `query`, skipping `exclude` if given.
pub fn knn_retrieve(
    query: &[f64],
    archive: &Matrix,
    k: usize,
    exclude: Option<usize>,
) -> Result<Vec<Neighbor>> {
    if query.len() != archive.cols() {
        return Err(Error::Dimension {
            expected: archive.cols(),
            actual: query.len(),
            context: "query embedding",
        });
    }
    let mut all: Vec<Neighbor> = (0..archive.rows())
        .filter(|&i| Some(i) != exclude)
        .map(|i| Neighbor {
            archive_index: i,
            distance: euclidean(query, archive.row(i)),
        })
        .collect();
    if k > all.len() {
        return Err(Error::KTooLarge {
            k,
            available: all.len(),
        });
    }
    all.sort_by(|a, b| match a.distance.total_cmp(&b.distance) {
        Ordering::Equal => a.archive_index.cmp(&b.archive_index),
        o => o,
    });
    all.truncate(k);
    Ok(all)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn pair_metrics(query: &LabelVector, retrieved: &LabelVector) -> Result<PairMetrics> {
    let inter = query.intersection(retrieved)? as f64;
    let (nq, nr) = (query.count(), retrieved.count());
    if nq == 0 || nr == 0 {
        return Err(Error::EmptyLabels);
    }
    let precision = inter / nr as f64;
    let recall = inter / nq as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(PairMetrics {
        accuracy: inter / query.union(retrieved)? as f64,
        precision,
        recall,
        f1,
    })
}

/// Averaged retrieval metrics, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub queries: usize,
    pub k: usize,
}

/// Default retrieval depth: 30 for archives of at least 10 000 items, else 10.
pub fn default_k(archive_size: usize) -> usize {
    if archive_size >= 10_000 {
        30
    } else {
        10
    }
}

/// One side of an evaluation: embeddings with labels and a stable identity
/// per row, used to keep a query from retrieving itself.
pub struct EvalSet<'a> {
    pub embeddings: &'a Matrix,
    pub labels: &'a [LabelVector],
    pub keys: &'a [usize],
}

pub fn evaluate_embeddings(
    queries: &EvalSet<'_>,
    archive: &EvalSet<'_>,
    k: usize,
) -> Result<MetricReport> {
    if queries.embeddings.rows() == 0 {
        return Err(Error::Empty("query set"));
    }
    if archive.embeddings.rows() == 0 {
        return Err(Error::Empty("archive"));
    }
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    let mut sum = PairMetrics::default();
    for q in 0..queries.embeddings.rows() {
        let exclude = archive.keys.iter().position(|&key| key == queries.keys[q]);
        let hits = knn_retrieve(queries.embeddings.row(q), archive.embeddings, k, exclude)?;
        let mut acc = PairMetrics::default();
        for h in &hits {
            let m = pair_metrics(&queries.labels[q], &archive.labels[h.archive_index])?;
            acc.accuracy += m.accuracy;
            acc.precision += m.precision;
            acc.recall += m.recall;
            acc.f1 += m.f1;
        }
        let kf = hits.len() as f64;
        sum.accuracy += acc.accuracy / kf;
        sum.precision += acc.precision / kf;
        sum.recall += acc.recall / kf;
        sum.f1 += acc.f1 / kf;
    }
    let nq = queries.embeddings.rows() as f64;
    Ok(MetricReport {
        accuracy: sum.accuracy / nq,
        precision: sum.precision / nq,
        recall: sum.recall / nq,
        f1: sum.f1 / nq,
        queries: queries.embeddings.rows(),
        k,
    })
}

/// Embeds both index sets of `ds` with `model` and scores top-`k` retrieval.
pub fn evaluate(
    model: &Embedder,
    ds: &Dataset,
    query_idx: &[usize],
    archive_idx: &[usize],
    k: usize,
) -> Result<MetricReport> {
    if query_idx.is_empty() {
        return Err(Error::Empty("query split"));
    }
    if archive_idx.is_empty() {
        return Err(Error::Empty("archive split"));
    }
    let q_emb = model.forward(&ds.features(query_idx))?;
    let a_emb = model.forward(&ds.features(archive_idx))?;
    let (q_labels, a_labels) = (ds.labels(query_idx), ds.labels(archive_idx));
    evaluate_embeddings(
        &EvalSet {
            embeddings: &q_emb,
            labels: &q_labels,
            keys: query_idx,
        },
        &EvalSet {
            embeddings: &a_emb,
            labels: &a_labels,
            keys: archive_idx,
        },
        k,
    )
}

/// Top-`k` neighbors of every query, with sample ids.
pub fn retrieve_all(
    model: &Embedder,
    ds: &Dataset,
    query_idx: &[usize],
    archive_idx: &[usize],
    k: usize,
) -> Result<Vec<RetrievalResult>> {
    let q_emb = model.forward(&ds.features(query_idx))?;
    let a_emb = model.forward(&ds.features(archive_idx))?;
    query_idx
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let exclude = archive_idx.iter().position(|&a| a == q);
            Ok(RetrievalResult {
                query_id: ds.samples[q].id.clone(),
                neighbors: knn_retrieve(q_emb.row(qi), &a_emb, k, exclude)?,
            })
        })
        .collect()
}

pub const REPORT_CSV_HEADER: &str = "method,accuracy,precision,recall,f1,queries,k";

pub fn report_csv_row(method: &str, r: &MetricReport) -> String {
    format!(
        "{method},{},{},{},{},{},{}",
        r.accuracy, r.precision, r.recall, r.f1, r.queries, r.k
    )
}

/// Aligned plain-text table with metrics in percent, one decimal.
pub fn format_table(rows: &[(String, MetricReport)]) -> String {
    let width = rows
        .iter()
        .map(|(m, _)| m.len())
        .max()
        .unwrap_or(0)
        .max("Method".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>8}  {:>9}  {:>6}  {:>8}",
        "Method", "Accuracy", "Precision", "Recall", "F1 Score"
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 43));
    for (m, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8.1}  {:>9.1}  {:>6.1}  {:>8.1}",
            m,
            100.0 * r.accuracy,
            100.0 * r.precision,
            100.0 * r.recall,
            100.0 * r.f1
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(n: usize, c: &[usize]) -> LabelVector {
        LabelVector::from_indices(n, c).unwrap()
    }

    #[test]
    fn duplicate_ranks_first() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [0.2, 0.3], [5.0, 5.0]]).unwrap();
        let hits = knn_retrieve(&[0.2, 0.3], &a, 2, None).unwrap();
        assert_eq!(hits[0].archive_index, 1);
        assert_eq!(hits[0].distance, 0.0);
    }

    #[test]
    fn one_dimensional_archive() {
        let a = Matrix::from_rows(&[[0.0], [1.0], [5.0]]).unwrap();
        let hits = knn_retrieve(&[0.9], &a, 2, None).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.archive_index).collect();
        assert_eq!(ids, vec![1, 0]);
        let all = knn_retrieve(&[0.9], &a, 3, None).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all.windows(2).all(|w| w[0].distance <= w[1].distance));
        assert!(matches!(
            knn_retrieve(&[0.9], &a, 4, None),
            Err(Error::KTooLarge { k: 4, available: 3 })
        ));
        assert!(matches!(
            knn_retrieve(&[0.9], &a, 3, Some(1)),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn ties_by_lowest_index() {
        let a = Matrix::from_rows(&[[1.0], [-1.0], [1.0]]).unwrap();
        let ids: Vec<_> = knn_retrieve(&[0.0], &a, 3, None)
            .unwrap()
            .iter()
            .map(|h| h.archive_index)
            .collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn worked_pair_example() {
        let m = pair_metrics(&lv(3, &[1, 2]), &lv(3, &[1])).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall), (0.5, 1.0, 0.5));
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        let same = pair_metrics(&lv(3, &[0, 2]), &lv(3, &[0, 2])).unwrap();
        assert_eq!(
            (same.accuracy, same.precision, same.recall, same.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
        let none = pair_metrics(&lv(3, &[0]), &lv(3, &[1, 2])).unwrap();
        assert_eq!(
            (none.accuracy, none.precision, none.recall, none.f1),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn self_is_excluded() {
        let emb = Matrix::from_rows(&[[0.0], [0.1], [3.0]]).unwrap();
        let labels = vec![lv(2, &[0]), lv(2, &[1]), lv(2, &[0])];
        let keys = [10, 11, 12];
        let set = EvalSet {
            embeddings: &emb,
            labels: &labels,
            keys: &keys,
        };
        // query 10 would retrieve itself at distance 0; instead it gets 11 (disjoint)
        let r = evaluate_embeddings(&set, &set, 1).unwrap();
        // 10 -> 11 (0), 11 -> 10 (0), 12 -> 11 (0)
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn table_layout() {
        let r = MetricReport {
            accuracy: 0.545,
            precision: 0.633,
            recall: 0.665,
            f1: 0.648,
            queries: 1,
            k: 10,
        };
        let t = format_table(&[("DAS-RHDIS".into(), r)]);
        let line = t.lines().nth(2).unwrap();
        assert!(line.starts_with("DAS-RHDIS"));
        assert!(
            line.contains("54.5")
                && line.contains("63.3")
                && line.contains("66.5")
                && line.contains("64.8")
        );
    }
}
