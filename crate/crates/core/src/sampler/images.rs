//! Positive/negative selection for one anchor: RHDIS, RIS and BIS.

use rand::seq::index::sample;
use rand::Rng;

use super::anchors::{argmax_lowest, fold_distance, fold_identity};
use crate::config::DiversityRule;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Informativeness of every batch item with respect to one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct InformativenessRow {
    pub anchor: usize,
    /// Positive informativeness `beta * S + (1 - beta) * D`.
    pub ip: Vec<f64>,
    /// Negative informativeness `beta * (1 - S) + (1 - beta) * (1 - D)`.
    pub in_: Vec<f64>,
}

impl InformativenessRow {
    pub fn len(&self) -> usize {
        self.ip.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ip.is_empty()
    }

    /// (min, max) of `scores` ignoring the anchor's own entry.
    pub fn extremes(&self, scores: &[f64]) -> Option<(f64, f64)> {
        scores
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.anchor)
            .map(|(_, &v)| v)
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}

/// Scores every batch item against `anchor`.
///
/// `label_sim_row[b]` is `S(anchor, b)` and `dist_norm` row `anchor` gives
/// `D(anchor, b)`; both are expected in `[0, 1]`.
pub fn informativeness(
    anchor: usize,
    dist_norm: &Matrix,
    label_sim_row: &[f64],
    beta: f64,
) -> Result<InformativenessRow> {
    let b = dist_norm.rows();
    if label_sim_row.len() != b {
        return Err(Error::Dimension {
            expected: b,
            actual: label_sim_row.len(),
            context: "label similarity row",
        });
    }
    if anchor >= b {
        return Err(Error::config(format!(
            "anchor {anchor} outside batch of {b}"
        )));
    }
    let d = dist_norm.row(anchor);
    let ip = label_sim_row
        .iter()
        .zip(d)
        .map(|(&s, &d)| beta * s + (1.0 - beta) * d)
        .collect();
    let in_ = label_sim_row
        .iter()
        .zip(d)
        .map(|(&s, &d)| beta * (1.0 - s) + (1.0 - beta) * (1.0 - d))
        .collect();
    Ok(InformativenessRow { anchor, ip, in_ })
}

/// Iterative informative-and-diverse selection shared by positives and
/// negatives.
///
/// The first pick is the argmax of `scores`; every later pick maximizes
/// `gamma * score + (1 - gamma) * agg_{c in picked} D(b, c)`. The anchor and
/// everything in `excluded` are never candidates. Ties go to the lowest index.
pub fn select_diverse(
    anchor: usize,
    scores: &[f64],
    dist_norm: &Matrix,
    count: usize,
    gamma: f64,
    rule: DiversityRule,
    excluded: &[usize],
) -> Result<Vec<usize>> {
    let b = dist_norm.rows();
    let mut taken = vec![false; b];
    taken[anchor] = true;
    for &e in excluded {
        taken[e] = true;
    }
    let available = taken.iter().filter(|&&t| !t).count();
    if count > available {
        return Err(Error::config(format!(
            "cannot select {count} images: only {available} candidates for anchor {anchor}"
        )));
    }
    let mut agg = vec![fold_identity(rule); b];
    let mut picked = Vec::with_capacity(count);
    for t in 0..count {
        let candidates = (0..b).filter(|&i| !taken[i]);
        let next = if t == 0 {
            argmax_lowest(candidates, |i| scores[i])
        } else {
            argmax_lowest(candidates, |i| gamma * scores[i] + (1.0 - gamma) * agg[i])
        }
        .expect("count <= available");
        picked.push(next);
        taken[next] = true;
        for (i, a) in agg.iter_mut().enumerate() {
            *a = fold_distance(rule, *a, dist_norm.get(i, next));
        }
    }
    Ok(picked)
}

pub fn select_positives_rhdis(
    row: &InformativenessRow,
    dist_norm: &Matrix,
    c: usize,
    gamma: f64,
    rule: DiversityRule,
) -> Result<Vec<usize>> {
    select_diverse(row.anchor, &row.ip, dist_norm, c, gamma, rule, &[])
}

/// Negatives for an anchor; `positives` already chosen for it are skipped.
pub fn select_negatives_rhdis(
    row: &InformativenessRow,
    dist_norm: &Matrix,
    c: usize,
    gamma: f64,
    rule: DiversityRule,
    positives: &[usize],
) -> Result<Vec<usize>> {
    select_diverse(row.anchor, &row.in_, dist_norm, c, gamma, rule, positives)
}

/// `c` random positives and `c` random negatives, all distinct and never the anchor.
pub fn select_images_ris<R: Rng + ?Sized>(
    anchor: usize,
    b: usize,
    c: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    select_images_ris_counts(anchor, b, c, c, rng)
}

/// Random selection with separate positive and negative counts.
pub fn select_images_ris_counts<R: Rng + ?Sized>(
    anchor: usize,
    b: usize,
    n_pos: usize,
    n_neg: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if anchor >= b {
        return Err(Error::config(format!(
            "anchor {anchor} outside batch of {b}"
        )));
    }
    if n_pos + n_neg > b - 1 {
        return Err(Error::config(format!(
            "random image selection needs {} images but only B - 1 = {} are available",
            n_pos + n_neg,
            b - 1
        )));
    }
    let drawn: Vec<usize> = sample(rng, b - 1, n_pos + n_neg)
        .into_iter()
        .map(|i| if i >= anchor { i + 1 } else { i })
        .collect();
    let negatives = drawn[n_pos..].to_vec();
    let mut positives = drawn;
    positives.truncate(n_pos);
    Ok((positives, negatives))
}

/// Every other batch item as both positive and negative.
pub fn select_images_bis(anchor: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
    let others: Vec<usize> = (0..b).filter(|&i| i != anchor).collect();
    (others.clone(), others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn informativeness_arithmetic() {
        let mut d = Matrix::zeros(2, 2);
        d.set(0, 1, 0.6);
        d.set(1, 0, 0.6);
        let row = informativeness(0, &d, &[1.0, 0.8], 0.5).unwrap();
        assert!((row.ip[1] - 0.7).abs() < 1e-15);
        assert!((row.in_[1] - 0.3).abs() < 1e-15);
        assert!((row.in_[1] - (1.0 - row.ip[1])).abs() < 1e-15);
        let pure = informativeness(0, &d, &[1.0, 0.8], 1.0).unwrap();
        assert_eq!(pure.ip[1], 0.8);
    }

    fn table() -> (Matrix, InformativenessRow) {
        // B = 5, anchor 0.
        let d = Matrix::from_rows(&[
            [0.0, 0.2, 0.9, 0.4, 1.0],
            [0.2, 0.0, 0.5, 0.0, 0.7],
            [0.9, 0.5, 0.0, 0.3, 0.6],
            [0.4, 0.0, 0.3, 0.0, 0.8],
            [1.0, 0.7, 0.6, 0.8, 0.0],
        ])
        .unwrap();
        let s = [1.0, 0.9, 0.1, 0.62, 0.5];
        let row = informativeness(0, &d, &s, 0.5).unwrap();
        (d, row)
    }

    /// Direct enumeration of the selection rule: at each step evaluate
    /// every candidate's score from scratch.
    fn brute(
        scores: &[f64],
        d: &Matrix,
        anchor: usize,
        c: usize,
        gamma: f64,
        excl: &[usize],
    ) -> Vec<usize> {
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < c {
            let mut best: Option<(usize, f64)> = None;
            for (cand, &score) in scores.iter().enumerate() {
                if cand == anchor || picked.contains(&cand) || excl.contains(&cand) {
                    continue;
                }
                let s = if picked.is_empty() {
                    score
                } else {
                    let div = picked
                        .iter()
                        .map(|&p| d.get(cand, p))
                        .fold(f64::MIN, f64::max);
                    gamma * score + (1.0 - gamma) * div
                };
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((cand, s));
                }
            }
            picked.push(best.unwrap().0);
        }
        picked
    }

    #[test]
    fn five_item_instance_matches_enumeration() {
        let (d, row) = table();
        for gamma in [0.0, 0.1, 0.5, 1.0] {
            for c in 1..=2 {
                let p =
                    select_positives_rhdis(&row, &d, c, gamma, DiversityRule::MaxOfMax).unwrap();
                assert_eq!(p, brute(&row.ip, &d, 0, c, gamma, &[]));
                let n = select_negatives_rhdis(&row, &d, c, gamma, DiversityRule::MaxOfMax, &p)
                    .unwrap();
                assert_eq!(n, brute(&row.in_, &d, 0, c, gamma, &p));
                assert!(n.iter().all(|x| !p.contains(x)));
            }
        }
        // gamma = 0.1: ip = [-, 0.55, 0.5, 0.51, 0.75] -> 4 first;
        // then 0.1*ip + 0.9*D(., 4): 1 -> 0.685, 2 -> 0.59, 3 -> 0.771
        let p = select_positives_rhdis(&row, &d, 2, 0.1, DiversityRule::MaxOfMax).unwrap();
        assert_eq!(p, vec![4, 3]);
    }

    #[test]
    fn gamma_one_is_top_c() {
        let (d, row) = table();
        let p = select_positives_rhdis(&row, &d, 4, 1.0, DiversityRule::MaxOfMax).unwrap();
        assert_eq!(p, vec![4, 1, 3, 2]);
        let n = select_negatives_rhdis(&row, &d, 4, 1.0, DiversityRule::MaxOfMax, &[]).unwrap();
        assert_eq!(n, vec![2, 3, 1, 4]);
    }

    #[test]
    fn gamma_zero_second_pick_is_farthest_from_first() {
        let (d, row) = table();
        let p = select_positives_rhdis(&row, &d, 2, 0.0, DiversityRule::MaxOfMax).unwrap();
        assert_eq!(p[0], 4);
        assert_eq!(p[1], 3); // D(3,4)=0.8 is the largest among 1,2,3
    }

    #[test]
    fn single_negative_is_argmax() {
        let (d, row) = table();
        let n = select_negatives_rhdis(&row, &d, 1, 0.1, DiversityRule::MaxOfMax, &[]).unwrap();
        assert_eq!(n, vec![2]);
    }

    #[test]
    fn too_many_requested() {
        let (d, row) = table();
        assert!(select_positives_rhdis(&row, &d, 5, 0.1, DiversityRule::MaxOfMax).is_err());
        assert!(
            select_negatives_rhdis(&row, &d, 2, 0.1, DiversityRule::MaxOfMax, &[1, 2, 3]).is_err()
        );
    }

    #[test]
    fn ris_properties() {
        for seed in 0..50 {
            let (p, n) = select_images_ris(3, 9, 4, &mut seeded_rng(seed)).unwrap();
            assert_eq!((p.len(), n.len()), (4, 4));
            assert!(!p.contains(&3) && !n.contains(&3));
            assert!(p.iter().all(|x| !n.contains(x)));
            assert!(p.iter().chain(&n).all(|&x| x < 9));
        }
        let a = select_images_ris(0, 20, 3, &mut seeded_rng(5)).unwrap();
        let b = select_images_ris(0, 20, 3, &mut seeded_rng(5)).unwrap();
        assert_eq!(a, b);
        assert!(select_images_ris(0, 6, 3, &mut seeded_rng(5)).is_err());
    }

    #[test]
    fn bis_is_everyone_else() {
        let (p, n) = select_images_bis(2, 4);
        assert_eq!(p, vec![0, 1, 3]);
        assert_eq!(n, vec![0, 1, 3]);
    }
}
