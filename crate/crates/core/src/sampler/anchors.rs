//! Anchor selection: diverse (DAS), random (RAS) and whole-batch (BAS).

use rand::seq::index::sample;
use rand::Rng;

use crate::config::DiversityRule;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn check_count(h: usize, b: usize) -> Result<()> {
    if h > b {
        return Err(Error::config(format!(
            "cannot select {h} anchors from a batch of {b}"
        )));
    }
    Ok(())
}

/// Index of the largest score among `candidates`, lowest index on ties.
pub(crate) fn argmax_lowest<I>(candidates: I, score: impl Fn(usize) -> f64) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
{
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let s = score(i);
        match best {
            Some((bi, bs)) if s < bs || (s == bs && i > bi) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Folds the distance to a newly selected item into a candidate's running
/// aggregate over the selected set.
#[inline]
pub(crate) fn fold_distance(rule: DiversityRule, acc: f64, d: f64) -> f64 {
    match rule {
        DiversityRule::MaxOfMax => acc.max(d),
        DiversityRule::MaxOfMin => acc.min(d),
    }
}

#[inline]
pub(crate) fn fold_identity(rule: DiversityRule) -> f64 {
    match rule {
        DiversityRule::MaxOfMax => f64::NEG_INFINITY,
        DiversityRule::MaxOfMin => f64::INFINITY,
    }
}

/// Diverse anchor selection with a random first anchor.
pub fn select_anchors_das<R: Rng + ?Sized>(
    dist_norm: &Matrix,
    h: usize,
    rule: DiversityRule,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let b = dist_norm.rows();
    check_count(h, b)?;
    if h == 0 {
        return Ok(Vec::new());
    }
    let first = rng.random_range(0..b);
    select_anchors_das_from(dist_norm, h, first, rule)
}

/// Diverse anchor selection starting from a fixed first anchor.
///
/// Each further anchor maximizes, over the unselected batch items, the
/// aggregate (max by default) of its normalized distances to the anchors
/// selected so far.
pub fn select_anchors_das_from(
    dist_norm: &Matrix,
    h: usize,
    first: usize,
    rule: DiversityRule,
) -> Result<Vec<usize>> {
    let b = dist_norm.rows();
    check_count(h, b)?;
    if first >= b {
        return Err(Error::config(format!(
            "first anchor {first} outside batch of {b}"
        )));
    }
    if h == 0 {
        return Ok(Vec::new());
    }
    let mut selected = vec![false; b];
    let mut agg = vec![fold_identity(rule); b];
    let mut anchors = Vec::with_capacity(h);
    let mut last = first;
    loop {
        anchors.push(last);
        selected[last] = true;
        if anchors.len() == h {
            break;
        }
        for (i, a) in agg.iter_mut().enumerate() {
            *a = fold_distance(rule, *a, dist_norm.get(i, last));
        }
        last = argmax_lowest((0..b).filter(|&i| !selected[i]), |i| agg[i])
            .expect("h <= b leaves a candidate");
    }
    Ok(anchors)
}

/// `h` distinct anchors drawn uniformly without replacement.
pub fn select_anchors_ras<R: Rng + ?Sized>(b: usize, h: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_count(h, b)?;
    Ok(sample(rng, b, h).into_vec())
}

/// Every batch item, in order.
pub fn select_anchors_bas(b: usize) -> Vec<usize> {
    (0..b).collect()
}
