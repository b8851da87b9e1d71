//! Triplet mining inside a mini-batch.
//!
//! A sampler run has two stages: pick anchors ([`anchors`]), then pick
//! positives and negatives for each anchor ([`images`]). [`mine`] wires the
//! configured strategies together and combines the per-anchor lists into a
//! [`TripletSet`].

pub mod anchors;
pub mod images;
mod trace;

use rand::Rng;

pub use anchors::{
    select_anchors_bas, select_anchors_das, select_anchors_das_from, select_anchors_ras,
};
pub use images::{
    informativeness, select_diverse, select_images_bis, select_images_ris,
    select_images_ris_counts, select_negatives_rhdis, select_positives_rhdis, InformativenessRow,
};
pub use trace::{AnchorTrace, MiningTrace};

use crate::config::{AnchorStrategy, Combination, ImageStrategy, SamplerConfig};
use crate::error::Result;
use crate::similarity::label_similarity_matrix;
use crate::types::{AnchorSelection, BatchView, Triplet, TripletSet};

/// Combines per-anchor positive/negative lists into triplets.
///
/// `Cartesian` pairs every positive with every negative; `Paired` matches
/// them by rank. Pairs whose positive equals the negative are dropped.
pub fn build_triplets(selections: Vec<AnchorSelection>, combination: Combination) -> TripletSet {
    let mut triplets = Vec::new();
    for sel in &selections {
        let anchor = sel.anchor;
        let mut push = |p: usize, n: usize| {
            if p != n && p != anchor && n != anchor {
                triplets.push(Triplet {
                    anchor,
                    positive: p,
                    negative: n,
                });
            }
        };
        match combination {
            Combination::Cartesian => {
                for &p in &sel.positives {
                    for &n in &sel.negatives {
                        push(p, n);
                    }
                }
            }
            Combination::Paired => {
                for (&p, &n) in sel.positives.iter().zip(&sel.negatives) {
                    push(p, n);
                }
            }
        }
    }
    TripletSet {
        triplets,
        per_anchor: selections,
    }
}

/// Mines triplets from `view` with the configured strategies.
pub fn mine<R: Rng + ?Sized>(
    view: &BatchView,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<TripletSet> {
    mine_impl(view, cfg, rng, None)
}

/// Like [`mine`], also returning everything the sampler looked at.
pub fn mine_traced<R: Rng + ?Sized>(
    view: &BatchView,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(TripletSet, MiningTrace)> {
    let mut trace = MiningTrace {
        batch_size: view.len(),
        ..MiningTrace::default()
    };
    let set = mine_impl(view, cfg, rng, Some(&mut trace))?;
    Ok((set, trace))
}

fn mine_impl<R: Rng + ?Sized>(
    view: &BatchView,
    cfg: &SamplerConfig,
    rng: &mut R,
    mut trace: Option<&mut MiningTrace>,
) -> Result<TripletSet> {
    let b = view.len();
    cfg.validate(b)?;
    let h = cfg.anchor_count(b);
    let anchors = match cfg.anchor_strategy {
        AnchorStrategy::Das => select_anchors_das(&view.dist_norm, h, cfg.diversity_rule, rng)?,
        AnchorStrategy::Ras => select_anchors_ras(b, h, rng)?,
        AnchorStrategy::Bas => select_anchors_bas(b),
    };

    let label_sim = match cfg.image_strategy {
        ImageStrategy::Rhdis => Some(label_similarity_matrix(&view.labels, cfg.label_similarity)?),
        _ => None,
    };

    let mut selections = Vec::with_capacity(anchors.len());
    for &anchor in &anchors {
        let mut row_for_trace = None;
        let (positives, negatives) = match cfg.image_strategy {
            ImageStrategy::Rhdis => {
                let sim = label_sim.as_ref().expect("computed for rhdis");
                let row = informativeness(anchor, &view.dist_norm, sim.row(anchor), cfg.beta)?;
                let p = select_positives_rhdis(
                    &row,
                    &view.dist_norm,
                    cfg.positives_per_anchor,
                    cfg.gamma,
                    cfg.diversity_rule,
                )?;
                let n = select_negatives_rhdis(
                    &row,
                    &view.dist_norm,
                    cfg.negatives_per_anchor,
                    cfg.gamma,
                    cfg.diversity_rule,
                    &p,
                )?;
                row_for_trace = Some(row);
                (p, n)
            }
            ImageStrategy::Ris => select_images_ris_counts(
                anchor,
                b,
                cfg.positives_per_anchor,
                cfg.negatives_per_anchor,
                rng,
            )?,
            ImageStrategy::Bis => select_images_bis(anchor, b),
        };
        let selection = AnchorSelection {
            anchor,
            positives,
            negatives,
        };
        if let Some(t) = trace.as_deref_mut() {
            t.anchors.push(AnchorTrace {
                selection: selection.clone(),
                informativeness: row_for_trace,
            });
        }
        selections.push(selection);
    }

    let set = build_triplets(selections, cfg.combination);
    if let Some(t) = trace {
        t.triplet_count = set.len();
    }
    Ok(set)
}
