//! Strategy ablation: train one model per (anchor, image) strategy pair on
//! identical data and seeds, then score retrieval from the validation split
//! (queries) into the test split (archive).

use rayon::prelude::*;

use crate::config::{AnchorStrategy, ImageStrategy};
use crate::data::Dataset;
use crate::error::Result;
use crate::retrieval::{evaluate, MetricReport};
use crate::trainer::{train_with_observer, TrainConfig, TrainLog};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub epoch: usize,
    pub cum_triplets: u64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub anchor: AnchorStrategy,
    pub images: ImageStrategy,
    pub report: MetricReport,
    pub cum_triplets: u64,
    /// Retrieval F1 after every epoch; empty unless tracking was requested.
    pub curve: Vec<CurvePoint>,
    pub log: TrainLog,
}

impl CellResult {
    pub fn name(&self) -> String {
        cell_name(self.anchor, self.images)
    }
}

pub fn cell_name(anchor: AnchorStrategy, images: ImageStrategy) -> String {
    format!(
        "{}-{}",
        anchor.as_str().to_uppercase(),
        images.as_str().to_uppercase()
    )
}

/// The full 3 x 3 grid, anchors outer.
pub fn all_cells() -> Vec<(AnchorStrategy, ImageStrategy)> {
    AnchorStrategy::ALL
        .iter()
        .flat_map(|&a| ImageStrategy::ALL.iter().map(move |&i| (a, i)))
        .collect()
}

pub fn run_cell(
    ds: &Dataset,
    base: &TrainConfig,
    anchor: AnchorStrategy,
    images: ImageStrategy,
    k: usize,
    track_curve: bool,
) -> Result<CellResult> {
    let mut cfg = base.clone();
    cfg.sampler.anchor_strategy = anchor;
    cfg.sampler.image_strategy = images;
    let (val, test) = (&ds.splits.val, &ds.splits.test);
    let mut curve = Vec::new();
    let (net, log) = train_with_observer(ds, &cfg, |net, entry| {
        if track_curve {
            curve.push(CurvePoint {
                epoch: entry.epoch,
                cum_triplets: entry.cum_triplets,
                f1: evaluate(net, ds, val, test, k)?.f1,
            });
        }
        Ok(())
    })?;
    let report = evaluate(&net, ds, val, test, k)?;
    Ok(CellResult {
        anchor,
        images,
        report,
        cum_triplets: log.total_triplets(),
        curve,
        log,
    })
}

/// Runs every cell, in parallel; output order follows `cells`.
pub fn run_grid(
    ds: &Dataset,
    base: &TrainConfig,
    cells: &[(AnchorStrategy, ImageStrategy)],
    k: usize,
    track_curve: bool,
) -> Result<Vec<CellResult>> {
    cells
        .par_iter()
        .map(|&(a, i)| run_cell(ds, base, a, i, k, track_curve))
        .collect()
}

/// Cumulative triplets at the first epoch whose F1 is within `tolerance` of
/// the final F1 of the same run.
pub fn triplets_to_reach(curve: &[CurvePoint], tolerance: f64) -> Option<u64> {
    let target = curve.last()?.f1 - tolerance;
    curve
        .iter()
        .find(|p| p.f1 >= target)
        .map(|p| p.cum_triplets)
}

pub const GRID_CSV_HEADER: &str = "anchor,images,accuracy,precision,recall,f1,cum_triplets";

pub fn grid_csv_row(c: &CellResult) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        c.anchor,
        c.images,
        c.report.accuracy,
        c.report.precision,
        c.report.recall,
        c.report.f1,
        c.cum_triplets
    )
}
