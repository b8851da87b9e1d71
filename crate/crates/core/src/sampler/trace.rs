use std::io::{self, Write};

use super::images::InformativenessRow;
use crate::types::AnchorSelection;

#[derive(Clone, Debug, PartialEq)]
pub struct AnchorTrace {
    pub selection: AnchorSelection,
    /// Present only for informativeness-driven image selection.
    pub informativeness: Option<InformativenessRow>,
}

/// Everything the sampler computed for one batch, for inspection.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MiningTrace {
    pub batch_size: usize,
    pub anchors: Vec<AnchorTrace>,
    pub triplet_count: usize,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn join_scores(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl MiningTrace {
    pub fn anchor_indices(&self) -> Vec<usize> {
        self.anchors.iter().map(|a| a.selection.anchor).collect()
    }

    /// Full line-delimited dump, including every informativeness row.
    ///
    /// ```text
    /// batch=0 size=40 anchors=3,17,5,22
    /// batch=0 anchor=3 positives=.. negatives=.. ip=.. in=..
    /// batch=0 triplets=100
    /// ```
    pub fn write_full<W: Write + ?Sized>(&self, batch: usize, w: &mut W) -> io::Result<()> {
        self.write_with(batch, w, |row| {
            format!(" ip={} in={}", join_scores(&row.ip), join_scores(&row.in_))
        })
    }

    /// Same layout as [`write_full`](Self::write_full) but only the extremes
    /// of each informativeness row, excluding the anchor itself.
    pub fn write_summary<W: Write + ?Sized>(&self, batch: usize, w: &mut W) -> io::Result<()> {
        self.write_with(batch, w, |row| {
            let (ip_lo, ip_hi) = row.extremes(&row.ip).unwrap_or((f64::NAN, f64::NAN));
            let (in_lo, in_hi) = row.extremes(&row.in_).unwrap_or((f64::NAN, f64::NAN));
            format!(" ip_min={ip_lo:.6} ip_max={ip_hi:.6} in_min={in_lo:.6} in_max={in_hi:.6}")
        })
    }

    fn write_with<W: Write + ?Sized>(
        &self,
        batch: usize,
        w: &mut W,
        scores: impl Fn(&InformativenessRow) -> String,
    ) -> io::Result<()> {
        writeln!(
            w,
            "batch={batch} size={} anchor_count={} anchors={}",
            self.batch_size,
            self.anchors.len(),
            join(&self.anchor_indices())
        )?;
        for a in &self.anchors {
            let s = &a.selection;
            write!(
                w,
                "batch={batch} anchor={} positives={} negatives={}",
                s.anchor,
                join(&s.positives),
                join(&s.negatives)
            )?;
            if let Some(row) = &a.informativeness {
                write!(w, "{}", scores(row))?;
            }
            writeln!(w)?;
        }
        writeln!(w, "batch={batch} triplets={}", self.triplet_count)
    }
}
