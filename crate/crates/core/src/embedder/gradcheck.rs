use super::{backward, triplet_loss, Embedder};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::euclidean;
use crate::types::TripletSet;

/// Gradients below this magnitude are compared on an absolute scale; a
/// true zero (e.g. output biases, which shift every embedding equally)
/// otherwise turns rounding noise into a relative error of 1.
pub const GRADIENT_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// Worst `|analytic - numeric| / max(|analytic|, |numeric|, GRADIENT_FLOOR)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameters whose perturbation moved a hinge or ReLU across its kink.
    pub skipped_kinks: usize,
}

/// Which hinges and ReLUs are on; the loss is smooth while this stays fixed.
fn activity_pattern(
    net: &Embedder,
    features: &Matrix,
    triplets: &TripletSet,
    alpha: f64,
) -> Result<Vec<bool>> {
    let cache = net.forward_cached(features)?;
    let mut pattern = Vec::new();
    let hidden = cache.pre.len() - 1;
    for z in &cache.pre[..hidden] {
        pattern.extend(z.as_slice().iter().map(|&v| v > 0.0));
    }
    let e = &cache.output;
    pattern.extend(triplets.triplets.iter().map(|t| {
        euclidean(e.row(t.anchor), e.row(t.positive))
            - euclidean(e.row(t.anchor), e.row(t.negative))
            + alpha
            > 0.0
    }));
    Ok(pattern)
}

fn loss_at(net: &Embedder, features: &Matrix, triplets: &TripletSet, alpha: f64) -> Result<f64> {
    Ok(triplet_loss(&net.forward(features)?, triplets, alpha))
}

/// Compares [`backward`] against central differences for every parameter.
pub fn finite_difference_check(
    net: &Embedder,
    features: &Matrix,
    triplets: &TripletSet,
    alpha: f64,
    step: f64,
) -> Result<GradCheckReport> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::config(format!(
            "finite difference step {step} must be positive"
        )));
    }
    let analytic = backward(net, features, triplets, alpha)?;
    let analytic: Vec<f64> = analytic.slices().concat();
    let base = activity_pattern(net, features, triplets, alpha)?;

    let mut probe = net.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped_kinks: 0,
    };
    let mut flat = 0;
    let n_slices = probe.param_slices_mut().len();
    for s in 0..n_slices {
        let len = probe.param_slices_mut()[s].len();
        for i in 0..len {
            let orig = probe.param_slices_mut()[s][i];
            probe.param_slices_mut()[s][i] = orig + step;
            let plus_pattern = activity_pattern(&probe, features, triplets, alpha)?;
            let plus = loss_at(&probe, features, triplets, alpha)?;
            probe.param_slices_mut()[s][i] = orig - step;
            let minus_pattern = activity_pattern(&probe, features, triplets, alpha)?;
            let minus = loss_at(&probe, features, triplets, alpha)?;
            probe.param_slices_mut()[s][i] = orig;

            let a = analytic[flat];
            flat += 1;
            if plus_pattern != base || minus_pattern != base {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * step);
            let scale = a.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
            let rel = (a - numeric).abs() / scale;
            report.max_rel_error = report.max_rel_error.max(rel);
            report.checked += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::types::{AnchorSelection, Triplet};
    use rand::Rng;

    fn instance(seed: u64) -> (Embedder, Matrix, TripletSet) {
        let mut rng = seeded_rng(seed);
        let net = Embedder::init(&[4, 6, 3], false, &mut rng).unwrap();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let triplets = vec![
            Triplet {
                anchor: 0,
                positive: 1,
                negative: 2,
            },
            Triplet {
                anchor: 3,
                positive: 4,
                negative: 5,
            },
            Triplet {
                anchor: 0,
                positive: 5,
                negative: 4,
            },
        ];
        let per_anchor = vec![AnchorSelection {
            anchor: 0,
            positives: vec![1],
            negatives: vec![2],
        }];
        (
            net,
            Matrix::from_rows(&rows).unwrap(),
            TripletSet {
                triplets,
                per_anchor,
            },
        )
    }

    #[test]
    fn zero_gradient_is_exact() {
        let (net, x, set) = instance(1);
        // a huge negative margin switches every hinge off
        let r = finite_difference_check(&net, &x, &set, -100.0, 1e-5).unwrap();
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn random_active_instance_agrees() {
        let (net, x, set) = instance(5);
        let r = finite_difference_check(&net, &x, &set, 2.0, 1e-5).unwrap();
        assert!(r.checked > 0);
        assert!(r.max_rel_error < 1e-4, "{r:?}");
    }

    #[test]
    fn coarse_step_is_worse() {
        let (net, x, set) = instance(5);
        let fine = finite_difference_check(&net, &x, &set, 2.0, 1e-5).unwrap();
        let coarse = finite_difference_check(&net, &x, &set, 2.0, 1e-1).unwrap();
        assert!(
            coarse.max_rel_error > fine.max_rel_error,
            "{coarse:?} vs {fine:?}"
        );
    }

    #[test]
    fn step_must_be_positive() {
        let (net, x, set) = instance(1);
        assert!(finite_difference_check(&net, &x, &set, 0.2, 0.0).is_err());
    }
}
