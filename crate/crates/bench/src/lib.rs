//! Shared fixtures for the benchmarks.

use tripsel::data::generate_synthetic;
use tripsel::{seeded_rng, BatchView, Embedder, Matrix, SyntheticSpec};

/// A synthetic batch of `b` samples embedded by a freshly initialized
/// `feature_dim -> 64 -> embedding` network.
pub struct Fixture {
    pub net: Embedder,
    pub features: Matrix,
    pub view: BatchView,
}

pub fn fixture(b: usize, feature_dim: usize, embedding: usize) -> Fixture {
    let ds = generate_synthetic(&SyntheticSpec {
        n_samples: b,
        feature_dim,
        seed: 7,
        ..SyntheticSpec::default()
    })
    .expect("valid synthetic spec");
    let idx: Vec<usize> = (0..b).collect();
    let net = Embedder::init(&[feature_dim, 64, embedding], false, &mut seeded_rng(7))
        .expect("valid dims");
    let features = ds.features(&idx);
    let embeddings = net.forward(&features).expect("matching dims");
    let view = BatchView::new(idx.clone(), embeddings, ds.labels(&idx)).expect("consistent batch");
    Fixture {
        net,
        features,
        view,
    }
}
