//! Fixtures shared by the benchmarks.

use ghtree::lab::{EmbedConfig, Endpoint};
use ghtree::{FiniteMetricSpace, MetricTree};

/// `n` points on a circle of circumference 2, with the arc metric.
pub fn circle(n: usize) -> FiniteMetricSpace {
    let labels = (0..n).map(|i| format!("c{i}")).collect();
    FiniteMetricSpace::from_fn(labels, |i, j| {
        let d = (i as f64 - j as f64).abs() * 2.0 / n as f64;
        d.min(2.0 - d)
    })
}

/// Caterpillar: a spine of `n` unit edges with a leg at every spine vertex.
pub fn caterpillar(n: usize) -> MetricTree {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((i - 1, i, 1.0));
    }
    for i in 0..n {
        edges.push((i, n + i, 0.25 + 0.05 * (i % 5) as f64));
    }
    MetricTree::from_edge_list(2 * n, &edges).unwrap()
}

/// Two endpoint trees marked at the corners of the unit square, plus one
/// interior point (index 2).
pub fn embed_config(u: (f64, f64)) -> EmbedConfig {
    let seg = MetricTree::from_edge_list(2, &[(0, 1, 1.5)]).unwrap();
    let star = MetricTree::from_edge_list(4, &[(0, 1, 0.5), (0, 2, 0.7), (0, 3, 0.9)]).unwrap();
    EmbedConfig::new(
        vec![(0.0, 0.0), (1.0, 1.0), u],
        vec![0, 1],
        vec![Endpoint { tree: seg, basepoint: 0 }, Endpoint { tree: star, basepoint: 0 }],
        3,
        4,
        1.0 / 64.0,
    )
    .unwrap()
}
