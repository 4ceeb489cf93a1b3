#![allow(dead_code)]

use qgraph::{MetricGraph, VertexCondition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph with at most `max_edges` edges, lengths in [0.5, 2] and
/// a random mix of vertex conditions. Loops and parallel edges can occur.
pub fn random_graph(rng: &mut impl Rng, max_edges: usize) -> MetricGraph {
    let n = rng.gen_range(2..=max_edges.min(5));
    let mut g = MetricGraph::new();
    for i in 0..n {
        let c = if rng.gen_bool(0.3) { VertexCondition::Dirichlet } else { VertexCondition::Kirchhoff };
        g.add_vertex(format!("v{i}"), c).unwrap();
    }
    let mut e = 0;
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_edge(format!("e{e}"), j, i, rng.gen_range(0.5..=2.0)).unwrap();
        e += 1;
    }
    let extra = rng.gen_range(0..=max_edges - (n - 1));
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        g.add_edge(format!("e{e}"), a, b, rng.gen_range(0.5..=2.0)).unwrap();
        e += 1;
    }
    g
}

/// The fixed corpus of 20 graphs used by the acceptance checks.
pub fn corpus() -> Vec<MetricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20).map(|_| random_graph(&mut rng, 6)).collect()
}

/// The first `count` positive eigenvalues (with multiplicity) from the
/// secular scan, widening the window until enough are found.
pub fn first_positive(g: &MetricGraph, count: usize, opts: &qgraph::ScanOptions) -> Vec<f64> {
    let mut hi = 20.0;
    loop {
        let v = qgraph::scan_spectrum(g, 1e-4, hi, opts).unwrap().expanded();
        if v.len() >= count {
            return v[..count].to_vec();
        }
        hi *= 2.0;
    }
}
