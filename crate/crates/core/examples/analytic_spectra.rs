// Eigenvalues of small graphs with known spectra, and the Weyl sanity check.
use qgraph::{scan_spectrum, weyl_check, MetricGraph, ScanOptions, VertexCondition::*};
use std::f64::consts::PI;

pub fn run_example() -> qgraph::Result<()> {
    let opts = ScanOptions::default();
    let cases = [
        ("interval, Dirichlet ends", MetricGraph::interval(1.0, Dirichlet, Dirichlet)),
        ("interval, Kirchhoff ends", MetricGraph::interval(1.0, Kirchhoff, Kirchhoff)),
        ("loop", MetricGraph::loop_graph(1.0)),
        ("complete graph K4", MetricGraph::complete(4, 1.0)),
    ];
    for (name, g) in cases {
        let r = scan_spectrum(&g, 0.5, 50.0, &opts)?;
        println!("{name}:");
        for e in &r.entries {
            println!("  lambda = {:>14.10}  (lambda/pi^2 = {:.6})  multiplicity {}", e.lambda, e.lambda / (PI * PI), e.multiplicity);
        }
        let w = weyl_check(&r, &g);
        println!("  Weyl deviation {:.3} (bound {})", w.max_deviation, w.bound);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
