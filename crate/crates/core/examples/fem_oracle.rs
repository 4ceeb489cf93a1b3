// Cross-checks the secular-matrix scan against piecewise-linear finite
// elements, and shows the O(h²) convergence of the latter.
use qgraph::{fem_spectrum, scan_spectrum, MetricGraph, ScanOptions, VertexCondition};

pub fn run_example() -> qgraph::Result<()> {
    let mut g = MetricGraph::star(&[1.0, 0.7, 1.3], VertexCondition::Kirchhoff);
    g.set_condition(1, VertexCondition::Dirichlet);
    let exact = scan_spectrum(&g, 0.01, 80.0, &ScanOptions::default())?.expanded();
    println!("star with one Dirichlet tip, first eigenvalues: {:?}", &exact[..4]);
    let mut previous: Option<f64> = None;
    for h in [0.04, 0.02, 0.01, 0.005] {
        let fem = fem_spectrum(&g, h, 4)?;
        let err = fem.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        match previous {
            Some(p) => println!("h = {h:<6} max error {err:.3e}  (ratio {:.2})", p / err),
            None => println!("h = {h:<6} max error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
