// Bloch spectra of the periodic chain of unit edges, whose dispersion
// relation is cos k = cos θ.
use qgraph::{band_sweep, bloch_spectrum, MetricGraph, ScanOptions};
use std::f64::consts::PI;

pub fn run_example() -> qgraph::Result<()> {
    let chain = MetricGraph::chain_lattice(1.0);
    let opts = ScanOptions::default();
    for theta in [0.0, PI / 3.0, PI / 2.0, PI] {
        let r = bloch_spectrum(&chain, &[theta], 0.5, 45.0, &opts)?;
        let ks: Vec<String> = r.entries.iter().map(|e| format!("{:.6} (x{})", e.lambda.sqrt(), e.multiplicity)).collect();
        println!("theta = {theta:.4}: k = {}", ks.join(", "));
    }
    let sweep = band_sweep(&chain, 0.5, 45.0, 12, &opts)?;
    let worst = sweep
        .rows()
        .iter()
        .map(|(t, l)| (l.sqrt().cos() - t[0].cos()).abs())
        .fold(0.0, f64::max);
    println!("{} band samples, max |cos k - cos theta| = {worst:.1e}", sweep.rows().len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
