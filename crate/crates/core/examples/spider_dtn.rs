// The Dirichlet-to-Neumann matrix of the triangle-with-pendant decoration,
// against the closed form for a single edge.
use qgraph::{dirichlet_spectrum_g, dtn_matrix, make_spider, Decoration, DtnOptions, ScanOptions};

pub fn run_example() -> qgraph::Result<()> {
    let opts = DtnOptions::default();
    let edge = Decoration::single_edge(1.0);
    let lambda: f64 = 2.0;
    let k = lambda.sqrt();
    let m = dtn_matrix(&edge, lambda, &opts)?;
    println!("single edge at lambda = {lambda}:");
    println!("  computed    {:?}", m.rows());
    let (c, s) = (k.cos(), k.sin());
    println!("  closed form [[{:.12}, {:.12}], [{:.12}, {:.12}]]", -k * c / s, k / s, k / s, -k * c / s);

    let spider = make_spider(4, 1.0, 3)?;
    let poles = dirichlet_spectrum_g(&spider, 45.0, &ScanOptions::default())?;
    println!("spider, Dirichlet spectrum of the decoration up to 45:");
    for e in &poles.entries {
        println!("  {:.10} (multiplicity {})", e.lambda, e.multiplicity);
    }
    let m = dtn_matrix(&spider, 5.0, &opts)?;
    println!("spider DtN at lambda = 5 (asymmetry {:.1e}):", m.asymmetry());
    for row in m.rows() {
        println!("  {}", row.iter().map(|x| format!("{x:>10.5}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
