// Decorates the complete graph K5 and compares the direct spectrum with the
// roots of the problem rewritten on the base edges through the DtN matrix.
use qgraph::{decorate, make_spider, reduced_spectrum_check, DtnOptions, MetricGraph};

pub fn run_example() -> qgraph::Result<()> {
    let k5 = MetricGraph::complete(5, 1.0);
    let spider = make_spider(4, 2.0 / 3.0, 3)?;
    let g = decorate(&k5, &spider, None)?;
    println!("decorated K5: {} vertices, {} edges", g.vertex_count(), g.edge_count());
    let r = reduced_spectrum_check(&k5, &spider, None, 15.0, 21.0, 1e-4, &DtnOptions::default())?;
    println!("{:>18} {:>18}", "direct", "reduced");
    for (a, b) in r.direct.iter().zip(&r.reduced) {
        println!("{a:>18.12} {b:>18.12}");
    }
    println!("max mismatch {:.2e}, counts match: {}", r.max_mismatch, r.counts_match());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
