// Reading and writing the JSON graph format, and decorating from files.
use qgraph::io::{read_decoration, read_graph, write_graph};
use qgraph::{decorate_periodic, scan_spectrum, ScanOptions};
use std::path::Path;

pub fn run_example() -> qgraph::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lattice = read_graph(data.join("square_lattice.json"))?;
    let spider = read_decoration(data.join("spider_l0_2_3.json"))?;
    let decorated = decorate_periodic(&lattice, &spider, None)?;
    println!("decorated fundamental domain: {:?}", decorated.validate());

    let out = std::env::temp_dir().join(format!("qgraph-example-{}.json", std::process::id()));
    let k5 = read_graph(data.join("k5.json"))?;
    write_graph(&out, &k5)?;
    let back = read_graph(&out)?;
    std::fs::remove_file(&out)?;
    assert_eq!(back, k5);
    let r = scan_spectrum(&back, 0.5, 30.0, &ScanOptions::default())?;
    println!("K5 from file, eigenvalues below 30: {:?}", r.entries.iter().map(|e| (e.lambda, e.multiplicity)).collect::<Vec<_>>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
