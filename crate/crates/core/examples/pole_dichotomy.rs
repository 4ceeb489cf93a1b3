// Near a Dirichlet eigenvalue of the decoration the DtN matrix either
// blows up uniformly (odd cycle) or stays bounded along the boundary data
// for which the boundary value problem remains solvable (even cycle).
use qgraph::{decade_deltas, make_spider, pole_scaling, solvable_at, Decoration, DtnOptions};
use std::f64::consts::PI;

pub fn run_example() -> qgraph::Result<()> {
    let opts = DtnOptions::default();
    let lambda0 = PI * PI;
    let deltas = decade_deltas(2, 6, 1);

    let spider = make_spider(4, 1.0, 3)?;
    let s = solvable_at(&spider, lambda0, &opts)?;
    println!("spider: solvable subspace has dimension {}", s.dimension());
    let p = pole_scaling(&spider, lambda0, &deltas, &opts)?;
    for sample in &p.samples {
        println!("  delta {:.0e}  sigma_min {:.6e}", sample.delta, sample.sigma_min);
    }
    println!("  fitted slope {:.4}, C {:.4}", p.fitted_slope, p.fitted_c);

    let c4 = Decoration::cycle(4, 1.0)?;
    let s = solvable_at(&c4, lambda0, &opts)?;
    println!("4-cycle: solvable subspace {:?}", s.basis);
    let p = pole_scaling(&c4, lambda0, &deltas, &opts)?;
    for sample in &p.samples {
        println!("  delta {:.0e}  sigma_min {:.6e}", sample.delta, sample.sigma_min);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
