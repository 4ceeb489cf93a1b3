// Decorating the square lattice with an odd-cycle resonator opens a gap
// around (π/l0)²; an even cycle does not.
use qgraph::{
    band_sweep, certify_gap_near, closest_sample, decorate_periodic, make_spider, refine_closest, Decoration,
    GapOptions, MetricGraph, ScanOptions,
};

pub fn run_example() -> qgraph::Result<()> {
    let lattice = MetricGraph::square_lattice(1.0);
    let l0 = 2.0 / 3.0;
    let spider = make_spider(4, l0, 3)?;
    let report = certify_gap_near(&lattice, &spider, None, l0, 1, &GapOptions::default())?;
    println!("lambda0 = {:.6}, window {:.4?}", report.lambda0, report.window);
    println!(
        "odd resonator: nearest bands {:.4?} / {:.4?}, eps below {:.4}, above {:.4} (caveat {:.3})",
        report.nearest_below, report.nearest_above, report.eps_below, report.eps_above, report.grid_resolution_caveat
    );
    println!("eigenvalue at lambda0 on the grid: {}", report.flat_band_at_lambda0);

    let opts = ScanOptions::default();
    let (lo, hi) = report.window;
    let plain = band_sweep(&lattice, lo, hi, 17, &opts)?;
    if let Some((l, _)) = closest_sample(&plain, report.lambda0, 1e-6) {
        println!("undecorated lattice: closest band sample {l:.4}");
    }
    let c4 = Decoration::cycle(4, l0)?;
    let even = decorate_periodic(&lattice, &c4, None)?;
    let sweep = band_sweep(&even, lo, hi, 17, &opts)?;
    let grid = closest_sample(&sweep, report.lambda0, 1e-6).map(|(l, _)| l);
    let refined = refine_closest(&even, &sweep, report.lambda0, 1e-6, &opts);
    println!("even cycle: closest grid sample {grid:.6?}, after theta refinement {refined:.6?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> qgraph::Result<()> {
    run_example()
}
