// Acceptance run: one PASS/FAIL line per criterion, with the measured
// numbers and wall time. Built without the test harness so that the lines
// always show up in `cargo test` output.
//
// A criterion listed in KNOWN_RED is expected to fail (see the README); the
// run exits non-zero if any other criterion fails, or if a known-red one
// starts passing so that the list can be updated.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qgraph::{
    band_sweep, certify_gap_near, closest_sample, decade_deltas, decorate_periodic, dtn_matrix, fem_spectrum,
    make_spider, pole_scaling, reduced_spectrum_check, refine_closest, scan_spectrum, solvable_at, weyl_check_over,
    Decoration, DtnMap, DtnOptions, GapOptions, MetricGraph, ScanOptions, VertexCondition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: &[&str] = &["AC-5"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn analytic_spectra() -> Outcome {
    use VertexCondition::*;
    let opts = ScanOptions::default();
    let (lo, hi) = (0.5, 50.0);
    let mut worst: f64 = 0.0;
    let mut counts_ok = true;
    let mut check = |g: &MetricGraph, expected: Vec<(f64, usize)>| {
        let r = scan_spectrum(g, lo, hi, &opts).unwrap();
        counts_ok &= r.entries.len() == expected.len();
        for (e, (l, m)) in r.entries.iter().zip(&expected) {
            worst = worst.max(rel(e.lambda, *l));
            counts_ok &= e.multiplicity == *m;
        }
    };
    let levels = |step: f64, mult: usize| -> Vec<(f64, usize)> {
        (1..).map(|n| ((n as f64 * step).powi(2), mult)).skip_while(|(l, _)| *l <= lo).take_while(|(l, _)| *l < hi).collect()
    };
    for l in [1.0, 1.3] {
        check(&MetricGraph::interval(l, Dirichlet, Dirichlet), levels(PI / l, 1));
        check(&MetricGraph::interval(l, Kirchhoff, Kirchhoff), levels(PI / l, 1));
        check(&MetricGraph::loop_graph(l), levels(2.0 * PI / l, 2));
    }
    outcome(worst <= 1e-8 && counts_ok, format!("max relative error {worst:.2e}, counts and multiplicities match: {counts_ok}"))
}

fn oracle_equivalence() -> Outcome {
    let opts = ScanOptions::default();
    let mut worst: f64 = 0.0;
    let mut at = 0;
    for (i, g) in common::corpus().iter().enumerate() {
        let zero = g.zero_multiplicity();
        let scan = common::first_positive(g, 5, &opts);
        let fem = fem_spectrum(g, 1e-3, zero + 5).unwrap();
        for (a, b) in scan.iter().zip(&fem[zero..]) {
            let e = rel(*b, *a);
            if e > worst {
                worst = e;
                at = i;
            }
        }
    }
    outcome(worst <= 1e-4, format!("max relative deviation {worst:.2e} (graph {at})"))
}

fn dtn_closed_form() -> Outcome {
    let l = 0.8;
    let dec = Decoration::single_edge(l);
    let opts = DtnOptions::default();
    let (lo, hi) = (0.5, 200.0);
    let map = DtnMap::new(&dec, lo, hi, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 200 {
        let lambda = rng.gen_range(lo..hi);
        if map.nearest_pole(lambda).is_some_and(|p| (p - lambda).abs() < 0.1) {
            continue;
        }
        n += 1;
        let k = lambda.sqrt();
        let (s, c) = (k * l).sin_cos();
        let f = k / s;
        let exact = nalgebra::DMatrix::from_row_slice(2, 2, &[-c * f, f, f, -c * f]);
        let m = dtn_matrix(&dec, lambda, &opts).unwrap();
        worst = worst.max((&m.entries - &exact).norm() / exact.norm());
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} over {n} points"))
}

fn pole_dichotomy() -> Outcome {
    let opts = DtnOptions::default();
    let lambda0 = PI * PI;
    let spider = make_spider(4, 1.0, 3).unwrap();
    let spider_dim = solvable_at(&spider, lambda0, &opts).unwrap().dimension();
    let p = pole_scaling(&spider, lambda0, &decade_deltas(2, 6, 1), &opts).unwrap();
    let spider_ok = spider_dim == 0 && (-1.1..=-0.9).contains(&p.fitted_slope);

    let c4 = Decoration::cycle(4, 1.0).unwrap();
    let s = solvable_at(&c4, lambda0, &opts).unwrap();
    let alignment = match s.basis.as_slice() {
        [b] => b.iter().zip([0.5, -0.5, 0.5, -0.5]).map(|(x, y)| x * y).sum::<f64>().abs(),
        _ => 0.0,
    };
    let q = pole_scaling(&c4, lambda0, &decade_deltas(2, 6, 1), &opts).unwrap();
    let at_1e6 = q.samples.iter().find(|x| (x.delta - 1e-6).abs() < 1e-12).map_or(f64::INFINITY, |x| x.sigma_min);
    let c4_ok = (alignment - 1.0).abs() < 1e-6 && at_1e6 < 1e3;
    outcome(
        spider_ok && c4_ok,
        format!(
            "spider: solvable dim {spider_dim}, slope {:.4}; C4: solvable dim {}, |<basis, (1,-1,1,-1)/2>| {alignment:.8}, sigma_min(1e-6) {at_1e6:.2e}",
            p.fitted_slope,
            s.dimension()
        ),
    )
}

fn gap_opening() -> Outcome {
    let lattice = MetricGraph::square_lattice(1.0);
    let l0 = 2.0 / 3.0;
    let spider = make_spider(4, l0, 3).unwrap();
    let opts = GapOptions::default();
    let report = certify_gap_near(&lattice, &spider, None, l0, 1, &opts).unwrap();
    let eps_ok = report.eps_below >= 0.05 && report.eps_above >= 0.05;

    let (lo, hi) = report.window;
    let plain = band_sweep(&lattice, lo, hi, opts.n_theta, &opts.scan).unwrap();
    let control = closest_sample(&plain, report.lambda0, opts.flat_tol).map_or(f64::INFINITY, |(l, _)| (l - report.lambda0).abs());
    let control_ok = control < 0.5;
    outcome(
        eps_ok && report.flat_band_at_lambda0 && control_ok,
        format!(
            "lambda0 {:.6}, r {:.4}: eps_below {:.4}, eps_above {:.4} [{}]; flat band at lambda0: {} [{}]; undecorated lattice within {control:.4} [{}]",
            report.lambda0,
            report.r,
            report.eps_below,
            report.eps_above,
            if eps_ok { "ok" } else { "short" },
            report.flat_band_at_lambda0,
            if report.flat_band_at_lambda0 { "ok" } else { "not observed" },
            if control_ok { "ok" } else { "too far" },
        ),
    )
}

fn even_cycle_counterexample() -> Outcome {
    let lattice = MetricGraph::square_lattice(1.0);
    let l0 = 2.0 / 3.0;
    let lambda0 = (PI / l0).powi(2);
    let r = qgraph::dirichlet_edge_spectrum(&lattice, 0.0).distance_to(lambda0);
    let g = decorate_periodic(&lattice, &Decoration::cycle(4, l0).unwrap(), None).unwrap();
    let opts = GapOptions::default();
    let sweep = band_sweep(&g, lambda0 - r / 2.0, lambda0 + r / 2.0, opts.n_theta, &opts.scan).unwrap();
    let grid = closest_sample(&sweep, lambda0, opts.flat_tol).map_or(f64::INFINITY, |(l, _)| (l - lambda0).abs());
    let refined = refine_closest(&g, &sweep, lambda0, opts.flat_tol, &opts.scan).map_or(f64::INFINITY, |l| (l - lambda0).abs());
    let best = grid.min(refined);
    outcome(
        best < 0.05 && best > opts.flat_tol,
        format!("closest off-flat sample: {grid:.4} on the 17x17 grid, {refined:.2e} after theta refinement"),
    )
}

fn reduction_equivalence() -> Outcome {
    let k5 = MetricGraph::complete(5, 1.0);
    let spider = make_spider(4, 2.0 / 3.0, 3).unwrap();
    let r = reduced_spectrum_check(&k5, &spider, None, 15.0, 21.0, 1e-4, &DtnOptions::default()).unwrap();
    outcome(
        r.counts_match() && r.max_mismatch <= 1e-6,
        format!(
            "{} direct, {} reduced, max mismatch {:.2e}, {} excluded points",
            r.direct.len(),
            r.reduced.len(),
            r.max_mismatch,
            r.excluded_points.len()
        ),
    )
}

fn weyl_sanity() -> Outcome {
    let opts = ScanOptions::default();
    let mut worst_ratio: f64 = 0.0;
    let mut all_ok = true;
    for g in common::corpus() {
        let r = scan_spectrum(&g, 1e-4, 60.0, &opts).unwrap();
        let w = weyl_check_over(&r, &g, 0.5, 60.0);
        all_ok &= !w.suspicious;
        worst_ratio = worst_ratio.max(w.max_deviation / w.bound);
    }
    outcome(all_ok, format!("largest deviation / (|V| + |E|) = {worst_ratio:.3}"))
}

fn main() {
    let checks: [(&str, &str, f64, fn() -> Outcome); 8] = [
        ("AC-1", "analytic spectra", 5.0, analytic_spectra),
        ("AC-2", "oracle equivalence", 180.0, oracle_equivalence),
        ("AC-3", "DtN closed form", f64::INFINITY, dtn_closed_form),
        ("AC-4", "pole dichotomy", 30.0, pole_dichotomy),
        ("AC-5", "gap opening", 300.0, gap_opening),
        ("AC-6", "even cycle closes no gap", 300.0, even_cycle_counterexample),
        ("AC-7", "reduction equivalence", 120.0, reduction_equivalence),
        ("AC-8", "Weyl sanity", f64::INFINITY, weyl_sanity),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in checks {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs_f64(budget.min(1e9));
        let pass = o.pass && in_time;
        let budget_note = if budget.is_finite() { format!(" (budget {budget:.0} s)") } else { String::new() };
        println!(
            "{} {id} {name}: {}; {:.2} s{budget_note}",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        let known = KNOWN_RED.contains(&id);
        if pass == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all results as expected (known red: {})", KNOWN_RED.join(", "));
    } else {
        println!("acceptance: unexpected results for {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
