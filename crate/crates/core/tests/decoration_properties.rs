use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use qgraph::{
    band_sweep, build_bloch_secular, build_reduced, check_spider_conditions, closest_sample, decorate_periodic,
    decade_deltas, make_spider, pole_scaling, solvable_at, Decoration, DtnMap, DtnOptions, MetricGraph,
    ScanOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decorations() -> Vec<(&'static str, Decoration)> {
    vec![
        ("edge", Decoration::single_edge(0.8)),
        ("spider", make_spider(4, 2.0 / 3.0, 3).unwrap()),
        ("c4", Decoration::cycle(4, 2.0 / 3.0).unwrap()),
    ]
}

/// `count` random λ in `(lo, hi)` at least `gap` away from every pole.
fn regular_points(map: &DtnMap, rng: &mut impl Rng, lo: f64, hi: f64, gap: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = rng.gen_range(lo..hi);
        if map.nearest_pole(l).map_or(true, |p| (p - l).abs() > gap) {
            out.push(l);
        }
    }
    out
}

#[test]
fn dtn_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = DtnOptions::default();
    for (name, dec) in decorations() {
        let map = DtnMap::new(&dec, 1.0, 60.0, &opts).unwrap();
        for l in regular_points(&map, &mut rng, 1.0, 60.0, 1e-3, 100) {
            let m = map.eval(l).unwrap();
            let scale = m.entries.norm().max(1.0);
            assert!(m.asymmetry() <= 1e-9 * scale, "{name} at {l}: asymmetry {}", m.asymmetry());
        }
    }
}

#[test]
fn dtn_is_monotone_between_poles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = DtnOptions::default();
    let h = 1e-4;
    for (name, dec) in decorations() {
        let map = DtnMap::new(&dec, 1.0, 60.0, &opts).unwrap();
        for l in regular_points(&map, &mut rng, 1.0, 60.0, 1e-2, 50) {
            let a = map.eval(l).unwrap().entries;
            let b = map.eval(l + h).unwrap().entries;
            let diff = &b - &a;
            let diff = (&diff + diff.transpose()) * 0.5;
            let lowest = SymmetricEigen::new(diff).eigenvalues.min();
            assert!(lowest >= -1e-8 * b.norm().max(1.0), "{name} at {l}: lowest eigenvalue {lowest}");
        }
    }
}

#[test]
fn pole_behaviour_follows_the_cycle_parity() {
    let opts = DtnOptions::default();
    let lambda0 = PI * PI;
    let deltas = decade_deltas(2, 6, 1);

    let spider = make_spider(4, 1.0, 3).unwrap();
    assert!(check_spider_conditions(&spider, 1.0));
    assert_eq!(solvable_at(&spider, lambda0, &opts).unwrap().dimension(), 0);
    let p = pole_scaling(&spider, lambda0, &deltas, &opts).unwrap();
    assert!((-1.1..=-0.9).contains(&p.fitted_slope), "slope {}", p.fitted_slope);

    let c4 = Decoration::cycle(4, 1.0).unwrap();
    assert!(!check_spider_conditions(&c4, 1.0));
    let s = solvable_at(&c4, lambda0, &opts).unwrap();
    assert_eq!(s.dimension(), 1);
    let p = pole_scaling(&c4, lambda0, &deltas, &opts).unwrap();
    let last = p.samples.last().unwrap();
    assert!(last.sigma_min < 1e3, "sigma_min {} at delta {}", last.sigma_min, last.delta);
}

#[test]
fn reduced_matrix_is_finite_and_continuous() {
    let k5 = MetricGraph::complete(5, 1.0);
    let spider = make_spider(4, 2.0 / 3.0, 3).unwrap();
    let opts = DtnOptions::default();
    let map = DtnMap::new(&spider, 15.0, 21.0, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for l in regular_points(&map, &mut rng, 15.0, 21.0, 1e-2, 40) {
        let a = build_reduced(&k5, &spider, None, l, &opts).unwrap();
        let b = build_reduced(&k5, &spider, None, l + 1e-7, &opts).unwrap();
        assert!(a.entries.iter().all(|z| z.is_finite()), "non-finite entry at {l}");
        let (sa, sb) = (a.sigma_min(), b.sigma_min());
        assert!((sa - sb).abs() <= 1e-4 * sa.max(1.0), "jump at {l}: {sa} vs {sb}");
    }
}

#[test]
fn band_samples_are_symmetric_in_theta() {
    let lattice = MetricGraph::square_lattice(1.0);
    let spider = make_spider(4, 2.0 / 3.0, 3).unwrap();
    let g = decorate_periodic(&lattice, &spider, None).unwrap();
    let n = 9;
    let sweep = band_sweep(&g, 16.0, 28.0, n, &ScanOptions::default()).unwrap();
    for i in 0..n {
        for j in 0..n {
            let mirror = ((n - i) % n) * n + (n - j) % n;
            let a = sweep.samples[i * n + j].expanded();
            let b = sweep.samples[mirror].expanded();
            assert_eq!(a.len(), b.len(), "theta index ({i}, {j})");
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-8 * x, "theta index ({i}, {j}): {x} vs {y}");
            }
        }
    }
}

#[test]
fn finer_theta_grids_get_closer_to_the_resonance() {
    let lattice = MetricGraph::square_lattice(1.0);
    let l0 = 2.0 / 3.0;
    let lambda0 = (PI / l0).powi(2);
    let g = decorate_periodic(&lattice, &Decoration::cycle(4, l0).unwrap(), None).unwrap();
    let opts = ScanOptions::default();
    let distance = |n| {
        let sweep = band_sweep(&g, lambda0 - 3.0, lambda0 + 3.0, n, &opts).unwrap();
        (closest_sample(&sweep, lambda0, 1e-6).unwrap().0 - lambda0).abs()
    };
    let coarse = distance(16);
    let fine = distance(32);
    assert!(fine <= coarse + 1e-9, "n = 16: {coarse}, n = 32: {fine}");
}

#[test]
fn undecorated_lattice_has_bands_near_the_resonance() {
    let lattice = MetricGraph::square_lattice(1.0);
    let lambda0 = (1.5 * PI).powi(2);
    let sweep = band_sweep(&lattice, lambda0 - 6.0, lambda0 + 6.0, 17, &ScanOptions::default()).unwrap();
    let (l, _) = closest_sample(&sweep, lambda0, 1e-6).unwrap();
    assert!((l - lambda0).abs() < 0.5, "closest {l}");
}

// The odd resonator leaves no decoration-localized state behind: the Bloch
// matrix stays far from singular at λ₀ for every sampled quasi-momentum.
#[test]
fn odd_resonator_lattice_has_no_eigenvalue_at_the_resonance() {
    let lattice = MetricGraph::square_lattice(1.0);
    let l0 = 2.0 / 3.0;
    let g = decorate_periodic(&lattice, &make_spider(4, l0, 3).unwrap(), None).unwrap();
    let k0 = PI / l0;
    for theta in qgraph::theta_grid(2, 5) {
        let s = build_bloch_secular(&g, k0, &theta).unwrap().sigma_min();
        assert!(s > 1e-3, "sigma_min {s} at theta {theta:?}");
    }
}
