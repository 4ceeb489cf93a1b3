mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use qgraph::secular::RowLabel;
use qgraph::{
    build_bloch_secular, build_secular, check_spider_conditions, decorate, decorate_periodic,
    dirichlet_edge_spectrum, make_spider, AttachmentMap, Decoration, EndRole, MetricGraph,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base_and_decoration(kind: u8, n: usize, l: f64, c: usize) -> (MetricGraph, Decoration) {
    match kind {
        0 => (MetricGraph::cycle(&vec![1.0; n]), Decoration::single_edge(l)),
        1 => (MetricGraph::complete(n, 1.0), Decoration::cycle(n - 1, l).unwrap()),
        _ => {
            let d = n - 1;
            let c = 3 + 2 * (c % ((d - 1) / 2));
            (MetricGraph::complete(n, 1.0), make_spider(d, l, c).unwrap())
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decorate_counts(kind in 0u8..3, n in 4usize..7, l in 0.2f64..2.0, c in 0usize..4) {
        let (base, dec) = base_and_decoration(kind, n, l, c);
        let g = decorate(&base, &dec, None).unwrap();
        prop_assert_eq!(g.vertex_count(), base.vertex_count() * dec.graph().vertex_count());
        prop_assert_eq!(g.edge_count(), base.edge_count() + base.vertex_count() * dec.graph().edge_count());
        prop_assert!(g.is_connected());
    }

    #[test]
    fn attachment_maps_agree_on_lengths_and_degrees(n in 4usize..7, l in 0.3f64..1.5, seed in any::<u64>()) {
        let base = MetricGraph::complete(n, 1.0);
        let dec = make_spider(n - 1, l, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries: BTreeMap<String, Vec<(String, EndRole, String)>> = BTreeMap::new();
        for (v, ends) in base.incidence().iter().enumerate() {
            let mut slots: Vec<usize> = (0..ends.len()).collect();
            slots.shuffle(&mut rng);
            let list = ends
                .iter()
                .zip(&slots)
                .map(|(e, &s)| {
                    let b = dec.boundary()[s];
                    (base.edges()[e.edge].id.clone(), e.role, dec.graph().vertices()[b].id.clone())
                })
                .collect();
            entries.insert(base.vertices()[v].id.clone(), list);
        }
        let map = AttachmentMap::from_entries(&base, &dec, &entries).unwrap();
        let a = decorate(&base, &dec, None).unwrap();
        let b = decorate(&base, &dec, Some(&map)).unwrap();
        let lengths = |g: &MetricGraph| {
            let mut v: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let degrees = |g: &MetricGraph| {
            let mut d = g.degrees();
            d.sort();
            d
        };
        prop_assert_eq!(lengths(&a), lengths(&b));
        prop_assert_eq!(degrees(&a), degrees(&b));
    }

    #[test]
    fn edge_dirichlet_values_follow_the_formula(seed in any::<u64>(), lmax in 1.0f64..400.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, 6);
        let s = dirichlet_edge_spectrum(&g, lmax);
        for &(lambda, mult) in &s.values {
            prop_assert!(lambda <= lmax);
            let hits: usize = g
                .edges()
                .iter()
                .filter(|e| {
                    let n = (lambda.sqrt() * e.length / PI).round();
                    n >= 1.0 && ((n * PI / e.length).powi(2) - lambda).abs() / lambda <= 1e-12
                })
                .count();
            prop_assert!(hits >= 1);
            prop_assert_eq!(mult, hits);
        }
    }

    #[test]
    fn secular_matrix_is_real_and_square(seed in any::<u64>(), k in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, 6);
        let m = build_secular(&g, k).unwrap();
        prop_assert_eq!(m.entries.nrows(), 2 * g.edge_count());
        prop_assert_eq!(m.entries.ncols(), 2 * g.edge_count());
        prop_assert!(m.is_real());
    }

    #[test]
    fn bloch_matrix_conjugation(k in 0.5f64..8.0, t1 in 0.0f64..6.3, t2 in 0.0f64..6.3) {
        let lattice = MetricGraph::square_lattice(1.0);
        let g = decorate_periodic(&lattice, &make_spider(4, 2.0 / 3.0, 3).unwrap(), None).unwrap();
        let plus = build_bloch_secular(&g, k, &[t1, t2]).unwrap();
        let minus = build_bloch_secular(&g, k, &[-t1, -t2]).unwrap();
        prop_assert!((&minus.entries - plus.entries.conjugate()).norm() < 1e-12);
        prop_assert!((plus.sigma_min() - minus.sigma_min()).abs() < 1e-12);
    }
}

#[test]
fn spider_conditions_hold_for_every_odd_cycle() {
    for d in 3..=8 {
        for c in (3..=d).filter(|c| c % 2 == 1) {
            let l0 = 0.25 * d as f64 + 0.1 * c as f64;
            assert!(check_spider_conditions(&make_spider(d, l0, c).unwrap(), l0), "d {d} c {c}");
        }
    }
}

#[test]
fn flipping_continuity_rows_keeps_the_nullity() {
    // K4 with unit edges has π² as a double eigenvalue
    let g = MetricGraph::complete(4, 1.0);
    let m = build_secular(&g, PI).unwrap();
    let mut flipped = m.entries.clone();
    for (r, label) in m.rows.iter().enumerate() {
        if matches!(label, RowLabel::Continuity { vertex: 0, .. }) {
            flipped.row_mut(r).neg_mut();
        }
    }
    let nullity = |a: &nalgebra::DMatrix<num_complex::Complex64>| {
        a.clone().svd(false, false).singular_values.iter().filter(|&&s| s < 1e-9).count()
    };
    assert_eq!(nullity(&m.entries), 2);
    assert_eq!(nullity(&flipped), 2);
}
