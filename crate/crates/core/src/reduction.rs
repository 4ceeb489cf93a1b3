//! The spectral problem of a decorated graph rewritten on the base edges.
//!
//! Cutting every decoration out of a decorated graph leaves the disjoint
//! union of base edges; the former vertex `v` splits into `d` endpoints
//! `v_1, ..., v_d`. An eigenfunction then satisfies `-u'' = λu` on each
//! base edge and, per former vertex,
//!
//! ```text
//! φ'_v = −Λ(λ) φ_v
//! ```
//!
//! where `φ_v` are the endpoint values, `φ'_v` the derivatives pointing
//! away from `v`, and `Λ` the decoration's Dirichlet-to-Neumann matrix.
//! The resulting `2|E(Γ₀)|` square system depends on λ nonlinearly.

use nalgebra::{DMatrix, DVector, SVD};
use serde::Serialize;

use crate::decoration::{decorate, AttachmentMap, Decoration};
use crate::dtn::{DtnMap, DtnMatrix, DtnOptions};
use crate::eigensolve::{find_roots, scan_spectrum};
use crate::error::{Error, Result};
use crate::graph::{dirichlet_edge_spectrum, MetricGraph};
use crate::secular::end_coefficients;

#[derive(Clone, Debug)]
pub struct ReducedSecularMatrix {
    pub lambda: f64,
    pub entries: DMatrix<f64>,
}

impl ReducedSecularMatrix {
    pub fn singular_values(&self) -> DVector<f64> {
        SVD::new(self.entries.clone(), false, false).singular_values
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values().min()
    }
}

fn resolve_attachment(gamma0: &MetricGraph, dec: &Decoration, attach: Option<&AttachmentMap>) -> Result<AttachmentMap> {
    gamma0.ensure_finite()?;
    gamma0.ensure_solvable()?;
    match attach {
        Some(a) => {
            a.check(gamma0, dec)?;
            Ok(a.clone())
        }
        None => AttachmentMap::sorted(gamma0, dec),
    }
}

/// Assembles the reduced matrix from an already evaluated Λ(λ).
pub fn reduced_from_dtn(gamma0: &MetricGraph, attach: &AttachmentMap, dtn: &DtnMatrix) -> ReducedSecularMatrix {
    let lambda = dtn.lambda;
    let k = lambda.sqrt();
    let n = 2 * gamma0.edge_count();
    let lam = &dtn.entries;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut r = 0;
    for v in 0..gamma0.vertex_count() {
        let ends = attach.ends_by_slot(v);
        for (j, &end_j) in ends.iter().enumerate() {
            let e = end_j.edge;
            let (_, der) = end_coefficients(gamma0.edges()[e].length, k, end_j.role);
            m[(r, 2 * e)] += k * der[0];
            m[(r, 2 * e + 1)] += k * der[1];
            let mut scale = k * k;
            for (slot, &end_m) in ends.iter().enumerate() {
                let c = lam[(j, slot)];
                let (val, _) = end_coefficients(gamma0.edges()[end_m.edge].length, k, end_m.role);
                m[(r, 2 * end_m.edge)] += c * val[0];
                m[(r, 2 * end_m.edge + 1)] += c * val[1];
                scale += c * c;
            }
            // pre-cancellation row norm (ends of one loop edge may cancel)
            let s = scale.sqrt();
            for col in 0..n {
                m[(r, col)] /= s;
            }
            r += 1;
        }
    }
    ReducedSecularMatrix { lambda, entries: m }
}

/// Reduced matrix at `lambda`; fails with `PoleProximity` near σ(H_G).
pub fn build_reduced(
    gamma0: &MetricGraph,
    dec: &Decoration,
    attach: Option<&AttachmentMap>,
    lambda: f64,
    opts: &DtnOptions,
) -> Result<ReducedSecularMatrix> {
    let attach = resolve_attachment(gamma0, dec, attach)?;
    let dtn = crate::dtn::dtn_matrix(dec, lambda, opts)?;
    Ok(reduced_from_dtn(gamma0, &attach, &dtn))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub window: (f64, f64),
    pub exclusion_radius: f64,
    /// Points of σ(H_G) ∪ Σ_D near the window.
    pub excluded_points: Vec<f64>,
    /// Direct eigenvalues (with multiplicity) off the excluded set.
    pub direct: Vec<f64>,
    /// Reduced roots (with multiplicity) off the excluded set.
    pub reduced: Vec<f64>,
    pub max_mismatch: f64,
    pub unmatched_direct: Vec<f64>,
    pub unmatched_reduced: Vec<f64>,
}

impl ReductionReport {
    pub fn counts_match(&self) -> bool {
        self.direct.len() == self.reduced.len() && self.unmatched_direct.is_empty() && self.unmatched_reduced.is_empty()
    }
}

/// Roots of the reduced problem in `[lo, hi)`, with multiplicity, scanning
/// directly in λ on a grid of `(hi - lo) / 2000`.
pub fn reduced_spectrum(
    gamma0: &MetricGraph,
    dec: &Decoration,
    attach: Option<&AttachmentMap>,
    lo: f64,
    hi: f64,
    opts: &DtnOptions,
) -> Result<Vec<(f64, usize)>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let attach = resolve_attachment(gamma0, dec, attach)?;
    let map = DtnMap::new(dec, lo, hi, opts)?;
    let step = (hi - lo) / 2000.0;
    let roots = find_roots(lo, hi, step, &opts.scan, None, |lambda| {
        let dtn = map.eval(lambda).ok()?;
        Some(reduced_from_dtn(gamma0, &attach, &dtn).singular_values())
    })?;
    Ok(roots
        .into_iter()
        .filter(|r| r.x >= lo && r.x < hi)
        .map(|r| (r.x, r.multiplicity))
        .collect())
}

/// Compares the reduced roots with the direct spectrum of the decorated
/// graph, away from σ(H_G) ∪ Σ_D where the rewriting does not apply.
pub fn reduced_spectrum_check(
    gamma0: &MetricGraph,
    dec: &Decoration,
    attach: Option<&AttachmentMap>,
    lo: f64,
    hi: f64,
    exclusion_radius: f64,
    opts: &DtnOptions,
) -> Result<ReductionReport> {
    let decorated = decorate(gamma0, dec, attach)?;
    let direct = scan_spectrum(&decorated, lo, hi, &opts.scan)?;
    let reduced = reduced_spectrum(gamma0, dec, attach, lo, hi, opts)?;

    let map = DtnMap::new(dec, lo - exclusion_radius, hi + exclusion_radius, opts)?;
    let mut excluded_points: Vec<f64> = map.poles().to_vec();
    let sigma_d = dirichlet_edge_spectrum(gamma0, hi + exclusion_radius);
    excluded_points.extend(
        sigma_d
            .values
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| v >= lo - exclusion_radius),
    );
    excluded_points.sort_by(f64::total_cmp);
    let keep = |l: f64| excluded_points.iter().all(|&p| (p - l).abs() > exclusion_radius);

    let expand = |list: Vec<(f64, usize)>| -> Vec<f64> {
        list.into_iter()
            .filter(|&(l, _)| keep(l))
            .flat_map(|(l, m)| std::iter::repeat(l).take(m))
            .collect()
    };
    let direct = expand(direct.entries.iter().map(|e| (e.lambda, e.multiplicity)).collect());
    let reduced = expand(reduced);

    let (max_mismatch, unmatched_direct, unmatched_reduced) = match_sorted(&direct, &reduced, 1e-3);
    Ok(ReductionReport {
        window: (lo, hi),
        exclusion_radius,
        excluded_points,
        direct,
        reduced,
        max_mismatch,
        unmatched_direct,
        unmatched_reduced,
    })
}

/// Greedy pairing of two sorted lists within `pair_tol`; returns the largest
/// paired difference and the leftovers of each side.
fn match_sorted(a: &[f64], b: &[f64], pair_tol: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    let (mut left_a, mut left_b) = (Vec::new(), Vec::new());
    while i < a.len() && j < b.len() {
        let diff = a[i] - b[j];
        if diff.abs() <= pair_tol {
            worst = worst.max(diff.abs());
            i += 1;
            j += 1;
        } else if diff < 0.0 {
            left_a.push(a[i]);
            i += 1;
        } else {
            left_b.push(b[j]);
            j += 1;
        }
    }
    left_a.extend_from_slice(&a[i..]);
    left_b.extend_from_slice(&b[j..]);
    (worst, left_a, left_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexCondition;
    use std::f64::consts::PI;

    #[test]
    fn greedy_matching() {
        let (w, a, b) = match_sorted(&[1.0, 2.0, 3.0], &[1.0 + 1e-7, 3.0, 4.0], 1e-3);
        assert!((w - 1e-7).abs() < 1e-12);
        assert_eq!(a, vec![2.0]);
        assert_eq!(b, vec![4.0]);
    }

    #[test]
    fn series_insertion_on_a_triangle() {
        // inserting an edge of length a at each vertex of C3 gives a cycle
        // of six edges with total length 3 (1 + a)
        let a = 0.5;
        let c3 = MetricGraph::cycle(&[1.0; 3]);
        let dec = Decoration::single_edge(a);
        let roots = reduced_spectrum(&c3, &dec, None, 0.5, 10.0, &DtnOptions::default()).unwrap();
        // plain cycle of length L: (2πn/L)², double
        let l = 3.0 * (1.0 + a);
        assert_eq!(roots.len(), 2, "{roots:?}");
        for (n, &(lambda, mult)) in roots.iter().enumerate() {
            let expected = (2.0 * PI * (n + 1) as f64 / l).powi(2);
            assert!((lambda - expected).abs() < 1e-7, "{lambda} vs {expected}");
            assert_eq!(mult, 2);
        }
    }

    #[test]
    fn reduced_matrix_is_finite_below_first_pole() {
        let c3 = MetricGraph::cycle(&[1.0; 3]);
        let dec = Decoration::single_edge(0.5);
        let m1 = build_reduced(&c3, &dec, None, 1.0, &DtnOptions::default()).unwrap();
        let m2 = build_reduced(&c3, &dec, None, 1.001, &DtnOptions::default()).unwrap();
        assert_eq!(m1.entries.nrows(), 6);
        assert!(m1.entries.iter().all(|x| x.is_finite()));
        assert!((&m1.entries - &m2.entries).norm() < 1e-2);
    }

    #[test]
    fn pole_is_refused() {
        let c3 = MetricGraph::cycle(&[1.0; 3]);
        let dec = Decoration::single_edge(0.5);
        let pole = (PI / 0.5).powi(2);
        let err = build_reduced(&c3, &dec, None, pole, &DtnOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
    }

    #[test]
    fn requires_finite_regular_base() {
        let dec = Decoration::single_edge(0.5);
        let star = MetricGraph::star(&[1.0, 1.0, 1.0], VertexCondition::Kirchhoff);
        assert!(reduced_spectrum(&star, &dec, None, 1.0, 2.0, &DtnOptions::default()).is_err());
        let chain = MetricGraph::chain_lattice(1.0);
        assert!(reduced_spectrum(&chain, &dec, None, 1.0, 2.0, &DtnOptions::default()).is_err());
    }
}
