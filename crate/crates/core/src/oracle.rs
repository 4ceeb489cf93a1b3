//! Piecewise-linear finite elements for the graph Laplacian.
//!
//! This is an independent check on the secular pipeline: the weak form
//! `∫ u'v' = λ ∫ uv` over the graph, with one shared unknown per Kirchhoff
//! vertex (continuity by node sharing, the Kirchhoff balance arises
//! naturally) and Dirichlet vertices eliminated.
//!
//! Eigenvalues are located by bisection on Sylvester's law of inertia: the
//! number of generalized eigenvalues below `σ` equals the number of
//! negative eigenvalues of `K − σM`. Each edge's interior nodes form a
//! tridiagonal block, which is eliminated in `O(m_e)`; the remaining Schur
//! complement lives on the vertex unknowns only.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexCondition};

#[derive(Clone, Debug)]
struct EdgeMesh {
    start: Option<usize>,
    end: Option<usize>,
    elements: usize,
    h: f64,
}

#[derive(Clone, Debug)]
pub struct FemDiscretization {
    edges: Vec<EdgeMesh>,
    vertex_unknowns: usize,
}

impl FemDiscretization {
    pub fn new(graph: &MetricGraph, h: f64) -> Result<Self> {
        graph.ensure_finite()?;
        graph.ensure_solvable()?;
        let min_length = graph.edges().iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        if !(h > 0.0) || h > min_length / 4.0 {
            return Err(Error::MeshTooCoarse { h, min_length });
        }
        let mut index = vec![None; graph.vertex_count()];
        let mut next = 0;
        for (v, vert) in graph.vertices().iter().enumerate() {
            if vert.condition == VertexCondition::Kirchhoff {
                index[v] = Some(next);
                next += 1;
            }
        }
        let edges = graph
            .edges()
            .iter()
            .map(|e| {
                let elements = (e.length / h).ceil() as usize;
                EdgeMesh { start: index[e.start], end: index[e.end], elements, h: e.length / elements as f64 }
            })
            .collect();
        Ok(FemDiscretization { edges, vertex_unknowns: next })
    }

    /// Total number of unknowns (vertex plus edge-interior nodes).
    pub fn unknowns(&self) -> usize {
        self.vertex_unknowns + self.edges.iter().map(|e| e.elements - 1).sum::<usize>()
    }

    /// Global stiffness and mass matrices as `(row, col, value)` triplets,
    /// vertex unknowns first, then interior nodes edge by edge.
    pub fn triplets(&self) -> (Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>) {
        let mut k = Vec::new();
        let mut m = Vec::new();
        let mut offset = self.vertex_unknowns;
        for e in &self.edges {
            let node = |i: usize| -> Option<usize> {
                if i == 0 {
                    e.start
                } else if i == e.elements {
                    e.end
                } else {
                    Some(offset + i - 1)
                }
            };
            for el in 0..e.elements {
                let (a, b) = (node(el), node(el + 1));
                for (p, q, kv, mv) in [
                    (a, a, 1.0 / e.h, e.h / 3.0),
                    (b, b, 1.0 / e.h, e.h / 3.0),
                    (a, b, -1.0 / e.h, e.h / 6.0),
                    (b, a, -1.0 / e.h, e.h / 6.0),
                ] {
                    if let (Some(p), Some(q)) = (p, q) {
                        k.push((p, q, kv));
                        m.push((p, q, mv));
                    }
                }
            }
            offset += e.elements - 1;
        }
        (k, m)
    }

    /// Number of generalized eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        // exact zero pivots have probability zero; nudge and retry
        let mut s = sigma;
        for _ in 0..8 {
            if let Some(c) = self.try_count_below(s) {
                return c;
            }
            s += sigma.abs().max(1.0) * 1e-14;
        }
        self.try_count_below(s).unwrap_or(0)
    }

    fn try_count_below(&self, sigma: f64) -> Option<usize> {
        let nv = self.vertex_unknowns;
        let mut schur = DMatrix::<f64>::zeros(nv, nv);
        let mut negatives = 0;
        for e in &self.edges {
            let p = 1.0 / e.h - sigma * e.h / 3.0;
            let q = -1.0 / e.h - sigma * e.h / 6.0;
            let a = 2.0 * p;
            let n = e.elements - 1;
            // forward pivots of the interior chain
            let mut d = a;
            if d == 0.0 {
                return None;
            }
            negatives += (d < 0.0) as usize;
            let mut corner = 1.0; // Π (−q/d_i), i < n
            for _ in 1..n {
                corner *= -q / d;
                d = a - q * q / d;
                if d == 0.0 {
                    return None;
                }
                negatives += (d < 0.0) as usize;
            }
            let inv_nn = 1.0 / d;
            let inv_1n = corner * inv_nn;
            // backward sweep for the top-left entry of the inverse
            let mut b = a;
            for _ in 1..n {
                b = a - q * q / b;
                if b == 0.0 {
                    return None;
                }
            }
            let inv_11 = 1.0 / b;
            let q2 = q * q;
            if let Some(s) = e.start {
                schur[(s, s)] += p - q2 * inv_11;
            }
            if let Some(t) = e.end {
                schur[(t, t)] += p - q2 * inv_nn;
            }
            if let (Some(s), Some(t)) = (e.start, e.end) {
                schur[(s, t)] -= q2 * inv_1n;
                schur[(t, s)] -= q2 * inv_1n;
            }
        }
        if nv > 0 {
            negatives += SymmetricEigen::new(schur).eigenvalues.iter().filter(|&&x| x < 0.0).count();
        }
        Some(negatives)
    }

    /// The `index`-th smallest generalized eigenvalue (0-based).
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let target = index + 1;
        let mut hi = 1.0;
        while self.count_below(hi) < target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The `count` smallest approximate eigenvalues of a finite graph on a
/// mesh of size at most `h`, sorted, with multiplicity.
pub fn fem_spectrum(graph: &MetricGraph, h: f64, count: usize) -> Result<Vec<f64>> {
    let fem = FemDiscretization::new(graph, h)?;
    let count = count.min(fem.unknowns());
    Ok((0..count).map(|i| fem.eigenvalue(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use VertexCondition::*;

    fn dense(n: usize, t: &[(usize, usize, f64)]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in t {
            m[(i, j)] += v;
        }
        m
    }

    #[test]
    fn dirichlet_interval() {
        let ev = fem_spectrum(&MetricGraph::interval(1.0, Dirichlet, Dirichlet), 1e-3, 2).unwrap();
        assert!((ev[0] / (PI * PI) - 1.0).abs() < 1e-4);
        assert!((ev[1] / (4.0 * PI * PI) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn loop_pair() {
        let ev = fem_spectrum(&MetricGraph::loop_graph(1.0), 1e-3, 3).unwrap();
        assert!(ev[0].abs() < 1e-10);
        assert!((ev[1] - ev[2]).abs() < 1e-4 * ev[1]);
        assert!((ev[1] / (4.0 * PI * PI) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn coarse_mesh_rejected() {
        let g = MetricGraph::interval(1.0, Dirichlet, Dirichlet);
        assert!(matches!(fem_spectrum(&g, 0.3, 1), Err(Error::MeshTooCoarse { .. })));
    }

    #[test]
    fn inertia_counts_match_dense_eigenvalues() {
        let mut g = MetricGraph::star(&[1.0, 0.7, 1.3], Kirchhoff);
        g.set_condition(1, Dirichlet);
        let fem = FemDiscretization::new(&g, 0.1).unwrap();
        let n = fem.unknowns();
        let (kt, mt) = fem.triplets();
        let (k, m) = (dense(n, &kt), dense(n, &mt));
        // symmetric, K positive semidefinite, M positive definite
        assert!((&k - k.transpose()).norm() < 1e-14);
        assert!(SymmetricEigen::new(k.clone()).eigenvalues.min() > -1e-10);
        assert!(SymmetricEigen::new(m.clone()).eigenvalues.min() > 0.0);
        let chol = m.clone().cholesky().unwrap();
        let linv = chol.l().try_inverse().unwrap();
        let mut reference: Vec<f64> =
            SymmetricEigen::new(&linv * &k * linv.transpose()).eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for sigma in [0.5, 3.0, 17.0, 80.0, 400.0] {
            let expected = reference.iter().filter(|&&x| x < sigma).count();
            assert_eq!(fem.count_below(sigma), expected, "sigma {sigma}");
        }
        for i in 0..5 {
            assert!((fem.eigenvalue(i) - reference[i]).abs() < 1e-9 * reference[i].max(1.0));
        }
    }
}
