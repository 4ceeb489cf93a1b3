//! Secular matrices of the Kirchhoff Laplacian.
//!
//! On every edge an eigenfunction with `λ = k²` is
//! `u_e(x) = a_e cos(kx) + b_e sin(kx)`, `x` measured from the start vertex.
//! Each vertex of degree `deg` contributes `deg` linear conditions on the
//! coefficients, so the matrix is square of size `2|E|`:
//!
//! * Kirchhoff: `deg - 1` continuity rows plus one row for the sum of
//!   outgoing derivatives (divided by `k`);
//! * Dirichlet: one value row per incident end.
//!
//! `λ` is an eigenvalue iff the matrix is rank deficient, with multiplicity
//! equal to the nullity. For periodic graphs an edge end that lives in the
//! translated cell `s` enters its vertex rows multiplied by `exp(-iθ·s)`,
//! which encodes `u(x + s) = exp(iθ·s) u(x)`.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EndRole, MetricGraph, VertexCondition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowLabel {
    /// `value(first) - value(second) = 0` at a Kirchhoff vertex.
    Continuity { vertex: usize, first: EdgeEnd, second: EdgeEnd },
    /// Sum of outgoing derivatives at a Kirchhoff vertex.
    Kirchhoff { vertex: usize },
    /// `value(end) = 0` at a Dirichlet vertex.
    Value { vertex: usize, end: EdgeEnd },
}

impl RowLabel {
    pub fn vertex(&self) -> usize {
        match *self {
            RowLabel::Continuity { vertex, .. } | RowLabel::Kirchhoff { vertex } | RowLabel::Value { vertex, .. } => {
                vertex
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SecularMatrix {
    /// Row-normalized entries; columns are `(a_0, b_0, a_1, b_1, ...)`.
    pub entries: DMatrix<Complex64>,
    pub rows: Vec<RowLabel>,
    pub k: f64,
}

impl SecularMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> DVector<f64> {
        SVD::new(self.entries.clone(), false, false).singular_values
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Orthonormal basis of the numerical null space: right singular
    /// vectors whose singular value is below `rel_tol * max(σ_max, 1)`.
    pub fn null_space(&self, rel_tol: f64) -> Vec<DVector<Complex64>> {
        null_space(&self.entries, rel_tol)
    }
}

pub(crate) fn null_space(m: &DMatrix<Complex64>, rel_tol: f64) -> Vec<DVector<Complex64>> {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().copied().fold(1.0, f64::max);
    let n = m.ncols();
    let mut out = Vec::new();
    for j in 0..n {
        let s = if j < svd.singular_values.len() { svd.singular_values[j] } else { 0.0 };
        if s <= rel_tol * smax {
            out.push(v_t.row(j).transpose().map(|z| z.conj()));
        }
    }
    out
}

/// Value and derivative/k coefficients of one edge end, as `[coef_a, coef_b]`.
/// The derivative is the outgoing one, i.e. pointing from the vertex into
/// the edge.
pub(crate) fn end_coefficients(length: f64, k: f64, role: EndRole) -> ([f64; 2], [f64; 2]) {
    match role {
        EndRole::Start => ([1.0, 0.0], [0.0, 1.0]),
        EndRole::End => {
            let (s, c) = (k * length).sin_cos();
            ([c, s], [s, -c])
        }
    }
}

fn bloch_phase(graph: &MetricGraph, end: EdgeEnd, theta: Option<&[f64]>) -> Complex64 {
    match (theta, end.role) {
        (Some(theta), EndRole::End) => {
            let shift = &graph.edges()[end.edge].shift;
            let phase: f64 = shift.iter().zip(theta).map(|(&s, &t)| s as f64 * t).sum();
            Complex64::from_polar(1.0, -phase)
        }
        _ => Complex64::new(1.0, 0.0),
    }
}

/// Unscaled matrix plus, per row, the Euclidean norm the row would have
/// if contributions of the same edge did not cancel. On loop-free graphs
/// this is the actual row norm; on a loop at resonance the actual norm
/// vanishes and must not be divided out.
pub(crate) struct Assembly {
    pub matrix: DMatrix<Complex64>,
    pub rows: Vec<RowLabel>,
    pub scales: Vec<f64>,
}

impl Assembly {
    pub fn scaled(mut self) -> (DMatrix<Complex64>, Vec<RowLabel>) {
        for (mut row, &s) in self.matrix.row_iter_mut().zip(&self.scales) {
            row /= Complex64::new(s, 0.0);
        }
        (self.matrix, self.rows)
    }
}

/// Assembly shared by every solver; `theta` switches on the Bloch phases.
pub(crate) fn assemble(graph: &MetricGraph, k: f64, theta: Option<&[f64]>) -> Assembly {
    let n = 2 * graph.edge_count();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut rows = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    let edges = graph.edges();
    let coef = |end: EdgeEnd| {
        let (val, der) = end_coefficients(edges[end.edge].length, k, end.role);
        let p = bloch_phase(graph, end, theta);
        (end.edge, [p * val[0], p * val[1]], [p * der[0], p * der[1]])
    };
    let mut r = 0;
    for (v, ends) in graph.incidence().into_iter().enumerate() {
        match graph.condition(v) {
            VertexCondition::Dirichlet => {
                for &end in &ends {
                    let (e, val, _) = coef(end);
                    m[(r, 2 * e)] += val[0];
                    m[(r, 2 * e + 1)] += val[1];
                    rows.push(RowLabel::Value { vertex: v, end });
                    scales.push(1.0);
                    r += 1;
                }
            }
            VertexCondition::Kirchhoff => {
                for pair in ends.windows(2) {
                    let (e1, v1, _) = coef(pair[0]);
                    let (e2, v2, _) = coef(pair[1]);
                    m[(r, 2 * e1)] += v1[0];
                    m[(r, 2 * e1 + 1)] += v1[1];
                    m[(r, 2 * e2)] -= v2[0];
                    m[(r, 2 * e2 + 1)] -= v2[1];
                    rows.push(RowLabel::Continuity { vertex: v, first: pair[0], second: pair[1] });
                    scales.push(std::f64::consts::SQRT_2);
                    r += 1;
                }
                if !ends.is_empty() {
                    for &end in &ends {
                        let (e, _, der) = coef(end);
                        m[(r, 2 * e)] += der[0];
                        m[(r, 2 * e + 1)] += der[1];
                    }
                    rows.push(RowLabel::Kirchhoff { vertex: v });
                    scales.push((ends.len() as f64).sqrt());
                    r += 1;
                }
            }
        }
    }
    debug_assert_eq!(r, n);
    Assembly { matrix: m, rows, scales }
}

/// Upper bound on ‖dM/dk‖ for the scaled finite or Bloch secular matrix,
/// uniform in k and θ. Only end-role coefficients depend on k, and each
/// contributes a pair of magnitude `l_e` to one row.
pub(crate) fn k_lipschitz(graph: &MetricGraph) -> f64 {
    let edges = graph.edges();
    let len2 = |end: EdgeEnd| if end.role == EndRole::End { edges[end.edge].length.powi(2) } else { 0.0 };
    let mut total = 0.0;
    for (v, ends) in graph.incidence().into_iter().enumerate() {
        match graph.condition(v) {
            VertexCondition::Dirichlet => total += ends.iter().map(|&e| len2(e)).sum::<f64>(),
            VertexCondition::Kirchhoff => {
                for pair in ends.windows(2) {
                    total += (len2(pair[0]) + len2(pair[1])) / 2.0;
                }
                if !ends.is_empty() {
                    total += ends.iter().map(|&e| len2(e)).sum::<f64>() / ends.len() as f64;
                }
            }
        }
    }
    total.sqrt()
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Precondition(format!("wavenumber must be positive, got {k}")));
    }
    Ok(())
}

/// Secular matrix `M(k)` of a finite graph.
pub fn build_secular(graph: &MetricGraph, k: f64) -> Result<SecularMatrix> {
    graph.ensure_finite()?;
    graph.ensure_solvable()?;
    check_k(k)?;
    let (entries, rows) = assemble(graph, k, None).scaled();
    Ok(SecularMatrix { entries, rows, k })
}

/// Bloch secular matrix `M(k, θ)` of a periodic graph's fundamental domain.
pub fn build_bloch_secular(graph: &MetricGraph, k: f64, theta: &[f64]) -> Result<SecularMatrix> {
    if theta.len() != graph.period_rank() {
        return Err(Error::DimensionMismatch { expected: graph.period_rank(), got: theta.len() });
    }
    graph.ensure_solvable()?;
    check_k(k)?;
    let (entries, rows) = assemble(graph, k, Some(theta)).scaled();
    Ok(SecularMatrix { entries, rows, k })
}

/// Per-edge coefficients of `u_e(x) = a_e cos(kx) + b_e sin(kx)`.
#[derive(Clone, Debug)]
pub struct EdgeSolution {
    pub k: f64,
    pub coefficients: Vec<(Complex64, Complex64)>,
}

impl EdgeSolution {
    pub fn lambda(&self) -> f64 {
        self.k * self.k
    }

    pub fn value(&self, edge: usize, x: f64) -> Complex64 {
        let (a, b) = self.coefficients[edge];
        let (s, c) = (self.k * x).sin_cos();
        a * c + b * s
    }

    /// Derivative along the edge coordinate.
    pub fn derivative(&self, edge: usize, x: f64) -> Complex64 {
        let (a, b) = self.coefficients[edge];
        let (s, c) = (self.k * x).sin_cos();
        (b * c - a * s) * self.k
    }
}

pub fn solution_from_nullvector(graph: &MetricGraph, k: f64, nullvector: &[Complex64]) -> Result<EdgeSolution> {
    let expected = 2 * graph.edge_count();
    if nullvector.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: nullvector.len() });
    }
    check_k(k)?;
    let coefficients = nullvector.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Ok(EdgeSolution { k, coefficients })
}
