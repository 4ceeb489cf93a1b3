//! Metric graph data types with their structural checks.
//!
//! A [`MetricGraph`] is a multigraph whose edges are intervals `[0, l_e]`
//! with the coordinate running from the start vertex to the end vertex.
//! Loops and parallel edges are allowed. A periodic graph is stored as its
//! fundamental domain: every edge carries an integer shift vector telling in
//! which translated cell its end vertex lives.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing lengths or merging spectral values.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexCondition {
    /// Continuity plus zero sum of outgoing derivatives.
    Kirchhoff,
    /// The function vanishes at the vertex.
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub condition: VertexCondition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricEdge {
    pub id: String,
    pub start: usize,
    pub end: usize,
    pub length: f64,
    /// Cell offset of the end vertex; empty for finite graphs.
    pub shift: Vec<i64>,
}

impl MetricEdge {
    pub fn is_loop(&self) -> bool {
        self.start == self.end
    }

    pub fn has_shift(&self) -> bool {
        self.shift.iter().any(|&s| s != 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndRole {
    Start,
    End,
}

/// One end of an edge, i.e. a half-edge sitting at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub role: EndRole,
}

impl EdgeEnd {
    pub fn start(edge: usize) -> Self {
        EdgeEnd { edge, role: EndRole::Start }
    }

    pub fn end(edge: usize) -> Self {
        EdgeEnd { edge, role: EndRole::End }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<MetricEdge>,
    period_rank: usize,
    uniformity: Option<f64>,
}

impl MetricGraph {
    /// An empty finite graph.
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty periodic graph with `ℤ^period_rank` acting on it.
    pub fn periodic(period_rank: usize) -> Self {
        MetricGraph { period_rank, ..Self::default() }
    }

    pub fn with_uniformity(mut self, l: f64) -> Self {
        self.uniformity = Some(l);
        self
    }

    pub fn set_uniformity(&mut self, l: Option<f64>) {
        self.uniformity = l;
    }

    /// Adds a vertex and returns its index. Ids must be unique.
    pub fn add_vertex(&mut self, id: impl Into<String>, condition: VertexCondition) -> Result<usize> {
        let id = id.into();
        if self.vertex_index(&id).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate vertex id {id:?}")));
        }
        self.vertices.push(Vertex { id, condition });
        Ok(self.vertices.len() - 1)
    }

    /// Adds an unshifted edge between two existing vertices.
    pub fn add_edge(&mut self, id: impl Into<String>, start: usize, end: usize, length: f64) -> Result<usize> {
        let shift = vec![0; self.period_rank];
        self.add_shifted_edge(id, start, end, length, shift)
    }

    pub fn add_shifted_edge(
        &mut self,
        id: impl Into<String>,
        start: usize,
        end: usize,
        length: f64,
        shift: Vec<i64>,
    ) -> Result<usize> {
        let id = id.into();
        let n = self.vertices.len();
        if start >= n || end >= n {
            return Err(Error::InvalidGraph(format!("edge {id:?} references a missing vertex")));
        }
        if shift.len() != self.period_rank {
            return Err(Error::DimensionMismatch { expected: self.period_rank, got: shift.len() });
        }
        if self.edges.iter().any(|e| e.id == id) {
            return Err(Error::InvalidGraph(format!("duplicate edge id {id:?}")));
        }
        self.edges.push(MetricEdge { id, start, end, length, shift });
        Ok(self.edges.len() - 1)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[MetricEdge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn period_rank(&self) -> usize {
        self.period_rank
    }

    pub fn is_periodic(&self) -> bool {
        self.period_rank > 0
    }

    pub fn uniformity(&self) -> Option<f64> {
        self.uniformity
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn condition(&self, v: usize) -> VertexCondition {
        self.vertices[v].condition
    }

    pub fn set_condition(&mut self, v: usize, condition: VertexCondition) {
        self.vertices[v].condition = condition;
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Vertex an edge end sits at.
    pub fn end_vertex(&self, end: EdgeEnd) -> usize {
        let e = &self.edges[end.edge];
        match end.role {
            EndRole::Start => e.start,
            EndRole::End => e.end,
        }
    }

    /// Edge ends incident to every vertex, each list sorted by (edge, role).
    /// A loop contributes both of its ends.
    pub fn incidence(&self) -> Vec<Vec<EdgeEnd>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.start].push(EdgeEnd::start(i));
            inc[e.end].push(EdgeEnd::end(i));
        }
        inc
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incidence().iter().map(Vec::len).collect()
    }

    /// The common degree if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let degrees = self.degrees();
        let first = *degrees.first()?;
        degrees.iter().all(|&d| d == first).then_some(first)
    }

    /// Connectivity of the underlying (orbit) graph, ignoring shifts.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.start), find(&mut parent, e.end));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    pub fn has_dirichlet_vertex(&self) -> bool {
        self.vertices.iter().any(|v| v.condition == VertexCondition::Dirichlet)
    }

    /// Whether λ = 0 is an eigenvalue of a finite graph. It is exactly when
    /// some connected component carries no Dirichlet vertex (the constant
    /// function on that component).
    pub fn zero_is_eigenvalue(&self) -> bool {
        self.zero_multiplicity() > 0
    }

    /// Multiplicity of λ = 0: the number of components with at least one
    /// edge and no Dirichlet vertex.
    pub fn zero_multiplicity(&self) -> usize {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let inc = self.incidence();
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX || inc[s].is_empty() {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(v) = stack.pop() {
                for end in &inc[v] {
                    let e = &self.edges[end.edge];
                    for w in [e.start, e.end] {
                        if comp[w] == usize::MAX {
                            comp[w] = next;
                            stack.push(w);
                        }
                    }
                }
            }
            next += 1;
        }
        (0..next)
            .filter(|&c| {
                (0..n).filter(|&v| comp[v] == c).all(|v| self.vertices[v].condition == VertexCondition::Kirchhoff)
            })
            .count()
    }

    /// The same graph with all shifts forgotten (the compact orbit graph).
    pub fn orbit_graph(&self) -> MetricGraph {
        MetricGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| MetricEdge { shift: Vec::new(), ..e.clone() })
                .collect(),
            period_rank: 0,
            uniformity: self.uniformity,
        }
    }

    /// Errors unless every length is finite and positive and there is at
    /// least one edge. Solvers call this before assembling matrices.
    pub fn ensure_solvable(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        if let Some(e) = self.edges.iter().find(|e| !(e.length.is_finite() && e.length > 0.0)) {
            return Err(Error::InvalidGraph(format!("edge {:?} has non-positive length {}", e.id, e.length)));
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_periodic() {
            return Err(Error::Precondition("expected a finite graph (period_rank = 0)".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        let degrees = self.degrees();
        let mut degree_histogram = BTreeMap::new();
        for &d in &degrees {
            *degree_histogram.entry(d).or_insert(0) += 1;
        }
        let mut violations = Vec::new();
        for e in &self.edges {
            if !(e.length.is_finite() && e.length > 0.0) {
                violations.push(format!("edge {}: length {} is not positive", e.id, e.length));
            }
        }
        let lengths_positive = violations.is_empty();
        let mut lengths_within_uniformity = true;
        if let Some(l) = self.uniformity {
            if !(l > 0.0) {
                violations.push(format!("uniformity parameter {l} is not positive"));
                lengths_within_uniformity = false;
            } else {
                for e in &self.edges {
                    if e.length < l || e.length > 1.0 / l {
                        lengths_within_uniformity = false;
                        violations.push(format!(
                            "edge {}: length {} outside [{}, {}]",
                            e.id,
                            e.length,
                            l,
                            1.0 / l
                        ));
                    }
                }
            }
        }
        if self.period_rank == 0 {
            for e in &self.edges {
                if e.has_shift() {
                    violations.push(format!("edge {}: non-zero shift in a finite graph", e.id));
                }
            }
        }
        let connected = self.is_connected();
        if !connected {
            violations.push("graph is not connected".into());
        }
        if self.edges.is_empty() {
            violations.push("graph has no edges".into());
        }
        ValidationReport {
            vertex_count: self.vertices.len(),
            edge_count: self.edges.len(),
            period_rank: self.period_rank,
            degree_histogram,
            connected,
            lengths_positive,
            lengths_within_uniformity,
            regular_degree: self.regular_degree(),
            violations,
        }
    }

    // --- small constructors used throughout tests and examples ---

    /// A single edge `a -- b`.
    pub fn interval(length: f64, at_start: VertexCondition, at_end: VertexCondition) -> Self {
        let mut g = MetricGraph::new();
        let a = g.add_vertex("a", at_start).unwrap();
        let b = g.add_vertex("b", at_end).unwrap();
        g.add_edge("e", a, b, length).unwrap();
        g
    }

    /// One vertex with one loop edge.
    pub fn loop_graph(length: f64) -> Self {
        let mut g = MetricGraph::new();
        let v = g.add_vertex("v", VertexCondition::Kirchhoff).unwrap();
        g.add_edge("e", v, v, length).unwrap();
        g
    }

    /// Cycle `v0 -> v1 -> ... -> v0` with the given edge lengths.
    pub fn cycle(lengths: &[f64]) -> Self {
        let n = lengths.len();
        let mut g = MetricGraph::new();
        for i in 0..n {
            g.add_vertex(format!("v{i}"), VertexCondition::Kirchhoff).unwrap();
        }
        for (i, &l) in lengths.iter().enumerate() {
            g.add_edge(format!("e{i}"), i, (i + 1) % n, l).unwrap();
        }
        g
    }

    /// Complete graph on `n` vertices, all edges of the same length.
    pub fn complete(n: usize, length: f64) -> Self {
        let mut g = MetricGraph::new();
        for i in 0..n {
            g.add_vertex(format!("v{i}"), VertexCondition::Kirchhoff).unwrap();
        }
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(format!("e{k}"), i, j, length).unwrap();
                k += 1;
            }
        }
        g
    }

    /// Star with a Kirchhoff center and the given conditions at the tips.
    pub fn star(lengths: &[f64], tips: VertexCondition) -> Self {
        let mut g = MetricGraph::new();
        let c = g.add_vertex("c", VertexCondition::Kirchhoff).unwrap();
        for (i, &l) in lengths.iter().enumerate() {
            let t = g.add_vertex(format!("t{i}"), tips).unwrap();
            g.add_edge(format!("e{i}"), c, t, l).unwrap();
        }
        g
    }

    /// The ℤ chain: one vertex, one edge to its own translate.
    pub fn chain_lattice(length: f64) -> Self {
        let mut g = MetricGraph::periodic(1);
        let v = g.add_vertex("v", VertexCondition::Kirchhoff).unwrap();
        g.add_shifted_edge("x", v, v, length, vec![1]).unwrap();
        g
    }

    /// The ℤ² square lattice: one vertex, edges to its x- and y-translates.
    pub fn square_lattice(length: f64) -> Self {
        let mut g = MetricGraph::periodic(2);
        let v = g.add_vertex("v", VertexCondition::Kirchhoff).unwrap();
        g.add_shifted_edge("x", v, v, length, vec![1, 0]).unwrap();
        g.add_shifted_edge("y", v, v, length, vec![0, 1]).unwrap();
        g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub period_rank: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
    pub connected: bool,
    pub lengths_positive: bool,
    pub lengths_within_uniformity: bool,
    pub regular_degree: Option<usize>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The set Σ_D of Dirichlet eigenvalues `(nπ/l_e)²` of the individual
/// edges, truncated at `lambda_max`, plus the edge lengths needed to answer
/// distance queries against the untruncated set.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletEdgeSpectrum {
    pub values: Vec<(f64, usize)>,
    lengths: Vec<f64>,
}

impl DirichletEdgeSpectrum {
    /// Distance from `lambda` to the full (untruncated) set.
    pub fn distance_to(&self, lambda: f64) -> f64 {
        let mut best = f64::INFINITY;
        let root = lambda.max(0.0).sqrt();
        for &l in &self.lengths {
            let x = root * l / PI;
            let lo = x.floor().max(1.0);
            for n in [lo - 1.0, lo, lo + 1.0] {
                if n >= 1.0 {
                    let value = (n * PI / l).powi(2);
                    best = best.min((value - lambda).abs());
                }
            }
        }
        best
    }

    /// True if `lambda` coincides with an element of Σ_D within `rel_tol`.
    pub fn contains(&self, lambda: f64, rel_tol: f64) -> bool {
        self.distance_to(lambda) <= rel_tol * lambda.abs()
    }
}

pub fn dirichlet_edge_spectrum(graph: &MetricGraph, lambda_max: f64) -> DirichletEdgeSpectrum {
    let mut raw: Vec<f64> = Vec::new();
    for e in graph.edges() {
        if !(e.length > 0.0) {
            continue;
        }
        let mut n = 1.0;
        loop {
            let value = (n * PI / e.length).powi(2);
            if value > lambda_max {
                break;
            }
            raw.push(value);
            n += 1.0;
        }
    }
    raw.sort_by(f64::total_cmp);
    let mut values: Vec<(f64, usize)> = Vec::new();
    for v in raw {
        match values.last_mut() {
            Some((last, mult)) if (v - *last).abs() <= COINCIDENCE_TOL * v => *mult += 1,
            _ => values.push((v, 1)),
        }
    }
    DirichletEdgeSpectrum {
        values,
        lengths: graph.edges().iter().map(|e| e.length).filter(|l| *l > 0.0).collect(),
    }
}
