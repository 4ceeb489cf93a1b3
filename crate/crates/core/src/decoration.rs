//! Vertex decorations and the decorated graph construction.
//!
//! A [`Decoration`] is a finite graph `G` with an ordered boundary list
//! `B`. Decorating a `d`-regular base graph replaces each base vertex by a
//! fresh copy of `G` and reattaches the `d` incident edge ends to the `d`
//! boundary vertices according to an [`AttachmentMap`].

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EndRole, MetricGraph, VertexCondition, COINCIDENCE_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct Decoration {
    graph: MetricGraph,
    boundary: Vec<usize>,
}

impl Decoration {
    /// Boundary given by vertex ids, in order.
    pub fn new(graph: MetricGraph, boundary: &[&str]) -> Result<Self> {
        let idx = boundary
            .iter()
            .map(|id| {
                graph
                    .vertex_index(id)
                    .ok_or_else(|| Error::InvalidGraph(format!("boundary vertex {id:?} not in decoration")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(graph, idx)
    }

    pub fn from_indices(graph: MetricGraph, boundary: Vec<usize>) -> Result<Self> {
        if graph.is_periodic() {
            return Err(Error::InvalidGraph("a decoration must be a finite graph".into()));
        }
        if boundary.is_empty() {
            return Err(Error::InvalidGraph("decoration boundary is empty".into()));
        }
        for (i, &b) in boundary.iter().enumerate() {
            if b >= graph.vertex_count() {
                return Err(Error::InvalidGraph(format!("boundary index {b} out of range")));
            }
            if boundary[..i].contains(&b) {
                return Err(Error::InvalidGraph(format!(
                    "boundary vertex {:?} listed twice",
                    graph.vertices()[b].id
                )));
            }
        }
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("decoration graph is not connected".into()));
        }
        graph.ensure_solvable()?;
        Ok(Decoration { graph, boundary })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Boundary vertex indices into `graph()`, in boundary order.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_size(&self) -> usize {
        self.boundary.len()
    }

    /// Slot of vertex `v` in the boundary list, if it is a boundary vertex.
    pub fn slot_of(&self, v: usize) -> Option<usize> {
        self.boundary.iter().position(|&b| b == v)
    }

    /// The decoration graph with Dirichlet conditions on the boundary and
    /// Kirchhoff conditions elsewhere; its spectrum is σ(H_G).
    pub fn dirichlet_graph(&self) -> MetricGraph {
        let mut g = self.graph.clone();
        for v in 0..g.vertex_count() {
            let c = if self.boundary.contains(&v) { VertexCondition::Dirichlet } else { VertexCondition::Kirchhoff };
            g.set_condition(v, c);
        }
        g
    }

    /// A single edge of length `length` with both endpoints on the boundary.
    pub fn single_edge(length: f64) -> Self {
        let g = MetricGraph::interval(length, VertexCondition::Kirchhoff, VertexCondition::Kirchhoff);
        Decoration::from_indices(g, vec![0, 1]).unwrap()
    }

    /// A cycle of `n` edges of length `length`, every vertex on the boundary.
    pub fn cycle(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("cycle needs at least one edge".into()));
        }
        let g = MetricGraph::cycle(&vec![length; n]);
        Decoration::from_indices(g, (0..n).collect())
    }
}

/// Per base vertex, which boundary slot each incident edge end is glued to.
#[derive(Clone, Debug, PartialEq)]
pub struct AttachmentMap {
    slots: Vec<BTreeMap<EdgeEnd, usize>>,
}

impl AttachmentMap {
    /// Default policy: the incident ends of each vertex, sorted by
    /// (edge index, end role), are paired with the boundary list in order.
    pub fn sorted(base: &MetricGraph, dec: &Decoration) -> Result<Self> {
        check_regular(base, dec)?;
        let slots = base
            .incidence()
            .into_iter()
            .map(|ends| ends.into_iter().enumerate().map(|(slot, end)| (end, slot)).collect())
            .collect();
        Ok(AttachmentMap { slots })
    }

    /// Explicit map: for each base vertex id, a list of
    /// (edge id, end role, boundary vertex id).
    pub fn from_entries(
        base: &MetricGraph,
        dec: &Decoration,
        entries: &BTreeMap<String, Vec<(String, EndRole, String)>>,
    ) -> Result<Self> {
        check_regular(base, dec)?;
        let mut slots = vec![BTreeMap::new(); base.vertex_count()];
        for (vid, list) in entries {
            let v = base
                .vertex_index(vid)
                .ok_or_else(|| Error::InvalidAttachment(format!("unknown base vertex {vid:?}")))?;
            for (eid, role, bid) in list {
                let edge = base
                    .edge_index(eid)
                    .ok_or_else(|| Error::InvalidAttachment(format!("unknown base edge {eid:?}")))?;
                let b = dec
                    .graph()
                    .vertex_index(bid)
                    .and_then(|b| dec.slot_of(b))
                    .ok_or_else(|| Error::InvalidAttachment(format!("{bid:?} is not a boundary vertex")))?;
                if slots[v].insert(EdgeEnd { edge, role: *role }, b).is_some() {
                    return Err(Error::InvalidAttachment(format!("edge end {eid}/{role:?} assigned twice")));
                }
            }
        }
        let map = AttachmentMap { slots };
        map.check(base, dec)?;
        Ok(map)
    }

    /// Slot assigned to an edge end at base vertex `v`.
    pub fn slot(&self, v: usize, end: EdgeEnd) -> usize {
        self.slots[v][&end]
    }

    /// Incident ends of base vertex `v`, indexed by boundary slot.
    pub fn ends_by_slot(&self, v: usize) -> Vec<EdgeEnd> {
        let mut out: Vec<(usize, EdgeEnd)> = self.slots[v].iter().map(|(&e, &s)| (s, e)).collect();
        out.sort();
        out.into_iter().map(|(_, e)| e).collect()
    }

    /// Verifies that every vertex maps its incident ends bijectively onto
    /// the boundary slots.
    pub fn check(&self, base: &MetricGraph, dec: &Decoration) -> Result<()> {
        let d = dec.boundary_size();
        if self.slots.len() != base.vertex_count() {
            return Err(Error::InvalidAttachment("map does not cover every base vertex".into()));
        }
        for (v, ends) in base.incidence().iter().enumerate() {
            let map = &self.slots[v];
            if map.len() != ends.len() || !ends.iter().all(|e| map.contains_key(e)) {
                return Err(Error::InvalidAttachment(format!(
                    "vertex {:?}: domain is not exactly its incident edge ends",
                    base.vertices()[v].id
                )));
            }
            let mut seen = vec![false; d];
            for &s in map.values() {
                if s >= d || std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidAttachment(format!(
                        "vertex {:?}: not a bijection onto the boundary",
                        base.vertices()[v].id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_regular(base: &MetricGraph, dec: &Decoration) -> Result<()> {
    let d = dec.boundary_size();
    match base.regular_degree() {
        Some(r) if r == d => Ok(()),
        Some(r) => Err(Error::DegreeMismatch(format!("base graph is {r}-regular but the boundary has {d} vertices"))),
        None => Err(Error::DegreeMismatch("base graph is not regular".into())),
    }
}

/// Replaces every vertex of a finite `d`-regular graph by a copy of the
/// decoration. Passing `None` uses [`AttachmentMap::sorted`].
pub fn decorate(base: &MetricGraph, dec: &Decoration, attach: Option<&AttachmentMap>) -> Result<MetricGraph> {
    base.ensure_finite()?;
    decorate_any(base, dec, attach)
}

/// Periodic variant: one decoration copy per fundamental-domain vertex.
/// Base edges keep their shifts; decoration edges get zero shift.
pub fn decorate_periodic(base: &MetricGraph, dec: &Decoration, attach: Option<&AttachmentMap>) -> Result<MetricGraph> {
    if !base.is_periodic() {
        return Err(Error::Precondition("expected a periodic base graph".into()));
    }
    decorate_any(base, dec, attach)
}

fn decorate_any(base: &MetricGraph, dec: &Decoration, attach: Option<&AttachmentMap>) -> Result<MetricGraph> {
    let default;
    let attach = match attach {
        Some(a) => {
            check_regular(base, dec)?;
            a.check(base, dec)?;
            a
        }
        None => {
            default = AttachmentMap::sorted(base, dec)?;
            &default
        }
    };
    let g = dec.graph();
    let nv = g.vertex_count();
    let mut out = MetricGraph::periodic(base.period_rank());
    out.set_uniformity(base.uniformity());
    for bv in base.vertices() {
        for gv in g.vertices() {
            out.add_vertex(format!("{}/{}", bv.id, gv.id), VertexCondition::Kirchhoff)?;
        }
    }
    for (v, bv) in base.vertices().iter().enumerate() {
        for ge in g.edges() {
            out.add_edge(format!("{}/{}", bv.id, ge.id), v * nv + ge.start, v * nv + ge.end, ge.length)?;
        }
    }
    for (i, e) in base.edges().iter().enumerate() {
        let s = dec.boundary()[attach.slot(e.start, EdgeEnd::start(i))];
        let t = dec.boundary()[attach.slot(e.end, EdgeEnd::end(i))];
        out.add_shifted_edge(e.id.clone(), e.start * nv + s, e.end * nv + t, e.length, e.shift.clone())?;
    }
    Ok(out)
}

/// Builds the canonical odd-cycle resonator: a cycle of `cycle_size` edges
/// through the first `cycle_size` boundary vertices, with every remaining
/// boundary vertex joined to the first cycle vertex by one edge. All edges
/// have length `l0`. `d = 4, cycle_size = 3` is a triangle with a pendant.
pub fn make_spider(d: usize, l0: f64, cycle_size: usize) -> Result<Decoration> {
    if cycle_size % 2 == 0 {
        return Err(Error::Precondition(format!(
            "cycle size {cycle_size} is even; only odd cycles force the resonance"
        )));
    }
    if d < 3 || cycle_size < 3 || cycle_size > d {
        return Err(Error::Precondition(format!("need 3 <= cycle_size <= d, got cycle_size {cycle_size}, d {d}")));
    }
    if !(l0 > 0.0) {
        return Err(Error::Precondition(format!("l0 must be positive, got {l0}")));
    }
    let mut g = MetricGraph::new();
    for i in 1..=d {
        g.add_vertex(format!("b{i}"), VertexCondition::Kirchhoff)?;
    }
    for i in 0..cycle_size {
        g.add_edge(format!("z{}", i + 1), i, (i + 1) % cycle_size, l0)?;
    }
    for j in cycle_size..d {
        g.add_edge(format!("p{}", j + 1), 0, j, l0)?;
    }
    Decoration::from_indices(g, (0..d).collect())
}

/// Tests the odd-cycle resonator conditions: the subgraph of edges of
/// length `l0` must contain an odd cycle whose connected component also
/// holds every boundary vertex.
///
/// A connected component contains a simple odd cycle iff it is not
/// bipartite, so a 2-colouring attempt decides the question exactly.
pub fn check_spider_conditions(dec: &Decoration, l0: f64) -> bool {
    let g = dec.graph();
    let n = g.vertex_count();
    let matches = |len: f64| (len - l0).abs() <= COINCIDENCE_TOL * l0.abs().max(len.abs());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges().iter().filter(|e| matches(e.length)) {
        adj[e.start].push(e.end);
        if e.start != e.end {
            adj[e.end].push(e.start);
        }
    }
    let root = dec.boundary()[0];
    let mut colour: Vec<Option<bool>> = vec![None; n];
    colour[root] = Some(false);
    let mut queue = VecDeque::from([root]);
    let mut odd = false;
    while let Some(v) = queue.pop_front() {
        let c = colour[v].unwrap();
        for &w in &adj[v] {
            match colour[w] {
                None => {
                    colour[w] = Some(!c);
                    queue.push_back(w);
                }
                Some(cw) if cw == c => odd = true,
                _ => {}
            }
        }
    }
    odd && dec.boundary().iter().all(|&b| colour[b].is_some())
}
