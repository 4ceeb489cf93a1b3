//! JSON file formats for graphs and decorations, plus the CSV/JSON writers
//! used by the command-line front end.
//!
//! ```json
//! {
//!   "vertices": [{"id": "a", "condition": "kirchhoff"}],
//!   "edges": [{"id": "x", "start": "a", "end": "a", "length": 1.0, "shift": [1, 0]}],
//!   "period_rank": 2
//! }
//! ```
//!
//! A decoration file adds `"boundary": ["b1", "b2", ...]`. An attachment
//! file maps base vertex ids to lists of
//! `{"edge": id, "end": "start" | "end", "boundary_vertex": id}`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoration::{AttachmentMap, Decoration};
use crate::error::{Error, Result};
use crate::graph::{EndRole, MetricGraph, VertexCondition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub condition: VertexCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub start: String,
    pub end: String,
    pub length: f64,
    #[serde(default)]
    pub shift: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub period_rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniformity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorationFile {
    #[serde(flatten)]
    pub graph: GraphFile,
    pub boundary: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttachmentRecord {
    pub edge: String,
    pub end: EndRole,
    pub boundary_vertex: String,
}

pub type AttachmentFile = BTreeMap<String, Vec<AttachmentRecord>>;

impl GraphFile {
    pub fn from_graph(g: &MetricGraph) -> Self {
        let id = |v: usize| g.vertices()[v].id.clone();
        GraphFile {
            vertices: g.vertices().iter().map(|v| VertexRecord { id: v.id.clone(), condition: v.condition }).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    start: id(e.start),
                    end: id(e.end),
                    length: e.length,
                    shift: e.shift.clone(),
                })
                .collect(),
            period_rank: g.period_rank(),
            uniformity: g.uniformity(),
        }
    }

    pub fn to_graph(&self) -> Result<MetricGraph> {
        let mut g = MetricGraph::periodic(self.period_rank);
        g.set_uniformity(self.uniformity);
        for v in &self.vertices {
            g.add_vertex(v.id.clone(), v.condition)?;
        }
        let lookup = |g: &MetricGraph, id: &str, edge: &str| {
            g.vertex_index(id)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {edge:?} references unknown vertex {id:?}")))
        };
        for e in &self.edges {
            let s = lookup(&g, &e.start, &e.id)?;
            let t = lookup(&g, &e.end, &e.id)?;
            let shift = if e.shift.is_empty() { vec![0; self.period_rank] } else { e.shift.clone() };
            g.add_shifted_edge(e.id.clone(), s, t, e.length, shift)?;
        }
        Ok(g)
    }
}

impl DecorationFile {
    pub fn from_decoration(dec: &Decoration) -> Self {
        DecorationFile {
            graph: GraphFile::from_graph(dec.graph()),
            boundary: dec.boundary().iter().map(|&b| dec.graph().vertices()[b].id.clone()).collect(),
        }
    }

    pub fn to_decoration(&self) -> Result<Decoration> {
        let ids: Vec<&str> = self.boundary.iter().map(String::as_str).collect();
        Decoration::new(self.graph.to_graph()?, &ids)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<MetricGraph> {
    read_json::<GraphFile>(path.as_ref())?.to_graph()
}

pub fn read_decoration(path: impl AsRef<Path>) -> Result<Decoration> {
    read_json::<DecorationFile>(path.as_ref())?.to_decoration()
}

pub fn read_attachment(path: impl AsRef<Path>, base: &MetricGraph, dec: &Decoration) -> Result<AttachmentMap> {
    let file: AttachmentFile = read_json(path.as_ref())?;
    attachment_from_file(&file, base, dec)
}

pub fn attachment_from_file(file: &AttachmentFile, base: &MetricGraph, dec: &Decoration) -> Result<AttachmentMap> {
    let entries = file
        .iter()
        .map(|(v, list)| {
            let list = list.iter().map(|r| (r.edge.clone(), r.end, r.boundary_vertex.clone())).collect();
            (v.clone(), list)
        })
        .collect();
    AttachmentMap::from_entries(base, dec, &entries)
}

pub fn write_graph(path: impl AsRef<Path>, g: &MetricGraph) -> Result<()> {
    let text = serde_json::to_string_pretty(&GraphFile::from_graph(g))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_decoration(path: impl AsRef<Path>, dec: &Decoration) -> Result<()> {
    let text = serde_json::to_string_pretty(&DecorationFile::from_decoration(dec))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// Writes a CSV table; `rows` hold numbers rendered with [`fmt12`].
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt12(x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Serializes `value` as pretty JSON with every float rounded to 12
/// significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

fn round_floats(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| fmt12(x).parse::<f64>().ok()) {
                if let Some(num) = serde_json::Number::from_f64(x) {
                    *n = num;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}
