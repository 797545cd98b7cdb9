//! JSON tree documents and CSV distance matrices.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::tree::{Edge, MetricTree, Vertex};

pub const SCHEMA_VERSION: &str = "1";

pub type Metadata = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub a: u64,
    pub b: u64,
    pub len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub schema_version: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl TreeDocument {
    pub fn from_tree(tree: &MetricTree, metadata: Metadata) -> Self {
        let vs = tree.vertices();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            nodes: vs.iter().map(|v| NodeDoc { id: v.id, label: v.label.clone() }).collect(),
            edges: tree
                .edges()
                .iter()
                .map(|e| EdgeDoc { a: vs[e.a].id, b: vs[e.b].id, len: e.len })
                .collect(),
            metadata,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema_version {:?}", doc.schema_version)));
        }
        Ok(doc)
    }

    pub fn to_tree(&self) -> Result<MetricTree> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        let mut seen = HashSet::with_capacity(self.nodes.len());
        let mut vertices = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            if !seen.insert(n.id) {
                return Err(Error::DuplicateVertex(n.id));
            }
            index.insert(n.id, i);
            vertices.push(Vertex { id: n.id, label: n.label.clone() });
        }
        let lookup = |id: u64| index.get(&id).copied().ok_or(Error::UnknownVertex(id));
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge::new(lookup(e.a)?, lookup(e.b)?, e.len)))
            .collect::<Result<Vec<_>>>()?;
        MetricTree::new(vertices, edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree documents serialize")
    }
}

/// Parses a JSON tree document into a validated tree plus its metadata.
pub fn parse_tree(text: &str) -> Result<(MetricTree, Metadata)> {
    let doc = TreeDocument::parse(text)?;
    let tree = doc.to_tree()?;
    Ok((tree, doc.metadata))
}

pub fn serialize_tree(tree: &MetricTree, metadata: Metadata) -> String {
    TreeDocument::from_tree(tree, metadata).to_json()
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Formats a report number with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round_sig(x, 12))
}

/// Rounds every number inside a JSON value to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f, 12)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_json),
        Value::Object(m) => m.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Matrix as CSV: a header row of labels followed by one row per point.
pub fn matrix_to_csv(m: &FiniteMetricSpace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(m.labels()).expect("in-memory write");
    for i in 0..m.len() {
        w.write_record(m.row(i).iter().map(|&x| fmt_num(x))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn matrix_from_csv(text: &str) -> Result<FiniteMetricSpace> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let labels: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    FiniteMetricSpace::from_rows(labels, rows)
}
