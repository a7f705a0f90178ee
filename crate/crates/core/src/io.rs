//! JSON file formats for graphs, vertex sets and vertex functions.
//!
//! Graph files look like
//! `{"vertices":[{"id":"a","m":1.0}], "edges":[{"u":"a","v":"b","w":1.0}]}`.
//! Self-loops, duplicate edges and non-positive weights are rejected with the
//! position just past the offending entry.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::de::{self, DeserializeSeed, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FunctionOnVertices, GraphBuilder, Label, VertexId, VertexSet};
use crate::site::Site;
use crate::Graph;

#[derive(Deserialize)]
struct VertexEntry {
    id: Label,
    #[serde(default = "unit")]
    m: f64,
}

#[derive(Deserialize)]
struct EdgeEntry {
    u: Label,
    v: Label,
    #[serde(default = "unit")]
    w: f64,
}

fn unit() -> f64 {
    1.0
}

struct VertexList;

impl<'de> Visitor<'de> for VertexList {
    type Value = Vec<(Label, f64)>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of vertices")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        while let Some(entry) = seq.next_element::<VertexEntry>()? {
            if !(entry.m > 0.0) || !entry.m.is_finite() {
                return Err(de::Error::custom(format!("vertex {}: weight m must be positive, got {}", entry.id, entry.m)));
            }
            if !seen.insert(entry.id.clone()) {
                return Err(de::Error::custom(format!("duplicate vertex {}", entry.id)));
            }
            out.push((entry.id, entry.m));
        }
        Ok(out)
    }
}

struct EdgeList<'a> {
    known: Option<&'a HashSet<Label>>,
}

impl<'de> DeserializeSeed<'de> for EdgeList<'_> {
    type Value = Vec<(Label, Label, f64)>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for EdgeList<'_> {
    type Value = Vec<(Label, Label, f64)>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of edges")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        while let Some(e) = seq.next_element::<EdgeEntry>()? {
            if e.u == e.v {
                return Err(de::Error::custom(format!("self-loop at {}", e.u)));
            }
            if !(e.w > 0.0) || !e.w.is_finite() {
                return Err(de::Error::custom(format!("edge {}-{}: weight w must be positive, got {}", e.u, e.v, e.w)));
            }
            if let Some(known) = self.known {
                for end in [&e.u, &e.v] {
                    if !known.contains(end) {
                        return Err(de::Error::custom(format!("edge endpoint {end} is not a listed vertex")));
                    }
                }
            }
            let key = if e.u < e.v { (e.u.clone(), e.v.clone()) } else { (e.v.clone(), e.u.clone()) };
            if !seen.insert(key) {
                return Err(de::Error::custom(format!("duplicate edge {}-{}", e.u, e.v)));
            }
            out.push((e.u, e.v, e.w));
        }
        Ok(out)
    }
}

struct GraphDoc {
    vertices: Vec<(Label, f64)>,
    edges: Vec<(Label, Label, f64)>,
}

impl<'de> Deserialize<'de> for GraphDoc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct DocVisitor;
        impl<'de> Visitor<'de> for DocVisitor {
            type Value = GraphDoc;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a graph object with \"vertices\" and \"edges\"")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<GraphDoc, A::Error> {
                let mut vertices: Option<Vec<(Label, f64)>> = None;
                let mut edges = None;
                let mut known: Option<HashSet<Label>> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "vertices" => {
                            let list = map.next_value_seed(VertexSeed)?;
                            known = Some(list.iter().map(|(l, _)| l.clone()).collect());
                            vertices = Some(list);
                        }
                        "edges" => edges = Some(map.next_value_seed(EdgeList { known: known.as_ref() })?),
                        _ => {
                            map.next_value::<de::IgnoredAny>()?;
                        }
                    }
                }
                let vertices = vertices.ok_or_else(|| de::Error::missing_field("vertices"))?;
                Ok(GraphDoc { vertices, edges: edges.unwrap_or_default() })
            }
        }
        d.deserialize_map(DocVisitor)
    }
}

struct VertexSeed;

impl<'de> DeserializeSeed<'de> for VertexSeed {
    type Value = Vec<(Label, f64)>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Self::Value, D::Error> {
        d.deserialize_seq(VertexList)
    }
}

/// Parse a graph document.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    let mut b = GraphBuilder::new();
    for (label, m) in doc.vertices {
        b.vertex(label, m)?;
    }
    for (u, v, w) in doc.edges {
        b.edge(u, v, w)?;
    }
    b.build()
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

#[derive(Serialize)]
struct VertexOut<'a> {
    id: &'a Label,
    m: f64,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    u: &'a Label,
    v: &'a Label,
    w: f64,
}

#[derive(Serialize)]
struct GraphOut<'a> {
    vertices: Vec<VertexOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
}

/// Serialize a graph in the same format [`parse_graph`] reads.
pub fn graph_to_json(g: &Graph) -> String {
    let doc = GraphOut {
        vertices: g.vertices().map(|v| VertexOut { id: g.label(v), m: *g.mass(v) }).collect(),
        edges: g.edges().iter().map(|e| EdgeOut { u: g.label(e.u), v: g.label(e.v), w: e.w }).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}

/// Vertex values given either as `{"label": value}` or `[{"id": label, "value": x}]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ValuesDoc {
    Map(BTreeMap<String, f64>),
    List(Vec<ValueEntry>),
}

#[derive(Deserialize)]
struct ValueEntry {
    id: Label,
    value: f64,
}

/// Parse vertex values and resolve labels against `g`.
pub fn parse_values(g: &Graph, text: &str) -> Result<BTreeMap<VertexId, f64>> {
    let doc: ValuesDoc = serde_json::from_str(text)?;
    let mut out = BTreeMap::new();
    match doc {
        ValuesDoc::Map(m) => {
            for (k, x) in m {
                out.insert(g.resolve(&k)?, x);
            }
        }
        ValuesDoc::List(list) => {
            for e in list {
                let v = g.id_of(&e.id).ok_or_else(|| Error::Domain(format!("unknown vertex {}", e.id)))?;
                out.insert(v, e.value);
            }
        }
    }
    Ok(out)
}

pub fn parse_function(g: &Graph, text: &str) -> Result<FunctionOnVertices<f64>> {
    let mut f = FunctionOnVertices::undefined(g.vertex_count());
    for (v, x) in parse_values(g, text)? {
        f.set(v, x);
    }
    Ok(f)
}

/// A vertex set given as a JSON list of labels.
pub fn parse_vertex_set(g: &Graph, text: &str) -> Result<VertexSet> {
    let labels: Vec<Label> = serde_json::from_str(text)?;
    labels
        .into_iter()
        .map(|l| g.id_of(&l).ok_or_else(|| Error::Domain(format!("unknown vertex {l}"))))
        .collect()
}

/// A list of generator sites, e.g. `[[0,0,0]]` or `[{"glued":[0,[0,0]]}]`.
pub fn parse_sites(text: &str) -> Result<Vec<Site>> {
    Ok(serde_json::from_str(text)?)
}

/// Either a single site list or a list of site lists (an exhaustion).
pub fn parse_site_lists(text: &str) -> Result<Vec<Vec<Site>>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Many(Vec<Vec<Site>>),
        One(Vec<Site>),
    }
    Ok(match serde_json::from_str(text)? {
        Doc::Many(v) if v.is_empty() => vec![Vec::new()],
        Doc::Many(v) => v,
        Doc::One(v) => vec![v],
    })
}
