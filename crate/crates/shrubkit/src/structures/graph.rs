use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::StructureError;

/// A p-labeled simple undirected graph with opaque string vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    p: u32,
    vertices: BTreeMap<String, u32>,
    edges: BTreeSet<(String, String)>,
}

impl Graph {
    pub fn new(
        p: u32,
        vertices: impl IntoIterator<Item = (String, u32)>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Graph, StructureError> {
        if p == 0 {
            return Err(StructureError::EmptyAlphabet);
        }
        let mut vs = BTreeMap::new();
        for (id, label) in vertices {
            if label == 0 || label > p {
                return Err(StructureError::LabelOutOfRange { label, p });
            }
            if vs.insert(id.clone(), label).is_some() {
                return Err(StructureError::DuplicateVertex(id));
            }
        }
        let mut es = BTreeSet::new();
        for (a, b) in edges {
            for v in [&a, &b] {
                if !vs.contains_key(v) {
                    return Err(StructureError::UnknownVertex(v.clone()));
                }
            }
            if a == b {
                return Err(StructureError::SelfLoop(a));
            }
            es.insert(if a < b { (a, b) } else { (b, a) });
        }
        Ok(Graph { p, vertices: vs, edges: es })
    }

    pub fn empty(p: u32) -> Graph {
        Graph { p, vertices: BTreeMap::new(), edges: BTreeSet::new() }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn vertices(&self) -> &BTreeMap<String, u32> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.edges.contains(&key)
    }

    pub fn induced_subgraph(&self, vs: &BTreeSet<String>) -> Result<Graph, StructureError> {
        if let Some(v) = vs.iter().find(|v| !self.vertices.contains_key(*v)) {
            return Err(StructureError::UnknownVertex(v.clone()));
        }
        let vertices = self
            .vertices
            .iter()
            .filter(|(id, _)| vs.contains(*id))
            .map(|(id, l)| (id.clone(), *l))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| vs.contains(a) && vs.contains(b))
            .cloned()
            .collect();
        Ok(Graph { p: self.p, vertices, edges })
    }

    /// Labels shifted by p into a 2p-labeled graph.
    pub fn relabeled(&self) -> Graph {
        Graph {
            p: 2 * self.p,
            vertices: self.vertices.iter().map(|(id, l)| (id.clone(), l + self.p)).collect(),
            edges: self.edges.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for (id, l) in &self.vertices {
            let _ = writeln!(out, "  \"{id}\" [label={l}];");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{a}\" -- \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}
