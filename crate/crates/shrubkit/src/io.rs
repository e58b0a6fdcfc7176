//! JSON encodings of trees, graphs and tree models.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::structures::{Graph, StructureError, Tree};
use crate::treemodel::{ModelNode, Signature, TreeModel};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("{0}")]
    Shape(String),
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    label: u32,
    #[serde(default)]
    children: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    p: u32,
    tree: NodeJson,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: String,
    label: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    p: u32,
    vertices: Vec<VertexJson>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ModelNodeJson {
    Leaf {
        leaf: (u32, u32),
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    Internal {
        internal: bool,
        #[serde(default)]
        children: Vec<ModelNodeJson>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    r: u32,
    p: u32,
    d: u32,
    #[serde(default)]
    signature: Vec<(u32, u32, u32)>,
    tree: ModelNodeJson,
}

fn node_to_tree(p: u32, n: NodeJson) -> Result<Tree, StructureError> {
    let children = n.children.into_iter().map(|c| node_to_tree(p, c)).collect::<Result<Vec<_>, _>>()?;
    Tree::new(p, n.label, children)
}

fn tree_to_node(t: &Tree) -> NodeJson {
    NodeJson { label: t.label(), children: t.children().iter().map(tree_to_node).collect() }
}

pub fn tree_from_value(v: Value) -> Result<Tree, IoError> {
    let j: TreeJson = serde_json::from_value(v)?;
    Ok(node_to_tree(j.p, j.tree)?)
}

pub fn tree_from_json(text: &str) -> Result<Tree, IoError> {
    tree_from_value(serde_json::from_str(text)?)
}

pub fn tree_to_value(t: &Tree) -> Value {
    serde_json::to_value(TreeJson { p: t.p(), tree: tree_to_node(t) }).expect("tree encodes")
}

pub fn graph_from_value(v: Value) -> Result<Graph, IoError> {
    let j: GraphJson = serde_json::from_value(v)?;
    Ok(Graph::new(j.p, j.vertices.into_iter().map(|v| (v.id, v.label)), j.edges)?)
}

pub fn graph_from_json(text: &str) -> Result<Graph, IoError> {
    graph_from_value(serde_json::from_str(text)?)
}

pub fn graph_to_value(g: &Graph) -> Value {
    json!({
        "p": g.p(),
        "vertices": g.vertices().iter().map(|(id, l)| json!({"id": id, "label": l})).collect::<Vec<_>>(),
        "edges": g.edges().iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
    })
}

fn model_node_from(n: ModelNodeJson) -> Result<ModelNode, IoError> {
    match n {
        ModelNodeJson::Leaf { leaf, id } => Ok(ModelNode::Leaf { pair: leaf, id }),
        ModelNodeJson::Internal { internal: true, children } => {
            Ok(ModelNode::Internal(children.into_iter().map(model_node_from).collect::<Result<_, _>>()?))
        }
        ModelNodeJson::Internal { internal: false, .. } => {
            Err(IoError::Shape("a node is either {\"internal\":true,...} or {\"leaf\":[i,j]}".into()))
        }
    }
}

fn model_node_to(n: &ModelNode) -> ModelNodeJson {
    match n {
        ModelNode::Leaf { pair, id } => ModelNodeJson::Leaf { leaf: *pair, id: id.clone() },
        ModelNode::Internal(cs) => {
            ModelNodeJson::Internal { internal: true, children: cs.iter().map(model_node_to).collect() }
        }
    }
}

pub fn model_from_value(v: Value) -> Result<TreeModel, IoError> {
    let j: ModelJson = serde_json::from_value(v)?;
    Ok(TreeModel {
        r: j.r,
        p: j.p,
        d: j.d,
        signature: j.signature.into_iter().collect::<Signature>(),
        tree: model_node_from(j.tree)?,
    })
}

pub fn model_from_json(text: &str) -> Result<TreeModel, IoError> {
    model_from_value(serde_json::from_str(text)?)
}

pub fn model_to_value(tm: &TreeModel) -> Value {
    serde_json::to_value(ModelJson {
        r: tm.r,
        p: tm.p,
        d: tm.d,
        signature: tm.signature.iter().copied().collect(),
        tree: model_node_to(&tm.tree),
    })
    .expect("model encodes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_documents_parse() {
        let t = tree_from_json(r#"{"p":2,"tree":{"label":1,"children":[{"label":2,"children":[]}]}}"#).unwrap();
        assert_eq!(t.size(), 2);
        let g = graph_from_json(r#"{"p":1,"vertices":[{"id":"v0","label":1},{"id":"v1","label":1}],"edges":[["v0","v1"]]}"#)
            .unwrap();
        assert_eq!(g.edges().len(), 1);
        let src = r#"{"r":2,"p":1,"d":1,"signature":[[1,2,1],[2,1,1]],"tree":{"internal":true,"children":[{"leaf":[1,1]},{"leaf":[2,1]}]}}"#;
        let tm = model_from_json(src).unwrap();
        assert_eq!(tm.signature.len(), 2);
        assert_eq!(model_from_value(model_to_value(&tm)).unwrap(), tm);
    }

    #[test]
    fn round_trips() {
        for t in crate::structures::enumerate_trees(2, 2, 5) {
            assert_eq!(tree_from_value(tree_to_value(&t)).unwrap(), t);
        }
        let g = graph_from_json(r#"{"p":2,"vertices":[{"id":"a","label":2},{"id":"b","label":1}],"edges":[["b","a"]]}"#)
            .unwrap();
        assert_eq!(graph_from_value(graph_to_value(&g)).unwrap(), g);
        assert!(tree_from_json(r#"{"p":1,"tree":{"label":3}}"#).is_err());
        assert!(tree_from_json(r#"{"p":1,"extra":0,"tree":{"label":1}}"#).is_err());
    }
}
