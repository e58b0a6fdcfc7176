//! Immutable relational structures: labeled rooted trees and forests,
//! labeled graphs and monadic structures.

mod graph;
mod monadic;
mod tree;

pub use graph::Graph;
pub use monadic::MonadicStructure;
pub use tree::{
    add_children, attach_root, enumerate_trees, forest_of, is_leaf_hereditary_subtree,
    remove_subtree, replace_subtree, Embedding, Forest, Path, Tree,
};
pub(crate) use tree::bipartite_match;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("label alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("label {label} outside [1, {p}]")]
    LabelOutOfRange { label: u32, p: u32 },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },
    #[error("invalid path {0:?}")]
    InvalidPath(Vec<usize>),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("self loop at {0}")]
    SelfLoop(String),
    #[error("predicate index {index} outside sigma of length {len}")]
    PredicateOutOfRange { index: usize, len: usize },
}
