//! Bounded shrub-depth tree models, MSO type oracles and type-preserving
//! surgery on bounded-height labeled trees.

pub mod bounds;
pub mod cli;
pub mod els;
pub mod io;
pub mod logic;
pub mod par;
pub mod structures;
pub mod treemodel;
pub mod typesys;
