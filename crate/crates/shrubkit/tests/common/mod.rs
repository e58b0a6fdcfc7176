#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shrubkit::logic::{mso_equiv, Budget, Formula, Structure};
use shrubkit::structures::{Graph, Tree};
use shrubkit::treemodel::{full_signature, ModelNode, Signature, TreeModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node(p: u32, label: u32, children: Vec<Tree>) -> Tree {
    Tree::new(p, label, children).unwrap()
}

pub fn equiv(a: &Tree, b: &Tree, m: usize) -> bool {
    mso_equiv(&Structure::from_tree(a).unwrap(), &Structure::from_tree(b).unwrap(), m, Budget::default()).unwrap()
}

/// Random tree of height at most `d`. Children are drawn from a small pool so
/// that repeated subtrees, and therefore heavy nodes, are common.
pub fn random_tree(rng: &mut ChaCha8Rng, d: usize, p: u32, max_kids: usize) -> Tree {
    let label = rng.gen_range(1..=p);
    if d == 0 || rng.gen_bool(0.2) {
        return Tree::leaf(p, label).unwrap();
    }
    let pool: Vec<Tree> = (0..rng.gen_range(1..=2)).map(|_| random_tree(rng, d - 1, p, max_kids)).collect();
    let k = rng.gen_range(1..=max_kids);
    let kids = (0..k).map(|_| pool.choose(rng).unwrap().clone()).collect();
    node(p, label, kids)
}

/// Random valid model: every leaf at depth d, at most `max_leaves` leaves,
/// symmetric signature.
pub fn random_model(rng: &mut ChaCha8Rng, max_leaves: usize) -> TreeModel {
    let r = rng.gen_range(1..=2);
    let p = rng.gen_range(1..=2);
    let d = rng.gen_range(1..=2);
    let mut budget = rng.gen_range(1..=max_leaves);
    let tree = random_model_node(rng, r, p, d, &mut budget);
    let mut signature = Signature::new();
    for (i, j, l) in full_signature(r, d) {
        if i <= j && rng.gen_bool(0.5) {
            signature.insert((i, j, l));
            signature.insert((j, i, l));
        }
    }
    TreeModel { r, p, d, signature, tree }
}

fn random_model_node(rng: &mut ChaCha8Rng, r: u32, p: u32, depth: u32, budget: &mut usize) -> ModelNode {
    if depth == 0 {
        *budget = budget.saturating_sub(1);
        return ModelNode::leaf(rng.gen_range(1..=r), rng.gen_range(1..=p));
    }
    let k = rng.gen_range(1..=3);
    let mut cs = vec![random_model_node(rng, r, p, depth - 1, budget)];
    for _ in 1..k {
        if *budget == 0 {
            break;
        }
        cs.push(random_model_node(rng, r, p, depth - 1, budget));
    }
    ModelNode::internal(cs)
}

/// Graph sentences of rank at most 2.
pub const GRAPH_CORPUS: &[&str] = &[
    "(exists1 x (exists1 y (E x y)))",
    "(forall1 x (exists1 y (E x y)))",
    "(exists1 x (forall1 y (implies (not (= x y)) (E x y))))",
    "(exists1 x (and (P 1 x) (exists1 y (and (P 2 y) (E x y)))))",
    "(forall1 x (implies (P 1 x) (exists1 y (and (P 1 y) (not (= x y))))))",
    "(exists1 x (exists1 y (and (not (= x y)) (not (E x y)))))",
    "(forall1 x (forall1 y (implies (E x y) (E y x))))",
    "(exists1 x (P 2 x))",
    "(exists2 X (and (exists1 x (in x X)) (forall1 y (implies (in y X) (P 1 y)))))",
    "(exists2 X (forall1 x (or (in x X) (exists1 y (and (in y X) (E x y))))))",
    "(forall2 X (exists1 x (or (in x X) (not (in x X)))))",
    "(exists1 x (not (exists1 y (E x y))))",
];

pub fn graph_corpus(p: u32) -> Vec<Formula> {
    GRAPH_CORPUS.iter().map(|s| Formula::parse(s).unwrap()).filter(|f| f.max_label() <= p).collect()
}

pub fn leaf_ids(g: &Graph) -> BTreeSet<String> {
    g.vertices().keys().cloned().collect()
}
