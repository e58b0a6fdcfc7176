//! Tree models: labeled height-d trees whose leaves are the vertices of a
//! graph, with edges decided by leaf labels and the height of the lowest
//! common ancestor. Includes validation, materialization, flattening to a
//! plain labeled tree, and the formula-level interpretation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::{fresh_name, Formula, LogicError};
use crate::structures::{Graph, Path, StructureError, Tree};

/// Triples (i, j, l): leaves with first components i and j are adjacent when
/// their lowest common ancestor sits at height l.
pub type Signature = BTreeSet<(u32, u32, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelNode {
    Internal(Vec<ModelNode>),
    /// `(i, j)` with i ∈ [r], j ∈ [p]; `id` overrides the path-derived vertex id.
    Leaf { pair: (u32, u32), id: Option<String> },
}

impl ModelNode {
    pub fn leaf(i: u32, j: u32) -> ModelNode {
        ModelNode::Leaf { pair: (i, j), id: None }
    }

    pub fn internal(children: Vec<ModelNode>) -> ModelNode {
        ModelNode::Internal(children)
    }

    pub fn size(&self) -> usize {
        match self {
            ModelNode::Leaf { .. } => 1,
            ModelNode::Internal(cs) => 1 + cs.iter().map(ModelNode::size).sum::<usize>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeModel {
    pub r: u32,
    pub p: u32,
    pub d: u32,
    pub signature: Signature,
    pub tree: ModelNode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: String,
    pub path: Path,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind, vertex_id(&self.path), self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: &str, path: &[usize], detail: String) {
        self.violations.push(Violation { kind: kind.to_string(), path: path.to_vec(), detail });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid tree model: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// "r" followed by the child indices, e.g. `r.0.1`.
pub fn vertex_id(path: &[usize]) -> String {
    let mut s = String::from("r");
    for i in path {
        s.push('.');
        s.push_str(&i.to_string());
    }
    s
}

/// Both orientations of every triple.
pub fn symmetrize(s: &Signature) -> Signature {
    s.iter().flat_map(|&(i, j, l)| [(i, j, l), (j, i, l)]).collect()
}

pub fn validate(tm: &TreeModel) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if tm.r == 0 || tm.p == 0 {
        rep.push("parameters", &[], format!("r = {} and p = {} must be positive", tm.r, tm.p));
        return rep;
    }
    for &(i, j, l) in &tm.signature {
        if i == 0 || i > tm.r || j == 0 || j > tm.r || l == 0 || l > tm.d {
            rep.push("signature-range", &[], format!("({i},{j},{l}) outside [r]x[r]x[d]"));
        }
        if !tm.signature.contains(&(j, i, l)) {
            rep.push("signature-symmetry", &[], format!("({i},{j},{l}) present but ({j},{i},{l}) missing"));
        }
    }
    let mut ids = BTreeMap::new();
    check_node(tm, &tm.tree, &mut Vec::new(), &mut rep, &mut ids);
    rep
}

fn check_node(
    tm: &TreeModel,
    node: &ModelNode,
    path: &mut Path,
    rep: &mut ValidationReport,
    ids: &mut BTreeMap<String, Path>,
) {
    match node {
        ModelNode::Leaf { pair: (i, j), id } => {
            if *i == 0 || *i > tm.r || *j == 0 || *j > tm.p {
                rep.push("leaf-label", path, format!("({i},{j}) outside [r]x[p]"));
            }
            if path.len() != tm.d as usize {
                rep.push("path-length", path, format!("leaf at depth {}, expected {}", path.len(), tm.d));
            }
            let name = id.clone().unwrap_or_else(|| vertex_id(path));
            if let Some(prev) = ids.insert(name.clone(), path.clone()) {
                rep.push("duplicate-id", path, format!("{name} already used at {}", vertex_id(&prev)));
            }
        }
        ModelNode::Internal(cs) => {
            if cs.is_empty() {
                rep.push("internal-leaf", path, "internal node without children".into());
                if path.len() != tm.d as usize {
                    rep.push("path-length", path, format!("path ends at depth {}, expected {}", path.len(), tm.d));
                }
            }
            for (k, c) in cs.iter().enumerate() {
                path.push(k);
                check_node(tm, c, path, rep, ids);
                path.pop();
            }
        }
    }
}

/// Flat label of leaf pair (i, j): (i−1)·p + j.
pub fn flat_label(p: u32, i: u32, j: u32) -> u32 {
    (i - 1) * p + j
}

/// The label carried by internal nodes after flattening.
pub fn internal_label(r: u32, p: u32) -> u32 {
    r * p + 1
}

/// Plain labeled tree over r·p+1 labels.
pub fn flatten(tm: &TreeModel) -> Result<Tree, ModelError> {
    Ok(flatten_indexed(tm)?.0)
}

/// Flattened tree plus, for each of its paths (canonical child order), the
/// path of the same node in the model.
pub fn flatten_indexed(tm: &TreeModel) -> Result<(Tree, BTreeMap<Path, Path>), ModelError> {
    let (t, sub) = flatten_node(tm, &tm.tree)?;
    let mut map = BTreeMap::new();
    sub.collect(&mut Vec::new(), &mut Vec::new(), &mut map);
    Ok((t, map))
}

/// Original child index for each canonical child position, recursively.
struct Order(Vec<(usize, Order)>);

impl Order {
    fn collect(&self, canon: &mut Path, orig: &mut Path, out: &mut BTreeMap<Path, Path>) {
        out.insert(canon.clone(), orig.clone());
        for (k, (o, sub)) in self.0.iter().enumerate() {
            canon.push(k);
            orig.push(*o);
            sub.collect(canon, orig, out);
            canon.pop();
            orig.pop();
        }
    }
}

fn flatten_node(tm: &TreeModel, node: &ModelNode) -> Result<(Tree, Order), ModelError> {
    let q = internal_label(tm.r, tm.p);
    match node {
        ModelNode::Leaf { pair: (i, j), .. } => {
            if *i == 0 || *i > tm.r || *j == 0 || *j > tm.p {
                return Err(StructureError::LabelOutOfRange { label: *j, p: tm.p }.into());
            }
            Ok((Tree::leaf(q, flat_label(tm.p, *i, *j))?, Order(Vec::new())))
        }
        ModelNode::Internal(cs) => {
            let mut parts = cs
                .iter()
                .enumerate()
                .map(|(k, c)| flatten_node(tm, c).map(|(t, o)| (t, k, o)))
                .collect::<Result<Vec<_>, _>>()?;
            // stable, so ties keep input order; same sequence as Tree's own sort
            parts.sort_by(|a, b| a.0.cmp(&b.0));
            let order = Order(parts.iter_mut().map(|(_, k, o)| (*k, std::mem::replace(o, Order(Vec::new())))).collect());
            let t = Tree::new(q, q, parts.into_iter().map(|(t, _, _)| t).collect())?;
            Ok((t, order))
        }
    }
}

/// Inverse of `flatten` for well-formed flat trees (children in canonical order).
pub fn unflatten(t: &Tree, r: u32, p: u32, d: u32, signature: Signature) -> Result<TreeModel, ModelError> {
    let tm = TreeModel { r, p, d, signature, tree: unflatten_node(t, r, p) };
    let rep = validate(&tm);
    if t.p() != internal_label(r, p) {
        let mut rep = rep;
        rep.push("alphabet", &[], format!("flat tree has {} labels, expected {}", t.p(), internal_label(r, p)));
        return Err(ModelError::Invalid(rep));
    }
    if !rep.ok() {
        return Err(ModelError::Invalid(rep));
    }
    if !validate_flat(t, r, p, d) {
        let mut rep = rep;
        rep.push("internal-marker", &[], "internal node without the internal label".into());
        return Err(ModelError::Invalid(rep));
    }
    Ok(tm)
}

fn unflatten_node(t: &Tree, r: u32, p: u32) -> ModelNode {
    if t.is_leaf() && t.label() != internal_label(r, p) {
        let l = t.label() - 1;
        ModelNode::leaf(l / p + 1, l % p + 1)
    } else {
        ModelNode::Internal(t.children().iter().map(|c| unflatten_node(c, r, p)).collect())
    }
}

/// The tree-shape conditions of a model, checked directly on a flat tree.
pub fn validate_flat(t: &Tree, r: u32, p: u32, d: u32) -> bool {
    fn go(t: &Tree, q: u32, depth: u32, d: u32) -> bool {
        if t.is_leaf() {
            t.label() != q && depth == d
        } else {
            t.label() == q && t.children().iter().all(|c| go(c, q, depth + 1, d))
        }
    }
    t.p() == internal_label(r, p) && go(t, internal_label(r, p), 0, d)
}

struct LeafInfo {
    id: String,
    pair: (u32, u32),
    path: Path,
}

fn leaves(node: &ModelNode, path: &mut Path, out: &mut Vec<LeafInfo>) {
    match node {
        ModelNode::Leaf { pair, id } => out.push(LeafInfo {
            id: id.clone().unwrap_or_else(|| vertex_id(path)),
            pair: *pair,
            path: path.clone(),
        }),
        ModelNode::Internal(cs) => {
            for (k, c) in cs.iter().enumerate() {
                path.push(k);
                leaves(c, path, out);
                path.pop();
            }
        }
    }
}

/// The graph defined by a valid model: vertices are leaves, labelled by the
/// second component of their pair.
pub fn materialize(tm: &TreeModel) -> Result<Graph, ModelError> {
    let rep = validate(tm);
    if !rep.ok() {
        return Err(ModelError::Invalid(rep));
    }
    let mut ls = Vec::new();
    leaves(&tm.tree, &mut Vec::new(), &mut ls);
    let mut edges = Vec::new();
    for (a, u) in ls.iter().enumerate() {
        for v in &ls[a + 1..] {
            let common = u.path.iter().zip(&v.path).take_while(|(x, y)| x == y).count();
            let l = tm.d - common as u32;
            if tm.signature.contains(&(u.pair.0, v.pair.0, l)) {
                edges.push((u.id.clone(), v.id.clone()));
            }
        }
    }
    let vertices = ls.iter().map(|u| (u.id.clone(), u.pair.1));
    Ok(Graph::new(tm.p, vertices, edges)?)
}

/// Sub-model keeping exactly the nodes at the given model paths. Leaves keep
/// their original vertex ids.
pub fn submodel(tm: &TreeModel, keep: &BTreeSet<Path>) -> TreeModel {
    fn go(node: &ModelNode, path: &mut Path, keep: &BTreeSet<Path>) -> ModelNode {
        match node {
            ModelNode::Leaf { pair, id } => {
                ModelNode::Leaf { pair: *pair, id: Some(id.clone().unwrap_or_else(|| vertex_id(path))) }
            }
            ModelNode::Internal(cs) => {
                let mut out = Vec::new();
                for (k, c) in cs.iter().enumerate() {
                    path.push(k);
                    if keep.contains(path) {
                        out.push(go(c, path, keep));
                    }
                    path.pop();
                }
                ModelNode::Internal(out)
            }
        }
    }
    TreeModel { tree: go(&tm.tree, &mut Vec::new(), keep), ..tm.clone() }
}

fn any_label(x: &str, labels: impl Iterator<Item = u32>) -> Formula {
    Formula::Or(labels.map(|k| Formula::label(k, x)).collect())
}

/// ξ_V(x): x carries a leaf label.
pub fn xi_vertex(r: u32, p: u32, x: &str) -> Formula {
    any_label(x, 1..=r * p)
}

/// ξ_{P_j}(x): x is a leaf whose pair has second component j.
pub fn xi_label(r: u32, p: u32, j: u32, x: &str) -> Formula {
    any_label(x, (1..=r).map(|i| flat_label(p, i, j)))
}

fn first_component(p: u32, i: u32, x: &str) -> Formula {
    any_label(x, (1..=p).map(|j| flat_label(p, i, j)))
}

fn neq(a: &str, b: &str) -> Formula {
    Formula::not(Formula::eq(a, b))
}

/// x and y are at distance 2l, walked as x = u0 .. ul = vl .. v0 = y without
/// backtracking. For two leaves at depth d this says their lowest common
/// ancestor has height l.
pub fn lca_at_height(x: &str, y: &str, l: u32, used: &BTreeSet<String>) -> Formula {
    assert!(l >= 1, "height must be positive");
    let mut used = used.clone();
    used.insert(x.into());
    used.insert(y.into());
    let mut fresh = |base: &str| {
        let n = fresh_name(base, &used);
        used.insert(n.clone());
        n
    };
    let mut u = vec![x.to_string()];
    for _ in 1..=l {
        u.push(fresh("u"));
    }
    let mut v = vec![y.to_string()];
    for _ in 1..l {
        v.push(fresh("v"));
    }
    v.push(u[l as usize].clone());
    let l = l as usize;
    let mut body = Vec::new();
    for k in 0..l {
        body.push(Formula::edge(&u[k], &u[k + 1]));
        body.push(Formula::edge(&v[k], &v[k + 1]));
        if k >= 1 {
            body.push(neq(&u[k + 1], &u[k - 1]));
            body.push(neq(&v[k + 1], &v[k - 1]));
        }
    }
    body.push(neq(&u[l - 1], &v[l - 1]));
    let mut f = Formula::And(body);
    for name in v[1..l].iter().rev() {
        f = Formula::exists1(name, f);
    }
    for name in u[1..=l].iter().rev() {
        f = Formula::exists1(name, f);
    }
    f
}

/// ξ_{E,S}(x, y).
pub fn xi_edge(sig: &Signature, p: u32, x: &str, y: &str, used: &BTreeSet<String>) -> Formula {
    Formula::Or(
        sig.iter()
            .map(|&(i, j, l)| {
                Formula::And(vec![first_component(p, i, x), first_component(p, j, y), lca_at_height(x, y, l, used)])
            })
            .collect(),
    )
}

/// Every signature triple over [r]²×[d].
pub fn full_signature(r: u32, d: u32) -> Signature {
    let mut s = Signature::new();
    for i in 1..=r {
        for j in 1..=r {
            for l in 1..=d {
                s.insert((i, j, l));
            }
        }
    }
    s
}

fn is_leaf(x: &str, used: &BTreeSet<String>) -> Formula {
    let mut used = used.clone();
    used.insert(x.into());
    let y = fresh_name("y", &used);
    used.insert(y.clone());
    let z = fresh_name("z", &used);
    let lone_root = Formula::And(vec![Formula::root(x), Formula::not(Formula::exists1(&y, Formula::edge(x, &y)))]);
    let two_nbrs = Formula::exists1(
        &y,
        Formula::exists1(&z, Formula::And(vec![Formula::edge(x, &y), Formula::edge(x, &z), neq(&y, &z)])),
    );
    Formula::Or(vec![lone_root, Formula::And(vec![Formula::not(Formula::root(x)), Formula::not(two_nbrs)])])
}

/// x lies at distance exactly d from the root.
fn at_depth(x: &str, d: u32, used: &BTreeSet<String>) -> Formula {
    if d == 0 {
        return Formula::root(x);
    }
    let mut used = used.clone();
    used.insert(x.into());
    let mut w = vec![x.to_string()];
    for _ in 0..d {
        let n = fresh_name("a", &used);
        used.insert(n.clone());
        w.push(n);
    }
    let d = d as usize;
    let mut body = Vec::new();
    for k in 0..d {
        body.push(Formula::edge(&w[k], &w[k + 1]));
        if k >= 1 {
            body.push(neq(&w[k + 1], &w[k - 1]));
        }
    }
    body.push(Formula::root(&w[d]));
    let mut f = Formula::And(body);
    for name in w[1..].iter().rev() {
        f = Formula::exists1(name, f);
    }
    f
}

/// Ω_{r,p,d}: leaves carry leaf labels and sit at depth d, other nodes carry
/// the internal label.
pub fn build_omega(r: u32, p: u32, d: u32) -> Formula {
    let x = "x";
    let used = BTreeSet::from([x.to_string()]);
    let q = internal_label(r, p);
    let leaf = is_leaf(x, &used);
    Formula::forall1(
        x,
        Formula::And(vec![
            Formula::implies(
                leaf.clone(),
                Formula::And(vec![Formula::not(Formula::label(q, x)), at_depth(x, d, &used)]),
            ),
            Formula::implies(Formula::not(leaf), Formula::label(q, x)),
        ]),
    )
}

/// Ξ_{S,p}(φ) for a graph formula φ over labels 1..p.
pub fn interpret_formula(phi: &Formula, sig: &Signature, r: u32, p: u32, _d: u32) -> Result<Formula, LogicError> {
    if phi.uses_root() {
        return Err(LogicError::VocabularyMismatch("graph formulas have no root predicate".into()));
    }
    if phi.max_label() > p {
        return Err(LogicError::VocabularyMismatch(format!("label {} outside [1, {p}]", phi.max_label())));
    }
    let used = phi.all_vars();
    let guard = fresh_name("w", &used);
    let mut used_all = used.clone();
    used_all.insert(guard.clone());
    Ok(translate(phi, sig, r, p, &guard, &used_all))
}

fn translate(f: &Formula, sig: &Signature, r: u32, p: u32, guard: &str, used: &BTreeSet<String>) -> Formula {
    let rec = |g: &Formula| translate(g, sig, r, p, guard, used);
    let inside = |set: &str| {
        Formula::forall1(guard, Formula::implies(Formula::member(guard, set), xi_vertex(r, p, guard)))
    };
    match f {
        Formula::Label(j, x) => xi_label(r, p, *j, x),
        Formula::Edge(x, y) => xi_edge(sig, p, x, y, used),
        Formula::Not(g) => Formula::not(rec(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(rec).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(rec).collect()),
        Formula::Implies(a, b) => Formula::implies(rec(a), rec(b)),
        Formula::Exists1(v, g) => Formula::exists1(v, Formula::And(vec![xi_vertex(r, p, v), rec(g)])),
        Formula::Forall1(v, g) => Formula::forall1(v, Formula::implies(xi_vertex(r, p, v), rec(g))),
        Formula::Exists2(s, g) => Formula::exists2(s, Formula::And(vec![inside(s), rec(g)])),
        Formula::Forall2(s, g) => Formula::forall2(s, Formula::implies(inside(s), rec(g))),
        atom => atom.clone(),
    }
}

/// q0(r, p, d): the largest rank among Ω and the ξ formulas, the edge formula
/// taken over the full signature.
pub fn interpretation_rank(r: u32, p: u32, d: u32) -> usize {
    let used = BTreeSet::from(["x".to_string(), "y".to_string()]);
    let edge = xi_edge(&full_signature(r, d), p, "x", "y", &used).rank();
    let vertex = xi_vertex(r, p, "x").rank();
    let label = (1..=p).map(|j| xi_label(r, p, j, "x").rank()).max().unwrap_or(0);
    build_omega(r, p, d).rank().max(edge).max(vertex).max(label)
}
