use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::StructureError;

/// Sequence of child indices from the root, in canonical child order.
pub type Path = Vec<usize>;

/// A p-labeled rooted tree. Children are kept in canonical order, so two
/// values are equal exactly when the trees are isomorphic.
#[derive(Clone, Debug)]
pub struct Tree {
    p: u32,
    label: u32,
    children: Vec<Tree>,
    size: usize,
    height: usize,
}

impl Tree {
    pub fn leaf(p: u32, label: u32) -> Result<Tree, StructureError> {
        Tree::new(p, label, Vec::new())
    }

    pub fn new(p: u32, label: u32, children: Vec<Tree>) -> Result<Tree, StructureError> {
        if p == 0 {
            return Err(StructureError::EmptyAlphabet);
        }
        if label == 0 || label > p {
            return Err(StructureError::LabelOutOfRange { label, p });
        }
        if let Some(c) = children.iter().find(|c| c.p != p) {
            return Err(StructureError::AlphabetMismatch { left: p, right: c.p });
        }
        Ok(Tree::assemble(p, label, children))
    }

    /// Star with `k` leaves, every node labeled `label`.
    pub fn star(p: u32, label: u32, k: usize) -> Result<Tree, StructureError> {
        let leaf = Tree::leaf(p, label)?;
        Tree::new(p, label, vec![leaf; k])
    }

    pub(crate) fn assemble(p: u32, label: u32, mut children: Vec<Tree>) -> Tree {
        children.sort();
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        let height = children.iter().map(|c| c.height + 1).max().unwrap_or(0);
        Tree { p, label, children, size, height }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(Tree::leaf_count).sum()
        }
    }

    /// Self-delimiting preorder encoding. Byte order on encodings agrees with `Ord`.
    pub fn canonical_form(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.size * 8);
        self.encode_into(&mut out);
        out
    }

    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.label.to_be_bytes());
        out.extend_from_slice(&(self.children.len() as u32).to_be_bytes());
        for c in &self.children {
            c.encode_into(out);
        }
    }

    pub fn subtree(&self, path: &[usize]) -> Option<&Tree> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i)?;
        }
        Some(cur)
    }

    /// All node paths in preorder.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::with_capacity(self.size);
        let mut cur = Vec::new();
        self.collect_paths(&mut cur, &mut out);
        out
    }

    fn collect_paths(&self, cur: &mut Path, out: &mut Vec<Path>) {
        out.push(cur.clone());
        for (i, c) in self.children.iter().enumerate() {
            cur.push(i);
            c.collect_paths(cur, out);
            cur.pop();
        }
    }

    /// Rebuild with a new child list (re-sorted canonically).
    pub fn with_children(&self, children: Vec<Tree>) -> Tree {
        Tree::assemble(self.p, self.label, children)
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Tree {}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p
            .cmp(&other.p)
            .then(self.label.cmp(&other.label))
            .then(self.children.len().cmp(&other.children.len()))
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.label.hash(state);
        self.children.hash(state);
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Multiset of trees over a common alphabet, stored in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Forest {
    p: u32,
    trees: Vec<Tree>,
}

impl Forest {
    pub fn new(p: u32, mut trees: Vec<Tree>) -> Result<Forest, StructureError> {
        if let Some(t) = trees.iter().find(|t| t.p != p) {
            return Err(StructureError::AlphabetMismatch { left: p, right: t.p });
        }
        trees.sort();
        Ok(Forest { p, trees })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(Tree::size).sum()
    }
}

pub fn forest_of(t: &Tree) -> Forest {
    Forest { p: t.p, trees: t.children.clone() }
}

pub fn attach_root(f: &Forest, label: u32) -> Result<Tree, StructureError> {
    Tree::new(f.p, label, f.trees.clone())
}

/// Node correspondence `(sub path, sup path)` in preorder of the smaller tree.
pub type Embedding = Vec<(Path, Path)>;

pub fn is_leaf_hereditary_subtree(sub: &Tree, sup: &Tree) -> Option<Embedding> {
    if sub.p != sup.p {
        return None;
    }
    let mut out = Vec::with_capacity(sub.size);
    embed_into(sub, sup, &mut Vec::new(), &mut Vec::new(), &mut out).then_some(out)
}

fn embeds(sub: &Tree, sup: &Tree) -> bool {
    if sub == sup {
        return true;
    }
    if sub.label != sup.label || sub.children.len() > sup.children.len() {
        return false;
    }
    if sub.is_leaf() {
        return sup.is_leaf();
    }
    if sub.height > sup.height {
        return false;
    }
    bipartite_match(sub.children.len(), sup.children.len(), |i, j| {
        embeds(&sub.children[i], &sup.children[j])
    })
    .is_some()
}

fn embed_into(sub: &Tree, sup: &Tree, sp: &mut Path, tp: &mut Path, out: &mut Embedding) -> bool {
    if !embeds(sub, sup) {
        return false;
    }
    out.push((sp.clone(), tp.clone()));
    let m = if sub == sup {
        Some((0..sub.children.len()).collect())
    } else {
        bipartite_match(sub.children.len(), sup.children.len(), |i, j| {
            embeds(&sub.children[i], &sup.children[j])
        })
    };
    let Some(m) = m else {
        return false;
    };
    for (i, &j) in m.iter().enumerate() {
        sp.push(i);
        tp.push(j);
        embed_into(&sub.children[i], &sup.children[j], sp, tp, out);
        sp.pop();
        tp.pop();
    }
    true
}

/// Kuhn's augmenting-path matching saturating the left side, if possible.
/// Pair tests are evaluated lazily and cached.
pub(crate) fn bipartite_match(
    left: usize,
    right: usize,
    mut ok: impl FnMut(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    if left > right {
        return None;
    }
    let mut cache: Vec<Option<bool>> = vec![None; left * right];
    let mut test = |i: usize, j: usize, cache: &mut Vec<Option<bool>>| -> bool {
        let slot = &mut cache[i * right + j];
        *slot.get_or_insert_with(|| ok(i, j))
    };
    let mut owner: Vec<Option<usize>> = vec![None; right];
    for i in 0..left {
        let mut seen = vec![false; right];
        if !augment(i, right, &mut owner, &mut seen, &mut cache, &mut test) {
            return None;
        }
    }
    let mut assign = vec![0; left];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            assign[*i] = j;
        }
    }
    Some(assign)
}

fn augment(
    i: usize,
    right: usize,
    owner: &mut Vec<Option<usize>>,
    seen: &mut Vec<bool>,
    cache: &mut Vec<Option<bool>>,
    test: &mut impl FnMut(usize, usize, &mut Vec<Option<bool>>) -> bool,
) -> bool {
    for j in 0..right {
        if seen[j] || !test(i, j, cache) {
            continue;
        }
        seen[j] = true;
        let free = match owner[j] {
            None => true,
            Some(k) => augment(k, right, owner, seen, cache, test),
        };
        if free {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

pub fn replace_subtree(t: &Tree, at: &[usize], s: &Tree) -> Result<Tree, StructureError> {
    if s.p != t.p {
        return Err(StructureError::AlphabetMismatch { left: t.p, right: s.p });
    }
    match at.split_first() {
        None => Ok(s.clone()),
        Some((&i, rest)) => {
            if i >= t.children.len() {
                return Err(StructureError::InvalidPath(at.to_vec()));
            }
            let mut kids = t.children.clone();
            kids[i] = replace_subtree(&t.children[i], rest, s)
                .map_err(|_| StructureError::InvalidPath(at.to_vec()))?;
            Ok(t.with_children(kids))
        }
    }
}

/// Remove the subtree at a non-empty path.
pub fn remove_subtree(t: &Tree, at: &[usize]) -> Result<Tree, StructureError> {
    match at {
        [] => Err(StructureError::InvalidPath(Vec::new())),
        [i] => {
            if *i >= t.children.len() {
                return Err(StructureError::InvalidPath(at.to_vec()));
            }
            let mut kids = t.children.clone();
            kids.remove(*i);
            Ok(t.with_children(kids))
        }
        [i, rest @ ..] => {
            let child = t.children.get(*i).ok_or_else(|| StructureError::InvalidPath(at.to_vec()))?;
            let mut kids = t.children.clone();
            kids[*i] = remove_subtree(child, rest).map_err(|_| StructureError::InvalidPath(at.to_vec()))?;
            Ok(t.with_children(kids))
        }
    }
}

/// Attach `copies` of `s` below the node at `at`.
pub fn add_children(t: &Tree, at: &[usize], s: &Tree, copies: usize) -> Result<Tree, StructureError> {
    let node = t.subtree(at).ok_or_else(|| StructureError::InvalidPath(at.to_vec()))?;
    let mut kids = node.children.clone();
    kids.extend(std::iter::repeat_n(s.clone(), copies));
    let grown = Tree::new(t.p, node.label, kids)?;
    replace_subtree(t, at, &grown)
}

/// One representative per isomorphism class of trees of height ≤ d and
/// size ≤ max_size, ordered by size, then canonically.
pub fn enumerate_trees(d: usize, p: u32, max_size: usize) -> Vec<Tree> {
    if p == 0 || max_size == 0 {
        return Vec::new();
    }
    let mut level: Vec<Tree> = (1..=p).map(|l| Tree::assemble(p, l, Vec::new())).collect();
    for _ in 0..d {
        let mut pool = level.clone();
        pool.sort_by(|a, b| a.size.cmp(&b.size).then_with(|| a.cmp(b)));
        let mut next = Vec::new();
        for label in 1..=p {
            let mut picked = Vec::new();
            multisets(&pool, 0, max_size - 1, &mut picked, &mut |kids| {
                next.push(Tree::assemble(p, label, kids.to_vec()));
            });
        }
        level = next;
    }
    level.sort_by(|a, b| a.size.cmp(&b.size).then_with(|| a.cmp(b)));
    level
}

fn multisets(
    pool: &[Tree],
    from: usize,
    budget: usize,
    picked: &mut Vec<Tree>,
    emit: &mut impl FnMut(&[Tree]),
) {
    emit(picked);
    for i in from..pool.len() {
        // pool is sorted by size, so nothing further fits either
        if pool[i].size > budget {
            break;
        }
        picked.push(pool[i].clone());
        multisets(pool, i, budget - pool[i].size, picked, emit);
        picked.pop();
    }
}
