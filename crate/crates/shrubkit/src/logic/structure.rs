use crate::structures::{Forest, Graph, MonadicStructure, Tree};

use super::{Formula, LogicError};

/// Largest universe a [`Structure`] can hold (elements are bit positions).
pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vocabulary {
    /// `{E, root, P_1..P_p}`
    Tree { p: u32 },
    /// `{E, P_1..P_p}`
    Graph { p: u32 },
    /// `{T_1..T_k}`, written `P_i` in formulas
    Monadic { k: u32 },
}

impl Vocabulary {
    pub fn labels(&self) -> u32 {
        match *self {
            Vocabulary::Tree { p } | Vocabulary::Graph { p } => p,
            Vocabulary::Monadic { k } => k,
        }
    }

    pub fn check(&self, f: &Formula) -> Result<(), LogicError> {
        let top = f.max_label();
        if top > self.labels() {
            return Err(LogicError::VocabularyMismatch(format!(
                "label P{top} outside vocabulary with {} labels",
                self.labels()
            )));
        }
        if f.uses_root() && !matches!(self, Vocabulary::Tree { .. }) {
            return Err(LogicError::VocabularyMismatch("root used outside the tree vocabulary".into()));
        }
        if f.uses_edge() && matches!(self, Vocabulary::Monadic { .. }) {
            return Err(LogicError::VocabularyMismatch("E used in a monadic vocabulary".into()));
        }
        Ok(())
    }
}

/// Finite relational structure over at most 64 elements, stored as bit masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    vocab: Vocabulary,
    /// per element: bit i set iff P_{i+1} holds; bit 63 marks root
    sig: Vec<u64>,
    adj: Vec<u64>,
}

const ROOT_BIT: u64 = 1 << 63;

impl Structure {
    fn with_size(vocab: Vocabulary, n: usize) -> Result<Structure, LogicError> {
        if n > MAX_ELEMENTS {
            return Err(LogicError::TooLarge { size: n, limit: MAX_ELEMENTS });
        }
        if vocab.labels() >= 63 {
            return Err(LogicError::VocabularyMismatch("at most 62 unary predicates".into()));
        }
        Ok(Structure { vocab, sig: vec![0; n], adj: vec![0; n] })
    }

    pub fn vocabulary(&self) -> Vocabulary {
        self.vocab
    }

    pub fn len(&self) -> usize {
        self.sig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sig.is_empty()
    }

    pub fn full_mask(&self) -> u64 {
        mask_of(self.len())
    }

    pub(crate) fn sig(&self, e: usize) -> u64 {
        self.sig[e]
    }

    pub fn has_label(&self, e: usize, i: u32) -> bool {
        (1..=62).contains(&i) && self.sig[e] >> (i - 1) & 1 == 1
    }

    pub fn is_root(&self, e: usize) -> bool {
        self.sig[e] & ROOT_BIT != 0
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    /// Preorder numbering; element 0 is the root.
    pub fn from_tree(t: &Tree) -> Result<Structure, LogicError> {
        let mut s = Structure::with_size(Vocabulary::Tree { p: t.p() }, t.size())?;
        let mut next = 0;
        s.place(t, None, &mut next);
        Ok(s)
    }

    /// Disjoint union of the member trees; each member root satisfies `root`.
    pub fn from_forest(f: &Forest) -> Result<Structure, LogicError> {
        let mut s = Structure::with_size(Vocabulary::Tree { p: f.p() }, f.size())?;
        let mut next = 0;
        for t in f.trees() {
            s.place(t, None, &mut next);
        }
        Ok(s)
    }

    fn place(&mut self, t: &Tree, parent: Option<usize>, next: &mut usize) {
        let me = *next;
        *next += 1;
        self.sig[me] = 1 << (t.label() - 1);
        match parent {
            None => self.sig[me] |= ROOT_BIT,
            Some(up) => self.link(me, up),
        }
        for c in t.children() {
            self.place(c, Some(me), next);
        }
    }

    /// Vertices numbered in identifier order.
    pub fn from_graph(g: &Graph) -> Result<Structure, LogicError> {
        let mut s = Structure::with_size(Vocabulary::Graph { p: g.p() }, g.order())?;
        let ids: Vec<&String> = g.vertices().keys().collect();
        for (i, (_, &l)) in g.vertices().iter().enumerate() {
            s.sig[i] = 1 << (l - 1);
        }
        for (a, b) in g.edges() {
            let ia = ids.binary_search(&a).expect("edge endpoints are vertices");
            let ib = ids.binary_search(&b).expect("edge endpoints are vertices");
            s.link(ia, ib);
        }
        Ok(s)
    }

    /// Elements numbered in identifier order; predicate `T_i` is label `P_i`.
    pub fn from_monadic(a: &MonadicStructure) -> Result<Structure, LogicError> {
        let k = a.sigma().len() as u32;
        let mut s = Structure::with_size(Vocabulary::Monadic { k }, a.len())?;
        for (i, (_, &c)) in a.elements().iter().enumerate() {
            s.sig[i] = 1 << c;
        }
        Ok(s)
    }

    /// Substructure induced by the elements in `keep`, renumbered in order.
    pub fn induced(&self, keep: u64) -> Structure {
        let idx: Vec<usize> = (0..self.len()).filter(|&e| keep >> e & 1 == 1).collect();
        let mut sig = Vec::with_capacity(idx.len());
        let mut adj = Vec::with_capacity(idx.len());
        for &e in &idx {
            sig.push(self.sig[e]);
            let mut row = 0u64;
            for (j, &f) in idx.iter().enumerate() {
                if self.has_edge(e, f) {
                    row |= 1 << j;
                }
            }
            adj.push(row);
        }
        Structure { vocab: self.vocab, sig, adj }
    }
}

pub(crate) fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
