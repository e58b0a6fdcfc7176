//! Hintikka types computed by unfolding the Ehrenfeucht-Fraïssé game.
//!
//! The rank-0 type of a position is its atomic diagram; the rank-r type is
//! the pair (set of rank r-1 types after one point move, set after one set
//! move). Equal identifiers in a shared arena mean MSO[r]-equivalence.

use std::collections::HashMap;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::structure::mask_of;
use super::{LogicError, Structure};

/// Limits on oracle work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Universe bound for positions that need all 2^n subsets.
    pub max_universe: usize,
    /// Highest MSO rank accepted.
    pub max_rank: usize,
    /// Atomic-diagram evaluations per type computation.
    pub max_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_universe: 12, max_rank: 3, max_work: 200_000_000 }
    }
}

impl Budget {
    /// Parse `universe=N,rank=N,work=N` (any subset, any order).
    pub fn parse(spec: &str) -> Result<Budget, LogicError> {
        let mut b = Budget::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| LogicError::Parse(format!("budget entry {part:?} lacks '='")))?;
            let n: u64 = v.trim().parse().map_err(|_| LogicError::Parse(format!("bad budget value {v:?}")))?;
            match k.trim() {
                "universe" => b.max_universe = n as usize,
                "rank" => b.max_rank = n as usize,
                "work" => b.max_work = n,
                other => return Err(LogicError::Parse(format!("unknown budget key {other:?}"))),
            }
        }
        Ok(b)
    }

    /// Default budget overridden by `SHRUBKIT_BUDGET` when set.
    pub fn from_env() -> Result<Budget, LogicError> {
        match std::env::var("SHRUBKIT_BUDGET") {
            Ok(s) => Budget::parse(&s),
            Err(_) => Ok(Budget::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(u32);

impl TypeId {
    pub fn index(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Atomic(Vec<u64>),
    Game { rank: u32, monadic: bool, points: Vec<u32>, sets: Vec<u32> },
}

#[derive(Default)]
struct Table {
    map: HashMap<Node, u32>,
    nodes: Vec<Node>,
}

impl Table {
    fn intern(&mut self, node: Node) -> u32 {
        if let Some(&id) = self.map.get(&node) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.map.insert(node, id);
        id
    }
}

/// Hash-consing arena for types; safe to share across threads.
#[derive(Default)]
pub struct TypeArena {
    inner: Mutex<Table>,
}

impl TypeArena {
    pub fn new() -> TypeArena {
        TypeArena::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("arena lock").nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn import(&self, local: &Table, root: u32) -> TypeId {
        let mut table = self.inner.lock().expect("arena lock");
        let mut map = Vec::with_capacity(local.nodes.len());
        for node in &local.nodes {
            let global = match node {
                Node::Atomic(k) => Node::Atomic(k.clone()),
                Node::Game { rank, monadic, points, sets } => {
                    let tr = |xs: &Vec<u32>| {
                        let mut v: Vec<u32> = xs.iter().map(|&x| map[x as usize]).collect();
                        v.sort_unstable();
                        v
                    };
                    Node::Game { rank: *rank, monadic: *monadic, points: tr(points), sets: tr(sets) }
                }
            };
            map.push(table.intern(global));
        }
        TypeId(map[root as usize])
    }

    /// Stable hex digest of a type, independent of arena numbering.
    pub fn digest(&self, id: TypeId) -> String {
        let table = self.inner.lock().expect("arena lock");
        let mut memo: HashMap<u32, [u8; 32]> = HashMap::new();
        let d = digest_node(&table, id.0, &mut memo);
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn digest_node(table: &Table, id: u32, memo: &mut HashMap<u32, [u8; 32]>) -> [u8; 32] {
    if let Some(d) = memo.get(&id) {
        return *d;
    }
    let mut h = Sha256::new();
    match &table.nodes[id as usize] {
        Node::Atomic(words) => {
            h.update(b"A");
            for w in words {
                h.update(w.to_be_bytes());
            }
        }
        Node::Game { rank, monadic, points, sets } => {
            h.update(b"G");
            h.update(rank.to_be_bytes());
            h.update([*monadic as u8]);
            for (tag, xs) in [(b'p', points), (b's', sets)] {
                let mut ds: Vec<[u8; 32]> = xs.iter().map(|&x| digest_node(table, x, memo)).collect();
                ds.sort_unstable();
                h.update([tag]);
                h.update((ds.len() as u64).to_be_bytes());
                for d in ds {
                    h.update(d);
                }
            }
        }
    }
    let out: [u8; 32] = h.finalize().into();
    memo.insert(id, out);
    out
}

struct Game<'a> {
    s: &'a Structure,
    table: Table,
    budget: Budget,
    work: u64,
    with_sets: bool,
    pts: Vec<usize>,
    sets: Vec<u64>,
}

impl Game<'_> {
    fn tick(&mut self) -> Result<(), LogicError> {
        self.work += 1;
        if self.work > self.budget.max_work {
            return Err(LogicError::BudgetExceeded(format!("more than {} oracle steps", self.budget.max_work)));
        }
        Ok(())
    }

    /// Atomic diagram of the current position, optionally with one extra point.
    fn diagram(&self, extra: Option<usize>) -> Vec<u64> {
        let pts: Vec<usize> = self.pts.iter().copied().chain(extra).collect();
        let mut words: Vec<u64> = pts.iter().map(|&a| self.s.sig(a)).collect();
        let mut acc = 0u64;
        let mut fill = 0u32;
        let mut bit = |b: bool, words: &mut Vec<u64>| {
            acc |= (b as u64) << fill;
            fill += 1;
            if fill == 64 {
                words.push(acc);
                acc = 0;
                fill = 0;
            }
        };
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i < j {
                    bit(pts[i] == pts[j], &mut words);
                }
                bit(self.s.has_edge(pts[i], pts[j]), &mut words);
            }
            for x in &self.sets {
                bit(x >> pts[i] & 1 == 1, &mut words);
            }
        }
        words.push(acc);
        words.push(((pts.len() as u64) << 32) | self.sets.len() as u64);
        words
    }

    fn atomic(&mut self) -> Result<u32, LogicError> {
        self.tick()?;
        let d = self.diagram(None);
        Ok(self.table.intern(Node::Atomic(d)))
    }

    fn ty(&mut self, r: usize) -> Result<u32, LogicError> {
        if r == 0 {
            return self.atomic();
        }
        let n = self.s.len();
        let mut points = Vec::with_capacity(n);
        for b in 0..n {
            self.pts.push(b);
            let t = self.ty(r - 1);
            self.pts.pop();
            points.push(t?);
        }
        points.sort_unstable();
        points.dedup();
        let mut sets = Vec::new();
        if self.with_sets {
            for x in self.set_moves(r - 1)? {
                self.sets.push(x);
                let t = self.ty(r - 1);
                self.sets.pop();
                sets.push(t?);
            }
            sets.sort_unstable();
            sets.dedup();
        }
        Ok(self.table.intern(Node::Game { rank: r as u32, monadic: self.with_sets, points, sets }))
    }

    /// Set moves whose successors realize every type a set move can reach,
    /// when the remaining rank is `rest`.
    fn set_moves(&mut self, rest: usize) -> Result<Vec<u64>, LogicError> {
        let n = self.s.len();
        if rest == 0 {
            // only membership of the already chosen points is visible
            let mut distinct = self.pts.clone();
            distinct.sort_unstable();
            distinct.dedup();
            return Ok((0..1u64 << distinct.len())
                .map(|pick| {
                    distinct.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).fold(0, |m, (_, &e)| m | 1 << e)
                })
                .collect());
        }
        if rest == 1 {
            // a rank-1 successor sees each element only through its diagram
            // class and its membership, so per class "all in", "all out" or
            // "mixed" covers every outcome
            let mut classes: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
            for b in 0..n {
                self.tick()?;
                let key = self.diagram(Some(b));
                match classes.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, members)) => members.push(b),
                    None => classes.push((key, vec![b])),
                }
            }
            let combos: f64 = classes.iter().map(|(_, m)| if m.len() > 1 { 3.0 } else { 2.0 }).product();
            if combos < 2f64.powi(n as i32) {
                let mut out = vec![0u64];
                for (_, members) in &classes {
                    let all = members.iter().fold(0u64, |m, &e| m | 1 << e);
                    let mut next = Vec::with_capacity(out.len() * 3);
                    for &x in &out {
                        next.push(x);
                        next.push(x | all);
                        if members.len() > 1 {
                            next.push(x | 1 << members[0]);
                        }
                    }
                    out = next;
                }
                return Ok(out);
            }
        }
        if n > self.budget.max_universe {
            return Err(LogicError::BudgetExceeded(format!(
                "subset enumeration over {n} elements (limit {})",
                self.budget.max_universe
            )));
        }
        Ok((0..=mask_of(n)).collect())
    }
}

fn compute(arena: &TypeArena, s: &Structure, r: usize, with_sets: bool, budget: Budget) -> Result<TypeId, LogicError> {
    if with_sets && r > budget.max_rank {
        return Err(LogicError::BudgetExceeded(format!("rank {r} above limit {}", budget.max_rank)));
    }
    let mut g = Game { s, table: Table::default(), budget, work: 0, with_sets, pts: Vec::new(), sets: Vec::new() };
    let root = g.ty(r)?;
    Ok(arena.import(&g.table, root))
}

/// MSO[m] type of `s` in `arena`.
pub fn mso_type(arena: &TypeArena, s: &Structure, m: usize, budget: Budget) -> Result<TypeId, LogicError> {
    compute(arena, s, m, true, budget)
}

/// FO[q] type of `s` in `arena` (point moves only).
pub fn fo_type(arena: &TypeArena, s: &Structure, q: usize, budget: Budget) -> Result<TypeId, LogicError> {
    compute(arena, s, q, false, budget)
}

pub fn mso_equiv(a: &Structure, b: &Structure, m: usize, budget: Budget) -> Result<bool, LogicError> {
    if a.vocabulary() != b.vocabulary() {
        return Err(LogicError::VocabularyMismatch("structures over different vocabularies".into()));
    }
    let arena = TypeArena::new();
    Ok(mso_type(&arena, a, m, budget)? == mso_type(&arena, b, m, budget)?)
}

pub fn fo_equiv(a: &Structure, b: &Structure, q: usize, budget: Budget) -> Result<bool, LogicError> {
    if a.vocabulary() != b.vocabulary() {
        return Err(LogicError::VocabularyMismatch("structures over different vocabularies".into()));
    }
    let arena = TypeArena::new();
    Ok(fo_type(&arena, a, q, budget)? == fo_type(&arena, b, q, budget)?)
}
