//! Type indicators of child families, capped-count fingerprints, cap
//! calibration against the oracle, and the monadic shrink/grow primitives.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use crate::bounds::Bounds;
use crate::logic::{mso_type, Budget, LogicError, Structure, TypeArena, TypeId};
use crate::par::{self, Exec};
use crate::structures::{enumerate_trees, Forest, MonadicStructure, StructureError, Tree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypesysError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("out of range: {0}")]
    OutOfRange(String),
}

/// Per-count cap used by fingerprints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CapPolicy {
    /// ρ_{h,p}(m) at height h, saturated at family size + 1.
    PaperExact,
    Practical(usize),
}

impl CapPolicy {
    /// Cap applied to the children of a node of height `h` with `n` children.
    pub fn cap(self, h: usize, p: u32, m: usize, n: usize) -> usize {
        match self {
            CapPolicy::Practical(c) => c.max(1),
            CapPolicy::PaperExact => Bounds::default().rho(h as u32, p as u64, m as u64).saturate(n + 1).max(1),
        }
    }
}

impl fmt::Display for CapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapPolicy::PaperExact => write!(f, "paper"),
            CapPolicy::Practical(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpNode {
    pub label: u32,
    /// (child fingerprint, capped count), sorted
    pub children: Vec<(FpNode, usize)>,
}

impl fmt::Display for FpNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (k, (c, n)) in self.children.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}*{n}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub policy: CapPolicy,
    pub m: usize,
    pub node: FpNode,
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cap={} m={} {}", self.policy, self.m, self.node)
    }
}

fn fp_node(t: &Tree, m: usize, cp: CapPolicy) -> FpNode {
    let cap = cp.cap(t.height(), t.p(), m, t.children().len());
    let mut groups: BTreeMap<FpNode, usize> = BTreeMap::new();
    for c in t.children() {
        *groups.entry(fp_node(c, m, cp)).or_default() += 1;
    }
    FpNode { label: t.label(), children: groups.into_iter().map(|(k, n)| (k, n.min(cap))).collect() }
}

pub fn fingerprint(t: &Tree, m: usize, cp: CapPolicy) -> Fingerprint {
    Fingerprint { policy: cp, m, node: fp_node(t, m, cp) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classifier {
    Fingerprint(CapPolicy),
    Oracle,
}

/// Class identifier of a tree under a classifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassKey {
    Fp(FpNode),
    Type(TypeId),
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKey::Fp(n) => write!(f, "{n}"),
            ClassKey::Type(id) => write!(f, "type#{}", id.index()),
        }
    }
}

/// Classifies trees at a fixed rank, memoizing results. Oracle types share one arena.
pub struct Typer {
    classifier: Classifier,
    m: usize,
    budget: Budget,
    arena: TypeArena,
    cache: Mutex<HashMap<Tree, ClassKey>>,
}

impl Typer {
    pub fn new(classifier: Classifier, m: usize) -> Typer {
        Typer::with_budget(classifier, m, Budget::default())
    }

    pub fn with_budget(classifier: Classifier, m: usize, budget: Budget) -> Typer {
        Typer { classifier, m, budget, arena: TypeArena::new(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn classifier(&self) -> Classifier {
        self.classifier
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn arena(&self) -> &TypeArena {
        &self.arena
    }

    pub fn key(&self, t: &Tree) -> Result<ClassKey, LogicError> {
        if let Some(k) = self.cache.lock().expect("typer cache").get(t) {
            return Ok(k.clone());
        }
        let k = match self.classifier {
            Classifier::Fingerprint(cp) => ClassKey::Fp(fp_node(t, self.m, cp)),
            Classifier::Oracle => ClassKey::Type(mso_type(&self.arena, &Structure::from_tree(t)?, self.m, self.budget)?),
        };
        self.cache.lock().expect("typer cache").insert(t.clone(), k.clone());
        Ok(k)
    }

    /// Member indices of `trees` grouped by class.
    pub fn classes(&self, trees: &[Tree]) -> Result<BTreeMap<ClassKey, Vec<usize>>, LogicError> {
        let mut out: BTreeMap<ClassKey, Vec<usize>> = BTreeMap::new();
        for (i, t) in trees.iter().enumerate() {
            out.entry(self.key(t)?).or_default().push(i);
        }
        Ok(out)
    }
}

/// Class table of a family: class → number of members in it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeIndicator {
    pub classes: BTreeMap<ClassKey, usize>,
    pub total: usize,
}

impl TypeIndicator {
    pub fn of(trees: &[Tree], typer: &Typer) -> Result<TypeIndicator, LogicError> {
        let classes: BTreeMap<ClassKey, usize> =
            typer.classes(trees)?.into_iter().map(|(k, v)| (k, v.len())).collect();
        Ok(TypeIndicator { classes, total: trees.len() })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Both indicators as monadic structures over the union of their classes.
    pub fn as_monadic_pair(&self, other: &TypeIndicator) -> (MonadicStructure, MonadicStructure) {
        let mut keys: Vec<&ClassKey> = self.classes.keys().chain(other.classes.keys()).collect();
        keys.sort();
        keys.dedup();
        let sigma: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
        let counts = |ind: &TypeIndicator| -> Vec<usize> {
            keys.iter().map(|k| ind.classes.get(*k).copied().unwrap_or(0)).collect()
        };
        let a = MonadicStructure::from_counts(sigma.clone(), &counts(self)).expect("counts match sigma");
        let b = MonadicStructure::from_counts(sigma, &counts(other)).expect("counts match sigma");
        (a, b)
    }

    /// FO[q]-equivalence of the two indicators.
    pub fn fo_equiv(&self, other: &TypeIndicator, q: usize) -> bool {
        let (a, b) = self.as_monadic_pair(other);
        crate::logic::monadic_fo_equiv(&a, &b, q).expect("shared sigma")
    }
}

pub fn type_indicator(f: &Forest, m: usize, classifier: Classifier) -> Result<TypeIndicator, TypesysError> {
    Ok(TypeIndicator::of(f.trees(), &Typer::new(classifier, m))?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapWitness {
    pub cap: usize,
    pub left: Tree,
    pub right: Tree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapReport {
    pub d: usize,
    pub p: u32,
    pub m: usize,
    pub max_size: usize,
    pub trees: usize,
    pub classes: usize,
    /// Smallest cap whose fingerprint equality implies oracle equivalence.
    pub cap: usize,
    /// Whether, at that cap, oracle equivalence also implies fingerprint equality.
    pub complete: bool,
    /// One unsound pair (equal fingerprints, inequivalent trees) per smaller cap.
    pub witnesses: Vec<CapWitness>,
}

fn oracle_types(trees: &[Tree], m: usize, budget: Budget, exec: Exec) -> Result<Vec<TypeId>, LogicError> {
    let arena = TypeArena::new();
    par::map(exec, trees, |t| mso_type(&arena, &Structure::from_tree(t)?, m, budget)).into_iter().collect()
}

pub fn calibrate_cap(d: usize, p: u32, m: usize, max_size: usize, exec: Exec) -> Result<CapReport, TypesysError> {
    calibrate_cap_with(d, p, m, max_size, exec, Budget::from_env()?)
}

pub fn calibrate_cap_with(
    d: usize,
    p: u32,
    m: usize,
    max_size: usize,
    exec: Exec,
    budget: Budget,
) -> Result<CapReport, TypesysError> {
    let trees = enumerate_trees(d, p, max_size);
    let types = oracle_types(&trees, m, budget, exec)?;
    let mut distinct = types.clone();
    distinct.sort();
    distinct.dedup();
    let mut witnesses = Vec::new();
    // at a cap no smaller than every child count, fingerprints are isomorphism classes
    let top = max_size.max(1);
    for c in 1..=top {
        let fps = par::map(exec, &trees, |t| fp_node(t, m, CapPolicy::Practical(c)));
        let mut by_fp: HashMap<&FpNode, usize> = HashMap::new();
        let mut by_type: HashMap<TypeId, &FpNode> = HashMap::new();
        let mut unsound = None;
        let mut complete = true;
        for (i, fp) in fps.iter().enumerate() {
            match by_fp.get(fp) {
                Some(&j) if types[j] != types[i] => {
                    unsound.get_or_insert((j, i));
                }
                Some(_) => {}
                None => {
                    by_fp.insert(fp, i);
                }
            }
            match by_type.get(&types[i]) {
                Some(other) if *other != fp => complete = false,
                Some(_) => {}
                None => {
                    by_type.insert(types[i], fp);
                }
            }
        }
        match unsound {
            Some((j, i)) => witnesses.push(CapWitness { cap: c, left: trees[j].clone(), right: trees[i].clone() }),
            None => {
                return Ok(CapReport {
                    d,
                    p,
                    m,
                    max_size,
                    trees: trees.len(),
                    classes: distinct.len(),
                    cap: c,
                    complete,
                    witnesses,
                })
            }
        }
    }
    unreachable!("isomorphism-level fingerprints are always sound")
}

/// Number of MSO[m] classes among the enumerated trees of T_{d,p} up to `max_size`.
pub fn index_census(d: usize, p: u32, m: usize, max_size: usize, exec: Exec) -> Result<usize, TypesysError> {
    index_census_with(d, p, m, max_size, exec, Budget::from_env()?)
}

pub fn index_census_with(
    d: usize,
    p: u32,
    m: usize,
    max_size: usize,
    exec: Exec,
    budget: Budget,
) -> Result<usize, TypesysError> {
    let trees = enumerate_trees(d, p, max_size);
    let mut types = oracle_types(&trees, m, budget, exec)?;
    types.sort();
    types.dedup();
    Ok(types.len())
}

/// Substructure of size `lambda` containing `keep`, FO[q]-equivalent to `a`.
pub fn monadic_shrink(a: &MonadicStructure, lambda: usize, q: usize, keep: u32) -> Result<MonadicStructure, TypesysError> {
    let sigma = a.sigma().len();
    if lambda > a.len() || q.saturating_sub(1) * sigma >= lambda {
        return Err(TypesysError::OutOfRange(format!(
            "need (q-1)*|sigma| < lambda <= |A|, got q={q}, |sigma|={sigma}, lambda={lambda}, |A|={}",
            a.len()
        )));
    }
    let keep_class = a.class_of(keep).ok_or_else(|| TypesysError::OutOfRange(format!("{keep} is not an element")))?;
    let counts = a.counts();
    let floor: usize = counts.iter().map(|&c| c.min(q)).sum();
    if lambda < floor {
        return Err(TypesysError::OutOfRange(format!(
            "lambda={lambda} is below the {floor} elements needed to keep every count min(count, q)"
        )));
    }
    let mut chosen: BTreeMap<u32, usize> = BTreeMap::new();
    let mut pools: Vec<Vec<u32>> = Vec::with_capacity(sigma);
    for (c, &n) in counts.iter().enumerate() {
        let mut members: Vec<u32> = a.members(c).collect();
        if c == keep_class {
            members.retain(|&e| e != keep);
            members.insert(0, keep);
        }
        for &e in members.iter().take(n.min(q)) {
            chosen.insert(e, c);
        }
        pools.push(members.into_iter().skip(n.min(q)).collect());
    }
    let mut order: Vec<usize> = (0..sigma).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(counts[c]));
    let mut left = lambda - floor;
    for c in order {
        for &e in pools[c].iter().take(left) {
            chosen.insert(e, c);
        }
        left -= pools[c].len().min(left);
    }
    Ok(MonadicStructure::new(a.sigma().to_vec(), chosen)?)
}

/// Superstructure of size `lambda` whose new elements all lie in class `cls`.
pub fn monadic_grow(a: &MonadicStructure, lambda: usize, q: usize, cls: usize) -> Result<MonadicStructure, TypesysError> {
    let counts = a.counts();
    let have = *counts
        .get(cls)
        .ok_or_else(|| TypesysError::OutOfRange(format!("class {cls} outside sigma of length {}", counts.len())))?;
    if have < q {
        return Err(TypesysError::OutOfRange(format!("class {cls} has {have} < q = {q} elements")));
    }
    if lambda < a.len() {
        return Err(TypesysError::OutOfRange(format!("lambda={lambda} below |A|={}", a.len())));
    }
    if a.len() <= q.saturating_sub(1) * counts.len() {
        return Err(TypesysError::OutOfRange(format!("|A|={} must exceed (q-1)*|sigma|", a.len())));
    }
    let mut elements = a.elements().clone();
    let mut next = elements.keys().next_back().map_or(0, |&e| e + 1);
    while elements.len() < lambda {
        elements.insert(next, cls);
        next += 1;
    }
    Ok(MonadicStructure::new(a.sigma().to_vec(), elements)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{fo_equiv, monadic_fo_equiv};

    fn leaf(l: u32) -> Tree {
        Tree::leaf(2, l).unwrap()
    }

    #[test]
    fn indicator_examples() {
        let f = Forest::new(2, vec![leaf(1), leaf(1), leaf(2)]).unwrap();
        let ind = type_indicator(&f, 1, Classifier::Oracle).unwrap();
        let mut counts: Vec<usize> = ind.classes.values().copied().collect();
        counts.sort();
        assert_eq!(counts, vec![1, 2]);
        assert_eq!(ind.total, 3);
        assert!(type_indicator(&Forest::new(2, vec![]).unwrap(), 1, Classifier::Oracle).unwrap().is_empty());
        let same = Forest::new(2, vec![Tree::star(2, 1, 2).unwrap(); 4]).unwrap();
        let ind = type_indicator(&same, 2, Classifier::Fingerprint(CapPolicy::Practical(2))).unwrap();
        assert_eq!(ind.classes.values().copied().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn fingerprint_examples() {
        let s3 = Tree::star(1, 1, 3).unwrap();
        let s4 = Tree::star(1, 1, 4).unwrap();
        assert_eq!(fingerprint(&s3, 1, CapPolicy::Practical(2)), fingerprint(&s4, 1, CapPolicy::Practical(2)));
        assert_ne!(fingerprint(&s3, 1, CapPolicy::Practical(5)), fingerprint(&s4, 1, CapPolicy::Practical(5)));
        for cp in [CapPolicy::Practical(1), CapPolicy::PaperExact] {
            assert_ne!(fingerprint(&leaf(1), 1, cp), fingerprint(&leaf(2), 1, cp));
        }
        assert_eq!(fingerprint(&s3, 1, CapPolicy::Practical(2)).to_string(), "cap=2 m=1 1(1*2)");
    }

    #[test]
    fn paper_exact_is_isomorphism() {
        let trees = enumerate_trees(2, 2, 6);
        let fps: Vec<Fingerprint> = trees.iter().map(|t| fingerprint(t, 2, CapPolicy::PaperExact)).collect();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                assert_eq!(fps[i] == fps[j], i == j);
            }
        }
    }

    #[test]
    fn calibration_small() {
        let r = calibrate_cap_with(0, 3, 2, 4, Exec::Parallel, Budget::default()).unwrap();
        assert_eq!((r.cap, r.complete, r.trees), (1, true, 3));
        let r = calibrate_cap_with(1, 1, 1, 6, Exec::Sequential, Budget::default()).unwrap();
        assert!(r.cap >= 1 && r.witnesses.len() == r.cap - 1);
        for w in &r.witnesses {
            assert_eq!(
                fingerprint(&w.left, 1, CapPolicy::Practical(w.cap)),
                fingerprint(&w.right, 1, CapPolicy::Practical(w.cap))
            );
        }
    }

    #[test]
    fn census_examples() {
        for p in 1..=3 {
            assert_eq!(index_census_with(0, p, 1, 3, Exec::Parallel, Budget::default()).unwrap(), p as usize);
        }
        assert_eq!(index_census_with(0, 3, 0, 3, Exec::Parallel, Budget::default()).unwrap(), 1);
        let six = index_census_with(1, 1, 1, 6, Exec::Parallel, Budget::default()).unwrap();
        let eight = index_census_with(1, 1, 1, 8, Exec::Parallel, Budget::default()).unwrap();
        assert_eq!(six, eight);
    }

    #[test]
    fn monadic_shrink_examples() {
        let a = MonadicStructure::numbered(&[5, 1]);
        let keep = a.members(0).last().unwrap();
        let b = monadic_shrink(&a, 4, 2, keep).unwrap();
        assert_eq!(b.counts(), vec![3, 1]);
        assert!(b.class_of(keep) == Some(0) && b.is_substructure_of(&a));
        assert!(monadic_fo_equiv(&a, &b, 2).unwrap());
        let sa = Structure::from_monadic(&a).unwrap();
        let sb = Structure::from_monadic(&b).unwrap();
        assert!(fo_equiv(&sa, &sb, 2, Budget::default()).unwrap());
        assert_eq!(monadic_shrink(&a, 6, 2, keep).unwrap(), a);
        let c = MonadicStructure::numbered(&[4, 3]);
        let first = c.members(0).next().unwrap();
        assert_eq!(monadic_shrink(&c, 2, 1, first).unwrap().counts(), vec![1, 1]);
        // the size range alone admits lambda = 3 here, but no 3-element
        // substructure keeps both counts at least 2
        let d = MonadicStructure::numbered(&[5, 5]);
        assert!(monadic_shrink(&d, 3, 2, 0).is_err());
    }

    #[test]
    fn monadic_grow_examples() {
        let a = MonadicStructure::numbered(&[2, 1]);
        let b = monadic_grow(&a, 10, 2, 0).unwrap();
        assert_eq!(b.counts(), vec![9, 1]);
        assert!(monadic_fo_equiv(&a, &b, 2).unwrap());
        let b8 = monadic_grow(&a, 8, 2, 0).unwrap();
        let (sa, sb) = (Structure::from_monadic(&a).unwrap(), Structure::from_monadic(&b8).unwrap());
        assert!(fo_equiv(&sa, &sb, 2, Budget::default()).unwrap());
        assert_eq!(monadic_grow(&a, 3, 2, 0).unwrap(), a);
        assert!(monadic_grow(&a, 10, 2, 1).is_err());
    }
}
