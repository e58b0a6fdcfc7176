//! Type-preserving surgery on bounded-height trees: shrink, single steps,
//! grow, the ≼_m checker, scale-targeted drivers, graph shrinking through
//! tree models, bounded satisfiability search and chain checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::bounds::{Bounds, BoundsError, ScaleSpec, TowerNum, Window};
use crate::logic::{holds, mso_equiv, Budget, Formula, LogicError, Structure};
use crate::structures::{
    add_children, bipartite_match, enumerate_trees, is_leaf_hereditary_subtree, remove_subtree, Graph, Path,
    StructureError, Tree,
};
use crate::treemodel::{self, ModelError, TreeModel};
use crate::typesys::{CapPolicy, ClassKey, Classifier, TypeIndicator, Typer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElsError {
    #[error("no node exceeds its child cap")]
    NoHeavyNode,
    #[error("no eligible class: {0}")]
    NoEligibleClass(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("step of size {delta} jumped over window {window} (size {from} -> {to})")]
    WindowTooNarrow { window: String, delta: usize, from: usize, to: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `q` is the indicator rank and the per-class keep count; nodes with more
    /// than `child_cap` children are heavy.
    Practical { q: usize, child_cap: usize },
    /// χ and ρ at the node's height, saturated at family size + 1.
    PaperExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub mode: Mode,
    pub classifier: Classifier,
    pub budget: Budget,
}

impl Thresholds {
    /// Indicator rank `q`, child cap `q`, fingerprints capped at `q`.
    pub fn practical(q: usize) -> Thresholds {
        let q = q.max(1);
        Thresholds {
            mode: Mode::Practical { q, child_cap: q },
            classifier: Classifier::Fingerprint(CapPolicy::Practical(q)),
            budget: Budget::default(),
        }
    }

    pub fn paper_exact() -> Thresholds {
        Thresholds {
            mode: Mode::PaperExact,
            classifier: Classifier::Fingerprint(CapPolicy::PaperExact),
            budget: Budget::default(),
        }
    }

    pub fn with_child_cap(mut self, cap: usize) -> Thresholds {
        if let Mode::Practical { q, .. } = self.mode {
            self.mode = Mode::Practical { q, child_cap: cap.max(1) };
        }
        self
    }

    pub fn with_classifier(mut self, classifier: Classifier) -> Thresholds {
        self.classifier = classifier;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Thresholds {
        self.budget = budget;
        self
    }

    /// Indicator rank at a node of height `h` with `n` children.
    pub fn q_at(&self, h: usize, p: u32, m: usize, n: usize) -> usize {
        match self.mode {
            Mode::Practical { q, .. } => q,
            Mode::PaperExact => Bounds::default().rho(h as u32, p as u64, m as u64).saturate(n + 1).max(1),
        }
    }

    /// Child cap at a node of height `h` with `n` children.
    pub fn cap_at(&self, h: usize, p: u32, m: usize, n: usize) -> usize {
        match self.mode {
            Mode::Practical { child_cap, .. } => child_cap,
            Mode::PaperExact => Bounds::default().chi(h as u32, p as u64, m as u64).saturate(n + 1).max(1),
        }
    }

    pub fn typer(&self, m: usize) -> Typer {
        Typer::with_budget(self.classifier, m, self.budget)
    }
}

/// Members of a child family in keep order: tallest first, then by canonical form.
fn keep_order(children: &[Tree], members: &[usize]) -> Vec<usize> {
    let mut v = members.to_vec();
    v.sort_by(|&a, &b| children[b].height().cmp(&children[a].height()).then(children[a].cmp(&children[b])));
    v
}

fn shrink_with(t: &Tree, m: usize, th: &Thresholds, typer: &Typer) -> Result<Tree, ElsError> {
    if t.is_leaf() {
        return Ok(t.clone());
    }
    let kids = t.children().iter().map(|c| shrink_with(c, m, th, typer)).collect::<Result<Vec<_>, _>>()?;
    let q = th.q_at(t.height(), t.p(), m, kids.len());
    let mut kept = Vec::new();
    for members in typer.classes(&kids)?.values() {
        for i in keep_order(&kids, members).into_iter().take(q) {
            kept.push(kids[i].clone());
        }
    }
    Ok(t.with_children(kept))
}

/// Leaf-hereditary subtree keeping, per node and child class, min(count, q) members.
pub fn shrink(t: &Tree, m: usize, th: &Thresholds) -> Result<Tree, ElsError> {
    shrink_with(t, m, th, &th.typer(m))
}

fn over_cap_nodes(t: &Tree, m: usize, th: &Thresholds) -> Vec<(usize, Path)> {
    let mut out: Vec<(usize, Path)> = t
        .paths()
        .into_iter()
        .filter(|path| {
            let z = t.subtree(path).expect("own path");
            z.children().len() > th.cap_at(z.height(), z.p(), m, z.children().len())
        })
        .map(|path| (t.subtree(&path).expect("own path").height(), path))
        .collect();
    out.sort();
    out
}

/// Lowest heavy node, leftmost on ties, with its height.
pub fn find_heavy_node(t: &Tree, m: usize, th: &Thresholds) -> Result<(Path, usize), ElsError> {
    over_cap_nodes(t, m, th).into_iter().next().map(|(h, p)| (p, h)).ok_or(ElsError::NoHeavyNode)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub path: String,
    pub class: String,
    pub delta: i64,
}

fn path_text(path: &[usize]) -> String {
    treemodel::vertex_id(path)
}

fn step_shrink_with(t: &Tree, m: usize, th: &Thresholds, typer: &Typer) -> Result<(Tree, Step), ElsError> {
    let nodes = over_cap_nodes(t, m, th);
    if nodes.is_empty() {
        return Err(ElsError::NoHeavyNode);
    }
    for (_, path) in &nodes {
        let z = t.subtree(path).expect("own path");
        let kids = z.children();
        let q = th.q_at(z.height(), z.p(), m, kids.len());
        let classes = typer.classes(kids)?;
        let Some((key, members)) = classes
            .iter()
            .filter(|(_, v)| v.len() > q)
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
        else {
            continue;
        };
        let tallest = z.height() - 1;
        let unique_witness = kids.iter().filter(|c| c.height() == tallest).count() == 1;
        let mut order = members.clone();
        order.sort_by(|&a, &b| kids[b].cmp(&kids[a]));
        let victim = order
            .into_iter()
            .find(|&i| !(unique_witness && kids[i].height() == tallest))
            .expect("a class above q has a member besides the witness");
        let delta = kids[victim].size();
        let mut at = path.clone();
        at.push(victim);
        let out = remove_subtree(t, &at)?;
        return Ok((out, Step { path: path_text(path), class: key.to_string(), delta: -(delta as i64) }));
    }
    Err(ElsError::NoEligibleClass("every over-cap node has all class counts within q".into()))
}

/// Remove one child subtree at the first heavy node that has a class above q.
pub fn step_shrink(t: &Tree, m: usize, th: &Thresholds) -> Result<(Tree, Step), ElsError> {
    step_shrink_with(t, m, th, &th.typer(m))
}

fn grow_with(t: &Tree, m: usize, k: usize, th: &Thresholds, typer: &Typer) -> Result<(Tree, Step), ElsError> {
    if k == 0 {
        return Ok((t.clone(), Step { path: path_text(&[]), class: String::new(), delta: 0 }));
    }
    let mut candidates: Vec<(usize, Path)> = over_cap_nodes(t, m, th);
    let mut rest: Vec<(usize, Path)> = t
        .paths()
        .into_iter()
        .map(|p| (t.subtree(&p).expect("own path").height(), p))
        .filter(|(h, _)| *h > 0)
        .collect();
    rest.sort();
    candidates.extend(rest);
    for (_, path) in &candidates {
        let z = t.subtree(path).expect("own path");
        let kids = z.children();
        let q = th.q_at(z.height(), z.p(), m, kids.len());
        let classes = typer.classes(kids)?;
        let best = classes
            .iter()
            .filter(|(_, v)| v.len() >= q)
            .map(|(key, v)| (v.iter().map(|&i| &kids[i]).min().expect("non-empty class"), key))
            .min();
        if let Some((rep, key)) = best {
            let out = add_children(t, path, rep, k)?;
            let delta = (k * rep.size()) as i64;
            return Ok((out, Step { path: path_text(path), class: key.to_string(), delta }));
        }
    }
    Err(ElsError::NoEligibleClass("no node has a child class with at least q members".into()))
}

/// Attach `k` copies of a child-class representative at the heavy node (or the
/// lowest node with a class of at least q members).
pub fn grow(t: &Tree, m: usize, k: usize, th: &Thresholds) -> Result<(Tree, Step), ElsError> {
    grow_with(t, m, k, th, &th.typer(m))
}

struct PreceqCtx<'a> {
    m: usize,
    th: &'a Thresholds,
    typer: &'a Typer,
    memo: HashMap<(*const Tree, *const Tree), bool>,
}

impl PreceqCtx<'_> {
    fn check(&mut self, a: &Tree, b: &Tree) -> Result<bool, ElsError> {
        let key = (a as *const Tree, b as *const Tree);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.compute(a, b)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn compute(&mut self, a: &Tree, b: &Tree) -> Result<bool, ElsError> {
        if a.p() != b.p() || a.height() != b.height() || a.label() != b.label() {
            return Ok(false);
        }
        if a.is_leaf() {
            return Ok(true);
        }
        let n = a.children().len().max(b.children().len());
        let q = self.th.q_at(a.height(), a.p(), self.m, n);
        let ia = TypeIndicator::of(a.children(), self.typer)?;
        let ib = TypeIndicator::of(b.children(), self.typer)?;
        if !ia.fo_equiv(&ib, q) {
            return Ok(false);
        }
        let mut failure = None;
        let matched = bipartite_match(a.children().len(), b.children().len(), |i, j| {
            match self.check(&a.children()[i], &b.children()[j]) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    false
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(matched.is_some())
    }
}

/// t1 ≼_m t2.
pub fn preceq(t1: &Tree, t2: &Tree, m: usize, th: &Thresholds) -> Result<bool, ElsError> {
    preceq_with(t1, t2, m, th, &th.typer(m))
}

fn preceq_with(t1: &Tree, t2: &Tree, m: usize, th: &Thresholds, typer: &Typer) -> Result<bool, ElsError> {
    PreceqCtx { m, th, typer, memo: HashMap::new() }.check(t1, t2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub leaf_hereditary: bool,
    pub preceq: bool,
    /// `None` when the oracle budget refused the pair.
    pub oracle_equivalent: Option<bool>,
}

/// Check `small` against `large`: embedding, ≼_m and oracle MSO[m]-equivalence.
pub fn verify_pair(small: &Tree, large: &Tree, m: usize, th: &Thresholds) -> Result<Verdicts, ElsError> {
    let oracle = match (Structure::from_tree(small), Structure::from_tree(large)) {
        (Ok(a), Ok(b)) => match mso_equiv(&a, &b, m, th.budget) {
            Ok(v) => Some(v),
            Err(LogicError::BudgetExceeded(_)) => None,
            Err(e) => return Err(e.into()),
        },
        _ => None,
    };
    Ok(Verdicts {
        leaf_hereditary: is_leaf_hereditary_subtree(small, large).is_some(),
        preceq: preceq(small, large, m, th)?,
        oracle_equivalent: oracle,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElsReport {
    pub direction: String,
    pub input_size: usize,
    pub output_size: usize,
    pub eta: u64,
    pub lambda: u64,
    pub rank: usize,
    pub window: String,
    pub steps: Vec<Step>,
    pub verdicts: Option<Verdicts>,
}

impl ElsReport {
    pub fn total_delta(&self) -> i64 {
        self.steps.iter().map(|s| s.delta).sum()
    }
}

fn report(direction: &str, t: &Tree, eta: u64, lam: u64, rank: usize, window: &Window) -> ElsReport {
    ElsReport {
        direction: direction.into(),
        input_size: t.size(),
        output_size: t.size(),
        eta,
        lambda: lam,
        rank,
        window: window.to_string(),
        steps: Vec::new(),
        verdicts: None,
    }
}

/// Shrink step by step until the size lies in scale `lam` of `f`.
pub fn els_down(t: &Tree, lam: u64, f: &ScaleSpec, th: &Thresholds) -> Result<(Tree, ElsReport), ElsError> {
    let eta = f.scale_of(t.size() as u64)?;
    if lam > eta {
        return Err(ElsError::Precondition(format!("target scale {lam} above the input scale {eta}")));
    }
    let window = f.window(lam)?;
    let m = lam as usize;
    let mut rep = report("down", t, eta, lam, m, &window);
    let typer = th.typer(m);
    let mut cur = t.clone();
    while !window.contains(cur.size() as u64) {
        let (next, step) = step_shrink_with(&cur, m, th, &typer)?;
        if TowerNum::from(next.size() as u64) < window.low() {
            return Err(ElsError::WindowTooNarrow {
                window: window.to_string(),
                delta: step.delta.unsigned_abs() as usize,
                from: cur.size(),
                to: next.size(),
            });
        }
        rep.steps.push(step);
        cur = next;
    }
    rep.output_size = cur.size();
    Ok((cur, rep))
}

/// Grow one duplicate at a time until the size lies in scale `lam` of `f`.
pub fn els_up(t: &Tree, lam: u64, f: &ScaleSpec, th: &Thresholds) -> Result<(Tree, ElsReport), ElsError> {
    let eta = f.scale_of(t.size() as u64)?;
    if lam < eta {
        return Err(ElsError::Precondition(format!("target scale {lam} below the input scale {eta}")));
    }
    let window = f.window(lam)?;
    let m = eta as usize;
    let mut rep = report("up", t, eta, lam, m, &window);
    let typer = th.typer(m);
    let mut cur = t.clone();
    while !window.contains(cur.size() as u64) {
        let (next, step) = grow_with(&cur, m, 1, th, &typer)?;
        if window.upto.as_ref().is_some_and(|u| TowerNum::from(next.size() as u64) > *u) {
            return Err(ElsError::WindowTooNarrow {
                window: window.to_string(),
                delta: step.delta as usize,
                from: cur.size(),
                to: next.size(),
            });
        }
        rep.steps.push(step);
        cur = next;
    }
    rep.output_size = cur.size();
    Ok((cur, rep))
}

/// Shrink the flattened model at rank m + q0 and reinterpret the surviving
/// leaves. The returned model keeps the original vertex ids.
pub fn graph_shrink(tm: &TreeModel, m: usize, th: &Thresholds) -> Result<(Graph, TreeModel), ElsError> {
    let rep = treemodel::validate(tm);
    if !rep.ok() {
        return Err(ModelError::Invalid(rep).into());
    }
    let (flat, index) = treemodel::flatten_indexed(tm)?;
    let rank = m + treemodel::interpretation_rank(tm.r, tm.p, tm.d);
    let small = shrink(&flat, rank, th)?;
    let emb = is_leaf_hereditary_subtree(&small, &flat).expect("shrink output embeds into its input");
    let keep: BTreeSet<Path> = emb.into_iter().map(|(_, canon)| index[&canon].clone()).collect();
    let sub = treemodel::submodel(tm, &keep);
    let h = treemodel::materialize(&sub)?;
    Ok((h, sub))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatReport {
    pub tree: Option<Tree>,
    pub searched: usize,
    /// max_size reaches the small-model bound, so `None` means unsatisfiable.
    pub complete: bool,
    pub bound: TowerNum,
}

/// First enumerated tree of T_{d,p} with at most `max_size` nodes satisfying `phi`.
pub fn sat_search(phi: &Formula, d: usize, p: u32, max_size: usize) -> Result<SatReport, ElsError> {
    let bound = Bounds::default().zeta(d as u32, p as u64, phi.rank() as u64, d as u32);
    let complete = TowerNum::from(max_size as u64) >= bound;
    let trees = enumerate_trees(d, p, max_size);
    for (i, t) in trees.iter().enumerate() {
        if holds(&Structure::from_tree(t)?, phi)? {
            return Ok(SatReport { tree: Some(t.clone()), searched: i + 1, complete, bound });
        }
    }
    Ok(SatReport { tree: None, searched: trees.len(), complete, bound })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub m: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub links: Vec<Link>,
    pub to_last: Vec<Link>,
    pub ok: bool,
}

impl ChainReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.links.iter().find(|l| !l.ok).map(|l| l.from)
    }
}

/// t_i ≼_{m_i} t_{i+1} for each link, and t_i ≼_{m_i} t_last for each i.
pub fn chain_check(trees: &[Tree], ms: &[usize], th: &Thresholds) -> Result<ChainReport, ElsError> {
    if trees.len() < 2 || trees.len() != ms.len() + 1 {
        return Err(ElsError::Precondition(format!("{} trees need {} ranks, got {}", trees.len(), trees.len().saturating_sub(1), ms.len())));
    }
    if ms.windows(2).any(|w| w[0] > w[1]) {
        return Err(ElsError::Precondition("ranks must be nondecreasing".into()));
    }
    let mut typers: BTreeMap<usize, Typer> = BTreeMap::new();
    let last = trees.len() - 1;
    let mut links = Vec::new();
    let mut to_last = Vec::new();
    for (i, &m) in ms.iter().enumerate() {
        let typer = typers.entry(m).or_insert_with(|| th.typer(m));
        let ok = preceq_with(&trees[i], &trees[i + 1], m, th, typer)?;
        links.push(Link { from: i, to: i + 1, m, ok });
        let ok = preceq_with(&trees[i], &trees[last], m, th, typer)?;
        to_last.push(Link { from: i, to: last, m, ok });
    }
    let ok = links.iter().chain(&to_last).all(|l| l.ok);
    Ok(ChainReport { links, to_last, ok })
}

/// The class keys of a node's children, for reporting.
pub fn child_classes(t: &Tree, m: usize, th: &Thresholds) -> Result<Vec<(ClassKey, usize)>, ElsError> {
    let typer = th.typer(m);
    Ok(typer.classes(t.children())?.into_iter().map(|(k, v)| (k, v.len())).collect())
}
