//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when a
//! criterion fails for any reason other than the known tree-to-forest gap.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use shrubkit::bounds::{self, tower, tower_cmp, Bounds, ScaleSpec, TowerNum};
use shrubkit::els::{self, ElsError, Thresholds};
use shrubkit::io;
use shrubkit::logic::{fo_equiv, holds, monadic_fo_equiv, mso_type, Budget, Formula, Structure, TypeArena, TypeId};
use shrubkit::par::Exec;
use shrubkit::structures::{
    enumerate_trees, forest_of, is_leaf_hereditary_subtree, Forest, MonadicStructure, Tree,
};
use shrubkit::treemodel::{self, vertex_id, ModelNode, TreeModel};
use shrubkit::typesys::{calibrate_cap_with, index_census_with};

use common::*;

const MONADIC_LIMIT: Duration = Duration::from_secs(120);
const SHRINK_LIMIT: Duration = Duration::from_secs(600);
const ELS_RUN_LIMIT: Duration = Duration::from_secs(5);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle(arena: &TypeArena, t: &Tree, m: usize) -> TypeId {
    mso_type(arena, &Structure::from_tree(t).unwrap(), m, Budget::default()).unwrap()
}

/// Calibrated practical thresholds for T_{2,2}.
fn calibrated(m: usize) -> Thresholds {
    let cap = calibrate_cap_with(2, 2, m, 8, Exec::Parallel, Budget::default()).unwrap().cap;
    Thresholds::practical(cap)
}

fn c1_monadic_oracle() -> Outcome {
    let start = Instant::now();
    let mut shapes: Vec<Vec<usize>> = (1..=8).map(|n| vec![n]).collect();
    for a in 0..=8 {
        for b in 0..=8 - a {
            if a + b > 0 {
                shapes.push(vec![a, b]);
            }
        }
    }
    let mut checked = 0;
    let mut bad = Vec::new();
    for x in &shapes {
        for y in shapes.iter().filter(|y| y.len() == x.len()) {
            let (a, b) = (MonadicStructure::numbered(x), MonadicStructure::numbered(y));
            let (sa, sb) = (Structure::from_monadic(&a).unwrap(), Structure::from_monadic(&b).unwrap());
            for q in 0..=4 {
                checked += 1;
                let fast = monadic_fo_equiv(&a, &b, q).unwrap();
                let slow = fo_equiv(&sa, &sb, q, Budget::default()).unwrap();
                if fast != slow {
                    bad.push(format!("{x:?}/{y:?} q={q}"));
                }
            }
        }
    }
    let took = start.elapsed();
    outcome(
        bad.is_empty() && took < MONADIC_LIMIT,
        format!("{checked} comparisons, {} disagreements {:?}, {took:.1?} (limit {MONADIC_LIMIT:?})", bad.len(), bad.first()),
    )
}

fn model_corpus() -> Vec<TreeModel> {
    let mut rng = rng(7);
    let mut out = Vec::new();
    while out.len() < 240 {
        let tm = random_model(&mut rng, 6);
        let leaves = treemodel::materialize(&tm).unwrap().order();
        if leaves <= 6 && treemodel::validate(&tm).ok() {
            out.push(tm);
        }
    }
    out
}

fn c2_interpretation(corpus: &[TreeModel]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for tm in corpus {
        let g = Structure::from_graph(&treemodel::materialize(tm).unwrap()).unwrap();
        let t = Structure::from_tree(&treemodel::flatten(tm).unwrap()).unwrap();
        for phi in graph_corpus(tm.p) {
            let psi = treemodel::interpret_formula(&phi, &tm.signature, tm.r, tm.p, tm.d).unwrap();
            checked += 1;
            if holds(&g, &phi).unwrap() != holds(&t, &psi).unwrap() {
                bad.push(phi.to_string());
            }
        }
    }
    outcome(bad.is_empty(), format!("{} models, {checked} model/formula checks, {} failures", corpus.len(), bad.len()))
}

fn leaf_paths(node: &ModelNode, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    match node {
        ModelNode::Leaf { .. } => out.push(path.clone()),
        ModelNode::Internal(cs) => {
            for (k, c) in cs.iter().enumerate() {
                path.push(k);
                leaf_paths(c, path, out);
                path.pop();
            }
        }
    }
}

fn c3_leaf_hereditary(corpus: &[TreeModel]) -> Outcome {
    let mut rng = rng(11);
    let mut checked = 0;
    let mut bad = 0;
    for tm in corpus {
        let g = treemodel::materialize(tm).unwrap();
        let mut leaves = Vec::new();
        leaf_paths(&tm.tree, &mut Vec::new(), &mut leaves);
        for _ in 0..4 {
            let kept: Vec<&Vec<usize>> = leaves.iter().filter(|_| rng.gen_bool(0.6)).collect();
            if kept.is_empty() {
                continue;
            }
            let mut keep = BTreeSet::new();
            for leaf in &kept {
                for k in 1..=leaf.len() {
                    keep.insert(leaf[..k].to_vec());
                }
            }
            let sub = treemodel::submodel(tm, &keep);
            if !treemodel::validate(&sub).ok() {
                continue;
            }
            checked += 1;
            let ids: BTreeSet<String> = kept.iter().map(|p| vertex_id(p)).collect();
            if treemodel::materialize(&sub).unwrap() != g.induced_subgraph(&ids).unwrap() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0 && checked > 0, format!("{checked} submodels, {bad} identifier-level mismatches"))
}

fn c4_shrink(trees: &[Tree], th: &[Thresholds; 2]) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    for m in 1..=2 {
        let arena = TypeArena::new();
        for t in trees {
            let s = els::shrink(t, m, &th[m - 1]).unwrap();
            checked += 1;
            let ok = is_leaf_hereditary_subtree(&s, t).is_some()
                && s.height() == t.height()
                && els::preceq(&s, t, m, &th[m - 1]).unwrap()
                && oracle(&arena, &s, m) == oracle(&arena, t, m);
            if !ok {
                bad.push(format!("m={m} {t}"));
            }
        }
    }
    let took = start.elapsed();
    outcome(
        bad.is_empty() && took < SHRINK_LIMIT,
        format!("{checked} shrinks, {} failures {:?}, {took:.1?} (limit {SHRINK_LIMIT:?})", bad.len(), bad.first()),
    )
}

fn c5_grow(trees: &[Tree], th: &[Thresholds; 2]) -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    let mut bad = Vec::new();
    for m in 1..=2 {
        let arena = TypeArena::new();
        for t in trees {
            for k in 1..=3 {
                match els::grow(t, m, k, &th[m - 1]) {
                    Ok((g, _)) => {
                        checked += 1;
                        if !(els::preceq(t, &g, m, &th[m - 1]).unwrap() && oracle(&arena, t, m) == oracle(&arena, &g, m)) {
                            bad.push(format!("m={m} k={k} {t}"));
                        }
                    }
                    Err(ElsError::NoEligibleClass(_)) => skipped += 1,
                    Err(e) => bad.push(format!("m={m} k={k} {t}: {e}")),
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} grows, {skipped} inputs without a class of size >= q, {} failures {:?}", bad.len(), bad.first()),
    )
}

fn c6_preceq_laws(th: &[Thresholds; 2]) -> Outcome {
    let trees = enumerate_trees(2, 2, 6);
    let n = trees.len();
    let mut rel: Vec<Vec<Vec<bool>>> = Vec::new();
    for m in 1..=2 {
        rel.push(trees.iter().map(|a| trees.iter().map(|b| els::preceq(a, b, m, &th[m - 1]).unwrap()).collect()).collect());
    }
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut related = 0;
    for m in 0..2 {
        let arena = TypeArena::new();
        let types: Vec<TypeId> = trees.iter().map(|t| oracle(&arena, t, m + 1)).collect();
        for a in 0..n {
            if !rel[m][a][a] {
                *failures.entry("reflexivity").or_default() += 1;
            }
            for b in 0..n {
                if !rel[m][a][b] {
                    continue;
                }
                related += 1;
                if types[a] != types[b] {
                    *failures.entry("implies equivalence").or_default() += 1;
                }
                if m == 1 && !rel[0][a][b] {
                    *failures.entry("monotonicity").or_default() += 1;
                }
                for c in 0..n {
                    if rel[m][b][c] && !rel[m][a][c] {
                        *failures.entry("transitivity").or_default() += 1;
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{n} trees, {related} related pairs over m=1,2, failures {failures:?}"))
}

fn forest_structure(trees: &[Tree]) -> Structure {
    Structure::from_forest(&Forest::new(2, trees.to_vec()).unwrap()).unwrap()
}

fn c7_tree_forest() -> Outcome {
    // transfer, both directions, same root label
    let trees = enumerate_trees(2, 2, 5);
    let (mut to_forest, mut to_tree, mut example) = (0, 0, None);
    for m in 1..=2 {
        let arena = TypeArena::new();
        let tt: Vec<TypeId> = trees.iter().map(|t| oracle(&arena, t, m)).collect();
        let ft: Vec<TypeId> = trees
            .iter()
            .map(|t| mso_type(&arena, &Structure::from_forest(&forest_of(t)).unwrap(), m, Budget::default()).unwrap())
            .collect();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                if trees[i].label() != trees[j].label() {
                    continue;
                }
                if tt[i] == tt[j] && ft[i] != ft[j] {
                    to_forest += 1;
                    example.get_or_insert(format!("m={m}: {} vs {}", trees[i], trees[j]));
                }
                if ft[i] == ft[j] && tt[i] != tt[j] {
                    to_tree += 1;
                }
            }
        }
    }
    // composition over families of at most three trees of size at most four
    let small = enumerate_trees(3, 2, 4);
    let mut fv = 0;
    let mut families = 0;
    for m in 1..=2 {
        let arena = TypeArena::new();
        let cls: Vec<TypeId> = small.iter().map(|t| oracle(&arena, t, m)).collect();
        let mut seen: HashMap<Vec<TypeId>, TypeId> = HashMap::new();
        let mut visit = |idx: &[usize]| {
            let mut key: Vec<TypeId> = idx.iter().map(|&i| cls[i]).collect();
            key.sort();
            let members: Vec<Tree> = idx.iter().map(|&i| small[i].clone()).collect();
            let ty = mso_type(&arena, &forest_structure(&members), m, Budget::default()).unwrap();
            families += 1;
            if *seen.entry(key).or_insert(ty) != ty {
                fv += 1;
            }
        };
        let n = small.len();
        for a in 0..n {
            visit(&[a]);
            for b in a..n {
                visit(&[a, b]);
                for c in b..n {
                    visit(&[a, b, c]);
                }
            }
        }
    }
    let detail = format!(
        "forest=>tree failures {to_tree}; composition failures {fv} over {families} families; \
         tree=>forest failures {to_forest} (first {}), root-marked forests separate trees whose root cannot be told apart",
        example.unwrap_or_default()
    );
    outcome(to_forest == 0 && to_tree == 0 && fv == 0, detail)
}

/// Criterion 7 is expected to fail only through the tree-to-forest direction.
fn c7_known_gap(o: &Outcome) -> bool {
    o.detail.starts_with("forest=>tree failures 0; composition failures 0 ")
}

fn c8_exact_numbers() -> Outcome {
    let mut bad = Vec::new();
    for p in 1..=3u32 {
        for m in 1..=2 {
            let got = index_census_with(0, p, m, 3, Exec::Parallel, Budget::default()).unwrap();
            if got != p as usize {
                bad.push(format!("census(0,{p},{m})={got}"));
            }
        }
    }
    for n in 0..5u64 {
        if tower(0, &TowerNum::from(n)) != TowerNum::from(n) {
            bad.push(format!("tower(0,{n})"));
        }
    }
    if tower(2, &TowerNum::from(3u64)).as_exact().map(|v| v.to_string()) != Some("256".into()) {
        bad.push("tower(2,3)".into());
    }
    for (d, want) in [(0, 1u32), (1, 28), (2, 784)] {
        if bounds::g(d) != want.into() {
            bad.push(format!("g({d})"));
        }
    }
    let b = Bounds::default();
    let mut inequalities = 0;
    for d in 1..=3 {
        for p in 1..=3 {
            for lam in 2..=5 {
                // sufficient form: ϑ(λ) ≥ 2·max(ϑ(λ−1), ξ_{d−1}(λ−1)), the max picked by tower_cmp
                let lhs = b.theta(d, p, lam);
                let (x, y) = (b.theta(d, p, lam - 1), b.xi(d - 1, p, lam - 1));
                let big = if tower_cmp(&x, &y).is_ge() { x } else { y };
                let by_cmp = bounds::ge_scaled(&lhs, &big, 2) == Some(true);
                inequalities += 1;
                if b.check_scale_inequality(d, p, lam).ok() != Some(true) || !by_cmp {
                    bad.push(format!("inequality d={d} p={p} lambda={lam}"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("census, tower, g and {inequalities} scale inequalities; mismatches {bad:?}"))
}

fn els_input(rng: &mut rand_chacha::ChaCha8Rng, lo: usize, hi: usize) -> Tree {
    loop {
        let p = rng.gen_range(1..=2);
        let t = random_tree(rng, 2, p, 7);
        if (lo..=hi).contains(&t.size()) {
            return t;
        }
    }
}

fn c9_els(th: &[Thresholds; 2]) -> Outcome {
    let f = ScaleSpec::explicit(vec![2, 5, 11, 23]).unwrap();
    let mut rng = rng(19);
    let arena = [TypeArena::new(), TypeArena::new()];
    let (mut runs, mut slowest) = (0, Duration::ZERO);
    let mut bad = Vec::new();
    let mut check = |dir: &str, t: &Tree, lam: u64, res: Result<(Tree, els::ElsReport), ElsError>, took: Duration| {
        runs += 1;
        slowest = slowest.max(took);
        let (out, rep) = match res {
            Ok(r) => r,
            Err(e) => return bad.push(format!("{dir} {t} -> {lam}: {e}")),
        };
        let m = rep.rank;
        let (small, large) = if dir == "down" { (&out, t) } else { (t, &out) };
        let ok = f.window(lam).unwrap().contains(out.size() as u64)
            && els::preceq(small, large, m, &th[m - 1]).unwrap()
            && oracle(&arena[m - 1], small, m) == oracle(&arena[m - 1], large, m)
            && rep.total_delta() == out.size() as i64 - t.size() as i64
            && took < ELS_RUN_LIMIT;
        if !ok {
            bad.push(format!("{dir} {t} -> {lam}"));
        }
    };
    for _ in 0..50 {
        let t = els_input(&mut rng, 6, 23);
        let eta = f.scale_of(t.size() as u64).unwrap();
        let lam = rng.gen_range(1..eta);
        let start = Instant::now();
        let res = els::els_down(&t, lam, &f, &th[lam as usize - 1]);
        check("down", &t, lam, res, start.elapsed());
    }
    for _ in 0..50 {
        let t = els_input(&mut rng, 3, 11);
        let eta = f.scale_of(t.size() as u64).unwrap();
        let lam = rng.gen_range(eta + 1..=4);
        let start = Instant::now();
        let res = els::els_up(&t, lam, &f, &th[eta as usize - 1]);
        check("up", &t, lam, res, start.elapsed());
    }
    outcome(
        bad.is_empty(),
        format!("{runs} runs on scale [2,5,11,23], slowest {slowest:.1?} (limit {ELS_RUN_LIMIT:?}), failures {} {:?}", bad.len(), bad.first()),
    )
}

/// All trees on n nodes as parent arrays, root 0, labels in 1..=p, height ≤ d.
fn brute_force_min(phi: &Formula, d: usize, p: u32, max: usize) -> Option<usize> {
    fn build(p: u32, v: usize, parent: &[usize], labels: &[u32]) -> Tree {
        let kids = (1..parent.len()).filter(|&c| parent[c] == v).map(|c| build(p, c, parent, labels)).collect();
        Tree::new(p, labels[v], kids).unwrap()
    }
    for n in 1..=max {
        let mut parent = vec![0usize; n];
        loop {
            let depth_ok = (1..n).all(|mut v| {
                let mut k = 0;
                while v != 0 {
                    v = parent[v];
                    k += 1;
                }
                k <= d
            });
            if depth_ok {
                let mut labels = vec![1u32; n];
                loop {
                    let t = build(p, 0, &parent, &labels);
                    if holds(&Structure::from_tree(&t).unwrap(), phi).unwrap() {
                        return Some(n);
                    }
                    let Some(i) = (0..n).find(|&i| labels[i] < p) else { break };
                    labels[i] += 1;
                    labels[..i].iter_mut().for_each(|l| *l = 1);
                }
            }
            let Some(i) = (1..n).find(|&i| parent[i] + 1 < i) else { break };
            parent[i] += 1;
            parent[1..i].iter_mut().for_each(|x| *x = 0);
        }
    }
    None
}

const SAT_CORPUS: &[(&str, usize, u32)] = &[
    ("(exists1 x (P 2 x))", 2, 2),
    ("(exists1 x (exists1 y (E x y)))", 2, 1),
    ("(exists1 x (and (root x) (P 1 x) (exists1 y (and (E x y) (P 2 y)))))", 2, 2),
    ("(exists1 x (exists1 y (and (not (= x y)) (not (root x)) (not (root y)))))", 2, 1),
    ("(exists1 w (exists1 x (exists1 y (exists1 z (and (root w) (E w x) (E w y) (E w z) (not (= x y)) (not (= y z)) (not (= x z)))))))", 2, 1),
    ("(exists1 x (exists1 y (exists1 z (and (root x) (E x y) (E y z) (not (= x z))))))", 2, 1),
    ("(exists1 x (exists1 y (exists1 z (and (root x) (E x y) (E y z) (not (= x z)) (P 1 y) (P 2 z)))))", 2, 2),
    ("(and (forall1 x (P 1 x)) (exists1 x (not (root x))))", 2, 2),
    ("(and (forall1 x (or (root x) (P 2 x))) (exists1 x (not (root x))))", 2, 2),
    ("(exists1 x (and (root x) (P 2 x) (exists1 y (and (E x y) (P 2 y))) (exists1 y (and (E x y) (P 1 y)))))", 2, 2),
    ("(exists2 X (exists1 x (exists1 y (and (in x X) (not (in y X)) (E x y)))))", 2, 1),
    ("(exists1 x (exists1 y (exists1 z (and (E x y) (E x z) (not (= y z)) (P 2 y) (P 2 z)))))", 2, 2),
    ("(exists1 a (exists1 b (exists1 c (exists1 e (and (root a) (E a b) (E b c) (E c e) (not (= a c)) (not (= b e)))))))", 3, 1),
    ("(exists1 x (exists1 y (and (not (root x)) (not (root y)) (P 1 x) (P 2 y))))", 2, 2),
    ("(and (exists1 x (and (root x) (P 1 x))) (forall1 x (or (root x) (P 2 x))) (exists1 y (not (root y))))", 2, 2),
    ("(exists1 x (exists1 y (and (not (= x y)) (not (E x y)) (P 2 x) (P 2 y))))", 2, 2),
    ("(exists1 x (forall1 y (not (E x y))))", 2, 1),
    ("(exists1 x (and (root x) (exists1 y (E x y)) (forall1 y (forall1 z (implies (and (E x y) (E x z)) (= y z))))))", 2, 1),
    ("(exists1 w (exists1 x (exists1 y (exists1 z (and (root w) (E w x) (E x y) (E x z) (not (= y z)) (not (= y w)) (not (= z w)))))))", 2, 1),
    ("(exists2 X (and (forall1 x (implies (root x) (in x X))) (exists1 y (and (P 2 y) (in y X) (not (root y))))))", 2, 2),
];

fn c10_sat() -> Outcome {
    let mut bad = Vec::new();
    let mut sizes = Vec::new();
    for (text, d, p) in SAT_CORPUS {
        let phi = Formula::parse(text).unwrap();
        let want = brute_force_min(&phi, *d, *p, 6);
        let rep = els::sat_search(&phi, *d, *p, 6).unwrap();
        let got = rep.tree.as_ref().map(Tree::size);
        let sound = rep.tree.as_ref().is_none_or(|t| holds(&Structure::from_tree(t).unwrap(), &phi).unwrap());
        sizes.push(got.unwrap_or(0));
        if want.is_none() || got != want || !sound {
            bad.push(format!("{text}: got {got:?}, brute force {want:?}"));
        }
    }
    outcome(bad.is_empty(), format!("{} formulas, minimal sizes {sizes:?}, mismatches {bad:?}", SAT_CORPUS.len()))
}

fn c11_cli() -> Outcome {
    let dir = std::env::temp_dir().join(format!("shrubkit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, body: String| -> String {
        let path: PathBuf = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path.to_string_lossy().into_owned()
    };
    let star3 = write("star3.json", io::tree_to_value(&Tree::star(1, 1, 3).unwrap()).to_string());
    let star4 = write("star4.json", io::tree_to_value(&Tree::star(1, 1, 4).unwrap()).to_string());
    let big = write(
        "big.json",
        io::tree_to_value(&node(2, 1, vec![Tree::star(2, 2, 3).unwrap(), Tree::star(2, 2, 3).unwrap(), Tree::star(2, 1, 2).unwrap()]))
            .to_string(),
    );
    let model = write("model.json", io::model_to_value(&model_corpus()[3]).to_string());
    let phi = write("phi.sexp", "(exists1 x (exists1 y (E x y)))".into());
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", &model],
        vec!["materialize", &model],
        vec!["materialize", &model, "--dot"],
        vec!["flatten", &model],
        vec!["interpret", &model, &phi, "--check"],
        vec!["equiv", "--m", "1", &star3, &star4],
        vec!["equiv", "--m", "2", &star3, &big],
        vec!["type", &big, "--m", "2"],
        vec!["type", &big, "--m", "1", "--oracle"],
        vec!["census", "--d", "2", "--p", "1", "--m", "2", "--max-size", "6", "--jobs", "2"],
        vec!["calibrate", "--d", "2", "--p", "2", "--m", "1", "--max-size", "6"],
        vec!["shrink", &big, "--m", "1", "--q", "1", "--verify"],
        vec!["grow", &big, "--m", "2", "--k", "2", "--verify"],
        vec!["preceq", &star3, &star4, "--m", "1"],
        vec!["els", &big, "--direction", "down", "--lambda", "1", "--scale", "2,5,11,23", "--q", "1", "--verify"],
        vec!["els", &star3, "--direction", "up", "--lambda", "2", "--scale", "2,5,11,23", "--q", "1"],
        vec!["sat", &phi, "--d", "2", "--p", "1", "--max-size", "4"],
        vec!["bounds", "--fn", "chi", "--d", "1", "--p", "1", "--m", "1"],
        vec!["bounds", "--fn", "upsilon", "--r", "1", "--p", "1", "--d", "1", "--i", "2"],
        vec!["chain-check", &star3, &star4, &big, "--ms", "1,1"],
        vec!["equiv", "--m", "1", &star3, "--bogus"],
    ];
    let exe = env!("CARGO_BIN_EXE_shrubkit");
    let mut bad = Vec::new();
    for args in &commands {
        let run = || Command::new(exe).args(args).output().unwrap();
        let (a, b) = (run(), run());
        if a.stdout != b.stdout || a.stderr != b.stderr || a.status.code() != b.status.code() {
            bad.push(args[0].to_string());
        }
    }
    let spec_line = Command::new(exe).args(["equiv", "--m", "1", &star3, &star4]).output().unwrap();
    let exact = String::from_utf8_lossy(&spec_line.stdout).trim() == r#"{"equivalent":true,"m":1}"#
        && spec_line.status.code() == Some(0);
    std::fs::remove_dir_all(&dir).ok();
    outcome(
        bad.is_empty() && exact,
        format!("{} invocations run twice, {} differ {bad:?}, equiv output exact: {exact}", commands.len(), bad.len()),
    )
}

fn main() {
    let th = [calibrated(1), calibrated(2)];
    let corpus = model_corpus();
    let t22 = enumerate_trees(2, 2, 8);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("monadic oracle soundness", Box::new(c1_monadic_oracle)),
        ("interpretation fidelity", Box::new(|| c2_interpretation(&corpus))),
        ("leaf-hereditary transfer", Box::new(|| c3_leaf_hereditary(&corpus))),
        ("shrink correctness", Box::new(|| c4_shrink(&t22, &th))),
        ("grow correctness", Box::new(|| c5_grow(&t22, &th))),
        ("preceq laws", Box::new(|| c6_preceq_laws(&th))),
        ("tree/forest transfer and composition", Box::new(c7_tree_forest)),
        ("exact numbers", Box::new(c8_exact_numbers)),
        ("els drivers", Box::new(|| c9_els(&th))),
        ("sat_search", Box::new(c10_sat)),
        ("cli determinism", Box::new(c11_cli)),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.1?}]", i + 1, o.detail, start.elapsed());
        if o.pass {
            passed += 1;
        } else if !(i + 1 == 7 && c7_known_gap(&o)) {
            unexpected += 1;
        }
    }
    println!("{passed}/{} criteria pass, {unexpected} unexpected failures", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
