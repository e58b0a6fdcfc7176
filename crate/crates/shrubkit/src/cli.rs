//! Command-line front end. `run` returns the exit code and the text to print:
//! 0 success or true, 1 negative answer, 2 usage or validation error, 3 oracle
//! budget exceeded.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{Bounds, BoundsError, ScaleSpec};
use crate::els::{self, ElsError, Thresholds};
use crate::io::{self, IoError};
use crate::logic::{fo_equiv, holds, mso_equiv, Budget, Formula, LogicError, Structure};
use crate::par::{self, Exec};
use crate::structures::{enumerate_trees, Tree};
use crate::treemodel::{self, ModelError, TreeModel};
use crate::typesys::{self, CapPolicy, ClassKey, Classifier, TypeIndicator, Typer, TypesysError};

#[derive(Parser)]
#[command(name = "shrubkit", version, about = "Tree models, MSO type oracles and type-preserving tree surgery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct ThresholdArgs {
    /// Practical indicator rank (also the per-class keep count)
    #[arg(long)]
    q: Option<usize>,
    /// Practical child cap for heavy nodes (defaults to q)
    #[arg(long)]
    cap: Option<usize>,
    /// Exact thresholds (saturated tower values)
    #[arg(long, conflicts_with_all = ["q", "cap"])]
    paper: bool,
    /// Classify children with the oracle instead of fingerprints
    #[arg(long)]
    oracle_classes: bool,
}

#[derive(Args, Clone, Copy)]
struct ElsThresholdArgs {
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, conflicts_with_all = ["q", "cap"])]
    paper_thresholds: bool,
    #[arg(long)]
    oracle_classes: bool,
}

#[derive(Args, Clone, Copy)]
struct SweepArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    max_size: usize,
    /// Run the sweep on N worker threads
    #[arg(long)]
    jobs: Option<usize>,
    /// Ignore --jobs and stay on the calling thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Down,
    Up,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundFn {
    Tower,
    G,
    Xi,
    Chi,
    Rho,
    RhoNoC0,
    Zeta,
    Theta,
    Upsilon,
    H,
    Q0,
    Check,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a tree model and list every violated condition
    Validate {
        model: PathBuf,
        #[arg(long)]
        symmetrize: bool,
    },
    /// Graph defined by a tree model
    Materialize {
        model: PathBuf,
        #[arg(long)]
        symmetrize: bool,
        #[arg(long)]
        dot: bool,
    },
    /// Tree model as a plain labeled tree
    Flatten {
        model: PathBuf,
        #[arg(long)]
        symmetrize: bool,
    },
    /// Translate a graph formula (inline s-expression or file) to the tree side
    Interpret {
        model: PathBuf,
        formula: String,
        #[arg(long)]
        symmetrize: bool,
        /// Also evaluate both sides
        #[arg(long)]
        check: bool,
        #[arg(long)]
        text: bool,
    },
    /// MSO[m] (or FO[m]) equivalence of two trees or two graphs
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        fo: bool,
    },
    /// Class of a tree and the type indicator of its children
    Type {
        tree: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, conflicts_with = "cap")]
        paper: bool,
        #[arg(long, conflicts_with_all = ["cap", "paper"])]
        oracle: bool,
    },
    /// Number of MSO[m] classes among enumerated trees
    Census {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Smallest sound fingerprint cap against the oracle
    Calibrate {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Remove surplus children until no node is over its cap
    Shrink {
        tree: PathBuf,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        th: ThresholdArgs,
        #[arg(long)]
        verify: bool,
    },
    /// Add k copies of a child class without changing the MSO[m] type
    Grow {
        tree: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        th: ThresholdArgs,
        #[arg(long)]
        verify: bool,
    },
    /// Decide t1 ≼_m t2
    Preceq {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        th: ThresholdArgs,
    },
    /// Move a tree into a target scale window
    Els {
        tree: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        lambda: u64,
        /// Explicit boundaries, e.g. 2,5,11,23
        #[arg(long, conflicts_with = "paper")]
        scale: Option<String>,
        /// Use the tower-valued scale for the tree's height and alphabet
        #[arg(long)]
        paper: bool,
        #[command(flatten)]
        th: ElsThresholdArgs,
        #[arg(long)]
        verify: bool,
    },
    /// Smallest enumerated tree satisfying a sentence
    Sat {
        formula: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        max_size: usize,
    },
    /// Evaluate a bound function
    Bounds {
        #[arg(long = "fn", value_enum)]
        func: BoundFn,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        n1: Option<u64>,
        #[arg(long)]
        n2: Option<u32>,
        #[arg(long)]
        h: Option<u32>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long)]
        i: Option<u64>,
        #[arg(long)]
        budget_digits: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Check t_i ≼_{m_i} t_{i+1} along a chain and against the last tree
    ChainCheck {
        #[arg(required = true, num_args = 2..)]
        trees: Vec<PathBuf>,
        /// Comma-separated nondecreasing ranks, one per link
        #[arg(long)]
        ms: String,
        #[command(flatten)]
        th: ThresholdArgs,
    },
}

enum Failure {
    Negative(String),
    Usage(String),
    Budget(String),
}

impl From<LogicError> for Failure {
    fn from(e: LogicError) -> Self {
        match e {
            LogicError::BudgetExceeded(_) | LogicError::TooLarge { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Logic(l) => l.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<TypesysError> for Failure {
    fn from(e: TypesysError) -> Self {
        match e {
            TypesysError::Logic(l) => l.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ElsError> for Failure {
    fn from(e: ElsError) -> Self {
        match e {
            ElsError::Logic(l) => l.into(),
            ElsError::Model(m) => m.into(),
            ElsError::NoHeavyNode | ElsError::NoEligibleClass(_) | ElsError::WindowTooNarrow { .. } => {
                Failure::Negative(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Out = Result<(i32, String), Failure>;

fn ok(v: Value) -> Out {
    Ok((0, v.to_string()))
}

fn verdict(positive: bool, v: Value) -> Out {
    Ok((if positive { 0 } else { 1 }, v.to_string()))
}

fn read(path: &FsPath) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json(path: &FsPath) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_tree(path: &FsPath) -> Result<Tree, Failure> {
    Ok(io::tree_from_value(read_json(path)?)?)
}

fn load_model(path: &FsPath, symmetrize: bool) -> Result<TreeModel, Failure> {
    let mut tm = io::model_from_value(read_json(path)?)?;
    if symmetrize {
        tm.signature = treemodel::symmetrize(&tm.signature);
    }
    Ok(tm)
}

/// Inline s-expression when it starts with '(', otherwise a file holding one.
fn load_formula(arg: &str) -> Result<Formula, Failure> {
    let text = if arg.trim_start().starts_with('(') { arg.to_string() } else { read(FsPath::new(arg))? };
    Ok(Formula::parse(&text)?)
}

fn load_structure(path: &FsPath) -> Result<Structure, Failure> {
    let v = read_json(path)?;
    if v.get("vertices").is_some() {
        Ok(Structure::from_graph(&io::graph_from_value(v)?)?)
    } else {
        Ok(Structure::from_tree(&io::tree_from_value(v)?)?)
    }
}

fn thresholds(q: Option<usize>, cap: Option<usize>, paper: bool, oracle: bool) -> Result<Thresholds, Failure> {
    let budget = Budget::from_env()?;
    let th = if paper {
        Thresholds::paper_exact()
    } else {
        let q = q.or(cap).unwrap_or(2);
        if q == 0 || cap == Some(0) {
            return Err(Failure::Usage("q and cap must be at least 1".into()));
        }
        Thresholds::practical(q).with_child_cap(cap.unwrap_or(q))
    };
    let th = if oracle { th.with_classifier(Classifier::Oracle) } else { th };
    Ok(th.with_budget(budget))
}

impl ThresholdArgs {
    fn build(self) -> Result<Thresholds, Failure> {
        thresholds(self.q, self.cap, self.paper, self.oracle_classes)
    }
}

impl ElsThresholdArgs {
    fn build(self) -> Result<Thresholds, Failure> {
        thresholds(self.q, self.cap, self.paper_thresholds, self.oracle_classes)
    }
}

fn exec_of(sweep: &SweepArgs) -> Exec {
    if sweep.jobs.is_some() && !sweep.sequential {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn in_pool<R: Send>(jobs: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) => par::with_threads(n, job),
        None => job(),
    }
}

fn key_text(typer: &Typer, key: &ClassKey) -> String {
    match key {
        ClassKey::Type(id) => typer.arena().digest(*id),
        other => other.to_string(),
    }
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{name} is required for this function")))
}

fn dispatch(cmd: Cmd) -> Out {
    match cmd {
        Cmd::Validate { model, symmetrize } => {
            let tm = load_model(&model, symmetrize)?;
            let rep = treemodel::validate(&tm);
            let violations: Vec<Value> = rep
                .violations
                .iter()
                .map(|v| json!({"kind": v.kind, "at": treemodel::vertex_id(&v.path), "detail": v.detail}))
                .collect();
            let out = json!({"ok": rep.ok(), "violations": violations});
            Ok((if rep.ok() { 0 } else { 2 }, out.to_string()))
        }
        Cmd::Materialize { model, symmetrize, dot } => {
            let g = treemodel::materialize(&load_model(&model, symmetrize)?)?;
            if dot {
                Ok((0, g.to_dot().trim_end().to_string()))
            } else {
                ok(io::graph_to_value(&g))
            }
        }
        Cmd::Flatten { model, symmetrize } => ok(io::tree_to_value(&treemodel::flatten(&load_model(&model, symmetrize)?)?)),
        Cmd::Interpret { model, formula, symmetrize, check, text } => {
            let tm = load_model(&model, symmetrize)?;
            let phi = load_formula(&formula)?;
            let psi = treemodel::interpret_formula(&phi, &tm.signature, tm.r, tm.p, tm.d)?;
            if text {
                return Ok((0, psi.to_string()));
            }
            let mut out = json!({"formula": psi.to_string(), "rank": psi.rank()});
            if check {
                let g = Structure::from_graph(&treemodel::materialize(&tm)?)?;
                let t = Structure::from_tree(&treemodel::flatten(&tm)?)?;
                let (a, b) = (holds(&g, &phi)?, holds(&t, &psi)?);
                out["graph"] = json!(a);
                out["tree"] = json!(b);
                return verdict(a == b, out);
            }
            ok(out)
        }
        Cmd::Equiv { a, b, m, fo } => {
            let (sa, sb) = (load_structure(&a)?, load_structure(&b)?);
            if sa.vocabulary() != sb.vocabulary() {
                return Err(Failure::Usage("both inputs must be trees or both graphs over the same p".into()));
            }
            let budget = Budget::from_env()?;
            let eq = if fo { fo_equiv(&sa, &sb, m, budget)? } else { mso_equiv(&sa, &sb, m, budget)? };
            let mut out = json!({"equivalent": eq, "m": m});
            if fo {
                out["logic"] = json!("fo");
            }
            verdict(eq, out)
        }
        Cmd::Type { tree, m, cap, paper, oracle } => {
            let t = load_tree(&tree)?;
            let classifier = if oracle {
                Classifier::Oracle
            } else if paper {
                Classifier::Fingerprint(CapPolicy::PaperExact)
            } else {
                Classifier::Fingerprint(CapPolicy::Practical(cap.unwrap_or(2).max(1)))
            };
            let typer = Typer::with_budget(classifier, m, Budget::from_env()?);
            let own = typer.key(&t)?;
            let ind = TypeIndicator::of(t.children(), &typer)?;
            let classes: Vec<Value> = ind
                .classes
                .iter()
                .map(|(k, n)| json!({"class": key_text(&typer, k), "count": n}))
                .collect();
            let name = match classifier {
                Classifier::Oracle => "oracle".to_string(),
                Classifier::Fingerprint(cp) => format!("fingerprint(cap={cp})"),
            };
            ok(json!({"m": m, "classifier": name, "class": key_text(&typer, &own), "indicator": classes, "children": ind.total}))
        }
        Cmd::Census { sweep } => {
            let budget = Budget::from_env()?;
            let n = in_pool(sweep.jobs, || {
                typesys::index_census_with(sweep.d, sweep.p, sweep.m, sweep.max_size, exec_of(&sweep), budget)
            })?;
            let trees = enumerate_trees(sweep.d, sweep.p, sweep.max_size).len();
            ok(json!({"d": sweep.d, "p": sweep.p, "m": sweep.m, "max_size": sweep.max_size, "trees": trees, "classes": n}))
        }
        Cmd::Calibrate { sweep } => {
            let budget = Budget::from_env()?;
            let r = in_pool(sweep.jobs, || {
                typesys::calibrate_cap_with(sweep.d, sweep.p, sweep.m, sweep.max_size, exec_of(&sweep), budget)
            })?;
            let witnesses: Vec<Value> = r
                .witnesses
                .iter()
                .map(|w| json!({"cap": w.cap, "left": w.left.to_string(), "right": w.right.to_string()}))
                .collect();
            ok(json!({
                "d": r.d, "p": r.p, "m": r.m, "max_size": r.max_size, "trees": r.trees,
                "classes": r.classes, "cap": r.cap, "complete": r.complete, "witnesses": witnesses,
            }))
        }
        Cmd::Shrink { tree, m, th, verify } => {
            let t = load_tree(&tree)?;
            let th = th.build()?;
            let s = els::shrink(&t, m, &th)?;
            let mut out = json!({"tree": io::tree_to_value(&s), "input_size": t.size(), "output_size": s.size()});
            if verify {
                out["verdicts"] = serde_json::to_value(els::verify_pair(&s, &t, m, &th)?).expect("plain data");
            }
            ok(out)
        }
        Cmd::Grow { tree, m, k, th, verify } => {
            let t = load_tree(&tree)?;
            let th = th.build()?;
            let (g, step) = els::grow(&t, m, k, &th)?;
            let mut out = json!({
                "tree": io::tree_to_value(&g), "input_size": t.size(), "output_size": g.size(),
                "step": serde_json::to_value(step).expect("plain data"),
            });
            if verify {
                out["verdicts"] = serde_json::to_value(els::verify_pair(&t, &g, m, &th)?).expect("plain data");
            }
            ok(out)
        }
        Cmd::Preceq { a, b, m, th } => {
            let v = els::preceq(&load_tree(&a)?, &load_tree(&b)?, m, &th.build()?)?;
            verdict(v, json!({"preceq": v, "m": m}))
        }
        Cmd::Els { tree, direction, lambda, scale, paper, th, verify } => {
            let t = load_tree(&tree)?;
            let th = th.build()?;
            let f = match (scale, paper) {
                (Some(s), false) => {
                    let list = s
                        .split(',')
                        .map(|x| x.trim().parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::Usage(format!("--scale: {e}")))?;
                    ScaleSpec::explicit(list)?
                }
                (None, true) => ScaleSpec::theta(t.height() as u32, t.p() as u64, Bounds::default()),
                _ => return Err(Failure::Usage("give exactly one of --scale or --paper".into())),
            };
            let (out_tree, mut rep) = match direction {
                Direction::Down => els::els_down(&t, lambda, &f, &th)?,
                Direction::Up => els::els_up(&t, lambda, &f, &th)?,
            };
            if verify {
                let (small, large) = match direction {
                    Direction::Down => (&out_tree, &t),
                    Direction::Up => (&t, &out_tree),
                };
                rep.verdicts = Some(els::verify_pair(small, large, rep.rank, &th)?);
            }
            ok(json!({"report": serde_json::to_value(&rep).expect("plain data"), "tree": io::tree_to_value(&out_tree)}))
        }
        Cmd::Sat { formula, d, p, max_size } => {
            let phi = load_formula(&formula)?;
            let r = els::sat_search(&phi, d, p, max_size)?;
            let out = json!({
                "found": r.tree.is_some(),
                "tree": r.tree.as_ref().map(io::tree_to_value),
                "size": r.tree.as_ref().map(Tree::size),
                "searched": r.searched,
                "complete": r.complete,
                "bound": r.bound.to_string(),
            });
            verdict(r.tree.is_some(), out)
        }
        Cmd::Bounds { func, d, p, m, r, n1, n2, h, n, lambda, i, budget_digits, json: as_json } => {
            let b = budget_digits.map_or_else(Bounds::default, Bounds::with_digits);
            let p_ = || need(p, "p");
            let text = match func {
                BoundFn::Tower => b.tower(need(h, "h")?, &need(n, "n")?.into()).to_string(),
                BoundFn::G => b.g(need(d, "d")?).to_string(),
                BoundFn::Xi => b.xi(need(d, "d")?, p_()?, need(m, "m")?).to_string(),
                BoundFn::Chi => b.chi(need(d, "d")?, p_()?, need(m, "m")?).to_string(),
                BoundFn::Rho => b.rho(need(d, "d")?, p_()?, need(m, "m")?).to_string(),
                BoundFn::RhoNoC0 => b.rho_without_c0(need(d, "d")?, p_()?, need(m, "m")?).to_string(),
                BoundFn::Zeta => b.zeta(need(d, "d")?, p_()?, need(n1, "n1")?, need(n2, "n2")?).to_string(),
                BoundFn::Theta => b.theta(need(d, "d")?, p_()?, need(lambda, "lambda")?).to_string(),
                BoundFn::Upsilon => {
                    let (r, p, d) = (need(r, "r")?, p_()?, need(d, "d")?);
                    let q0 = treemodel::interpretation_rank(r, p as u32, d) as u64;
                    let f = ScaleSpec::upsilon(r as u64, p, d, q0, b);
                    f.boundary(need(i, "i")?.max(1))?.expect("unbounded scale").to_string()
                }
                BoundFn::H => {
                    let d = need(d, "d")?;
                    let q0 = treemodel::interpretation_rank(r.unwrap_or(1), p.unwrap_or(1) as u32, d) as u64;
                    b.h(d, q0).to_string()
                }
                BoundFn::Q0 => treemodel::interpretation_rank(need(r, "r")?, p_()? as u32, need(d, "d")?).to_string(),
                BoundFn::Check => {
                    let v = b.check_scale_inequality(need(d, "d")?, p_()?, need(lambda, "lambda")?)?;
                    return if as_json { verdict(v, json!({"holds": v})) } else { Ok((i32::from(!v), v.to_string())) };
                }
            };
            if as_json {
                ok(json!({"value": text}))
            } else {
                Ok((0, text))
            }
        }
        Cmd::ChainCheck { trees, ms, th } => {
            let trees = trees.iter().map(|p| load_tree(p)).collect::<Result<Vec<_>, _>>()?;
            let ms = ms
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(format!("--ms: {e}")))?;
            let rep = els::chain_check(&trees, &ms, &th.build()?)?;
            verdict(rep.ok, serde_json::to_value(&rep).expect("plain data"))
        }
    }
}

/// Parse `argv` (program name first) and execute it.
pub fn run<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.render().to_string().trim_end().to_string());
        }
    };
    match dispatch(cli.cmd) {
        Ok(r) => r,
        Err(Failure::Negative(msg)) => (1, json!({"error": msg}).to_string()),
        Err(Failure::Usage(msg)) => (2, json!({"error": msg}).to_string()),
        Err(Failure::Budget(msg)) => (3, json!({"error": msg}).to_string()),
    }
}
