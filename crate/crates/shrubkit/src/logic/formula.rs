use std::collections::BTreeSet;
use std::fmt;

use super::LogicError;

/// MSO formula over `{E, root, P_1..P_p}`. Point variables start with a
/// lowercase letter, set variables with an uppercase one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(String, String),
    In(String, String),
    Edge(String, String),
    Root(String),
    Label(u32, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists1(String, Box<Formula>),
    Forall1(String, Box<Formula>),
    Exists2(String, Box<Formula>),
    Forall2(String, Box<Formula>),
}

use Formula::*;

pub fn is_point_var(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub fn is_set_var(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(Box::new(a), Box::new(b))
    }

    pub fn exists1(v: &str, f: Formula) -> Formula {
        Exists1(v.to_string(), Box::new(f))
    }

    pub fn forall1(v: &str, f: Formula) -> Formula {
        Forall1(v.to_string(), Box::new(f))
    }

    pub fn exists2(v: &str, f: Formula) -> Formula {
        Exists2(v.to_string(), Box::new(f))
    }

    pub fn forall2(v: &str, f: Formula) -> Formula {
        Forall2(v.to_string(), Box::new(f))
    }

    pub fn eq(a: &str, b: &str) -> Formula {
        Eq(a.to_string(), b.to_string())
    }

    pub fn edge(a: &str, b: &str) -> Formula {
        Edge(a.to_string(), b.to_string())
    }

    pub fn label(i: u32, v: &str) -> Formula {
        Label(i, v.to_string())
    }

    pub fn root(v: &str) -> Formula {
        Root(v.to_string())
    }

    pub fn member(v: &str, set: &str) -> Formula {
        In(v.to_string(), set.to_string())
    }

    /// Maximum number of nested quantifiers of either order.
    pub fn rank(&self) -> usize {
        match self {
            True | False | Eq(..) | In(..) | Edge(..) | Root(_) | Label(..) => 0,
            Not(f) => f.rank(),
            And(fs) | Or(fs) => fs.iter().map(Formula::rank).max().unwrap_or(0),
            Implies(a, b) => a.rank().max(b.rank()),
            Exists1(_, f) | Forall1(_, f) | Exists2(_, f) | Forall2(_, f) => 1 + f.rank(),
        }
    }

    pub fn is_first_order(&self) -> bool {
        match self {
            Exists2(..) | Forall2(..) => false,
            Not(f) | Exists1(_, f) | Forall1(_, f) => f.is_first_order(),
            And(fs) | Or(fs) => fs.iter().all(Formula::is_first_order),
            Implies(a, b) => a.is_first_order() && b.is_first_order(),
            _ => true,
        }
    }

    pub fn max_label(&self) -> u32 {
        let mut best = 0;
        self.visit(&mut |f| {
            if let Label(i, _) = f {
                best = best.max(*i);
            }
        });
        best
    }

    pub fn uses_root(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |f| hit |= matches!(f, Root(_)));
        hit
    }

    pub fn uses_edge(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |f| hit |= matches!(f, Edge(..)));
        hit
    }

    fn visit(&self, g: &mut impl FnMut(&Formula)) {
        g(self);
        match self {
            Not(f) | Exists1(_, f) | Forall1(_, f) | Exists2(_, f) | Forall2(_, f) => f.visit(g),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.visit(g)),
            Implies(a, b) => {
                a.visit(g);
                b.visit(g);
            }
            _ => {}
        }
    }

    /// Free point variables and free set variables.
    pub fn free_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut pts = BTreeSet::new();
        let mut sets = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut pts, &mut sets);
        (pts, sets)
    }

    fn collect_free(&self, bound: &mut Vec<String>, pts: &mut BTreeSet<String>, sets: &mut BTreeSet<String>) {
        let mut point = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                pts.insert(v.clone());
            }
        };
        match self {
            True | False => {}
            Eq(a, b) | Edge(a, b) => {
                point(a, bound);
                point(b, bound);
            }
            Root(a) | Label(_, a) => point(a, bound),
            In(a, s) => {
                point(a, bound);
                if !bound.contains(s) {
                    sets.insert(s.clone());
                }
            }
            Not(f) => f.collect_free(bound, pts, sets),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, pts, sets)),
            Implies(a, b) => {
                a.collect_free(bound, pts, sets);
                b.collect_free(bound, pts, sets);
            }
            Exists1(v, f) | Forall1(v, f) | Exists2(v, f) | Forall2(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, pts, sets);
                bound.pop();
            }
        }
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Eq(a, b) | Edge(a, b) | In(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Root(a) | Label(_, a) => {
                out.insert(a.clone());
            }
            Exists1(v, _) | Forall1(v, _) | Exists2(v, _) | Forall2(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Capture-avoiding substitution of the free point variable `from` by `to`.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let r = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            True => True,
            False => False,
            Eq(a, b) => Eq(r(a), r(b)),
            Edge(a, b) => Edge(r(a), r(b)),
            In(a, s) => In(r(a), s.clone()),
            Root(a) => Root(r(a)),
            Label(i, a) => Label(*i, r(a)),
            Not(f) => Formula::not(f.rename_free(from, to)),
            And(fs) => And(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Or(fs) => Or(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Implies(a, b) => Formula::implies(a.rename_free(from, to), b.rename_free(from, to)),
            Exists1(v, f) | Forall1(v, f) | Exists2(v, f) | Forall2(v, f) => {
                if v == from {
                    return self.clone();
                }
                let (v2, body) = if v == to {
                    let mut used = f.all_vars();
                    used.insert(from.to_string());
                    used.insert(to.to_string());
                    let fresh = fresh_name(v, &used);
                    let body = if is_point_var(v) { f.rename_free(v, &fresh) } else { f.rename_set(v, &fresh) };
                    (fresh, body)
                } else {
                    (v.clone(), (**f).clone())
                };
                let body = Box::new(body.rename_free(from, to));
                match self {
                    Exists1(..) => Exists1(v2, body),
                    Forall1(..) => Forall1(v2, body),
                    Exists2(..) => Exists2(v2, body),
                    _ => Forall2(v2, body),
                }
            }
        }
    }

    fn rename_set(&self, from: &str, to: &str) -> Formula {
        match self {
            In(a, s) if s == from => In(a.clone(), to.to_string()),
            Not(f) => Formula::not(f.rename_set(from, to)),
            And(fs) => And(fs.iter().map(|f| f.rename_set(from, to)).collect()),
            Or(fs) => Or(fs.iter().map(|f| f.rename_set(from, to)).collect()),
            Implies(a, b) => Formula::implies(a.rename_set(from, to), b.rename_set(from, to)),
            Exists1(v, f) => Exists1(v.clone(), Box::new(f.rename_set(from, to))),
            Forall1(v, f) => Forall1(v.clone(), Box::new(f.rename_set(from, to))),
            Exists2(v, _) | Forall2(v, _) if v == from => self.clone(),
            Exists2(v, f) => Exists2(v.clone(), Box::new(f.rename_set(from, to))),
            Forall2(v, f) => Forall2(v.clone(), Box::new(f.rename_set(from, to))),
            other => other.clone(),
        }
    }

    /// Replace every label atom `P_i` by `P_{g(i)}`.
    pub fn map_labels(&self, g: &impl Fn(u32) -> u32) -> Formula {
        match self {
            Label(i, a) => Label(g(*i), a.clone()),
            Not(f) => Formula::not(f.map_labels(g)),
            And(fs) => And(fs.iter().map(|f| f.map_labels(g)).collect()),
            Or(fs) => Or(fs.iter().map(|f| f.map_labels(g)).collect()),
            Implies(a, b) => Formula::implies(a.map_labels(g), b.map_labels(g)),
            Exists1(v, f) => Exists1(v.clone(), Box::new(f.map_labels(g))),
            Forall1(v, f) => Forall1(v.clone(), Box::new(f.map_labels(g))),
            Exists2(v, f) => Exists2(v.clone(), Box::new(f.map_labels(g))),
            Forall2(v, f) => Forall2(v.clone(), Box::new(f.map_labels(g))),
            other => other.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Formula, LogicError> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let f = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(LogicError::Parse(format!("trailing input at token {pos}")));
        }
        Ok(f)
    }
}

/// A name derived from `base` that is not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    let stem: String = base.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !used.contains(n))
        .expect("unbounded supply of names")
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn expect_point(tok: Option<&String>) -> Result<String, LogicError> {
    match tok {
        Some(t) if is_point_var(t) => Ok(t.clone()),
        Some(t) => Err(LogicError::Parse(format!("expected point variable, found {t}"))),
        None => Err(LogicError::Parse("unexpected end of input".into())),
    }
}

fn expect_set(tok: Option<&String>) -> Result<String, LogicError> {
    match tok {
        Some(t) if is_set_var(t) => Ok(t.clone()),
        Some(t) => Err(LogicError::Parse(format!("expected set variable, found {t}"))),
        None => Err(LogicError::Parse("unexpected end of input".into())),
    }
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Formula, LogicError> {
    if tokens.get(*pos).map(String::as_str) != Some("(") {
        return Err(LogicError::Parse(format!("expected '(' at token {}", *pos)));
    }
    *pos += 1;
    let head = tokens.get(*pos).ok_or_else(|| LogicError::Parse("unexpected end of input".into()))?.clone();
    *pos += 1;
    let next = |pos: &mut usize| {
        let t = tokens.get(*pos).cloned();
        *pos += 1;
        t
    };
    let f = match head.as_str() {
        "true" => True,
        "false" => False,
        "=" => Eq(expect_point(next(pos).as_ref())?, expect_point(next(pos).as_ref())?),
        "in" => In(expect_point(next(pos).as_ref())?, expect_set(next(pos).as_ref())?),
        "E" => Edge(expect_point(next(pos).as_ref())?, expect_point(next(pos).as_ref())?),
        "root" => Root(expect_point(next(pos).as_ref())?),
        "P" => {
            let i = next(pos)
                .and_then(|t| t.parse::<u32>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| LogicError::Parse("expected positive label index".into()))?;
            Label(i, expect_point(next(pos).as_ref())?)
        }
        "not" => Formula::not(parse_expr(tokens, pos)?),
        "implies" => {
            let a = parse_expr(tokens, pos)?;
            Formula::implies(a, parse_expr(tokens, pos)?)
        }
        "and" | "or" => {
            let mut parts = Vec::new();
            while tokens.get(*pos).map(String::as_str) == Some("(") {
                parts.push(parse_expr(tokens, pos)?);
            }
            if head == "and" {
                And(parts)
            } else {
                Or(parts)
            }
        }
        "exists1" | "forall1" => {
            let v = expect_point(next(pos).as_ref())?;
            let body = Box::new(parse_expr(tokens, pos)?);
            if head == "exists1" {
                Exists1(v, body)
            } else {
                Forall1(v, body)
            }
        }
        "exists2" | "forall2" => {
            let v = expect_set(next(pos).as_ref())?;
            let body = Box::new(parse_expr(tokens, pos)?);
            if head == "exists2" {
                Exists2(v, body)
            } else {
                Forall2(v, body)
            }
        }
        other => return Err(LogicError::Parse(format!("unknown head {other}"))),
    };
    if tokens.get(*pos).map(String::as_str) != Some(")") {
        return Err(LogicError::Parse(format!("expected ')' at token {}", *pos)));
    }
    *pos += 1;
    Ok(f)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => write!(f, "(true)"),
            False => write!(f, "(false)"),
            Eq(a, b) => write!(f, "(= {a} {b})"),
            In(a, s) => write!(f, "(in {a} {s})"),
            Edge(a, b) => write!(f, "(E {a} {b})"),
            Root(a) => write!(f, "(root {a})"),
            Label(i, a) => write!(f, "(P {i} {a})"),
            Not(g) => write!(f, "(not {g})"),
            And(gs) | Or(gs) => {
                write!(f, "({}", if matches!(self, And(_)) { "and" } else { "or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Implies(a, b) => write!(f, "(implies {a} {b})"),
            Exists1(v, g) => write!(f, "(exists1 {v} {g})"),
            Forall1(v, g) => write!(f, "(forall1 {v} {g})"),
            Exists2(v, g) => write!(f, "(exists2 {v} {g})"),
            Forall2(v, g) => write!(f, "(forall2 {v} {g})"),
        }
    }
}

/// θ|γ: every quantifier of θ restricted to the extension of γ. Set
/// quantifiers range over subsets of that extension.
pub fn relativize(theta: &Formula, gamma: &Formula) -> Result<Formula, LogicError> {
    let (pts, sets) = gamma.free_vars();
    if pts.len() != 1 || !sets.is_empty() {
        return Err(LogicError::ArityMismatch(format!(
            "relativizer must have exactly one free point variable, found {} point and {} set",
            pts.len(),
            sets.len()
        )));
    }
    let var = pts.into_iter().next().expect("one free variable");
    let mut used = theta.all_vars();
    used.extend(gamma.all_vars());
    let guard = fresh_name("w", &used);
    Ok(relativize_inner(theta, gamma, &var, &guard))
}

fn relativize_inner(f: &Formula, gamma: &Formula, var: &str, guard: &str) -> Formula {
    let at = |v: &str| gamma.rename_free(var, v);
    let rec = |g: &Formula| relativize_inner(g, gamma, var, guard);
    let inside = |set: &str| {
        Formula::forall1(guard, Formula::implies(Formula::member(guard, set), at(guard)))
    };
    match f {
        Not(g) => Formula::not(rec(g)),
        And(gs) => And(gs.iter().map(rec).collect()),
        Or(gs) => Or(gs.iter().map(rec).collect()),
        Implies(a, b) => Formula::implies(rec(a), rec(b)),
        Exists1(v, g) => Exists1(v.clone(), Box::new(And(vec![at(v), rec(g)]))),
        Forall1(v, g) => Forall1(v.clone(), Box::new(Formula::implies(at(v), rec(g)))),
        Exists2(s, g) => Exists2(s.clone(), Box::new(And(vec![inside(s), rec(g)]))),
        Forall2(s, g) => Forall2(s.clone(), Box::new(Formula::implies(inside(s), rec(g)))),
        atom => atom.clone(),
    }
}

/// ψ[i ↦ i+p] for a formula over labels 1..p.
pub fn affine_relabel(psi: &Formula, p: u32) -> Result<Formula, LogicError> {
    let top = psi.max_label();
    if top > p {
        return Err(LogicError::IndexOverflow { index: top, p });
    }
    Ok(psi.map_labels(&|i| i + p))
}
