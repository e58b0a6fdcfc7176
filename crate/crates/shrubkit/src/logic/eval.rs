use std::collections::BTreeMap;

use super::structure::mask_of;
use super::{Formula, LogicError, Structure};

/// Largest universe over which set quantifiers are enumerated by `model_check`.
pub const SET_QUANTIFIER_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Point(usize),
    Set(u64),
}

pub type Assignment = BTreeMap<String, Value>;

enum Op {
    True,
    False,
    Eq(usize, usize),
    In(usize, usize),
    Edge(usize, usize),
    Root(usize),
    Label(u32, usize),
    Not(Box<Op>),
    And(Vec<Op>),
    Or(Vec<Op>),
    Implies(Box<Op>, Box<Op>),
    Ex1(usize, Box<Op>),
    All1(usize, Box<Op>),
    Ex2(usize, Box<Op>),
    All2(usize, Box<Op>),
}

struct Compiler {
    points: Vec<(String, usize)>,
    sets: Vec<(String, usize)>,
    point_slots: usize,
    set_slots: usize,
}

impl Compiler {
    fn point(&self, v: &str) -> Result<usize, LogicError> {
        self.points
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string()))
    }

    fn set(&self, v: &str) -> Result<usize, LogicError> {
        self.sets
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string()))
    }

    fn compile(&mut self, f: &Formula) -> Result<Op, LogicError> {
        Ok(match f {
            Formula::True => Op::True,
            Formula::False => Op::False,
            Formula::Eq(a, b) => Op::Eq(self.point(a)?, self.point(b)?),
            Formula::In(a, s) => Op::In(self.point(a)?, self.set(s)?),
            Formula::Edge(a, b) => Op::Edge(self.point(a)?, self.point(b)?),
            Formula::Root(a) => Op::Root(self.point(a)?),
            Formula::Label(i, a) => Op::Label(*i, self.point(a)?),
            Formula::Not(g) => Op::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Op::And(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Op::Or(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => Op::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Exists1(v, g) | Formula::Forall1(v, g) => {
                let slot = self.point_slots;
                self.point_slots += 1;
                self.points.push((v.clone(), slot));
                let body = Box::new(self.compile(g)?);
                self.points.pop();
                if matches!(f, Formula::Exists1(..)) {
                    Op::Ex1(slot, body)
                } else {
                    Op::All1(slot, body)
                }
            }
            Formula::Exists2(v, g) | Formula::Forall2(v, g) => {
                let slot = self.set_slots;
                self.set_slots += 1;
                self.sets.push((v.clone(), slot));
                let body = Box::new(self.compile(g)?);
                self.sets.pop();
                if matches!(f, Formula::Exists2(..)) {
                    Op::Ex2(slot, body)
                } else {
                    Op::All2(slot, body)
                }
            }
        })
    }
}

struct Machine<'a> {
    a: &'a Structure,
    pts: Vec<usize>,
    sets: Vec<u64>,
}

impl Machine<'_> {
    fn eval(&mut self, op: &Op) -> bool {
        match op {
            Op::True => true,
            Op::False => false,
            Op::Eq(x, y) => self.pts[*x] == self.pts[*y],
            Op::In(x, s) => self.sets[*s] >> self.pts[*x] & 1 == 1,
            Op::Edge(x, y) => self.a.has_edge(self.pts[*x], self.pts[*y]),
            Op::Root(x) => self.a.is_root(self.pts[*x]),
            Op::Label(i, x) => self.a.has_label(self.pts[*x], *i),
            Op::Not(g) => !self.eval(g),
            Op::And(gs) => gs.iter().all(|g| self.eval(g)),
            Op::Or(gs) => gs.iter().any(|g| self.eval(g)),
            Op::Implies(a, b) => !self.eval(a) || self.eval(b),
            Op::Ex1(slot, g) => (0..self.a.len()).any(|e| {
                self.pts[*slot] = e;
                self.eval(g)
            }),
            Op::All1(slot, g) => (0..self.a.len()).all(|e| {
                self.pts[*slot] = e;
                self.eval(g)
            }),
            Op::Ex2(slot, g) => subsets(self.a.len()).any(|x| {
                self.sets[*slot] = x;
                self.eval(g)
            }),
            Op::All2(slot, g) => subsets(self.a.len()).all(|x| {
                self.sets[*slot] = x;
                self.eval(g)
            }),
        }
    }
}

fn subsets(n: usize) -> impl Iterator<Item = u64> {
    let full = mask_of(n);
    (0..=full).take(if n >= 64 { usize::MAX } else { 1usize << n })
}

/// Direct recursive evaluation of `f` in `a` under `env`.
pub fn model_check(a: &Structure, f: &Formula, env: &Assignment) -> Result<bool, LogicError> {
    a.vocabulary().check(f)?;
    if !f.is_first_order() && a.len() > SET_QUANTIFIER_LIMIT {
        return Err(LogicError::BudgetExceeded(format!(
            "set quantification over {} elements (limit {SET_QUANTIFIER_LIMIT})",
            a.len()
        )));
    }
    let mut c = Compiler { points: Vec::new(), sets: Vec::new(), point_slots: 0, set_slots: 0 };
    let mut pts = Vec::new();
    let mut sets = Vec::new();
    let (free_pts, free_sets) = f.free_vars();
    for v in &free_pts {
        match env.get(v) {
            Some(Value::Point(e)) if *e < a.len() => {
                c.points.push((v.clone(), c.point_slots));
                c.point_slots += 1;
                pts.push(*e);
            }
            Some(_) => return Err(LogicError::UnboundVariable(format!("{v} is not bound to an element"))),
            None => return Err(LogicError::UnboundVariable(v.clone())),
        }
    }
    for v in &free_sets {
        match env.get(v) {
            Some(Value::Set(x)) => {
                c.sets.push((v.clone(), c.set_slots));
                c.set_slots += 1;
                sets.push(*x & a.full_mask());
            }
            Some(_) => return Err(LogicError::UnboundVariable(format!("{v} is not bound to a set"))),
            None => return Err(LogicError::UnboundVariable(v.clone())),
        }
    }
    let op = c.compile(f)?;
    pts.resize(c.point_slots, 0);
    sets.resize(c.set_slots, 0);
    Ok(Machine { a, pts, sets }.eval(&op))
}

/// `model_check` for sentences.
pub fn holds(a: &Structure, f: &Formula) -> Result<bool, LogicError> {
    model_check(a, f, &Assignment::new())
}
