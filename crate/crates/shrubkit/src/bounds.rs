//! Tower-valued bound functions, exact comparison of towers and scale windows.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Decimal digits evaluated exactly before switching to symbolic form.
pub const DEFAULT_DIGIT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("comparison not decidable from the symbolic forms: {0}")]
    Undecided(String),
    #[error("scale boundaries must be strictly increasing positive integers")]
    BadScale,
}

/// Exact value, or `tower(height, arg)` when the value is too large to expand.
#[derive(Clone, Debug)]
pub enum TowerNum {
    Exact(BigUint),
    Tower { height: u32, arg: BigUint },
}

impl From<u64> for TowerNum {
    fn from(v: u64) -> Self {
        TowerNum::Exact(BigUint::from(v))
    }
}

impl From<BigUint> for TowerNum {
    fn from(v: BigUint) -> Self {
        TowerNum::Exact(v)
    }
}

fn bit_budget(digits: u64) -> u64 {
    // log2(10) < 3.3219281
    digits.saturating_mul(33_219_281) / 10_000_000
}

impl TowerNum {
    fn levels(&self) -> (u32, &BigUint) {
        match self {
            TowerNum::Exact(v) => (0, v),
            TowerNum::Tower { height, arg } => (*height, arg),
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            TowerNum::Exact(v) => Some(v),
            TowerNum::Tower { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.as_exact().is_some()
    }

    /// `min(self, cap)` as a machine integer.
    pub fn saturate(&self, cap: usize) -> usize {
        match self.as_exact().and_then(|v| v.to_usize()) {
            Some(v) => v.min(cap),
            None => cap,
        }
    }

    /// One tower level down: the exponent `y` with `self = 2^y`. Only for symbolic values.
    fn lower(&self) -> Option<TowerNum> {
        match self {
            TowerNum::Exact(_) => None,
            TowerNum::Tower { height: 1, arg } => Some(TowerNum::Exact(arg.clone())),
            TowerNum::Tower { height, arg } => Some(TowerNum::Tower { height: height - 1, arg: arg.clone() }),
        }
    }
}

impl fmt::Display for TowerNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerNum::Exact(v) => write!(f, "{v}"),
            TowerNum::Tower { height, arg } => write!(f, "tower({height}, {arg})"),
        }
    }
}

impl PartialEq for TowerNum {
    fn eq(&self, other: &Self) -> bool {
        tower_cmp(self, other) == Ordering::Equal
    }
}

impl Eq for TowerNum {}

impl PartialOrd for TowerNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TowerNum {
    fn cmp(&self, other: &Self) -> Ordering {
        tower_cmp(self, other)
    }
}

/// tower(h, n) with the given digit budget.
pub fn tower_with(h: u32, n: &TowerNum, digits: u64) -> TowerNum {
    match n {
        TowerNum::Tower { height, arg } => TowerNum::Tower { height: height + h, arg: arg.clone() },
        TowerNum::Exact(a) => {
            let limit = bit_budget(digits);
            let mut v = a.clone();
            for _ in 0..h {
                match v.to_u64() {
                    Some(e) if e <= limit => v = BigUint::one() << e,
                    _ => return TowerNum::Tower { height: h, arg: a.clone() },
                }
            }
            TowerNum::Exact(v)
        }
    }
}

pub fn tower(h: u32, n: &TowerNum) -> TowerNum {
    tower_with(h, n, DEFAULT_DIGIT_BUDGET)
}

/// Exact comparison, whatever mix of exact and symbolic forms.
pub fn tower_cmp(a: &TowerNum, b: &TowerNum) -> Ordering {
    let (ha, xa) = a.levels();
    let (hb, xb) = b.levels();
    // 2^x is strictly monotone, so shared levels cancel
    let common = ha.min(hb);
    match (ha - common, hb - common) {
        (0, 0) => xa.cmp(xb),
        (h, 0) => cmp_tower_exact(h, xa, xb),
        (0, h) => cmp_tower_exact(h, xb, xa).reverse(),
        _ => unreachable!("one side has no levels left"),
    }
}

/// tower(h, a) vs b for h ≥ 1.
fn cmp_tower_exact(h: u32, a: &BigUint, b: &BigUint) -> Ordering {
    let bits = b.bits();
    let mut v = a.clone();
    for _ in 0..h {
        // b < 2^bits ≤ 2^v ≤ tower(remaining, v)
        if v >= BigUint::from(bits) {
            return Ordering::Greater;
        }
        v = BigUint::one() << v.to_u64().expect("below bit length of b");
    }
    v.cmp(b)
}

fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// x ≥ y + k.
fn ge_plus(x: &TowerNum, y: &TowerNum, k: u64) -> Option<bool> {
    let kk = BigUint::from(k);
    match (x, y) {
        (_, TowerNum::Exact(yv)) => Some(tower_cmp(x, &TowerNum::Exact(yv + &kk)) != Ordering::Less),
        (TowerNum::Exact(xv), _) => {
            if *xv < kk {
                Some(false)
            } else {
                Some(tower_cmp(&TowerNum::Exact(xv - &kk), y) != Ordering::Less)
            }
        }
        _ => {
            if k == 0 {
                return Some(tower_cmp(x, y) != Ordering::Less);
            }
            match tower_cmp(&x.lower()?, &y.lower()?) {
                // x ≤ y < y + k
                Ordering::Less | Ordering::Equal => Some(false),
                // x ≥ 2y ≥ y + k as soon as y ≥ k
                Ordering::Greater => {
                    if tower_cmp(y, &TowerNum::from(k)) != Ordering::Less {
                        Some(true)
                    } else {
                        None
                    }
                }
            }
        }
    }
}

/// x ≥ 2^k · m.
fn ge_pow2_times(x: &TowerNum, m: &TowerNum, k: u32) -> Option<bool> {
    match m {
        TowerNum::Exact(mv) => Some(tower_cmp(x, &TowerNum::Exact(mv << k)) != Ordering::Less),
        TowerNum::Tower { .. } => {
            let m_exp = m.lower()?;
            match x {
                TowerNum::Exact(xv) => {
                    if xv.is_zero() {
                        return Some(false);
                    }
                    ge_plus(&TowerNum::Exact(BigUint::from(xv.bits() - 1)), &m_exp, k as u64)
                }
                TowerNum::Tower { .. } => ge_plus(&x.lower()?, &m_exp, k as u64),
            }
        }
    }
}

/// lhs ≥ Σ terms, or `None` when the symbolic forms do not settle it.
pub fn ge_sum(lhs: &TowerNum, terms: &[TowerNum]) -> Option<bool> {
    let exact: Option<Vec<&BigUint>> = terms.iter().map(TowerNum::as_exact).collect();
    if let Some(vs) = &exact {
        let total: BigUint = vs.iter().copied().sum();
        return Some(tower_cmp(lhs, &TowerNum::Exact(total)) != Ordering::Less);
    }
    let top = terms.iter().max()?;
    if tower_cmp(lhs, top) == Ordering::Less {
        return Some(false);
    }
    match ge_pow2_times(lhs, top, ceil_log2(terms.len() as u64)) {
        Some(true) => Some(true),
        _ => None,
    }
}

/// x ≥ c · y, or `None` when undecided.
pub fn ge_scaled(x: &TowerNum, y: &TowerNum, c: u64) -> Option<bool> {
    if let Some(yv) = y.as_exact() {
        return Some(tower_cmp(x, &TowerNum::Exact(yv * BigUint::from(c))) != Ordering::Less);
    }
    if c == 0 {
        return Some(true);
    }
    if ge_pow2_times(x, y, ceil_log2(c)) == Some(true) {
        return Some(true);
    }
    let floor = 63 - c.leading_zeros();
    if ge_pow2_times(x, y, floor) == Some(false) {
        return Some(false);
    }
    None
}

/// `⌈log₂ p⌉`, with log 1 = 0.
pub fn log_p(p: u64) -> u64 {
    ceil_log2(p.max(1)) as u64
}

/// Constants of the bound functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub c0: u64,
    pub m0: u64,
    pub digits: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { c0: 2, m0: 1, digits: DEFAULT_DIGIT_BUDGET }
    }
}

impl Bounds {
    pub fn with_digits(digits: u64) -> Bounds {
        Bounds { digits, ..Bounds::default() }
    }

    pub fn tower(&self, h: u32, n: &TowerNum) -> TowerNum {
        tower_with(h, n, self.digits)
    }

    /// g(0) = 1, g(d) = 14·c0·g(d−1).
    pub fn g(&self, d: u32) -> BigUint {
        BigUint::from(14 * self.c0).pow(d)
    }

    fn poly(m: u64, p: u64) -> BigUint {
        BigUint::from(m + 1) * BigUint::from(m + log_p(p))
    }

    /// ξ_{d,p}(m) = tower(d+1, g(d+1)·(d+1)·(m+1)·(m+log p)).
    pub fn xi(&self, d: u32, p: u64, m: u64) -> TowerNum {
        let arg = self.g(d + 1) * BigUint::from(d + 1) * Self::poly(m, p);
        self.tower(d + 1, &arg.into())
    }

    /// χ_{d,p}(m) = tower(d+1, g(d+1)·(m+1)·(m+log p)).
    pub fn chi(&self, d: u32, p: u64, m: u64) -> TowerNum {
        let arg = self.g(d + 1) * Self::poly(m, p);
        self.tower(d + 1, &arg.into())
    }

    /// ρ_{d,p}(m) = tower(d+1, 4·c0·g(d)·(m+1)·(m+log p)).
    pub fn rho(&self, d: u32, p: u64, m: u64) -> TowerNum {
        let arg = BigUint::from(4 * self.c0) * self.g(d) * Self::poly(m, p);
        self.tower(d + 1, &arg.into())
    }

    /// The variant of ρ without the factor c0.
    pub fn rho_without_c0(&self, d: u32, p: u64, m: u64) -> TowerNum {
        let arg = BigUint::from(4u32) * self.g(d) * Self::poly(m, p);
        self.tower(d + 1, &arg.into())
    }

    /// ζ_{d,p}(n1, n2) = tower(n2, g(d)·(n1+1)·(n1+log p)).
    pub fn zeta(&self, d: u32, p: u64, n1: u64, n2: u32) -> TowerNum {
        let arg = self.g(d) * Self::poly(n1, p);
        self.tower(n2, &arg.into())
    }

    /// ϑ_{d,p}(λ) = ξ_{d,p}(λ).
    pub fn theta(&self, d: u32, p: u64, lam: u64) -> TowerNum {
        self.xi(d, p, lam)
    }

    /// h(d) = c'·g(d)·d² with c' = ⌈q0/d⌉², reported only.
    pub fn h(&self, d: u32, q0: u64) -> BigUint {
        if d == 0 {
            return BigUint::zero();
        }
        let c1 = q0.div_ceil(d as u64);
        BigUint::from(c1 * c1) * self.g(d) * BigUint::from(d as u64 * d as u64)
    }

    /// ϑ(λ) ≥ ϑ(λ−1) + ξ_{d−1,p}(λ−1).
    pub fn check_scale_inequality(&self, d: u32, p: u64, lam: u64) -> Result<bool, BoundsError> {
        if lam < 2 || d < 1 {
            return Err(BoundsError::Precondition(format!("need lam ≥ 2 and d ≥ 1, got lam={lam}, d={d}")));
        }
        let lhs = self.theta(d, p, lam);
        let terms = [self.theta(d, p, lam - 1), self.xi(d - 1, p, lam - 1)];
        ge_sum(&lhs, &terms).ok_or_else(|| BoundsError::Undecided(format!("d={d}, p={p}, lam={lam}")))
    }
}

pub fn g(d: u32) -> BigUint {
    Bounds::default().g(d)
}

pub fn xi(d: u32, p: u64, m: u64) -> TowerNum {
    Bounds::default().xi(d, p, m)
}

pub fn chi(d: u32, p: u64, m: u64) -> TowerNum {
    Bounds::default().chi(d, p, m)
}

pub fn rho(d: u32, p: u64, m: u64) -> TowerNum {
    Bounds::default().rho(d, p, m)
}

pub fn zeta(d: u32, p: u64, n1: u64, n2: u32) -> TowerNum {
    Bounds::default().zeta(d, p, n1, n2)
}

pub fn check_scale_inequality(d: u32, p: u64, lam: u64) -> Result<bool, BoundsError> {
    Bounds::default().check_scale_inequality(d, p, lam)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaleKind {
    Explicit(Vec<u64>),
    /// boundaries ϑ_{d,p}(1), ϑ_{d,p}(2), ...
    Theta { d: u32, p: u64 },
    /// boundaries Υ_{r,p,d}(1), Υ_{r,p,d}(2), ... built on ϑ_{d,p} and q0
    Upsilon { r: u64, p: u64, d: u32, q0: u64 },
}

/// A strictly increasing boundary function f with lazily memoized values.
pub struct ScaleSpec {
    kind: ScaleKind,
    bounds: Bounds,
    cache: Mutex<HashMap<u64, TowerNum>>,
    upsilon_index: Mutex<Vec<u64>>,
}

impl Clone for ScaleSpec {
    fn clone(&self) -> Self {
        ScaleSpec::from_kind(self.kind.clone(), self.bounds)
    }
}

impl fmt::Debug for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScaleSpec({:?})", self.kind)
    }
}

/// The window [after + 1, upto] of one scale; `after = None` means it starts at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub after: Option<TowerNum>,
    pub upto: Option<TowerNum>,
}

impl Window {
    pub fn contains(&self, n: u64) -> bool {
        let n = TowerNum::from(n);
        n >= TowerNum::from(1)
            && self.after.as_ref().is_none_or(|a| n > *a)
            && self.upto.as_ref().is_none_or(|u| n <= *u)
    }

    /// Smallest member.
    pub fn low(&self) -> TowerNum {
        match &self.after {
            None => TowerNum::from(1),
            Some(TowerNum::Exact(v)) => TowerNum::Exact(v + 1u32),
            // a symbolic bound plus one has no symbolic form; the bound itself is
            // the closest representable value below
            Some(t) => t.clone(),
        }
    }

    /// Smallest member as an integer, when it fits.
    pub fn low_u64(&self) -> Option<u64> {
        self.low().as_exact().and_then(|v| v.to_u64())
    }

    pub fn high_u64(&self) -> Option<u64> {
        self.upto.as_ref().and_then(|u| u.as_exact()).and_then(|v| v.to_u64())
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = match &self.after {
            None => "1".to_string(),
            Some(TowerNum::Exact(v)) => (v + 1u32).to_string(),
            Some(t) => format!("{t} + 1"),
        };
        match &self.upto {
            Some(u) => write!(f, "[{lo}, {u}]"),
            None => write!(f, "[{lo}, inf)"),
        }
    }
}

impl ScaleSpec {
    fn from_kind(kind: ScaleKind, bounds: Bounds) -> ScaleSpec {
        ScaleSpec { kind, bounds, cache: Mutex::new(HashMap::new()), upsilon_index: Mutex::new(Vec::new()) }
    }

    pub fn explicit(boundaries: Vec<u64>) -> Result<ScaleSpec, BoundsError> {
        if boundaries.first() == Some(&0) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BoundsError::BadScale);
        }
        Ok(ScaleSpec::from_kind(ScaleKind::Explicit(boundaries), Bounds::default()))
    }

    pub fn theta(d: u32, p: u64, bounds: Bounds) -> ScaleSpec {
        ScaleSpec::from_kind(ScaleKind::Theta { d, p }, bounds)
    }

    pub fn upsilon(r: u64, p: u64, d: u32, q0: u64, bounds: Bounds) -> ScaleSpec {
        ScaleSpec::from_kind(ScaleKind::Upsilon { r, p, d, q0 }, bounds)
    }

    pub fn kind(&self) -> &ScaleKind {
        &self.kind
    }

    /// f(k) for k ≥ 1; `None` past the end of an explicit list.
    pub fn boundary(&self, k: u64) -> Result<Option<TowerNum>, BoundsError> {
        if k == 0 {
            return Err(BoundsError::Precondition("boundaries are indexed from 1".into()));
        }
        if let Some(v) = self.cache.lock().expect("scale cache").get(&k) {
            return Ok(Some(v.clone()));
        }
        let value = match &self.kind {
            ScaleKind::Explicit(list) => match list.get(k as usize - 1) {
                Some(&v) => TowerNum::from(v),
                None => return Ok(None),
            },
            ScaleKind::Theta { d, p } => self.bounds.theta(*d, *p, k),
            ScaleKind::Upsilon { p, d, .. } => self.bounds.theta(*d, *p, self.upsilon_theta_index(k)?),
        };
        self.cache.lock().expect("scale cache").insert(k, value.clone());
        Ok(Some(value))
    }

    /// Index j with Υ(i) = ϑ(j).
    pub fn upsilon_theta_index(&self, i: u64) -> Result<u64, BoundsError> {
        let ScaleKind::Upsilon { p, d, q0, .. } = &self.kind else {
            return Err(BoundsError::Precondition("not an upsilon scale".into()));
        };
        let mut idx = self.upsilon_index.lock().expect("upsilon cache");
        if idx.is_empty() {
            idx.push(q0 + 1);
        }
        while (idx.len() as u64) < i {
            let prev = self.bounds.theta(*d, *p, *idx.last().expect("non-empty"));
            let mut j = 1;
            loop {
                let t = self.bounds.theta(*d, *p, j);
                match ge_scaled(&t, &prev, *d as u64 + 1) {
                    Some(true) => break,
                    Some(false) => j += 1,
                    None => return Err(BoundsError::Undecided(format!("theta({j}) vs (d+1)·Upsilon"))),
                }
            }
            idx.push(j + 1);
        }
        Ok(idx[i as usize - 1])
    }

    /// The λ with n ∈ [f(λ)+1, f(λ+1)].
    pub fn scale_of(&self, n: u64) -> Result<u64, BoundsError> {
        if n == 0 {
            return Err(BoundsError::Precondition("scale_of(0) is undefined".into()));
        }
        let n = TowerNum::from(n);
        let mut lam = 0;
        loop {
            match self.boundary(lam + 1)? {
                Some(b) if n > b => lam += 1,
                _ => return Ok(lam),
            }
        }
    }

    pub fn window(&self, lam: u64) -> Result<Window, BoundsError> {
        let after = if lam == 0 {
            None
        } else {
            Some(self.boundary(lam)?.ok_or_else(|| {
                BoundsError::Precondition(format!("scale {lam} lies beyond the explicit boundaries"))
            })?)
        };
        Ok(Window { after, upto: self.boundary(lam + 1)? })
    }
}
