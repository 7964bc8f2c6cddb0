//! Constant hiding through chained modular reduction.
//!
//! A strictly increasing prime table `y[0..=m]` defines the family
//! `F(a, k) = ((a mod y[k]) mod y[k-1]) ... mod y[0]`. Every result lands in
//! `[0, y[0])`, so any small constant can be replaced by an `F` call that
//! evaluates to it, and larger constants decompose into `2*d + r` with the
//! small pieces hidden. Generation is seeded and fully deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest magnitude any generated literal or intermediate value may take.
pub const JAVA_INT_MAX: i64 = i32::MAX as i64;

/// Rejection-sampling budget before hide_small falls back to direct
/// construction.
const SAMPLE_CAP: u32 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstHideError {
    #[error("y-factor table needs at least 3 primes, got {0}")]
    TableTooShort(usize),
    #[error("y-factor table entry {0} is not prime")]
    NotPrime(i64),
    #[error("y-factor table must be strictly increasing: {0} precedes {1}")]
    NotIncreasing(i64, i64),
    #[error("smallest y-factor must be at least 3, got {0}")]
    SmallestTooSmall(i64),
    #[error("depth {depth} exceeds table maximum {max}")]
    DepthRange { depth: usize, max: usize },
    #[error("F is only defined for non-negative arguments, got {0}")]
    NegativeArgument(i64),
    #[error("value {value} outside hideable range [0, {bound}]")]
    OutOfRange { value: i64, bound: i64 },
    #[error("maxMagnitude {0} leaves no sampling room above the table")]
    MaxMagnitudeTooSmall(i64),
    #[error("expression evaluation overflowed the 64-bit range")]
    Overflow,
    #[error("division by zero while evaluating a hidden expression")]
    DivisionByZero,
    #[error("exhausted {0} sampling attempts while hiding a constant")]
    SearchExhausted(u32),
}

/// Strictly increasing prime moduli; index == depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YFactorTable {
    primes: Vec<i64>,
}

impl YFactorTable {
    pub fn new(primes: Vec<i64>) -> Result<Self, ConstHideError> {
        if primes.len() < 3 {
            return Err(ConstHideError::TableTooShort(primes.len()));
        }
        if primes[0] < 3 {
            return Err(ConstHideError::SmallestTooSmall(primes[0]));
        }
        for pair in primes.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ConstHideError::NotIncreasing(pair[0], pair[1]));
            }
        }
        for &p in &primes {
            if !is_prime(p) {
                return Err(ConstHideError::NotPrime(p));
            }
        }
        Ok(YFactorTable { primes })
    }

    /// Highest valid depth `m`.
    pub fn max_depth(&self) -> usize {
        self.primes.len() - 1
    }

    /// `y[0]`; every `F` result is smaller than this.
    pub fn smallest(&self) -> i64 {
        self.primes[0]
    }

    pub fn primes(&self) -> &[i64] {
        &self.primes
    }
}

impl Default for YFactorTable {
    fn default() -> Self {
        YFactorTable::new(vec![5, 7, 11, 13, 17, 19, 23]).expect("builtin table is valid")
    }
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `F(a, k)`: fold `a` through `y[k], y[k-1], ..., y[0]`.
pub fn eval_f(a: i64, k: usize, table: &YFactorTable) -> Result<i64, ConstHideError> {
    if a < 0 {
        return Err(ConstHideError::NegativeArgument(a));
    }
    if k > table.max_depth() {
        return Err(ConstHideError::DepthRange {
            depth: k,
            max: table.max_depth(),
        });
    }
    let mut v = a;
    for j in (0..=k).rev() {
        v %= table.primes[j];
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Rem => '%',
        }
    }
}

/// Expression tree produced by the hiding generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HiddenExpr {
    Int(i64),
    Bin {
        op: BinOp,
        lhs: Box<HiddenExpr>,
        rhs: Box<HiddenExpr>,
    },
    FCall {
        arg: Box<HiddenExpr>,
        depth: usize,
    },
}

pub fn int(v: i64) -> HiddenExpr {
    HiddenExpr::Int(v)
}

pub fn bin(op: BinOp, lhs: HiddenExpr, rhs: HiddenExpr) -> HiddenExpr {
    HiddenExpr::Bin {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}

pub fn f_call(arg: HiddenExpr, depth: usize) -> HiddenExpr {
    HiddenExpr::FCall {
        arg: Box::new(arg),
        depth,
    }
}

impl HiddenExpr {
    pub fn f_call_count(&self) -> usize {
        match self {
            HiddenExpr::Int(_) => 0,
            HiddenExpr::Bin { lhs, rhs, .. } => lhs.f_call_count() + rhs.f_call_count(),
            HiddenExpr::FCall { arg, .. } => 1 + arg.f_call_count(),
        }
    }

    /// Deepest F-over-F nesting; a call with no F inside its argument has
    /// depth 1.
    pub fn max_f_depth(&self) -> usize {
        match self {
            HiddenExpr::Int(_) => 0,
            HiddenExpr::Bin { lhs, rhs, .. } => lhs.max_f_depth().max(rhs.max_f_depth()),
            HiddenExpr::FCall { arg, .. } => 1 + arg.max_f_depth(),
        }
    }

    pub fn eval(&self, table: &YFactorTable) -> Result<i64, ConstHideError> {
        Ok(self.eval_with_bound(table)?.0)
    }

    /// Evaluates and reports the largest absolute value taken by any
    /// subexpression along the way.
    pub fn eval_with_bound(&self, table: &YFactorTable) -> Result<(i64, i64), ConstHideError> {
        match self {
            HiddenExpr::Int(v) => Ok((*v, v.abs())),
            HiddenExpr::Bin { op, lhs, rhs } => {
                let (l, lb) = lhs.eval_with_bound(table)?;
                let (r, rb) = rhs.eval_with_bound(table)?;
                let v = match op {
                    BinOp::Add => l.checked_add(r).ok_or(ConstHideError::Overflow)?,
                    BinOp::Sub => l.checked_sub(r).ok_or(ConstHideError::Overflow)?,
                    BinOp::Mul => l.checked_mul(r).ok_or(ConstHideError::Overflow)?,
                    BinOp::Div => {
                        if r == 0 {
                            return Err(ConstHideError::DivisionByZero);
                        }
                        l.checked_div(r).ok_or(ConstHideError::Overflow)?
                    }
                    BinOp::Rem => {
                        if r == 0 {
                            return Err(ConstHideError::DivisionByZero);
                        }
                        l.checked_rem(r).ok_or(ConstHideError::Overflow)?
                    }
                };
                Ok((v, lb.max(rb).max(v.abs())))
            }
            HiddenExpr::FCall { arg, depth } => {
                let (a, ab) = arg.eval_with_bound(table)?;
                let v = eval_f(a, *depth, table)?;
                Ok((v, ab.max(v.abs())))
            }
        }
    }
}

/// Renders fully parenthesized source text. Binary nodes carry their own
/// parentheses except directly under an F call, where the argument stays
/// naked: `F(41%23,2)`, `(2*F(9,1))`.
pub fn render_expr(e: &HiddenExpr) -> String {
    let mut out = String::new();
    render_into(e, &mut out);
    out
}

fn render_into(e: &HiddenExpr, out: &mut String) {
    match e {
        HiddenExpr::Int(v) => out.push_str(&v.to_string()),
        HiddenExpr::Bin { op, lhs, rhs } => {
            out.push('(');
            render_into(lhs, out);
            out.push(op.symbol());
            render_into(rhs, out);
            out.push(')');
        }
        HiddenExpr::FCall { arg, depth } => {
            out.push_str("F(");
            match &**arg {
                HiddenExpr::Bin { op, lhs, rhs } => {
                    render_into(lhs, out);
                    out.push(op.symbol());
                    render_into(rhs, out);
                }
                other => render_into(other, out),
            }
            out.push(',');
            out.push_str(&depth.to_string());
            out.push(')');
        }
    }
}

#[derive(Debug, Clone)]
pub struct HidingConfig {
    pub table: YFactorTable,
    pub seed: u64,
    pub max_magnitude: i64,
}

impl HidingConfig {
    pub fn new(table: YFactorTable, seed: u64) -> Self {
        HidingConfig {
            table,
            seed,
            max_magnitude: JAVA_INT_MAX,
        }
    }
}

impl Default for HidingConfig {
    fn default() -> Self {
        HidingConfig::new(YFactorTable::default(), 42)
    }
}

/// Seeded generator. One instance drives a whole rewriting pass so that
/// repeated constants receive distinct renderings.
pub struct Hider {
    table: YFactorTable,
    max_magnitude: i64,
    rng: ChaCha8Rng,
}

impl Hider {
    pub fn new(cfg: &HidingConfig) -> Self {
        Hider {
            table: cfg.table.clone(),
            max_magnitude: cfg.max_magnitude,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    pub fn table(&self) -> &YFactorTable {
        &self.table
    }

    /// Hides `x` in `[0, y[0])` as a single F call. The argument is rendered
    /// as `big % modulus`, which keeps one literal eligible for the next
    /// obfuscation pass.
    pub fn hide_small(&mut self, x: i64) -> Result<HiddenExpr, ConstHideError> {
        let y0 = self.table.smallest();
        if x < 0 || x >= y0 {
            return Err(ConstHideError::OutOfRange {
                value: x,
                bound: y0 - 1,
            });
        }
        let hi = self.max_magnitude / 4;
        if hi <= y0 {
            return Err(ConstHideError::MaxMagnitudeTooSmall(self.max_magnitude));
        }
        let depth = self.rng.gen_range(1..=self.table.max_depth());
        let mut inner = None;
        for _ in 0..SAMPLE_CAP {
            let a = self.rng.gen_range(y0..=hi);
            if eval_f(a, depth, &self.table)? == x {
                inner = Some(a);
                break;
            }
        }
        let inner = match inner {
            Some(a) => a,
            // x + t*y[depth] folds straight back to x, so this cannot miss.
            None => {
                let yk = self.table.primes[depth];
                let t_max = ((hi - x) / yk).max(1);
                x + self.rng.gen_range(1..=t_max) * yk
            }
        };
        let modulus = self.rng.gen_range(inner + 1..=2 * inner + 1);
        let outer = inner + modulus;
        debug_assert!(outer <= self.max_magnitude);
        Ok(f_call(bin(BinOp::Rem, int(outer), int(modulus)), depth))
    }

    /// Hides any `c` in `[0, maxMagnitude]`. Values at or above `y[0]` become
    /// `hidden(2) * hidden(c/2) + hidden(c%2)`, recursing on the quotient
    /// until it drops below `y[0]`.
    pub fn hide_constant(&mut self, c: i64) -> Result<HiddenExpr, ConstHideError> {
        if c < 0 || c > self.max_magnitude {
            return Err(ConstHideError::OutOfRange {
                value: c,
                bound: self.max_magnitude,
            });
        }
        if c < self.table.smallest() {
            return self.hide_small(c);
        }
        let two = self.hide_small(2)?;
        let half = self.hide_constant(c / 2)?;
        let rem = self.hide_small(c % 2)?;
        Ok(bin(BinOp::Add, bin(BinOp::Mul, two, half), rem))
    }

    /// Value-preserving replacement for a literal that already sits to the
    /// left of `%` inside an F argument: `hidden(v1)*q + hidden(v2)` with
    /// `v1*q + v2 == lit`. Only the small factors are hidden, so repeated
    /// passes deepen nesting by exactly one level.
    pub fn rehide_literal(&mut self, lit: i64) -> Result<HiddenExpr, ConstHideError> {
        if lit < 0 || lit > self.max_magnitude {
            return Err(ConstHideError::OutOfRange {
                value: lit,
                bound: self.max_magnitude,
            });
        }
        let y0 = self.table.smallest();
        let v1 = self.rng.gen_range(2..y0);
        let q = lit / v1;
        let v2 = lit % v1;
        let hidden_v1 = self.hide_small(v1)?;
        let hidden_v2 = self.hide_small(v2)?;
        Ok(bin(
            BinOp::Add,
            bin(BinOp::Mul, hidden_v1, int(q)),
            hidden_v2,
        ))
    }

    /// Rewrites every literal that is the left operand of `%` directly inside
    /// an F argument. Depth arguments and `%` right operands stay untouched.
    pub fn reobfuscate(&mut self, e: &HiddenExpr) -> Result<HiddenExpr, ConstHideError> {
        Ok(match e {
            HiddenExpr::Int(v) => HiddenExpr::Int(*v),
            HiddenExpr::Bin { op, lhs, rhs } => bin(
                *op,
                self.reobfuscate(lhs)?,
                self.reobfuscate(rhs)?,
            ),
            HiddenExpr::FCall { arg, depth } => {
                let new_arg = match &**arg {
                    HiddenExpr::Bin {
                        op: BinOp::Rem,
                        lhs,
                        rhs,
                    } if matches!(**lhs, HiddenExpr::Int(_)) => {
                        let HiddenExpr::Int(lit) = **lhs else {
                            unreachable!()
                        };
                        bin(BinOp::Rem, self.rehide_literal(lit)?, (**rhs).clone())
                    }
                    other => self.reobfuscate(other)?,
                };
                f_call(new_arg, *depth)
            }
        })
    }
}

/// One-shot form; identical `(x, cfg)` inputs produce identical trees.
pub fn hide_small(x: i64, cfg: &HidingConfig) -> Result<HiddenExpr, ConstHideError> {
    Hider::new(cfg).hide_small(x)
}

/// One-shot form; identical `(c, cfg)` inputs produce identical trees.
pub fn hide_constant(c: i64, cfg: &HidingConfig) -> Result<HiddenExpr, ConstHideError> {
    Hider::new(cfg).hide_constant(c)
}

/// One-shot form; identical `(e, cfg)` inputs produce identical trees.
pub fn reobfuscate(e: &HiddenExpr, cfg: &HidingConfig) -> Result<HiddenExpr, ConstHideError> {
    Hider::new(cfg).reobfuscate(e)
}

/// Emits a MiniJ definition of `F` equivalent to [`eval_f`] for all valid
/// inputs. The y table stays in the clear: hiding those literals would make
/// the body of `F` call `F`.
pub fn emit_f_runtime(table: &YFactorTable) -> String {
    let mut out = String::new();
    out.push_str("int F(int a, int k) {\n");
    out.push_str("    int j = k;\n");
    out.push_str("    while (j >= 0) {\n");
    for (j, p) in table.primes().iter().enumerate() {
        out.push_str(&format!("        if (j == {j}) {{ a = a % {p}; }}\n"));
    }
    out.push_str("        j = j - 1;\n");
    out.push_str("    }\n");
    out.push_str("    return a;\n");
    out.push_str("}\n");
    out
}
