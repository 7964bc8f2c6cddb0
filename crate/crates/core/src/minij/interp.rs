//! Tree-walking interpreter: the execution oracle for differential testing.
//!
//! Arithmetic is 64-bit signed with truncated division; overflow, division
//! by zero and out-of-bounds accesses halt execution with a runtime error
//! rather than wrapping. The hiding generator keeps its expressions within
//! Java-int bounds, so an overflow here means a generator bug, not a
//! tolerated condition.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use thiserror::Error;

use crate::arraylib::{ArrayKind, RestructuredContainer};
use crate::consthide::{self, YFactorTable};
use crate::frontend::Position;
use crate::minij::ast::*;

#[derive(Debug, Clone)]
pub struct ExecOptions {
    pub table: YFactorTable,
    /// Backing parts for `new SplitArray(n)`.
    pub split_k: usize,
    /// Row width for `new FoldedArray(n)`.
    pub fold_cols: usize,
    pub max_call_depth: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            table: YFactorTable::default(),
            split_k: 2,
            fold_cols: 16,
            max_call_depth: 64,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("index {pos} out of bounds for length {len}")]
    OutOfBounds { pos: i64, len: usize },
    #[error("undefined variable '{0}'")]
    UndefinedVariable(String),
    #[error("undefined function '{0}'")]
    UndefinedFunction(String),
    #[error("'{name}' expects {expected} argument(s), got {got}")]
    ArgCount {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("negative container size {0}")]
    BadSize(i64),
    #[error("return outside a function")]
    ReturnOutsideFunction,
    #[error("call depth limit exceeded")]
    CallDepthExceeded,
    #[error("F: {0}")]
    BuiltinF(String),
    #[error("invalid layout options: {0}")]
    BadLayout(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Ok,
    RuntimeError {
        pos: Position,
        kind: RuntimeErrorKind,
    },
}

/// `steps` counts every statement execution and expression evaluation; it is
/// deterministic for a deterministic program and stands in for wall time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecResult {
    pub stdout: String,
    pub steps: u64,
    pub status: ExecStatus,
}

impl ExecResult {
    pub fn ok(&self) -> bool {
        self.status == ExecStatus::Ok
    }
}

type Container = Rc<RefCell<RestructuredContainer<i64>>>;

#[derive(Clone)]
enum Value {
    Int(i64),
    Bool(bool),
    Container(Container),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "boolean",
            Value::Container(_) => "container",
        }
    }
}

struct RtError {
    pos: Position,
    kind: RuntimeErrorKind,
}

enum Flow {
    Normal,
    Return(Value),
}

type ExecOutcome<T> = Result<T, RtError>;

pub fn execute(program: &Program, opts: &ExecOptions) -> ExecResult {
    let mut functions: HashMap<&str, &FunctionDef> = HashMap::new();
    for item in &program.items {
        if let Item::Function(f) = item {
            functions.insert(f.name.as_str(), f);
        }
    }
    let mut interp = Interp {
        opts,
        functions,
        scopes: vec![Vec::new()],
        stdout: String::new(),
        steps: 0,
        call_depth: 0,
    };
    let mut status = ExecStatus::Ok;
    if let Err(e) = interp.check_layout(program) {
        status = ExecStatus::RuntimeError {
            pos: e.pos,
            kind: e.kind,
        };
    } else {
        for item in &program.items {
            if let Item::Stmt(stmt) = item {
                match interp.exec_stmt(stmt) {
                    Ok(Flow::Normal) => {}
                    Ok(Flow::Return(_)) => unreachable!("top level returns are errors"),
                    Err(e) => {
                        status = ExecStatus::RuntimeError {
                            pos: e.pos,
                            kind: e.kind,
                        };
                        break;
                    }
                }
            }
        }
    }
    ExecResult {
        stdout: interp.stdout,
        steps: interp.steps,
        status,
    }
}

struct Interp<'p> {
    opts: &'p ExecOptions,
    functions: HashMap<&'p str, &'p FunctionDef>,
    /// Innermost scope last. Scopes are small, so each is a vector scanned
    /// back to front, which also gives shadowing within a scope.
    scopes: Vec<Vec<(&'p str, Value)>>,
    stdout: String,
    steps: u64,
    call_depth: usize,
}

impl<'p> Interp<'p> {
    fn check_layout(&self, program: &Program) -> ExecOutcome<()> {
        let pos = Position {
            line: 1,
            column: 1,
            offset: 0,
        };
        let pos = program
            .items
            .first()
            .map(|item| match item {
                Item::Function(f) => f.pos,
                Item::Stmt(s) => stmt_pos(s),
            })
            .unwrap_or(pos);
        if self.opts.split_k < 2 {
            return Err(RtError {
                pos,
                kind: RuntimeErrorKind::BadLayout("split parts must be at least 2".into()),
            });
        }
        if self.opts.fold_cols < 1 {
            return Err(RtError {
                pos,
                kind: RuntimeErrorKind::BadLayout("fold columns must be at least 1".into()),
            });
        }
        Ok(())
    }

    fn declare(&mut self, name: &'p str, value: Value) {
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .push((name, value));
    }

    fn lookup(&self, name: &str, pos: Position) -> ExecOutcome<Value> {
        for scope in self.scopes.iter().rev() {
            for (n, v) in scope.iter().rev() {
                if *n == name {
                    return Ok(v.clone());
                }
            }
        }
        Err(RtError {
            pos,
            kind: RuntimeErrorKind::UndefinedVariable(name.to_string()),
        })
    }

    fn assign(&mut self, name: &str, value: Value, pos: Position) -> ExecOutcome<()> {
        for scope in self.scopes.iter_mut().rev() {
            for (n, slot) in scope.iter_mut().rev() {
                if *n == name {
                    *slot = value;
                    return Ok(());
                }
            }
        }
        Err(RtError {
            pos,
            kind: RuntimeErrorKind::UndefinedVariable(name.to_string()),
        })
    }

    fn exec_block(&mut self, body: &'p [Stmt]) -> ExecOutcome<Flow> {
        self.scopes.push(Vec::new());
        let result = self.exec_all(body);
        self.scopes.pop();
        result
    }

    fn exec_all(&mut self, body: &'p [Stmt]) -> ExecOutcome<Flow> {
        for stmt in body {
            if let Flow::Return(v) = self.exec_stmt(stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &'p Stmt) -> ExecOutcome<Flow> {
        self.steps += 1;
        match stmt {
            Stmt::DeclInt { name, init, .. } => {
                let value = match init {
                    Some(e) => Value::Int(self.eval_int(e)?),
                    None => Value::Int(0),
                };
                self.declare(name, value);
                Ok(Flow::Normal)
            }
            Stmt::DeclContainer {
                name, kind, size, ..
            } => {
                let n = self.eval_int(size)?;
                if n < 0 {
                    return Err(RtError {
                        pos: size.pos(),
                        kind: RuntimeErrorKind::BadSize(n),
                    });
                }
                let container = self.make_container(*kind, n as usize, size.pos())?;
                self.declare(name, Value::Container(container));
                Ok(Flow::Normal)
            }
            Stmt::Assign { name, value, pos } => {
                let v = self.eval_expr(value)?;
                self.assign(name, v, *pos)?;
                Ok(Flow::Normal)
            }
            Stmt::Expr { expr, .. } => {
                self.eval_expr(expr)?;
                Ok(Flow::Normal)
            }
            Stmt::Print { arg, .. } => {
                match arg {
                    PrintArg::Expr(e) => {
                        let v = self.eval_int(e)?;
                        writeln!(self.stdout, "{v}").expect("string write");
                    }
                    PrintArg::Str(s) => {
                        self.stdout.push_str(s);
                        self.stdout.push('\n');
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                if self.eval_bool(cond)? {
                    self.exec_block(then_branch)
                } else if let Some(body) = else_branch {
                    self.exec_block(body)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::While { cond, body, .. } => {
                while self.eval_bool(cond)? {
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
                ..
            } => {
                self.scopes.push(Vec::new());
                let result = self.exec_for(init, cond, update, body);
                self.scopes.pop();
                result
            }
            Stmt::Return { value, pos } => {
                if self.call_depth == 0 {
                    return Err(RtError {
                        pos: *pos,
                        kind: RuntimeErrorKind::ReturnOutsideFunction,
                    });
                }
                let v = self.eval_expr(value)?;
                Ok(Flow::Return(v))
            }
            Stmt::Block { body, .. } => self.exec_block(body),
        }
    }

    fn exec_for(
        &mut self,
        init: &'p Option<Box<Stmt>>,
        cond: &'p Option<Expr>,
        update: &'p Option<Box<Stmt>>,
        body: &'p [Stmt],
    ) -> ExecOutcome<Flow> {
        if let Some(stmt) = init {
            if let Flow::Return(v) = self.exec_stmt(stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        loop {
            if let Some(c) = cond {
                if !self.eval_bool(c)? {
                    return Ok(Flow::Normal);
                }
            }
            if let Flow::Return(v) = self.exec_block(body)? {
                return Ok(Flow::Return(v));
            }
            if let Some(stmt) = update {
                if let Flow::Return(v) = self.exec_stmt(stmt)? {
                    return Ok(Flow::Return(v));
                }
            }
        }
    }

    fn make_container(
        &self,
        kind: ArrayKind,
        size: usize,
        pos: Position,
    ) -> ExecOutcome<Container> {
        let container = match kind {
            ArrayKind::Split => RestructuredContainer::split(size, self.opts.split_k, 0),
            ArrayKind::Fold => RestructuredContainer::fold(size, self.opts.fold_cols, 0),
            ArrayKind::Flatten => Ok(RestructuredContainer::flat(1, size, 0)),
        };
        container
            .map(|c| Rc::new(RefCell::new(c)))
            .map_err(|e| RtError {
                pos,
                kind: RuntimeErrorKind::BadLayout(e.to_string()),
            })
    }

    fn eval_int(&mut self, expr: &'p Expr) -> ExecOutcome<i64> {
        match self.eval_expr(expr)? {
            Value::Int(v) => Ok(v),
            other => Err(RtError {
                pos: expr.pos(),
                kind: RuntimeErrorKind::TypeMismatch(format!(
                    "expected int, found {}",
                    other.type_name()
                )),
            }),
        }
    }

    fn eval_bool(&mut self, expr: &'p Expr) -> ExecOutcome<bool> {
        match self.eval_expr(expr)? {
            Value::Bool(v) => Ok(v),
            other => Err(RtError {
                pos: expr.pos(),
                kind: RuntimeErrorKind::TypeMismatch(format!(
                    "condition must be boolean, found {}",
                    other.type_name()
                )),
            }),
        }
    }

    fn eval_expr(&mut self, expr: &'p Expr) -> ExecOutcome<Value> {
        self.steps += 1;
        match expr {
            Expr::Int { value, .. } => Ok(Value::Int(*value)),
            Expr::Var { name, pos } => self.lookup(name, *pos),
            Expr::Neg { operand, pos } => {
                let v = self.eval_int(operand)?;
                v.checked_neg().map(Value::Int).ok_or(RtError {
                    pos: *pos,
                    kind: RuntimeErrorKind::Overflow,
                })
            }
            Expr::Bin { op, lhs, rhs, pos } => {
                let a = self.eval_int(lhs)?;
                let b = self.eval_int(rhs)?;
                self.apply_bin(*op, a, b, *pos)
            }
            Expr::Call { name, args, pos } => self.call(name, args, *pos),
            Expr::Method {
                target,
                method,
                args,
                pos,
            } => self.method_call(target, *method, args, *pos),
        }
    }

    fn apply_bin(&self, op: BinOpKind, a: i64, b: i64, pos: Position) -> ExecOutcome<Value> {
        let arith = |r: Option<i64>| {
            r.map(Value::Int).ok_or(RtError {
                pos,
                kind: RuntimeErrorKind::Overflow,
            })
        };
        match op {
            BinOpKind::Add => arith(a.checked_add(b)),
            BinOpKind::Sub => arith(a.checked_sub(b)),
            BinOpKind::Mul => arith(a.checked_mul(b)),
            BinOpKind::Div => {
                if b == 0 {
                    Err(RtError {
                        pos,
                        kind: RuntimeErrorKind::DivisionByZero,
                    })
                } else {
                    arith(a.checked_div(b))
                }
            }
            BinOpKind::Rem => {
                if b == 0 {
                    Err(RtError {
                        pos,
                        kind: RuntimeErrorKind::DivisionByZero,
                    })
                } else {
                    arith(a.checked_rem(b))
                }
            }
            BinOpKind::Eq => Ok(Value::Bool(a == b)),
            BinOpKind::Ne => Ok(Value::Bool(a != b)),
            BinOpKind::Lt => Ok(Value::Bool(a < b)),
            BinOpKind::Le => Ok(Value::Bool(a <= b)),
            BinOpKind::Gt => Ok(Value::Bool(a > b)),
            BinOpKind::Ge => Ok(Value::Bool(a >= b)),
        }
    }

    fn call(&mut self, name: &str, args: &'p [Expr], pos: Position) -> ExecOutcome<Value> {
        if let Some(func) = self.functions.get(name) {
            return self.call_user(func, args, pos);
        }
        if name == "F" {
            return self.call_builtin_f(args, pos);
        }
        Err(RtError {
            pos,
            kind: RuntimeErrorKind::UndefinedFunction(name.to_string()),
        })
    }

    fn call_builtin_f(&mut self, args: &'p [Expr], pos: Position) -> ExecOutcome<Value> {
        if args.len() != 2 {
            return Err(RtError {
                pos,
                kind: RuntimeErrorKind::ArgCount {
                    name: "F".to_string(),
                    expected: 2,
                    got: args.len(),
                },
            });
        }
        let a = self.eval_int(&args[0])?;
        let k = self.eval_int(&args[1])?;
        let k = usize::try_from(k).map_err(|_| RtError {
            pos,
            kind: RuntimeErrorKind::BuiltinF(format!("depth {k} is negative")),
        })?;
        consthide::eval_f(a, k, &self.opts.table)
            .map(Value::Int)
            .map_err(|e| RtError {
                pos,
                kind: RuntimeErrorKind::BuiltinF(e.to_string()),
            })
    }

    fn call_user(
        &mut self,
        func: &'p FunctionDef,
        args: &'p [Expr],
        pos: Position,
    ) -> ExecOutcome<Value> {
        if args.len() != func.params.len() {
            return Err(RtError {
                pos,
                kind: RuntimeErrorKind::ArgCount {
                    name: func.name.clone(),
                    expected: func.params.len(),
                    got: args.len(),
                },
            });
        }
        if self.call_depth >= self.opts.max_call_depth {
            return Err(RtError {
                pos,
                kind: RuntimeErrorKind::CallDepthExceeded,
            });
        }
        let mut frame = Vec::new();
        for (param, arg) in func.params.iter().zip(args) {
            let value = self.eval_expr(arg)?;
            match (&param.container, &value) {
                (None, Value::Int(_)) | (Some(_), Value::Container(_)) => {}
                (None, other) => {
                    return Err(RtError {
                        pos: arg.pos(),
                        kind: RuntimeErrorKind::TypeMismatch(format!(
                            "parameter '{}' expects int, found {}",
                            param.name,
                            other.type_name()
                        )),
                    });
                }
                (Some(_), other) => {
                    return Err(RtError {
                        pos: arg.pos(),
                        kind: RuntimeErrorKind::TypeMismatch(format!(
                            "parameter '{}' expects a container, found {}",
                            param.name,
                            other.type_name()
                        )),
                    });
                }
            }
            frame.push((param.name.as_str(), value));
        }
        // Functions close over nothing: the frame replaces the scope stack.
        let saved = std::mem::replace(&mut self.scopes, vec![frame]);
        self.call_depth += 1;
        let outcome = self.exec_all(&func.body);
        self.call_depth -= 1;
        self.scopes = saved;
        match outcome? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Int(0)),
        }
    }

    fn method_call(
        &mut self,
        target: &str,
        method: MethodKind,
        args: &'p [Expr],
        pos: Position,
    ) -> ExecOutcome<Value> {
        let container = match self.lookup(target, pos)? {
            Value::Container(c) => c,
            other => {
                return Err(RtError {
                    pos,
                    kind: RuntimeErrorKind::TypeMismatch(format!(
                        "'{}' is {}, not a container",
                        target,
                        other.type_name()
                    )),
                });
            }
        };
        let expect_args = |n: usize| -> ExecOutcome<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(RtError {
                    pos,
                    kind: RuntimeErrorKind::ArgCount {
                        name: method.name().to_string(),
                        expected: n,
                        got: args.len(),
                    },
                })
            }
        };
        let index_of = |v: i64, len: usize| -> ExecOutcome<usize> {
            usize::try_from(v)
                .ok()
                .filter(|&p| p < len)
                .ok_or(RtError {
                    pos,
                    kind: RuntimeErrorKind::OutOfBounds { pos: v, len },
                })
        };
        match method {
            MethodKind::SetArray => {
                expect_args(2)?;
                let raw = self.eval_int(&args[0])?;
                let v = self.eval_int(&args[1])?;
                let mut c = container.borrow_mut();
                let idx = index_of(raw, c.len())?;
                c.set(idx, v).expect("index checked against length");
                Ok(Value::Int(0))
            }
            MethodKind::GetArray => {
                expect_args(1)?;
                let raw = self.eval_int(&args[0])?;
                let c = container.borrow();
                let idx = index_of(raw, c.len())?;
                Ok(Value::Int(
                    *c.get(idx).expect("index checked against length"),
                ))
            }
            MethodKind::LengthArray => {
                expect_args(0)?;
                let len = container.borrow().len();
                Ok(Value::Int(len as i64))
            }
        }
    }
}

fn stmt_pos(stmt: &Stmt) -> Position {
    match stmt {
        Stmt::DeclInt { pos, .. }
        | Stmt::DeclContainer { pos, .. }
        | Stmt::Assign { pos, .. }
        | Stmt::Expr { pos, .. }
        | Stmt::Print { pos, .. }
        | Stmt::If { pos, .. }
        | Stmt::While { pos, .. }
        | Stmt::For { pos, .. }
        | Stmt::Return { pos, .. }
        | Stmt::Block { pos, .. } => *pos,
    }
}

/// Evaluates a closed expression: variables, methods and non-F calls are
/// errors. Used to check that a replacement expression equals its original
/// constant without running a whole program.
pub fn eval_const_expr(expr: &Expr, table: &YFactorTable) -> Result<i64, RuntimeErrorKind> {
    match expr {
        Expr::Int { value, .. } => Ok(*value),
        Expr::Neg { operand, .. } => eval_const_expr(operand, table)?
            .checked_neg()
            .ok_or(RuntimeErrorKind::Overflow),
        Expr::Bin { op, lhs, rhs, .. } => {
            let a = eval_const_expr(lhs, table)?;
            let b = eval_const_expr(rhs, table)?;
            match op {
                BinOpKind::Add => a.checked_add(b).ok_or(RuntimeErrorKind::Overflow),
                BinOpKind::Sub => a.checked_sub(b).ok_or(RuntimeErrorKind::Overflow),
                BinOpKind::Mul => a.checked_mul(b).ok_or(RuntimeErrorKind::Overflow),
                BinOpKind::Div => {
                    if b == 0 {
                        Err(RuntimeErrorKind::DivisionByZero)
                    } else {
                        a.checked_div(b).ok_or(RuntimeErrorKind::Overflow)
                    }
                }
                BinOpKind::Rem => {
                    if b == 0 {
                        Err(RuntimeErrorKind::DivisionByZero)
                    } else {
                        a.checked_rem(b).ok_or(RuntimeErrorKind::Overflow)
                    }
                }
                _ => Err(RuntimeErrorKind::TypeMismatch(
                    "comparison in constant expression".to_string(),
                )),
            }
        }
        Expr::Call { name, args, .. } if name == "F" && args.len() == 2 => {
            let a = eval_const_expr(&args[0], table)?;
            let k = eval_const_expr(&args[1], table)?;
            let k =
                usize::try_from(k).map_err(|_| RuntimeErrorKind::BuiltinF("negative depth".into()))?;
            consthide::eval_f(a, k, table).map_err(|e| RuntimeErrorKind::BuiltinF(e.to_string()))
        }
        Expr::Call { name, .. } => Err(RuntimeErrorKind::UndefinedFunction(name.clone())),
        Expr::Var { name, .. } => Err(RuntimeErrorKind::UndefinedVariable(name.clone())),
        Expr::Method { target, .. } => Err(RuntimeErrorKind::UndefinedVariable(target.clone())),
    }
}
