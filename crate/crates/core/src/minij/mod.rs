//! MiniJ: the Java-subset language the rewriter targets, with a parser and
//! a tree-walking interpreter used as the differential-testing oracle.

pub mod ast;
mod interp;
mod parser;

pub use ast::{BinOpKind, Expr, FunctionDef, Item, MethodKind, Param, PrintArg, Program, Stmt};
pub use interp::{eval_const_expr, execute, ExecOptions, ExecResult, ExecStatus, RuntimeErrorKind};
pub use parser::{parse_expression, parse_program, MiniJError, ParseError};
