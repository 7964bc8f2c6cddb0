//! Syntax tree for the MiniJ subset: integer arithmetic, containers,
//! structured control flow, `print`, and integer function definitions.

use crate::arraylib::ArrayKind;
use crate::frontend::Position;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Function(FunctionDef),
    Stmt(Stmt),
}

/// `int name(params) { body }`. All functions return int; a body that falls
/// off the end yields 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Position,
}

/// `container` is None for int parameters. Container parameters bind by
/// reference: mutations inside the callee are visible to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub container: Option<ArrayKind>,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    DeclInt {
        name: String,
        init: Option<Expr>,
        pos: Position,
    },
    DeclContainer {
        name: String,
        kind: ArrayKind,
        size: Expr,
        pos: Position,
    },
    Assign {
        name: String,
        value: Expr,
        pos: Position,
    },
    Expr {
        expr: Expr,
        pos: Position,
    },
    Print {
        arg: PrintArg,
        pos: Position,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
        pos: Position,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        pos: Position,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Vec<Stmt>,
        pos: Position,
    },
    Return {
        value: Expr,
        pos: Position,
    },
    Block {
        body: Vec<Stmt>,
        pos: Position,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintArg {
    Expr(Expr),
    /// Contents between the quotes, printed verbatim.
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOpKind {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    SetArray,
    GetArray,
    LengthArray,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::SetArray => "setArray",
            MethodKind::GetArray => "getArray",
            MethodKind::LengthArray => "lengthArray",
        }
    }

    pub fn from_name(name: &str) -> Option<MethodKind> {
        match name {
            "setArray" => Some(MethodKind::SetArray),
            "getArray" => Some(MethodKind::GetArray),
            "lengthArray" => Some(MethodKind::LengthArray),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int {
        value: i64,
        pos: Position,
    },
    Var {
        name: String,
        pos: Position,
    },
    Neg {
        operand: Box<Expr>,
        pos: Position,
    },
    Bin {
        op: BinOpKind,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Position,
    },
    /// Free function call: builtin `F` unless shadowed by a user definition.
    Call {
        name: String,
        args: Vec<Expr>,
        pos: Position,
    },
    /// Container method call on a named variable.
    Method {
        target: String,
        method: MethodKind,
        args: Vec<Expr>,
        pos: Position,
    },
}

impl Expr {
    pub fn pos(&self) -> Position {
        match self {
            Expr::Int { pos, .. }
            | Expr::Var { pos, .. }
            | Expr::Neg { pos, .. }
            | Expr::Bin { pos, .. }
            | Expr::Call { pos, .. }
            | Expr::Method { pos, .. } => *pos,
        }
    }
}
