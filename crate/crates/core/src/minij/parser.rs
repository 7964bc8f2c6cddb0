//! Recursive-descent parser from frontend tokens to the MiniJ syntax tree.
//!
//! Closure requirement: every rendered output of the rewriter on a valid
//! MiniJ input must parse successfully, so the grammar accepts everything
//! the rewriter can emit (nested F calls, parenthesized multipliers, the
//! emitted runtime function definitions).

use std::fmt;

use thiserror::Error;

use crate::arraylib::ArrayKind;
use crate::frontend::{self, FrontendError, Position, Token, TokenKind};
use crate::minij::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Option<Position>,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{}:{}: ", p.line, p.column)?,
            None => write!(f, "end of input: ")?,
        }
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MiniJError {
    #[error(transparent)]
    Lex(#[from] FrontendError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub fn parse_program(source: &str) -> Result<Program, MiniJError> {
    let stripped = frontend::strip_comments(source)?;
    let tokens = frontend::tokenize(&stripped)?;
    let mut parser = Parser { tokens, i: 0 };
    Ok(parser.program()?)
}

/// Parses a standalone expression; trailing tokens are an error.
pub fn parse_expression(source: &str) -> Result<Expr, MiniJError> {
    let stripped = frontend::strip_comments(source)?;
    let tokens = frontend::tokenize(&stripped)?;
    let mut parser = Parser { tokens, i: 0 };
    let expr = parser.expr()?;
    if parser.i < parser.tokens.len() {
        return Err(parser.err(&["end of expression"]).into());
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.i)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.tokens.get(self.i + ahead)
    }

    fn at_punct(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(s))
    }

    fn at_keyword(&self, s: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && t.text == s)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.i].clone();
        self.i += 1;
        t
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        let (pos, found) = match self.peek() {
            Some(t) => (Some(t.pos), format!("'{}'", t.text)),
            None => (None, "end of input".to_string()),
        };
        ParseError {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect_punct(&mut self, s: &str) -> Result<Token, ParseError> {
        if self.at_punct(s) {
            Ok(self.bump())
        } else {
            Err(self.err(&[&format!("'{s}'")]))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Token, ParseError> {
        if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
            Ok(self.bump())
        } else {
            Err(self.err(&[what]))
        }
    }

    fn container_kind_at(&self, ahead: usize) -> Option<ArrayKind> {
        let t = self.peek_at(ahead)?;
        if t.kind == TokenKind::Identifier {
            ArrayKind::from_type_name(&t.text)
        } else {
            None
        }
    }

    /// Skips a balanced `<...>` generic segment if one starts here.
    fn skip_generic(&mut self) {
        if !self.at_punct("<") {
            return;
        }
        let mut angle = 0i32;
        while let Some(t) = self.peek() {
            if t.is_punct("<") {
                angle += 1;
            } else if t.is_punct(">") {
                angle -= 1;
                if angle == 0 {
                    self.bump();
                    return;
                }
            } else if t.is_punct(";") || t.is_punct("{") {
                return;
            }
            self.bump();
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            if self.at_punct(";") {
                self.bump();
                continue;
            }
            if self.at_keyword("int")
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.peek_at(2).is_some_and(|t| t.is_punct("("))
            {
                items.push(Item::Function(self.function_def()?));
            } else {
                items.push(Item::Stmt(self.stmt()?));
            }
        }
        Ok(Program { items })
    }

    fn function_def(&mut self) -> Result<FunctionDef, ParseError> {
        let pos = self.bump().pos;
        let name = self.expect_ident("function name")?.text;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                params.push(self.param()?);
                if self.at_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let body = self.block_body()?;
        Ok(FunctionDef {
            name,
            params,
            body,
            pos,
        })
    }

    fn param(&mut self) -> Result<Param, ParseError> {
        if self.at_keyword("int") {
            let pos = self.bump().pos;
            let name = self.expect_ident("parameter name")?.text;
            return Ok(Param {
                name,
                container: None,
                pos,
            });
        }
        if let Some(kind) = self.container_kind_at(0) {
            let pos = self.bump().pos;
            self.skip_generic();
            let name = self.expect_ident("parameter name")?.text;
            return Ok(Param {
                name,
                container: Some(kind),
                pos,
            });
        }
        Err(self.err(&["'int'", "container type"]))
    }

    /// Statements up to and including the matching `}`.
    fn block_body(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut body = Vec::new();
        loop {
            if self.at_punct("}") {
                self.bump();
                return Ok(body);
            }
            if self.peek().is_none() {
                return Err(self.err(&["'}'"]));
            }
            if self.at_punct(";") {
                self.bump();
                continue;
            }
            body.push(self.stmt()?);
        }
    }

    /// A single statement or block, normalized to a statement list.
    fn branch(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.at_punct("{") {
            self.bump();
            self.block_body()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.at_keyword("int") {
            return self.decl_int();
        }
        if self.at_keyword("if") {
            return self.if_stmt();
        }
        if self.at_keyword("while") {
            return self.while_stmt();
        }
        if self.at_keyword("for") {
            return self.for_stmt();
        }
        if self.at_keyword("return") {
            let pos = self.bump().pos;
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Return { value, pos });
        }
        if self.at_punct("{") {
            let pos = self.bump().pos;
            let body = self.block_body()?;
            return Ok(Stmt::Block { body, pos });
        }
        if self.container_kind_at(0).is_some() {
            return self.decl_container();
        }
        if let Some(t) = self.peek() {
            if t.is_ident("print") && self.peek_at(1).is_some_and(|n| n.is_punct("(")) {
                return self.print_stmt();
            }
            if t.kind == TokenKind::Identifier
                && self.peek_at(1).is_some_and(|n| n.is_punct("="))
            {
                let pos = t.pos;
                let name = self.bump().text;
                self.bump();
                let value = self.expr()?;
                self.expect_punct(";")?;
                return Ok(Stmt::Assign { name, value, pos });
            }
        }
        let pos = self
            .peek()
            .map(|t| t.pos)
            .ok_or_else(|| self.err(&["statement"]))?;
        let expr = self.expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Expr { expr, pos })
    }

    fn decl_int(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.bump().pos;
        let name = self.expect_ident("variable name")?.text;
        let init = if self.at_punct("=") {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_punct(";")?;
        Ok(Stmt::DeclInt { name, init, pos })
    }

    fn decl_container(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.peek().unwrap().pos;
        self.bump();
        self.skip_generic();
        let name = self.expect_ident("variable name")?.text;
        self.expect_punct("=")?;
        if !self.at_keyword("new") {
            return Err(self.err(&["'new'"]));
        }
        self.bump();
        let kind = self
            .container_kind_at(0)
            .ok_or_else(|| self.err(&["container type"]))?;
        self.bump();
        self.skip_generic();
        self.expect_punct("(")?;
        let size = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct(";")?;
        Ok(Stmt::DeclContainer {
            name,
            kind,
            size,
            pos,
        })
    }

    fn print_stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.bump().pos;
        self.expect_punct("(")?;
        let arg = if self
            .peek()
            .is_some_and(|t| t.kind == TokenKind::StringLiteral)
            && self.peek_at(1).is_some_and(|t| t.is_punct(")"))
        {
            let text = self.bump().text;
            PrintArg::Str(text[1..text.len() - 1].to_string())
        } else {
            PrintArg::Expr(self.expr()?)
        };
        self.expect_punct(")")?;
        self.expect_punct(";")?;
        Ok(Stmt::Print { arg, pos })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.bump().pos;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then_branch = self.branch()?;
        let else_branch = if self.at_keyword("else") {
            self.bump();
            Some(self.branch()?)
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
            pos,
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.bump().pos;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let body = self.branch()?;
        Ok(Stmt::While { cond, body, pos })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.bump().pos;
        self.expect_punct("(")?;
        let init = if self.at_punct(";") {
            self.bump();
            None
        } else {
            Some(Box::new(self.simple_clause(true)?))
        };
        let cond = if self.at_punct(";") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(";")?;
        let update = if self.at_punct(")") {
            None
        } else {
            Some(Box::new(self.simple_clause(false)?))
        };
        self.expect_punct(")")?;
        let body = self.branch()?;
        Ok(Stmt::For {
            init,
            cond,
            update,
            body,
            pos,
        })
    }

    /// Declaration (init position only), assignment, or bare expression.
    /// Consumes the trailing `;` only in init position.
    fn simple_clause(&mut self, init_position: bool) -> Result<Stmt, ParseError> {
        let stmt = if init_position && self.at_keyword("int") {
            let pos = self.bump().pos;
            let name = self.expect_ident("variable name")?.text;
            self.expect_punct("=")?;
            let value = self.expr()?;
            Stmt::DeclInt {
                name,
                init: Some(value),
                pos,
            }
        } else if self
            .peek()
            .is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(1).is_some_and(|t| t.is_punct("="))
        {
            let pos = self.peek().unwrap().pos;
            let name = self.bump().text;
            self.bump();
            let value = self.expr()?;
            Stmt::Assign { name, value, pos }
        } else {
            let pos = self
                .peek()
                .map(|t| t.pos)
                .ok_or_else(|| self.err(&["for clause"]))?;
            Stmt::Expr {
                expr: self.expr()?,
                pos,
            }
        };
        if init_position {
            self.expect_punct(";")?;
        }
        Ok(stmt)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.is_punct("==") => BinOpKind::Eq,
                Some(t) if t.is_punct("!=") => BinOpKind::Ne,
                Some(t) if t.is_punct("<=") => BinOpKind::Le,
                Some(t) if t.is_punct(">=") => BinOpKind::Ge,
                Some(t) if t.is_punct("<") => BinOpKind::Lt,
                Some(t) if t.is_punct(">") => BinOpKind::Gt,
                _ => break,
            };
            let pos = self.bump().pos;
            let rhs = self.additive()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.is_punct("+") => BinOpKind::Add,
                Some(t) if t.is_punct("-") => BinOpKind::Sub,
                _ => break,
            };
            let pos = self.bump().pos;
            let rhs = self.multiplicative()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.is_punct("*") => BinOpKind::Mul,
                Some(t) if t.is_punct("/") => BinOpKind::Div,
                Some(t) if t.is_punct("%") => BinOpKind::Rem,
                _ => break,
            };
            let pos = self.bump().pos;
            let rhs = self.unary()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at_punct("-") {
            let pos = self.bump().pos;
            let operand = self.unary()?;
            return Ok(Expr::Neg {
                operand: Box::new(operand),
                pos,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.err(&["expression"]));
        };
        match t.kind {
            TokenKind::IntLiteral => {
                let tok = self.bump();
                let value: i64 = tok.text.parse().map_err(|_| ParseError {
                    pos: Some(tok.pos),
                    expected: vec!["integer literal within signed 64-bit range".to_string()],
                    found: format!("'{}'", tok.text),
                })?;
                Ok(Expr::Int {
                    value,
                    pos: tok.pos,
                })
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Identifier => {
                let tok = self.bump();
                if self.at_punct("(") {
                    self.bump();
                    let args = self.args()?;
                    return Ok(Expr::Call {
                        name: tok.text,
                        args,
                        pos: tok.pos,
                    });
                }
                if self.at_punct(".") {
                    self.bump();
                    let method_tok = self.expect_ident("container method name")?;
                    let method =
                        MethodKind::from_name(&method_tok.text).ok_or_else(|| ParseError {
                            pos: Some(method_tok.pos),
                            expected: vec![
                                "'setArray'".to_string(),
                                "'getArray'".to_string(),
                                "'lengthArray'".to_string(),
                            ],
                            found: format!("'{}'", method_tok.text),
                        })?;
                    self.expect_punct("(")?;
                    let args = self.args()?;
                    return Ok(Expr::Method {
                        target: tok.text,
                        method,
                        args,
                        pos: tok.pos,
                    });
                }
                Ok(Expr::Var {
                    name: tok.text,
                    pos: tok.pos,
                })
            }
            _ => Err(self.err(&["expression"])),
        }
    }

    /// Argument list after `(`, consuming the closing `)`.
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.at_punct(")") {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.at_punct(",") {
                self.bump();
            } else {
                self.expect_punct(")")?;
                return Ok(args);
            }
        }
    }
}
