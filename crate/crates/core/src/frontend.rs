//! Lexical frontend: comment stripping, tokenization, statement splitting
//! and candidate classification.
//!
//! The rewriter works on token spans, so the tokenizer is lossless:
//! concatenating token texts with the original inter-token whitespace
//! reproduces the comment-stripped source byte for byte.

use std::collections::HashSet;

use thiserror::Error;

use crate::arraylib::ArrayKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{line}:{column}: unterminated block comment")]
    UnterminatedBlockComment { line: u32, column: u32 },
    #[error("{line}:{column}: unterminated {what} literal")]
    UnterminatedLiteral {
        what: &'static str,
        line: u32,
        column: u32,
    },
    #[error("{line}:{column}: unexpected character '{ch}'")]
    UnexpectedChar { ch: char, line: u32, column: u32 },
    #[error("{line}:{column}: unbalanced '{delim}'")]
    Unbalanced { delim: char, line: u32, column: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    StringLiteral,
    CharLiteral,
    Punct,
}

/// 1-based line and column plus byte offset into the stripped source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Position,
}

impl Token {
    pub fn end_offset(&self) -> usize {
        self.pos.offset + self.text.len()
    }

    pub fn is_punct(&self, s: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == s
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.kind == TokenKind::Identifier && self.text == s
    }
}

const KEYWORDS: [&str; 13] = [
    "class", "else", "for", "if", "int", "new", "private", "protected", "public", "return",
    "static", "void", "while",
];

const TWO_CHAR_PUNCTS: [&str; 13] = [
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
];

const SINGLE_PUNCTS: &str = "(){}[];,.<>=!+-*/%&|^~:?";

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Removes `//` and `/* */` comments outside string and char literals.
/// Newlines inside removed block comments are kept so positions later in the
/// file stay on their original lines.
pub fn strip_comments(source: &str) -> Result<String, FrontendError> {
    let mut out = String::with_capacity(source.len());
    let bytes: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut column = 1u32;
    let advance = |c: char, line: &mut u32, column: &mut u32| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == '/' && i + 1 < bytes.len() && bytes[i + 1] == '/' {
            while i < bytes.len() && bytes[i] != '\n' {
                advance(bytes[i], &mut line, &mut column);
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < bytes.len() && bytes[i + 1] == '*' {
            let (start_line, start_column) = (line, column);
            advance(bytes[i], &mut line, &mut column);
            advance(bytes[i + 1], &mut line, &mut column);
            i += 2;
            let mut closed = false;
            while i < bytes.len() {
                if bytes[i] == '*' && i + 1 < bytes.len() && bytes[i + 1] == '/' {
                    advance(bytes[i], &mut line, &mut column);
                    advance(bytes[i + 1], &mut line, &mut column);
                    i += 2;
                    closed = true;
                    break;
                }
                if bytes[i] == '\n' {
                    out.push('\n');
                }
                advance(bytes[i], &mut line, &mut column);
                i += 1;
            }
            if !closed {
                return Err(FrontendError::UnterminatedBlockComment {
                    line: start_line,
                    column: start_column,
                });
            }
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            out.push(c);
            advance(c, &mut line, &mut column);
            i += 1;
            let mut closed = false;
            while i < bytes.len() && bytes[i] != '\n' {
                let d = bytes[i];
                out.push(d);
                advance(d, &mut line, &mut column);
                i += 1;
                if d == '\\' && i < bytes.len() {
                    out.push(bytes[i]);
                    advance(bytes[i], &mut line, &mut column);
                    i += 1;
                    continue;
                }
                if d == quote {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(FrontendError::UnterminatedLiteral {
                    what: if quote == '"' { "string" } else { "char" },
                    line,
                    column,
                });
            }
            continue;
        }
        out.push(c);
        advance(c, &mut line, &mut column);
        i += 1;
    }
    Ok(out)
}

/// Maximal-munch tokenizer over comment-stripped source. A digit run touching
/// identifier characters is lexed as one identifier-like token, never as an
/// integer literal.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut column = 1u32;
    let mut offset = 0usize;
    macro_rules! step {
        ($c:expr) => {{
            let c: char = $c;
            offset += c.len_utf8();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            step!(c);
            i += 1;
            continue;
        }
        let pos = Position { line, column, offset };
        if is_ident_start(c) {
            let mut text = String::new();
            while i < chars.len() && is_ident_part(chars[i]) {
                text.push(chars[i]);
                step!(chars[i]);
                i += 1;
            }
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token { kind, text, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut text = String::new();
            let mut kind = TokenKind::IntLiteral;
            while i < chars.len() && chars[i].is_ascii_digit() {
                text.push(chars[i]);
                step!(chars[i]);
                i += 1;
            }
            if i < chars.len() && is_ident_part(chars[i]) {
                kind = TokenKind::Identifier;
                while i < chars.len() && is_ident_part(chars[i]) {
                    text.push(chars[i]);
                    step!(chars[i]);
                    i += 1;
                }
            }
            tokens.push(Token { kind, text, pos });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let mut text = String::new();
            text.push(c);
            step!(c);
            i += 1;
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                let d = chars[i];
                text.push(d);
                step!(d);
                i += 1;
                if d == '\\' && i < chars.len() {
                    text.push(chars[i]);
                    step!(chars[i]);
                    i += 1;
                    continue;
                }
                if d == quote {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(FrontendError::UnterminatedLiteral {
                    what: if quote == '"' { "string" } else { "char" },
                    line: pos.line,
                    column: pos.column,
                });
            }
            tokens.push(Token {
                kind: if quote == '"' {
                    TokenKind::StringLiteral
                } else {
                    TokenKind::CharLiteral
                },
                text,
                pos,
            });
            continue;
        }
        if i + 1 < chars.len() {
            let pair: String = [c, chars[i + 1]].iter().collect();
            if TWO_CHAR_PUNCTS.contains(&pair.as_str()) {
                step!(c);
                step!(chars[i + 1]);
                i += 2;
                tokens.push(Token {
                    kind: TokenKind::Punct,
                    text: pair,
                    pos,
                });
                continue;
            }
        }
        if SINGLE_PUNCTS.contains(c) {
            step!(c);
            i += 1;
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: c.to_string(),
                pos,
            });
            continue;
        }
        return Err(FrontendError::UnexpectedChar {
            ch: c,
            line,
            column,
        });
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    CandidateDecl,
    CandidateAccess,
    Other,
}

/// Half-open token span `[start, end)` plus brace depth at its first token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub start: usize,
    pub end: usize,
    pub kind: StatementKind,
    pub depth: usize,
}

impl Statement {
    pub fn tokens<'a>(&self, tokens: &'a [Token]) -> &'a [Token] {
        &tokens[self.start..self.end]
    }
}

/// Splits at `;` outside parentheses/brackets and at every `{` and `}`.
/// `for(a;b;c)` headers stay whole because their semicolons sit inside
/// parentheses.
pub fn split_statements(tokens: &[Token]) -> Result<Vec<Statement>, FrontendError> {
    let mut statements = Vec::new();
    let mut start = 0usize;
    let mut paren = 0i32;
    let mut bracket = 0i32;
    let mut brace = 0usize;
    let mut span_depth = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        if i == start {
            span_depth = brace;
        }
        if tok.kind != TokenKind::Punct {
            continue;
        }
        match tok.text.as_str() {
            "(" => paren += 1,
            ")" => {
                paren -= 1;
                if paren < 0 {
                    return Err(FrontendError::Unbalanced {
                        delim: ')',
                        line: tok.pos.line,
                        column: tok.pos.column,
                    });
                }
            }
            "[" => bracket += 1,
            "]" => {
                bracket -= 1;
                if bracket < 0 {
                    return Err(FrontendError::Unbalanced {
                        delim: ']',
                        line: tok.pos.line,
                        column: tok.pos.column,
                    });
                }
            }
            ";" if paren == 0 && bracket == 0 => {
                statements.push(Statement {
                    start,
                    end: i + 1,
                    kind: StatementKind::Other,
                    depth: span_depth,
                });
                start = i + 1;
            }
            "{" => {
                statements.push(Statement {
                    start,
                    end: i + 1,
                    kind: StatementKind::Other,
                    depth: span_depth,
                });
                start = i + 1;
                brace += 1;
            }
            "}" => {
                if brace == 0 {
                    return Err(FrontendError::Unbalanced {
                        delim: '}',
                        line: tok.pos.line,
                        column: tok.pos.column,
                    });
                }
                brace -= 1;
                statements.push(Statement {
                    start,
                    end: i + 1,
                    kind: StatementKind::Other,
                    depth: brace,
                });
                start = i + 1;
            }
            _ => {}
        }
    }
    if let Some(last) = tokens.last() {
        if paren != 0 || bracket != 0 {
            return Err(FrontendError::Unbalanced {
                delim: if paren != 0 { '(' } else { '[' },
                line: last.pos.line,
                column: last.pos.column,
            });
        }
        if brace != 0 {
            return Err(FrontendError::Unbalanced {
                delim: '{',
                line: last.pos.line,
                column: last.pos.column,
            });
        }
    }
    if start < tokens.len() {
        statements.push(Statement {
            start,
            end: tokens.len(),
            kind: StatementKind::Other,
            depth: span_depth,
        });
    }
    Ok(statements)
}

/// Document-order symbol table of names declared with a container type.
/// Scope-insensitive by design: once a name has been declared as a container
/// anywhere, later accesses through it count as candidates.
#[derive(Debug, Default)]
pub struct Classifier {
    container_vars: HashSet<String>,
}

const ACCESS_METHODS: [&str; 3] = ["setArray", "getArray", "lengthArray"];

impl Classifier {
    pub fn new() -> Self {
        Classifier::default()
    }

    pub fn is_container_var(&self, name: &str) -> bool {
        self.container_vars.contains(name)
    }

    /// Classifies one statement and records any container declarations in it.
    pub fn classify(&mut self, tokens: &[Token], stmt: &Statement) -> StatementKind {
        let toks = stmt.tokens(tokens);
        let mut declared = false;
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.kind == TokenKind::Identifier && ArrayKind::from_type_name(&t.text).is_some() {
                let mut j = i + 1;
                if j < toks.len() && toks[j].is_punct("<") {
                    let mut angle = 0i32;
                    while j < toks.len() {
                        if toks[j].is_punct("<") {
                            angle += 1;
                        } else if toks[j].is_punct(">") {
                            angle -= 1;
                            if angle == 0 {
                                j += 1;
                                break;
                            }
                        }
                        j += 1;
                    }
                }
                if j < toks.len() && toks[j].kind == TokenKind::Identifier {
                    self.container_vars.insert(toks[j].text.clone());
                    declared = true;
                    i = j;
                }
            }
            i += 1;
        }
        if declared {
            return StatementKind::CandidateDecl;
        }
        for w in 0..toks.len().saturating_sub(3) {
            if toks[w].kind == TokenKind::Identifier
                && self.container_vars.contains(&toks[w].text)
                && toks[w + 1].is_punct(".")
                && toks[w + 2].kind == TokenKind::Identifier
                && ACCESS_METHODS.contains(&toks[w + 2].text.as_str())
                && toks[w + 3].is_punct("(")
            {
                return StatementKind::CandidateAccess;
            }
        }
        StatementKind::Other
    }
}

/// Strips, tokenizes, splits and classifies in one shot.
pub fn analyze(source: &str) -> Result<(String, Vec<Token>, Vec<Statement>), FrontendError> {
    let stripped = strip_comments(source)?;
    let tokens = tokenize(&stripped)?;
    let mut statements = split_statements(&tokens)?;
    let mut classifier = Classifier::new();
    for stmt in &mut statements {
        stmt.kind = classifier.classify(&tokens, stmt);
    }
    Ok((stripped, tokens, statements))
}
