//! Statement-level obfuscation: hides integer literals behind F expressions,
//! multiplies constant-free container indices by hidden ones, and assembles
//! iterated passes plus optional runtime source into the output document.
//!
//! Rewrites are byte-range splices over the comment-stripped input, so the
//! whitespace between surviving tokens is preserved and the output stays
//! diffable against the input.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arraylib::ArrayKind;
use crate::consthide::{emit_f_runtime, render_expr, ConstHideError, Hider, HidingConfig};
use crate::frontend::{self, Classifier, FrontendError, Statement, StatementKind, Token, TokenKind};
use crate::metrics::{f_call_sites, f_extent_map, FSite};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Output stays inside the interpretable subset; the verified path.
    MiniJ,
    /// Arbitrary Java-like input; same rewrites, no semantic verification.
    Textual,
}

#[derive(Debug, Clone)]
pub struct ObfuscationConfig {
    pub hiding: HidingConfig,
    pub iterations: u32,
    pub array_kind: ArrayKind,
    /// Backing parts used when emitting split runtime source.
    pub k: usize,
    /// Row width used when emitting fold or flatten runtime source.
    pub cols: usize,
    pub emit_runtime: bool,
    pub mode: Mode,
}

impl Default for ObfuscationConfig {
    fn default() -> Self {
        ObfuscationConfig {
            hiding: HidingConfig::default(),
            iterations: 1,
            array_kind: ArrayKind::Split,
            k: 2,
            cols: 16,
            emit_runtime: false,
            mode: Mode::MiniJ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PassCounts {
    pub constants_hidden: usize,
    pub hidden_ones_inserted: usize,
    pub statements_touched: usize,
}

/// Totals plus the per-pass breakdown; totals are the column sums.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RewriteReport {
    pub constants_hidden: usize,
    pub hidden_ones_inserted: usize,
    pub statements_touched: usize,
    pub per_iteration: Vec<PassCounts>,
}

impl RewriteReport {
    fn absorb(&mut self, pass: PassCounts) {
        self.constants_hidden += pass.constants_hidden;
        self.hidden_ones_inserted += pass.hidden_ones_inserted;
        self.statements_touched += pass.statements_touched;
        self.per_iteration.push(pass);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("{line}:{column}: literal {value} exceeds the magnitude bound {bound}")]
    LiteralTooLarge {
        value: i64,
        bound: i64,
        line: u32,
        column: u32,
    },
    #[error("{line}:{column}: integer literal '{text}' does not fit in 64 bits")]
    LiteralOverflow {
        text: String,
        line: u32,
        column: u32,
    },
    #[error("hiding failed: {0}")]
    Hide(#[from] ConstHideError),
    #[error("iterations must be at least 1")]
    ZeroIterations,
}

/// Runs the full pipeline `iterations` times on its own output, then
/// prepends the F runtime and container runtime source when requested.
/// Pass i draws from an RNG stream seeded with `seed + i`, so applying the
/// tool twice with seeds s and s+1 equals one two-iteration run with seed s.
pub fn obfuscate_program(
    source: &str,
    cfg: &ObfuscationConfig,
) -> Result<(String, RewriteReport), RewriteError> {
    if cfg.iterations == 0 {
        return Err(RewriteError::ZeroIterations);
    }
    let mut current = frontend::strip_comments(source)?;
    let mut report = RewriteReport::default();
    for pass in 0..cfg.iterations {
        let hiding = HidingConfig {
            table: cfg.hiding.table.clone(),
            seed: cfg.hiding.seed.wrapping_add(u64::from(pass)),
            max_magnitude: cfg.hiding.max_magnitude,
        };
        let (next, counts) = rewrite_pass(&current, &hiding)?;
        current = next;
        report.absorb(counts);
    }
    if cfg.emit_runtime {
        let mut prelude = emit_f_runtime(&cfg.hiding.table);
        prelude.push('\n');
        prelude.push_str(&emit_cobs_source(cfg.array_kind, cfg)?);
        prelude.push('\n');
        prelude.push_str(&current);
        current = prelude;
    }
    Ok((current, report))
}

#[derive(Debug)]
struct Edit {
    start: usize,
    end: usize,
    text: String,
}

impl Edit {
    fn insert(at: usize, text: String) -> Edit {
        Edit {
            start: at,
            end: at,
            text,
        }
    }
}

fn apply_edits(source: &str, mut edits: Vec<Edit>) -> String {
    edits.sort_by_key(|e| e.start);
    let mut out = source.to_string();
    for edit in edits.iter().rev() {
        out.replace_range(edit.start..edit.end, &edit.text);
    }
    out
}

/// How one literal token may be rewritten this pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Outside every F call: full constant hiding.
    Full,
    /// Left of `%` directly inside an F argument, or the sole argument
    /// literal: replaced by hidden(v1)*q + hidden(v2).
    Combo,
    /// Depth argument, `%` right operand, or buried deeper in an F argument.
    Skip,
}

/// Paren nesting depth per token: a token directly inside `F(` has the depth
/// of that `(` plus one.
fn paren_depths(tokens: &[Token]) -> Vec<i32> {
    let mut depths = vec![0; tokens.len()];
    let mut d = 0i32;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind == TokenKind::Punct && tok.text == "(" {
            depths[i] = d;
            d += 1;
        } else if tok.kind == TokenKind::Punct && tok.text == ")" {
            d -= 1;
            depths[i] = d;
        } else {
            depths[i] = d;
        }
    }
    depths
}

fn literal_roles(tokens: &[Token], sites: &[FSite]) -> Vec<Role> {
    let extent = f_extent_map(tokens.len(), sites);
    let depths = paren_depths(tokens);
    let mut roles = vec![Role::Skip; tokens.len()];
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::IntLiteral {
            continue;
        }
        let Some(site_id) = extent[i] else {
            roles[i] = Role::Full;
            continue;
        };
        let site = &sites[site_id];
        let arg_end = site.comma_index.unwrap_or(site.close_index);
        if i > arg_end {
            continue;
        }
        let arg_level = depths[site.open_index] + 1;
        let rem_split = (site.open_index + 1..arg_end).find(|&j| {
            tokens[j].is_punct("%") && depths[j] == arg_level && extent[j] == Some(site_id)
        });
        roles[i] = match rem_split {
            Some(p) if i < p && depths[i] == arg_level => Role::Combo,
            Some(_) => Role::Skip,
            None if arg_end == site.open_index + 2 && i == site.open_index + 1 => Role::Combo,
            None => Role::Skip,
        };
    }
    roles
}

fn literal_value(tok: &Token, bound: i64) -> Result<i64, RewriteError> {
    let value: i64 = tok.text.parse().map_err(|_| RewriteError::LiteralOverflow {
        text: tok.text.clone(),
        line: tok.pos.line,
        column: tok.pos.column,
    })?;
    if value > bound {
        return Err(RewriteError::LiteralTooLarge {
            value,
            bound,
            line: tok.pos.line,
            column: tok.pos.column,
        });
    }
    Ok(value)
}

struct Pass<'a> {
    tokens: &'a [Token],
    roles: Vec<Role>,
    classifier: Classifier,
    hider: Hider,
    bound: i64,
    edits: Vec<Edit>,
    counts: PassCounts,
}

fn rewrite_pass(source: &str, hiding: &HidingConfig) -> Result<(String, PassCounts), RewriteError> {
    let tokens = frontend::tokenize(source)?;
    let mut statements = frontend::split_statements(&tokens)?;
    let mut classifier = Classifier::new();
    for stmt in &mut statements {
        stmt.kind = classifier.classify(&tokens, stmt);
    }
    let sites = f_call_sites(&tokens).expect("parentheses balanced by statement splitter");
    let mut pass = Pass {
        tokens: &tokens,
        roles: literal_roles(&tokens, &sites),
        classifier,
        hider: Hider::new(hiding),
        bound: hiding.max_magnitude,
        edits: Vec::new(),
        counts: PassCounts::default(),
    };

    // Statements inside the definition of F are never rewritten: hiding the
    // literals of the runtime that implements hiding would make F recurse.
    let mut guard_depth: Option<usize> = None;
    for stmt in &statements {
        if let Some(depth) = guard_depth {
            if stmt.depth > depth {
                continue;
            }
            if stmt.depth == depth && tokens[stmt.start].is_punct("}") {
                guard_depth = None;
                continue;
            }
            guard_depth = None;
        }
        if is_f_definition_open(&tokens, stmt) {
            guard_depth = Some(stmt.depth);
            continue;
        }
        pass.rewrite_statement(stmt)?;
    }

    let counts = pass.counts;
    let edits = pass.edits;
    Ok((apply_edits(source, edits), counts))
}

fn is_f_definition_open(tokens: &[Token], stmt: &Statement) -> bool {
    let toks = stmt.tokens(tokens);
    toks.len() >= 4
        && toks[0].kind == TokenKind::Keyword
        && toks[0].text == "int"
        && toks[1].is_ident("F")
        && toks[2].is_punct("(")
        && toks.last().is_some_and(|t| t.is_punct("{"))
}

const INDEXED_METHODS: [&str; 2] = ["setArray", "getArray"];

impl Pass<'_> {
    fn rewrite_statement(&mut self, stmt: &Statement) -> Result<(), RewriteError> {
        let before = self.edits.len();
        match stmt.kind {
            StatementKind::CandidateDecl | StatementKind::CandidateAccess => {
                let has_literal = (stmt.start..stmt.end)
                    .any(|i| self.tokens[i].kind == TokenKind::IntLiteral);
                if has_literal {
                    for i in stmt.start..stmt.end {
                        if self.tokens[i].kind == TokenKind::IntLiteral {
                            self.hide_literal(i, self.roles[i])?;
                        }
                    }
                } else {
                    self.multiply_accesses(stmt)?;
                }
            }
            StatementKind::Other => {
                for i in stmt.start..stmt.end {
                    if self.tokens[i].kind == TokenKind::IntLiteral
                        && self.roles[i] != Role::Skip
                    {
                        self.hide_literal(i, self.roles[i])?;
                        break;
                    }
                }
            }
        }
        if self.edits.len() > before {
            self.counts.statements_touched += 1;
        }
        Ok(())
    }

    fn hide_literal(&mut self, i: usize, role: Role) -> Result<(), RewriteError> {
        let tok = &self.tokens[i];
        let expr = match role {
            Role::Skip => return Ok(()),
            Role::Full => {
                let value = literal_value(tok, self.bound)?;
                self.hider.hide_constant(value)?
            }
            Role::Combo => {
                let value = literal_value(tok, self.bound)?;
                self.hider.rehide_literal(value)?
            }
        };
        self.counts.constants_hidden += 1;
        self.edits.push(Edit {
            start: tok.pos.offset,
            end: tok.end_offset(),
            text: render_expr(&expr),
        });
        Ok(())
    }

    fn hidden_one(&mut self) -> Result<String, RewriteError> {
        let expr = self.hider.hide_constant(1)?;
        self.counts.hidden_ones_inserted += 1;
        Ok(render_expr(&expr))
    }

    /// Constant-free candidate: multiplies every setArray/getArray index
    /// argument by a hidden one and wraps bare lengthArray calls the same
    /// way. The value argument of setArray is left alone.
    fn multiply_accesses(&mut self, stmt: &Statement) -> Result<(), RewriteError> {
        let mut w = stmt.start;
        while w + 3 < stmt.end {
            let toks = self.tokens;
            let is_access = toks[w].kind == TokenKind::Identifier
                && self.classifier.is_container_var(&toks[w].text)
                && toks[w + 1].is_punct(".")
                && toks[w + 3].is_punct("(");
            if !is_access {
                w += 1;
                continue;
            }
            if INDEXED_METHODS.contains(&toks[w + 2].text.as_str()) {
                let open = w + 3;
                let close = matching_close(toks, open);
                let arg_end = (open + 1..close)
                    .find(|&j| toks[j].is_punct(",") && same_level(toks, open, j))
                    .unwrap_or(close);
                if arg_end > open + 1 {
                    let factor = self.hidden_one()?;
                    let first = &toks[open + 1];
                    let last = &toks[arg_end - 1];
                    if arg_end == open + 2 {
                        self.edits
                            .push(Edit::insert(first.end_offset(), format!("*({factor})")));
                    } else {
                        self.edits
                            .push(Edit::insert(first.pos.offset, "(".to_string()));
                        self.edits
                            .push(Edit::insert(last.end_offset(), format!(")*({factor})")));
                    }
                }
                w += 4;
            } else if toks[w + 2].is_ident("lengthArray")
                && w + 4 < stmt.end
                && toks[w + 4].is_punct(")")
            {
                let factor = self.hidden_one()?;
                self.edits.push(Edit {
                    start: toks[w].pos.offset,
                    end: toks[w + 4].end_offset(),
                    text: format!("({}.lengthArray()*({factor}))", toks[w].text),
                });
                w += 5;
            } else {
                w += 1;
            }
        }
        Ok(())
    }
}

/// Index of the `)` matching the `(` at `open`. Balance is guaranteed by the
/// statement splitter.
fn matching_close(tokens: &[Token], open: usize) -> usize {
    let mut depth = 0i32;
    for (i, tok) in tokens.iter().enumerate().skip(open) {
        if tok.is_punct("(") {
            depth += 1;
        } else if tok.is_punct(")") {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
    }
    unreachable!("unbalanced parentheses after split_statements")
}

/// True when token `j` sits directly inside the parenthesis opened at `open`.
fn same_level(tokens: &[Token], open: usize, j: usize) -> bool {
    let mut depth = 0i32;
    for (i, tok) in tokens.iter().enumerate().skip(open) {
        if i == j {
            return depth == 1;
        }
        if tok.is_punct("(") {
            depth += 1;
        } else if tok.is_punct(")") {
            depth -= 1;
        }
    }
    false
}

/// Salt separating the runtime-emission RNG stream from the per-pass
/// streams, which use seed, seed+1, ...
const EMIT_SEED_SALT: u64 = 0xA5A5_5A5A_C0B5_0001;

/// Emits runtime source implementing the container semantics for `kind`,
/// with every internal integer literal already hidden. MiniJ mode emits an
/// interpretable function set over flat backing containers; textual mode
/// emits a Java-like class for human consumption.
pub fn emit_cobs_source(kind: ArrayKind, cfg: &ObfuscationConfig) -> Result<String, RewriteError> {
    let hiding = HidingConfig {
        table: cfg.hiding.table.clone(),
        seed: cfg.hiding.seed ^ EMIT_SEED_SALT,
        max_magnitude: cfg.hiding.max_magnitude,
    };
    let mut hider = Hider::new(&hiding);
    let mut h = |v: i64| -> Result<String, RewriteError> {
        Ok(render_expr(&hider.hide_constant(v)?))
    };
    let text = match cfg.mode {
        Mode::MiniJ => match kind {
            ArrayKind::Split => {
                let k = cfg.k;
                let parts: Vec<String> = (0..k).map(|j| format!("part{j}")).collect();
                let params = parts
                    .iter()
                    .map(|p| format!("FlattenedArray {p}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let mut out = String::new();
                out.push_str(&format!(
                    "int cobsPartSize(int size, int j) {{\n    if (j >= size) {{ return {}; }}\n    return ((size - {}) - j) / {} + {};\n}}\n",
                    h(0)?, h(1)?, h(k as i64)?, h(1)?
                ));
                out.push_str(&format!(
                    "int cobsSetArray({params}, int pos, int v) {{\n    int outer = pos % {};\n    int inner = pos / {};\n",
                    h(k as i64)?, h(k as i64)?
                ));
                for (j, p) in parts.iter().enumerate() {
                    out.push_str(&format!(
                        "    if (outer == {}) {{ {p}.setArray(inner, v); }}\n",
                        h(j as i64)?
                    ));
                }
                out.push_str(&format!("    return {};\n}}\n", h(0)?));
                out.push_str(&format!(
                    "int cobsGetArray({params}, int pos) {{\n    int outer = pos % {};\n    int inner = pos / {};\n",
                    h(k as i64)?, h(k as i64)?
                ));
                for (j, p) in parts.iter().enumerate() {
                    out.push_str(&format!(
                        "    if (outer == {}) {{ return {p}.getArray(inner); }}\n",
                        h(j as i64)?
                    ));
                }
                out.push_str(&format!("    return {};\n}}\n", h(0)?));
                out.push_str(&format!(
                    "int cobsLengthArray({params}) {{\n    return {};\n}}\n",
                    parts
                        .iter()
                        .map(|p| format!("{p}.lengthArray()"))
                        .collect::<Vec<_>>()
                        .join(" + ")
                ));
                out
            }
            ArrayKind::Fold => {
                let cols = h(cfg.cols as i64)?;
                let cols2 = h(cfg.cols as i64)?;
                let cols3 = h(cfg.cols as i64)?;
                let cols4 = h(cfg.cols as i64)?;
                format!(
                    "int cobsRows(int size) {{\n    if (size == {zero}) {{ return {zero2}; }}\n    return ((size - {one}) / {cols}) + {one2};\n}}\n\
                     int cobsSetArray(FlattenedArray grid, int pos, int v) {{\n    int r = pos / {cols2};\n    int c = pos % {cols3};\n    grid.setArray((r * {cols4}) + c, v);\n    return {zero3};\n}}\n\
                     int cobsGetArray(FlattenedArray grid, int pos) {{\n    int r = pos / {cols5};\n    int c = pos % {cols6};\n    return grid.getArray((r * {cols7}) + c);\n}}\n\
                     int cobsLengthArray(int size) {{\n    return size;\n}}\n",
                    zero = h(0)?,
                    zero2 = h(0)?,
                    one = h(1)?,
                    cols = cols,
                    one2 = h(1)?,
                    cols2 = cols2,
                    cols3 = cols3,
                    cols4 = cols4,
                    zero3 = h(0)?,
                    cols5 = h(cfg.cols as i64)?,
                    cols6 = h(cfg.cols as i64)?,
                    cols7 = h(cfg.cols as i64)?,
                )
            }
            ArrayKind::Flatten => {
                format!(
                    "int cobsSetArray(FlattenedArray data, int r, int c, int v) {{\n    data.setArray((r * {cols}) + c, v);\n    return {zero};\n}}\n\
                     int cobsGetArray(FlattenedArray data, int r, int c) {{\n    return data.getArray((r * {cols2}) + c);\n}}\n\
                     int cobsLengthArray(FlattenedArray data) {{\n    return data.lengthArray();\n}}\n",
                    cols = h(cfg.cols as i64)?,
                    zero = h(0)?,
                    cols2 = h(cfg.cols as i64)?,
                )
            }
        },
        Mode::Textual => match kind {
            ArrayKind::Split => {
                let k = cfg.k;
                let mut out = String::new();
                out.push_str("public class SplitArray {\n    private int size;\n");
                for j in 0..k {
                    out.push_str(&format!("    private int[] part{j};\n"));
                }
                out.push_str("    public SplitArray (int size) {\n        this.size = size;\n");
                for j in 0..k {
                    out.push_str(&format!(
                        "        part{j} = new int[((size - {}) - {}) / {} + {}];\n",
                        h(1)?,
                        h(j as i64)?,
                        h(k as i64)?,
                        h(1)?
                    ));
                }
                out.push_str("    }\n    public void setArray (int pos, int value) {\n");
                out.push_str(&format!(
                    "        int outer = pos % {};\n        int inner = pos / {};\n",
                    h(k as i64)?,
                    h(k as i64)?
                ));
                for j in 0..k {
                    out.push_str(&format!(
                        "        if (outer == {}) {{ part{j}[inner] = value; }}\n",
                        h(j as i64)?
                    ));
                }
                out.push_str("    }\n    public int getArray (int pos) {\n");
                out.push_str(&format!(
                    "        int outer = pos % {};\n        int inner = pos / {};\n",
                    h(k as i64)?,
                    h(k as i64)?
                ));
                for j in 0..k {
                    out.push_str(&format!(
                        "        if (outer == {}) {{ return part{j}[inner]; }}\n",
                        h(j as i64)?
                    ));
                }
                out.push_str(&format!("        return {};\n    }}\n", h(0)?));
                out.push_str("    public int lengthArray () {\n        return size;\n    }\n}\n");
                out
            }
            ArrayKind::Fold => {
                format!(
                    "public class FoldedArray {{\n    private int size;\n    private int[][] grid;\n\
                     \x20   public FoldedArray (int size) {{\n        this.size = size;\n        grid = new int[((size - {one}) / {cols}) + {one2}][{cols2}];\n    }}\n\
                     \x20   public void setArray (int pos, int value) {{\n        grid[pos / {cols3}][pos % {cols4}] = value;\n    }}\n\
                     \x20   public int getArray (int pos) {{\n        return grid[pos / {cols5}][pos % {cols6}];\n    }}\n\
                     \x20   public int lengthArray () {{\n        return size;\n    }}\n}}\n",
                    one = h(1)?,
                    cols = h(cfg.cols as i64)?,
                    one2 = h(1)?,
                    cols2 = h(cfg.cols as i64)?,
                    cols3 = h(cfg.cols as i64)?,
                    cols4 = h(cfg.cols as i64)?,
                    cols5 = h(cfg.cols as i64)?,
                    cols6 = h(cfg.cols as i64)?,
                )
            }
            ArrayKind::Flatten => {
                format!(
                    "public class FlattenedArray {{\n    private int rows;\n    private int cols;\n    private int[] data;\n\
                     \x20   public FlattenedArray (int rows, int cols) {{\n        this.rows = rows;\n        this.cols = cols;\n        data = new int[rows * cols];\n    }}\n\
                     \x20   public void setArray (int r, int c, int value) {{\n        data[(r * {cols}) + c] = value;\n    }}\n\
                     \x20   public int getArray (int r, int c) {{\n        return data[(r * {cols2}) + c];\n    }}\n\
                     \x20   public int lengthArray () {{\n        return rows * cols;\n    }}\n}}\n",
                    cols = h(cfg.cols as i64)?,
                    cols2 = h(cfg.cols as i64)?,
                )
            }
        },
    };
    Ok(text)
}
