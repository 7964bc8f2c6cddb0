//! Potency and cost measurement: F-call depth histograms, size and step
//! deltas across obfuscation iterations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{self, FrontendError, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error(transparent)]
    Lex(#[from] FrontendError),
    #[error("{line}:{column}: unbalanced parentheses inside F call")]
    UnbalancedFCall { line: u32, column: u32 },
}

/// One `F(...)` call site found by the token scanner.
///
/// `depth` is 1 plus the maximum depth of F calls syntactically inside the
/// arguments, 1 when none are nested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FSite {
    pub name_index: usize,
    pub open_index: usize,
    /// First comma directly inside the call, separating argument from depth.
    pub comma_index: Option<usize>,
    pub close_index: usize,
    pub depth: usize,
}

struct OpenSite {
    site: usize,
    paren_depth: i32,
    max_child_depth: usize,
}

/// Scans the token stream for `F(` call sites, matching parentheses.
/// Sites are returned in document order of their opening parenthesis.
pub(crate) fn f_call_sites(tokens: &[Token]) -> Result<Vec<FSite>, MetricsError> {
    let mut sites: Vec<FSite> = Vec::new();
    let mut stack: Vec<OpenSite> = Vec::new();
    let mut paren_depth = 0i32;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Punct {
            continue;
        }
        match tok.text.as_str() {
            "(" => {
                paren_depth += 1;
                // `int F(` is the definition of F, not a call site.
                let is_definition = i > 1
                    && tokens[i - 2].kind == TokenKind::Keyword
                    && tokens[i - 2].text == "int";
                if i > 0 && tokens[i - 1].is_ident("F") && !is_definition {
                    sites.push(FSite {
                        name_index: i - 1,
                        open_index: i,
                        comma_index: None,
                        close_index: usize::MAX,
                        depth: 0,
                    });
                    stack.push(OpenSite {
                        site: sites.len() - 1,
                        paren_depth,
                        max_child_depth: 0,
                    });
                }
            }
            ")" => {
                if let Some(top) = stack.last() {
                    if top.paren_depth == paren_depth {
                        let closed = stack.pop().unwrap();
                        let depth = closed.max_child_depth + 1;
                        sites[closed.site].close_index = i;
                        sites[closed.site].depth = depth;
                        if let Some(parent) = stack.last_mut() {
                            parent.max_child_depth = parent.max_child_depth.max(depth);
                        }
                    }
                }
                paren_depth -= 1;
            }
            "," => {
                if let Some(top) = stack.last() {
                    if top.paren_depth == paren_depth {
                        let site = &mut sites[top.site];
                        if site.comma_index.is_none() {
                            site.comma_index = Some(i);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    if let Some(open) = stack.first() {
        let tok = &tokens[sites[open.site].name_index];
        return Err(MetricsError::UnbalancedFCall {
            line: tok.pos.line,
            column: tok.pos.column,
        });
    }
    Ok(sites)
}

/// Maps each token index to the innermost F site enclosing it (an index into
/// the `sites` slice), or None when the token is outside every F call.
/// Tokens of the site itself (`F`, `(`, `)`) count as outside it.
pub(crate) fn f_extent_map(token_count: usize, sites: &[FSite]) -> Vec<Option<usize>> {
    let mut map = vec![None; token_count];
    for (id, site) in sites.iter().enumerate() {
        for slot in map
            .iter_mut()
            .take(site.close_index)
            .skip(site.open_index + 1)
        {
            *slot = Some(id);
        }
    }
    map
}

pub(crate) fn histogram(sites: &[FSite]) -> BTreeMap<usize, usize> {
    let mut by_depth = BTreeMap::new();
    for site in sites {
        *by_depth.entry(site.depth).or_insert(0) += 1;
    }
    by_depth
}

/// Counts F-call sites per nesting depth. Every site is counted once, at its
/// own depth, so `F(F(3,1)%5,2)` yields `{1:1, 2:1}`.
pub fn count_f_calls(source: &str) -> Result<BTreeMap<usize, usize>, MetricsError> {
    let stripped = frontend::strip_comments(source)?;
    let tokens = frontend::tokenize(&stripped)?;
    Ok(histogram(&f_call_sites(&tokens)?))
}

/// One measurement snapshot of a program variant. `iteration` 0 describes the
/// unmodified input; n describes the output of n obfuscation passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub f_calls_by_depth: BTreeMap<usize, usize>,
    pub total_statements: usize,
    pub byte_size: usize,
    pub steps: u64,
    /// Environment-dependent, reported when sampled but never asserted on.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time: Option<f64>,
    pub iteration: u32,
}

impl MetricsReport {
    /// One JSON object per line; key order is fixed by field declaration
    /// order and map keys are sorted, so lines diff cleanly.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Size and outcome of one interpreter run, as consumed by [`compare_runs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeasurement {
    pub byte_size: usize,
    pub steps: u64,
    pub stdout: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CostSummary {
    pub step_ratio: f64,
    pub size_ratio: f64,
    pub stdout_equal: bool,
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        if numerator == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Cost of the obfuscated run relative to the original. A stdout mismatch is
/// a correctness failure, not a cost; callers surface it prominently.
pub fn compare_runs(original: &RunMeasurement, obfuscated: &RunMeasurement) -> CostSummary {
    CostSummary {
        step_ratio: ratio(obfuscated.steps, original.steps),
        size_ratio: ratio(obfuscated.byte_size as u64, original.byte_size as u64),
        stdout_equal: original.stdout == obfuscated.stdout,
    }
}
