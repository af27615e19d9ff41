//! Structured selection queries such as `(Cluster ID = C1) AND (age > 50)`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr       := and ("OR" and)*
//! and        := unary ("AND" unary)*
//! unary      := "NOT" unary | "(" expr ")" | comparison
//! comparison := attribute op literal | "Cluster ID" "=" label | "HAS" event_type
//! op         := "=" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! Keywords are case-insensitive. Attributes are bare words or double-quoted;
//! string literals are single-quoted, both with backslash escapes.

mod eval;
mod lexer;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::evaluate_query;
pub use parser::{parse_query, parse_query_syntax};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub(crate) fn test<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Literal {
    Number(f64),
    String(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QueryAst {
    Comparison { attribute: String, op: CmpOp, literal: Literal },
    ClusterIs { label: String },
    EventContains { event_type: String },
    And { left: Box<QueryAst>, right: Box<QueryAst> },
    Or { left: Box<QueryAst>, right: Box<QueryAst> },
    Not { expr: Box<QueryAst> },
}

impl QueryAst {
    pub fn and(left: QueryAst, right: QueryAst) -> Self {
        QueryAst::And { left: Box::new(left), right: Box::new(right) }
    }

    pub fn or(left: QueryAst, right: QueryAst) -> Self {
        QueryAst::Or { left: Box::new(left), right: Box::new(right) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(expr: QueryAst) -> Self {
        QueryAst::Not { expr: Box::new(expr) }
    }

    pub fn cmp(attribute: &str, op: CmpOp, literal: Literal) -> Self {
        QueryAst::Comparison { attribute: attribute.to_string(), op, literal }
    }

    pub fn uses_clusters(&self) -> bool {
        match self {
            QueryAst::ClusterIs { .. } => true,
            QueryAst::Comparison { attribute, .. } => attribute == crate::model::CLUSTER,
            QueryAst::EventContains { .. } => false,
            QueryAst::And { left, right } | QueryAst::Or { left, right } => left.uses_clusters() || right.uses_clusters(),
            QueryAst::Not { expr } => expr.uses_clusters(),
        }
    }
}

const KEYWORDS: [&str; 4] = ["and", "or", "not", "has"];

fn is_bare(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

fn quoted(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        if c == q || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(q);
    out
}

fn word(s: &str, q: char) -> String {
    if is_bare(s) {
        s.to_string()
    } else {
        quoted(s, q)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(x) => write!(f, "{x}"),
            Literal::String(s) => f.write_str(&quoted(s, '\'')),
        }
    }
}

/// Canonical rendering: a bare comparison stands alone and every operand of
/// AND, OR and NOT sits in exactly one pair of parentheses.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryAst::Comparison { attribute, op, literal } => {
                write!(f, "{} {} {literal}", word(attribute, '"'), op.symbol())
            }
            QueryAst::ClusterIs { label } => write!(f, "Cluster ID = {}", word(label, '\'')),
            QueryAst::EventContains { event_type } => write!(f, "HAS {}", word(event_type, '\'')),
            QueryAst::And { left, right } => write!(f, "({left}) AND ({right})"),
            QueryAst::Or { left, right } => write!(f, "({left}) OR ({right})"),
            QueryAst::Not { expr } => write!(f, "NOT ({expr})"),
        }
    }
}

pub fn format_query(ast: &QueryAst) -> String {
    ast.to_string()
}
