use crate::error::{Error, ParseError, Result};
use crate::model::{AttributeSchema, ValueType};

use super::lexer::{lex, Tok, Token};
use super::{Literal, QueryAst};

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

const UNARY_START: [&str; 5] = ["NOT", "(", "HAS", "Cluster ID", "attribute"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        let t = self.peek();
        Err(Error::Parse(ParseError {
            position: t.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.describe(),
        }))
    }

    fn expr(&mut self) -> Result<QueryAst> {
        let mut left = self.and()?;
        while self.peek().is_keyword("or") {
            self.next();
            left = QueryAst::or(left, self.and()?);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<QueryAst> {
        let mut left = self.unary()?;
        while self.peek().is_keyword("and") {
            self.next();
            left = QueryAst::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<QueryAst> {
        let t = self.peek().clone();
        if t.is_keyword("not") {
            self.next();
            return Ok(QueryAst::not(self.unary()?));
        }
        if t.is_keyword("has") {
            self.next();
            return match self.peek().tok.clone() {
                Tok::Word(w) | Tok::Quoted(w) | Tok::Str(w) => {
                    self.next();
                    Ok(QueryAst::EventContains { event_type: w })
                }
                _ => self.fail(&["event type"]),
            };
        }
        match t.tok {
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return self.fail(&["AND", "OR", ")"]);
                }
                self.next();
                Ok(e)
            }
            Tok::Word(ref w) if w.eq_ignore_ascii_case("cluster") && self.toks[self.i + 1].is_keyword("id") => {
                self.next();
                self.next();
                if self.peek().tok != Tok::Op(super::CmpOp::Eq) {
                    return self.fail(&["="]);
                }
                self.next();
                match self.peek().tok.clone() {
                    Tok::Word(l) | Tok::Quoted(l) | Tok::Str(l) => {
                        self.next();
                        Ok(QueryAst::ClusterIs { label: l })
                    }
                    _ => self.fail(&["cluster label"]),
                }
            }
            Tok::Word(ref w) if ["and", "or"].iter().any(|k| w.eq_ignore_ascii_case(k)) => self.fail(&UNARY_START),
            Tok::Word(attribute) | Tok::Quoted(attribute) => {
                self.next();
                let Tok::Op(op) = self.peek().tok else {
                    return self.fail(&["comparison operator"]);
                };
                self.next();
                let literal = match self.peek().tok.clone() {
                    Tok::Number(x) => Literal::Number(x),
                    Tok::Str(s) => Literal::String(s),
                    _ => return self.fail(&["number", "string"]),
                };
                self.next();
                Ok(QueryAst::Comparison { attribute, op, literal })
            }
            _ => self.fail(&UNARY_START),
        }
    }
}

/// Parses without consulting a schema.
pub fn parse_query_syntax(text: &str) -> Result<QueryAst> {
    let mut p = Parser { toks: lex(text)?, i: 0 };
    let ast = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.fail(&["AND", "OR", "end of input"]);
    }
    Ok(ast)
}

/// Checks attribute names and literal types against the schema.
pub fn check_types(ast: &QueryAst, schema: &AttributeSchema) -> Result<()> {
    match ast {
        QueryAst::Comparison { attribute, op, literal } => {
            let attr = schema.lookup(attribute)?;
            match (attr.value_type, literal) {
                (ValueType::Number | ValueType::Timestamp, Literal::Number(_)) => Ok(()),
                (ValueType::Category, Literal::String(_)) if op.is_ordering() => Err(Error::Type(format!(
                    "`{attribute}` is categorical and only supports = and !="
                ))),
                (ValueType::Category, Literal::String(_)) => Ok(()),
                (ValueType::Category, Literal::Number(_)) => {
                    Err(Error::Type(format!("`{attribute}` is categorical; compare it with a quoted string")))
                }
                (_, Literal::String(_)) => {
                    Err(Error::Type(format!("`{attribute}` is numeric; compare it with a number")))
                }
            }
        }
        QueryAst::ClusterIs { .. } | QueryAst::EventContains { .. } => Ok(()),
        QueryAst::And { left, right } | QueryAst::Or { left, right } => {
            check_types(left, schema)?;
            check_types(right, schema)
        }
        QueryAst::Not { expr } => check_types(expr, schema),
    }
}

/// Parses and type-checks a query.
pub fn parse_query(text: &str, schema: &AttributeSchema) -> Result<QueryAst> {
    let ast = parse_query_syntax(text)?;
    check_types(&ast, schema)?;
    Ok(ast)
}
