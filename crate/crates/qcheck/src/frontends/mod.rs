//! Parsers and serializers for `.qosfsa` (systems), `.ql` (formulas) and `.qosgc` (annotated g-choreographies).

mod chor;
mod ql;
mod qosfsa;
mod qosgc;

use crate::smt::{SmtTerm, Sort};
use crate::syntax::{Cursor, ParseError, Span};

pub use chor::{parse_chor, AnnParser};
pub use ql::{parse_ql, serialize_ql};
pub use qosfsa::{parse_qosfsa, serialize_qosfsa};
pub use qosgc::{parse_qosgc, serialize_qosgc};

/// A boolean SMT-LIB term at the cursor.
fn term_at(c: &mut Cursor) -> Result<SmtTerm, ParseError> {
    let s = c.sexpr()?;
    let t = SmtTerm::from_sexpr(&s)?;
    if t.sort() != Some(Sort::Bool) {
        return Err(ParseError::new(s.span(), "constraint must be a boolean term"));
    }
    Ok(t)
}

/// Terms up to the next token that cannot start one; returns them with their spans.
fn terms_at(c: &mut Cursor) -> Result<Vec<(SmtTerm, Span)>, ParseError> {
    let mut out = Vec::new();
    while c.peek().kind == crate::syntax::Tok::LParen {
        let span = c.peek().span;
        out.push((term_at(c)?, span));
    }
    Ok(out)
}

/// Aggregation operator: a symbol such as `+` or a name such as `max`.
fn operator_at(c: &mut Cursor) -> Result<String, ParseError> {
    use crate::syntax::Tok;
    let t = c.peek();
    match t.kind {
        Tok::Ident => Ok(c.next().text),
        Tok::Sym if ["+", "*", "-", "/"].contains(&t.text.as_str()) => Ok(c.next().text),
        _ => c.error(format!("expected an aggregation operator, found {}", crate::syntax::describe(t))),
    }
}

/// `qos { name : op, ... }` (the keyword already consumed).
fn attributes_at(c: &mut Cursor) -> Result<Vec<(crate::model::QosAttributeDecl, Span)>, ParseError> {
    c.expect_sym("{")?;
    let mut out = Vec::new();
    while !c.peek().is_sym("}") {
        let name = c.expect_ident("attribute name")?;
        c.expect_sym(":")?;
        let op = operator_at(c)?;
        out.push((crate::model::QosAttributeDecl::new(&name.text, &op), name.span));
        if !c.eat_sym(",") {
            break;
        }
    }
    c.expect_sym("}")?;
    Ok(out)
}

/// Reject free variables that are not declared attributes.
fn check_declared(t: &SmtTerm, span: Span, attrs: &[crate::model::QosAttributeDecl]) -> Result<(), ParseError> {
    for v in t.free_vars() {
        if !attrs.iter().any(|a| a.name == v) {
            return Err(ParseError::new(span, format!("undeclared attribute '{v}'")));
        }
    }
    Ok(())
}

fn write_attributes(out: &mut String, attrs: &[crate::model::QosAttributeDecl]) {
    let list: Vec<String> = attrs.iter().map(|a| format!("{} : {}", a.name, a.op)).collect();
    if list.is_empty() {
        out.push_str("qos { }\n");
    } else {
        out.push_str(&format!("qos {{ {} }}\n", list.join(", ")));
    }
}
