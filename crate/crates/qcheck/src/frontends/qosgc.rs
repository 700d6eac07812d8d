use super::chor::parse_chor;
use super::{attributes_at, check_declared, terms_at, write_attributes};
use crate::gchor::write_chor;
use crate::model::QosAttributeDecl;
use crate::projection::{QGChor, Slots};
use crate::smt::SmtTerm;
use crate::syntax::{describe, Cursor, ParseError, Span};

/// `[ slot : TERM+ (',' slot : TERM+)* ]` with slot one of sqos, rqos, sqos', rqos'.
fn slots_at(c: &mut Cursor, pending: &mut Vec<(SmtTerm, Span)>) -> Result<Slots, ParseError> {
    c.expect_sym("[")?;
    let mut slots = Slots::default();
    while !c.peek().is_sym("]") {
        let name = c.expect_ident("slot name")?;
        let slot = match name.text.as_str() {
            "sqos" => &mut slots.sqos,
            "rqos" => &mut slots.rqos,
            "sqos'" => &mut slots.sqos_post,
            "rqos'" => &mut slots.rqos_post,
            other => return Err(ParseError::new(name.span, format!("unknown slot '{other}'"))),
        };
        if !slot.is_empty() {
            return Err(ParseError::new(name.span, format!("duplicate slot '{}'", name.text)));
        }
        c.expect_sym(":")?;
        let ts = terms_at(c)?;
        if ts.is_empty() {
            return c.error(format!("expected a parenthesized constraint, found {}", describe(c.peek())));
        }
        slot.extend(ts.iter().map(|(t, _)| t.clone()));
        pending.extend(ts);
        if !c.eat_sym(",") {
            break;
        }
    }
    c.expect_sym("]")?;
    Ok(slots)
}

/// Parse a `.qosgc` file: a `qos { ... }` declaration block (before or after)
/// and a g-choreography whose interactions may carry slot annotations.
pub fn parse_qosgc(text: &str) -> Result<QGChor, ParseError> {
    let mut c = Cursor::new(text)?;
    let mut attributes: Option<Vec<QosAttributeDecl>> = None;
    let mut body = None;
    let mut terms = Vec::new();
    while !c.at_eof() {
        if c.peek().is_word("qos") && c.peek_at(1).is_sym("{") {
            let kw = c.next();
            if attributes.is_some() {
                return Err(ParseError::new(kw.span, "duplicate 'qos' block"));
            }
            let decls = attributes_at(&mut c)?;
            for (i, (a, span)) in decls.iter().enumerate() {
                if decls[..i].iter().any(|(b, _)| b.name == a.name) {
                    return Err(ParseError::new(*span, format!("duplicate attribute '{}'", a.name)));
                }
            }
            attributes = Some(decls.into_iter().map(|(a, _)| a).collect());
        } else if body.is_none() {
            let mut hook = |c: &mut Cursor| slots_at(c, &mut terms);
            body = Some(parse_chor::<Slots>(&mut c, Some(&mut hook))?);
        } else {
            return c.error(format!("unexpected {} after the choreography", describe(c.peek())));
        }
    }
    let attributes = attributes.unwrap_or_default();
    for (t, span) in &terms {
        check_declared(t, *span, &attributes)?;
    }
    let body = match body {
        Some(b) => b,
        None => return c.error("expected a g-choreography"),
    };
    Ok(QGChor { attributes, body })
}

pub fn serialize_qosgc(qg: &QGChor) -> String {
    let mut out = String::new();
    write_attributes(&mut out, &qg.attributes);
    let mut body = String::new();
    write_chor(&mut body, &qg.body, &|f, slots: &Slots| {
        if slots.is_empty() {
            return Ok(());
        }
        let parts: Vec<String> = slots
            .entries()
            .iter()
            .filter(|(_, ts)| !ts.is_empty())
            .map(|(name, ts)| {
                let ts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                format!("{name} : {}", ts.join(" "))
            })
            .collect();
        write!(f, " [ {} ]", parts.join(", "))
    })
    .expect("writing to a String");
    out.push_str(&body);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gchor::Chor;

    #[test]
    fn single_post_slot() {
        let qg = parse_qosgc("qos { c : + }\nA -> B : m [ sqos' : (<= c 1) ]").unwrap();
        let Chor::Interaction { ann, .. } = &qg.body else { panic!() };
        assert_eq!(ann.entries().iter().filter(|(_, t)| !t.is_empty()).count(), 1);
        assert_eq!(ann.sqos_post.len(), 1);
        assert_eq!(parse_qosgc(&serialize_qosgc(&qg)).unwrap(), qg);
    }

    #[test]
    fn qos_block_after_body_and_empty() {
        let a = parse_qosgc("A -> B : m qos { }").unwrap();
        assert!(a.attributes.is_empty());
        let b = parse_qosgc("qos { }\nA -> B : m").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let e = parse_qosgc("qos { c : + }\n{ A -> B : m } [ sqos : (<= c 1) ]").unwrap_err();
        assert_eq!(e.message, "slot on non-interaction");
        let e = parse_qosgc("qos { c : + }\nA -> B : m [ rqos : (<= d 1) ]").unwrap_err();
        assert!(e.message.contains("undeclared attribute 'd'"));
        assert_eq!(e.span.line, 2);
    }
}
