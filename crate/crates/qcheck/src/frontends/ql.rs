use super::chor::parse_chor;
use super::term_at;
use crate::gchor::GChor;
use crate::ql::Formula;
use crate::syntax::{describe, Cursor, ParseError, Tok};

/// Parse a `.ql` formula.
///
/// ```text
/// implies := or ['=>' implies]
/// or      := and ('or' and)*
/// and     := until ('and' until)*
/// until   := unary ['until' '{' G '}' until]
/// unary   := 'not' unary | '<' G '>' unary | '[' G ']' unary | atom
/// atom    := 'true' | 'false' | 'qos' TERM | '(' implies ')'
/// ```
pub fn parse_ql(text: &str) -> Result<Formula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = implies(&mut c)?;
    if !c.at_eof() {
        return c.error(format!("unexpected {} after formula", describe(c.peek())));
    }
    Ok(f)
}

pub fn serialize_ql(f: &Formula) -> String {
    format!("{f}\n")
}

fn implies(c: &mut Cursor) -> Result<Formula, ParseError> {
    let a = or(c)?;
    if c.eat_sym("=>") {
        return Ok(Formula::implies(a, implies(c)?));
    }
    Ok(a)
}

fn or(c: &mut Cursor) -> Result<Formula, ParseError> {
    let mut a = and(c)?;
    while c.eat_word("or") {
        a = Formula::or(a, and(c)?);
    }
    Ok(a)
}

fn and(c: &mut Cursor) -> Result<Formula, ParseError> {
    let mut a = until(c)?;
    while c.eat_word("and") {
        a = Formula::and(a, until(c)?);
    }
    Ok(a)
}

fn until(c: &mut Cursor) -> Result<Formula, ParseError> {
    let a = unary(c)?;
    if c.eat_word("until") {
        c.expect_sym("{")?;
        let g = chor(c)?;
        c.expect_sym("}")?;
        return Ok(Formula::until(a, g, until(c)?));
    }
    Ok(a)
}

fn chor(c: &mut Cursor) -> Result<GChor, ParseError> {
    parse_chor::<()>(c, None)
}

fn unary(c: &mut Cursor) -> Result<Formula, ParseError> {
    if c.eat_word("not") {
        return Ok(Formula::not(unary(c)?));
    }
    if c.eat_sym("<") {
        let g = chor(c)?;
        c.expect_sym(">")?;
        return Ok(Formula::possibly(g, unary(c)?));
    }
    if c.eat_sym("[") {
        let g = chor(c)?;
        c.expect_sym("]")?;
        return Ok(Formula::necessarily(g, unary(c)?));
    }
    atom(c)
}

fn atom(c: &mut Cursor) -> Result<Formula, ParseError> {
    if c.eat_word("true") {
        return Ok(Formula::True);
    }
    if c.eat_word("false") {
        return Ok(Formula::not(Formula::True));
    }
    if c.eat_word("qos") {
        return Ok(Formula::Qos(term_at(c)?));
    }
    if c.peek().kind == Tok::LParen {
        c.next();
        let f = implies(c)?;
        if c.peek().kind != Tok::RParen {
            return c.error(format!("expected ')', found {}", describe(c.peek())));
        }
        c.next();
        return Ok(f);
    }
    c.error(format!("expected a formula, found {}", describe(c.peek())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smt::SmtTerm;

    #[test]
    fn possibly_over_chain() {
        let f = parse_ql("< A -> B : x ; B -> C : y ; C -> A : z > qos (and (<= 2 cost) (<= cost 3))").unwrap();
        let Formula::Possibly(g, psi) = f else { panic!() };
        assert_eq!(g.interaction_count(), 3);
        assert_eq!(*psi, Formula::Qos(SmtTerm::parse("(and (<= 2 cost) (<= cost 3))").unwrap()));
    }

    #[test]
    fn precedence_and_assoc() {
        let f = parse_ql("not true and true or true => true => true").unwrap();
        let t = || Formula::True;
        let expect = Formula::implies(
            Formula::or(Formula::and(Formula::not(t()), t()), t()),
            Formula::implies(t(), t()),
        );
        assert_eq!(f, expect);
        let g = GChor::interaction("A", "B", "m");
        let u = parse_ql("true until { A -> B : m } true until { A -> B : m } true").unwrap();
        assert_eq!(u, Formula::until(t(), g.clone(), Formula::until(t(), g, t())));
    }

    #[test]
    fn false_is_not_true() {
        assert_eq!(parse_ql("false").unwrap(), Formula::not(Formula::True));
    }

    #[test]
    fn errors() {
        assert!(parse_ql("qos (<= cost").is_err());
        assert!(parse_ql("qos (+ a b)").is_err());
        let e = parse_ql("true and\n  [ A -> : m ] true").unwrap_err();
        assert_eq!(e.span.line, 2);
    }
}
