use crate::gchor::Chor;
use crate::model::{Message, Participant};
use crate::syntax::{Cursor, ParseError, Tok};

/// Hook called right after each interaction; returns its annotation.
/// `None` disables annotations (plain g-choreographies).
pub type AnnParser<'a, A> = Option<&'a mut dyn FnMut(&mut Cursor) -> Result<A, ParseError>>;

/// Parse a g-choreography at the cursor; stops at the first token that cannot continue it.
///
/// ```text
/// par     := choice ('|' choice)*
/// choice  := seq ('+' seq)*
/// seq     := postfix (';' postfix)*
/// postfix := atom '*'*
/// atom    := NAME '->' NAME ':' NAME [slots] | '{' par '}' | 'repeat' '{' par '}' | 'break' | '(o)'
/// ```
pub fn parse_chor<A: Clone + Default>(c: &mut Cursor, mut ann: AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    par(c, &mut ann)
}

fn par<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    let mut g = choice(c, ann)?;
    while c.eat_sym("|") {
        g = Chor::par(g, choice(c, ann)?);
    }
    Ok(g)
}

fn choice<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    let mut g = seq(c, ann)?;
    while c.eat_sym("+") {
        g = Chor::choice(g, seq(c, ann)?);
    }
    Ok(g)
}

fn seq<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    let mut g = postfix(c, ann)?;
    while c.eat_sym(";") {
        g = Chor::seq(g, postfix(c, ann)?);
    }
    Ok(g)
}

fn postfix<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    let mut g = atom(c, ann)?;
    while c.eat_sym("*") {
        g = Chor::star(g);
    }
    if ann.is_some() && c.peek().is_sym("[") {
        return c.error("slot on non-interaction");
    }
    Ok(g)
}

fn block<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    c.expect_sym("{")?;
    let g = par(c, ann)?;
    c.expect_sym("}")?;
    Ok(g)
}

fn atom<A: Clone + Default>(c: &mut Cursor, ann: &mut AnnParser<'_, A>) -> Result<Chor<A>, ParseError> {
    let t = c.peek().clone();
    match t.kind {
        Tok::Sym if t.text == "{" => block(c, ann),
        Tok::LParen => {
            c.next();
            c.expect_word("o")?;
            if c.peek().kind != Tok::RParen {
                return c.error("expected ')' to close '(o)'");
            }
            c.next();
            Ok(Chor::Empty)
        }
        Tok::Ident if t.text == "break" => {
            c.next();
            Ok(Chor::Break)
        }
        // one-or-more: G ; G*
        Tok::Ident if t.text == "repeat" && c.peek_at(1).is_sym("{") => {
            c.next();
            let g = block(c, ann)?;
            Ok(Chor::seq(g.clone(), Chor::star(g)))
        }
        Tok::Ident => {
            let s = c.next();
            c.expect_sym("->")?;
            let r = c.expect_ident("receiver")?;
            c.expect_sym(":")?;
            let m = c.expect_name("message")?;
            let a = match ann {
                Some(f) if c.peek().is_sym("[") => f(c)?,
                _ => A::default(),
            };
            Ok(Chor::Interaction {
                sender: Participant::new(&s.text),
                receiver: Participant::new(&r.text),
                message: Message::new(&m.text),
                ann: a,
            })
        }
        _ => c.error(format!("expected a g-choreography, found {}", crate::syntax::describe(&t))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gchor::GChor;

    fn p(s: &str) -> GChor {
        let mut c = Cursor::new(s).unwrap();
        let g = parse_chor::<()>(&mut c, None).unwrap();
        assert!(c.at_eof(), "trailing input in {s}");
        g
    }

    #[test]
    fn precedence() {
        let a = GChor::interaction("A", "B", "x");
        let b = GChor::interaction("B", "A", "y");
        assert_eq!(p("A -> B : x ; B -> A : y + A -> B : x"), Chor::choice(Chor::seq(a.clone(), b.clone()), a.clone()));
        assert_eq!(p("A -> B : x ; { B -> A : y + (o) }*"), Chor::seq(a.clone(), Chor::star(Chor::choice(b.clone(), Chor::Empty))));
        assert_eq!(p("repeat { A -> B : x }"), Chor::seq(a.clone(), Chor::star(a)));
    }

    #[test]
    fn display_round_trip() {
        for s in ["A -> B : x | C -> D : y ; D -> C : z", "{ A -> B : x + break }* ; A -> B : y", "A -> B : x ; { B -> A : y ; A -> B : z }"] {
            let g = p(s);
            assert_eq!(p(&g.to_string()), g);
        }
    }

    #[test]
    fn errors_are_positioned() {
        let e = parse_chor::<()>(&mut Cursor::new("A -> : x").unwrap(), None).unwrap_err();
        assert_eq!((e.span.line, e.span.col_start), (1, 6));
    }
}
