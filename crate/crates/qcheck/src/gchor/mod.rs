//! G-choreographies: AST, bounded unfolding, pomset semantics, membership.

mod pomset;

use std::fmt;

use thiserror::Error;

use crate::model::{Action, Message, Participant};

pub use pomset::{pomsets_of, Language, Pomset};

/// G-choreography AST. The type parameter carries per-interaction
/// annotations (QoS slots for projection); plain indices use `()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Chor<A> {
    Interaction { sender: Participant, receiver: Participant, message: Message, ann: A },
    Seq(Box<Chor<A>>, Box<Chor<A>>),
    Choice(Box<Chor<A>>, Box<Chor<A>>),
    Star(Box<Chor<A>>),
    Par(Box<Chor<A>>, Box<Chor<A>>),
    Break,
    Empty,
}

pub type GChor = Chor<()>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GChorError {
    #[error("break outside of a loop")]
    BreakOutsideStar,
    #[error("break inside a parallel branch is not supported")]
    BreakInPar,
    #[error("pomsets are defined for star-free, break-free g-choreographies only")]
    NotStarFree,
}

impl GChor {
    pub fn interaction(sender: &str, receiver: &str, message: &str) -> GChor {
        Chor::Interaction {
            sender: Participant::new(sender),
            receiver: Participant::new(receiver),
            message: Message::new(message),
            ann: (),
        }
    }
}

impl<A: Clone> Chor<A> {
    pub fn seq(a: Chor<A>, b: Chor<A>) -> Chor<A> {
        Chor::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Chor<A>, b: Chor<A>) -> Chor<A> {
        Chor::Choice(Box::new(a), Box::new(b))
    }

    pub fn par(a: Chor<A>, b: Chor<A>) -> Chor<A> {
        Chor::Par(Box::new(a), Box::new(b))
    }

    pub fn star(a: Chor<A>) -> Chor<A> {
        Chor::Star(Box::new(a))
    }

    /// Left-nested sequence; the empty list gives `Empty`.
    pub fn seq_of(items: impl IntoIterator<Item = Chor<A>>) -> Chor<A> {
        items.into_iter().reduce(Chor::seq).unwrap_or(Chor::Empty)
    }

    /// Left-nested choice; the empty list gives `Empty`.
    pub fn choice_of(items: impl IntoIterator<Item = Chor<A>>) -> Chor<A> {
        items.into_iter().reduce(Chor::choice).unwrap_or(Chor::Empty)
    }

    /// Drop annotations.
    pub fn erase(&self) -> GChor {
        match self {
            Chor::Interaction { sender, receiver, message, .. } => Chor::Interaction {
                sender: sender.clone(),
                receiver: receiver.clone(),
                message: message.clone(),
                ann: (),
            },
            Chor::Seq(a, b) => Chor::seq(a.erase(), b.erase()),
            Chor::Choice(a, b) => Chor::choice(a.erase(), b.erase()),
            Chor::Par(a, b) => Chor::par(a.erase(), b.erase()),
            Chor::Star(a) => Chor::star(a.erase()),
            Chor::Break => Chor::Break,
            Chor::Empty => Chor::Empty,
        }
    }

    pub fn is_star_free(&self) -> bool {
        match self {
            Chor::Star(_) | Chor::Break => false,
            Chor::Seq(a, b) | Chor::Choice(a, b) | Chor::Par(a, b) => a.is_star_free() && b.is_star_free(),
            _ => true,
        }
    }

    /// Participants in order of first appearance.
    pub fn participants(&self) -> Vec<Participant> {
        let mut out = Vec::new();
        self.visit_interactions(&mut |s, r, _, _| {
            for p in [s, r] {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    pub fn interaction_count(&self) -> usize {
        let mut n = 0;
        self.visit_interactions(&mut |_, _, _, _| n += 1);
        n
    }

    pub fn visit_interactions(&self, f: &mut dyn FnMut(&Participant, &Participant, &Message, &A)) {
        match self {
            Chor::Interaction { sender, receiver, message, ann } => f(sender, receiver, message, ann),
            Chor::Seq(a, b) | Chor::Choice(a, b) | Chor::Par(a, b) => {
                a.visit_interactions(f);
                b.visit_interactions(f);
            }
            Chor::Star(a) => a.visit_interactions(f),
            Chor::Break | Chor::Empty => {}
        }
    }

    /// Reject a `break` that is not inside a loop body.
    pub fn check_breaks(&self) -> Result<(), GChorError> {
        fn go<A>(g: &Chor<A>, in_star: bool) -> Result<(), GChorError> {
            match g {
                Chor::Break if !in_star => Err(GChorError::BreakOutsideStar),
                Chor::Seq(a, b) | Chor::Choice(a, b) | Chor::Par(a, b) => {
                    go(a, in_star)?;
                    go(b, in_star)
                }
                Chor::Star(a) => go(a, true),
                _ => Ok(()),
            }
        }
        go(self, false)
    }
}

/// Replace every loop by the choice over 0..=u copies of its body. A copy
/// that resolves a `break` branch ends the loop: it is the last copy and
/// contributes only the events before the break.
pub fn unfold(g: &GChor, u: usize) -> Result<GChor, GChorError> {
    g.check_breaks()?;
    let (cont, brk) = split(g, u)?;
    debug_assert!(brk.is_none());
    Ok(cont.unwrap_or(Chor::Empty))
}

/// (behaviours completing normally, behaviours ending in a break), both star-free.
fn split(g: &GChor, u: usize) -> Result<(Option<GChor>, Option<GChor>), GChorError> {
    fn opt_choice(a: Option<GChor>, b: Option<GChor>) -> Option<GChor> {
        match (a, b) {
            (Some(a), Some(b)) => Some(Chor::choice(a, b)),
            (a, b) => a.or(b),
        }
    }
    fn opt_seq(a: Option<GChor>, b: Option<GChor>) -> Option<GChor> {
        match (a?, b?) {
            (Chor::Empty, b) => Some(b),
            (a, Chor::Empty) => Some(a),
            (a, b) => Some(Chor::seq(a, b)),
        }
    }
    Ok(match g {
        Chor::Interaction { .. } | Chor::Empty => (Some(g.clone()), None),
        Chor::Break => (None, Some(Chor::Empty)),
        Chor::Seq(a, b) => {
            let (ca, ba) = split(a, u)?;
            let (cb, bb) = split(b, u)?;
            (opt_seq(ca.clone(), cb), opt_choice(ba, opt_seq(ca, bb)))
        }
        Chor::Choice(a, b) => {
            let (ca, ba) = split(a, u)?;
            let (cb, bb) = split(b, u)?;
            (opt_choice(ca, cb), opt_choice(ba, bb))
        }
        Chor::Par(a, b) => {
            let (ca, ba) = split(a, u)?;
            let (cb, bb) = split(b, u)?;
            if ba.is_some() || bb.is_some() {
                return Err(GChorError::BreakInPar);
            }
            (ca.zip(cb).map(|(a, b)| Chor::par(a, b)), None)
        }
        Chor::Star(body) => {
            let (cont, brk) = split(body, u)?;
            // alternatives: cont^n for n <= u, and cont^j ; brk for j < u
            let mut alts = Vec::new();
            for n in 0..=u {
                match &cont {
                    Some(c) => alts.push(Chor::seq_of(std::iter::repeat(c.clone()).take(n))),
                    None if n == 0 => alts.push(Chor::Empty),
                    None => {}
                }
            }
            if let Some(b) = &brk {
                for j in 0..u {
                    let Some(c) = &cont else {
                        if j == 0 {
                            alts.push(b.clone());
                        }
                        continue;
                    };
                    let prefix = Chor::seq_of(std::iter::repeat(c.clone()).take(j));
                    alts.push(opt_seq(Some(prefix), Some(b.clone())).expect("both present"));
                }
            }
            (Some(Chor::choice_of(alts)), None)
        }
    })
}

/// w ∈ L[G] under `u` unfoldings: w is a prefix of a linearization of some pomset.
pub fn word_in_language(g: &GChor, u: usize, w: &[Action]) -> Result<bool, GChorError> {
    Ok(Language::new(g, u)?.contains_prefix(w))
}

/// w ∈ L̂[G] under `u` unfoldings: w is a complete linearization of some pomset.
pub fn word_maximal(g: &GChor, u: usize, w: &[Action]) -> Result<bool, GChorError> {
    Ok(Language::new(g, u)?.contains_maximal(w))
}

// Precedence levels for printing: par < choice < seq < postfix/atoms.
fn prec<A>(g: &Chor<A>) -> u8 {
    match g {
        Chor::Par(..) => 1,
        Chor::Choice(..) => 2,
        Chor::Seq(..) => 3,
        _ => 4,
    }
}

/// Print `g` in surface syntax, using `ann` to render interaction annotations.
pub fn write_chor<A>(
    f: &mut dyn fmt::Write,
    g: &Chor<A>,
    ann: &dyn Fn(&mut dyn fmt::Write, &A) -> fmt::Result,
) -> fmt::Result {
    write_at(f, g, 0, ann)
}

fn write_at<A>(
    f: &mut dyn fmt::Write,
    g: &Chor<A>,
    min: u8,
    ann: &dyn Fn(&mut dyn fmt::Write, &A) -> fmt::Result,
) -> fmt::Result {
    if prec(g) < min {
        f.write_str("{ ")?;
        write_at(f, g, 0, ann)?;
        return f.write_str(" }");
    }
    let mut bin = |a: &Chor<A>, op: &str, b: &Chor<A>, p: u8| -> fmt::Result {
        write_at(f, a, p, ann)?;
        write!(f, " {op} ")?;
        write_at(f, b, p + 1, ann)
    };
    match g {
        Chor::Interaction { sender, receiver, message, ann: a } => {
            write!(f, "{sender} -> {receiver} : {message}")?;
            ann(f, a)
        }
        Chor::Seq(a, b) => bin(a, ";", b, 3),
        Chor::Choice(a, b) => bin(a, "+", b, 2),
        Chor::Par(a, b) => bin(a, "|", b, 1),
        Chor::Star(a) => {
            // wrap in braces unless the body is itself an atom
            if matches!(**a, Chor::Interaction { .. } | Chor::Star(_)) {
                write_at(f, a, 4, ann)?;
                f.write_str("*")
            } else {
                f.write_str("{ ")?;
                write_at(f, a, 0, ann)?;
                f.write_str(" }*")
            }
        }
        Chor::Break => f.write_str("break"),
        Chor::Empty => f.write_str("(o)"),
    }
}

impl fmt::Display for GChor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_chor(f, self, &|_, _| Ok(()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(s: &str, r: &str, m: &str) -> GChor {
        GChor::interaction(s, r, m)
    }

    #[test]
    fn star_unfolds_to_choice_of_copies() {
        let g = i("A", "B", "m");
        let u = unfold(&Chor::star(g.clone()), 2).unwrap();
        assert_eq!(u, Chor::choice_of([Chor::Empty, g.clone(), Chor::seq(g.clone(), g)]));
    }

    #[test]
    fn zero_unfoldings_erase_loops() {
        let g = Chor::seq(i("A", "B", "m"), Chor::star(i("B", "A", "n")));
        assert_eq!(unfold(&g, 0).unwrap(), i("A", "B", "m"));
        assert!(unfold(&g, 3).unwrap().is_star_free());
    }

    #[test]
    fn break_outside_loop_rejected() {
        assert_eq!(unfold(&Chor::seq(i("A", "B", "m"), Chor::Break), 1), Err(GChorError::BreakOutsideStar));
    }

    #[test]
    fn break_ends_the_loop() {
        // { A->B:a ; { break + B->A:b } }*  with u = 2
        let body = Chor::seq(i("A", "B", "a"), Chor::choice(Chor::Break, i("B", "A", "b")));
        let u = unfold(&Chor::star(body), 2).unwrap();
        let lang = Language::new(&u, 0).unwrap();
        let ab = |k: Action| k;
        let a = [ab(Action::output("A", "B", "a")), Action::input("A", "B", "a")];
        let b = [Action::output("B", "A", "b"), Action::input("B", "A", "b")];
        // a (break) is maximal, a b a is maximal, a b a b a is not (needs a third copy)
        assert!(lang.contains_maximal(&a));
        assert!(lang.contains_maximal(&[&a[..], &b[..], &a[..]].concat()));
        assert!(lang.contains_maximal(&[&a[..], &b[..], &a[..], &b[..]].concat()));
        assert!(!lang.contains_prefix(&[&a[..], &b[..], &a[..], &b[..], &a[..]].concat()));
        // nothing after a break-resolved copy: a then a again is impossible
        assert!(!lang.contains_prefix(&[&a[..], &a[..]].concat()));
    }

    #[test]
    fn printing_respects_precedence() {
        let g = Chor::seq(
            Chor::choice(i("A", "B", "x"), i("A", "B", "y")),
            Chor::star(Chor::seq(i("B", "A", "z"), i("A", "B", "w"))),
        );
        assert_eq!(g.to_string(), "{ A -> B : x + A -> B : y } ; { B -> A : z ; A -> B : w }*");
        let right = Chor::seq(i("A", "B", "x"), Chor::seq(i("A", "B", "y"), i("A", "B", "z")));
        assert_eq!(right.to_string(), "A -> B : x ; { A -> B : y ; A -> B : z }");
    }
}
