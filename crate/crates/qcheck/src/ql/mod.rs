//! QL formulas and the bounded checking algorithms.

mod checker;

use std::fmt;

use crate::gchor::GChor;
use crate::smt::SmtTerm;

pub use checker::{CacheConfig, CheckError, Checker, SatOutcome, Stats, ValidityOutcome, Verdict};

/// Surface formula, as written in `.ql` files.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Qos(SmtTerm),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, GChor, Box<Formula>),
    /// ⟨G⟩Φ
    Possibly(GChor, Box<Formula>),
    /// [G]Φ
    Necessarily(GChor, Box<Formula>),
}

/// Core formula: the five constructors the algorithms work on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Core {
    True,
    Atomic(SmtTerm),
    Not(Box<Core>),
    Or(Box<Core>, Box<Core>),
    Until(Box<Core>, GChor, Box<Core>),
}

impl Core {
    pub fn not(f: Core) -> Core {
        Core::Not(Box::new(f))
    }

    pub fn or(a: Core, b: Core) -> Core {
        Core::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Core, g: GChor, b: Core) -> Core {
        Core::Until(Box::new(a), g, Box::new(b))
    }

    /// Every until index is star-free (the QL⁻ fragment).
    pub fn is_star_free(&self) -> bool {
        match self {
            Core::True | Core::Atomic(_) => true,
            Core::Not(f) => f.is_star_free(),
            Core::Or(a, b) => a.is_star_free() && b.is_star_free(),
            Core::Until(a, g, b) => g.is_star_free() && a.is_star_free() && b.is_star_free(),
        }
    }

    /// Embed back into the surface syntax (for printing).
    pub fn to_formula(&self) -> Formula {
        match self {
            Core::True => Formula::True,
            Core::Atomic(t) => Formula::Qos(t.clone()),
            Core::Not(f) => Formula::not(f.to_formula()),
            Core::Or(a, b) => Formula::or(a.to_formula(), b.to_formula()),
            Core::Until(a, g, b) => Formula::until(a.to_formula(), g.clone(), b.to_formula()),
        }
    }
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn until(a: Formula, g: GChor, b: Formula) -> Formula {
        Formula::Until(Box::new(a), g, Box::new(b))
    }
    pub fn possibly(g: GChor, f: Formula) -> Formula {
        Formula::Possibly(g, Box::new(f))
    }
    pub fn necessarily(g: GChor, f: Formula) -> Formula {
        Formula::Necessarily(g, Box::new(f))
    }

    /// Rewrite derived operators into the core constructors.
    pub fn desugar(&self) -> Core {
        match self {
            Formula::True => Core::True,
            Formula::Qos(t) => Core::Atomic(t.clone()),
            Formula::Not(f) => Core::not(f.desugar()),
            Formula::Or(a, b) => Core::or(a.desugar(), b.desugar()),
            Formula::And(a, b) => Core::not(Core::or(Core::not(a.desugar()), Core::not(b.desugar()))),
            Formula::Implies(a, b) => Core::or(Core::not(a.desugar()), b.desugar()),
            Formula::Until(a, g, b) => Core::until(a.desugar(), g.clone(), b.desugar()),
            Formula::Possibly(g, f) => Core::until(Core::True, g.clone(), f.desugar()),
            Formula::Necessarily(g, f) => Core::not(Core::until(Core::True, g.clone(), Core::not(f.desugar()))),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Until(..) => 4,
            Formula::Not(_) | Formula::Possibly(..) | Formula::Necessarily(..) => 5,
            Formula::True | Formula::Qos(_) => 6,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::Qos(t) => write!(f, "qos {t}"),
            Formula::Not(a) => {
                f.write_str("not ")?;
                a.write_at(f, 5)
            }
            Formula::Possibly(g, a) => {
                write!(f, "< {g} > ")?;
                a.write_at(f, 5)
            }
            Formula::Necessarily(g, a) => {
                write!(f, "[ {g} ] ")?;
                a.write_at(f, 5)
            }
            Formula::Until(a, g, b) => {
                a.write_at(f, 5)?;
                write!(f, " until {{ {g} }} ")?;
                b.write_at(f, 4)
            }
            Formula::And(a, b) => {
                a.write_at(f, 3)?;
                f.write_str(" and ")?;
                b.write_at(f, 4)
            }
            Formula::Or(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" or ")?;
                b.write_at(f, 3)
            }
            Formula::Implies(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" => ")?;
                b.write_at(f, 1)
            }
        }
    }
}

/// Serialized in `.ql` surface syntax.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_formula().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GChor {
        GChor::interaction("A", "B", "m")
    }

    fn psi() -> Formula {
        Formula::Qos(SmtTerm::parse("(<= cost 3)").unwrap())
    }

    #[test]
    fn derived_modalities() {
        let p = psi().desugar();
        assert_eq!(Formula::possibly(g(), psi()).desugar(), Core::until(Core::True, g(), p.clone()));
        assert_eq!(
            Formula::necessarily(g(), psi()).desugar(),
            Core::not(Core::until(Core::True, g(), Core::not(p.clone())))
        );
        assert_eq!(Formula::implies(Formula::True, psi()).desugar(), Core::or(Core::not(Core::True), p));
    }

    #[test]
    fn printing_parenthesizes_by_precedence() {
        let f = Formula::and(Formula::or(Formula::True, psi()), Formula::not(Formula::True));
        assert_eq!(f.to_string(), "(true or qos (<= cost 3.0)) and not true");
        let u = Formula::until(Formula::True, g(), Formula::until(psi(), g(), Formula::True));
        assert_eq!(u.to_string(), "true until { A -> B : m } qos (<= cost 3.0) until { A -> B : m } true");
    }
}
