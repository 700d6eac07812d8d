use std::collections::BTreeSet;
use std::fmt::Write;

use super::term::{ArithOp, SmtTerm};
use crate::syntax::{Cursor, ParseError, SExpr};

const MAX_DEF: &str = "(define-fun max ((a Real) (b Real)) Real (ite (>= a b) a b))";
const MIN_DEF: &str = "(define-fun min ((a Real) (b Real)) Real (ite (<= a b) a b))";

/// Real-sorted declarations plus assertions, serialized canonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtScript {
    pub logic: String,
    /// Declared constant names, all of sort Real. Kept sorted.
    pub declarations: Vec<String>,
    pub assertions: Vec<SmtTerm>,
    pub check: bool,
}

impl SmtScript {
    /// Build a script, picking the logic from the assertions: quantified
    /// nonlinear real arithmetic when a binder occurs, its quantifier-free fragment otherwise.
    pub fn new(declarations: impl IntoIterator<Item = String>, assertions: Vec<SmtTerm>) -> Self {
        let declarations: BTreeSet<String> = declarations.into_iter().collect();
        let quantified = assertions.iter().any(|a| a.has_quantifier());
        SmtScript {
            logic: if quantified { "NRA" } else { "QF_NRA" }.to_string(),
            declarations: declarations.into_iter().collect(),
            assertions,
            check: true,
        }
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        writeln!(s, "(set-logic {})", self.logic).unwrap();
        if self.assertions.iter().any(|a| a.uses_op(&ArithOp::Max)) {
            s.push_str(MAX_DEF);
            s.push('\n');
        }
        if self.assertions.iter().any(|a| a.uses_op(&ArithOp::Min)) {
            s.push_str(MIN_DEF);
            s.push('\n');
        }
        for d in &self.declarations {
            writeln!(s, "(declare-const {d} Real)").unwrap();
        }
        for a in &self.assertions {
            writeln!(s, "(assert {a})").unwrap();
        }
        if self.check {
            s.push_str("(check-sat)\n");
        }
        s
    }

    /// Inverse of [`serialize`](Self::serialize) for the commands it emits.
    pub fn parse(text: &str) -> Result<SmtScript, ParseError> {
        let mut c = Cursor::new(text)?;
        let mut logic = None;
        let mut declarations = Vec::new();
        let mut assertions = Vec::new();
        let mut check = false;
        while !c.at_eof() {
            let cmd = c.sexpr()?;
            let SExpr::List(items, span) = &cmd else {
                return Err(ParseError::new(cmd.span(), "expected a command"));
            };
            let head = items.first().and_then(|h| h.atom()).unwrap_or("");
            match (head, items.len()) {
                ("set-logic", 2) => logic = items[1].atom().map(str::to_string),
                ("define-fun", 5) if matches!(items[1].atom(), Some("min" | "max")) => {}
                ("declare-const", 3) if items[2].atom() == Some("Real") => match items[1].atom() {
                    Some(n) => declarations.push(n.to_string()),
                    None => return Err(ParseError::new(*span, "bad declaration")),
                },
                ("assert", 2) => assertions.push(SmtTerm::from_sexpr(&items[1])?),
                ("check-sat", 1) => check = true,
                _ => return Err(ParseError::new(*span, format!("unsupported command '{head}'"))),
            }
        }
        let logic = logic.ok_or_else(|| ParseError::new(Default::default(), "missing set-logic"))?;
        declarations.sort();
        Ok(SmtScript { logic, declarations, assertions, check })
    }
}
