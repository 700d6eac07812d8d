use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::syntax::{Cursor, ParseError, SExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Real,
    Bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    /// Any other binary real operator the solver is expected to know.
    Other(String),
}

impl ArithOp {
    pub fn from_symbol(s: &str) -> ArithOp {
        match s {
            "+" => ArithOp::Add,
            "-" => ArithOp::Sub,
            "*" => ArithOp::Mul,
            "/" => ArithOp::Div,
            "min" => ArithOp::Min,
            "max" => ArithOp::Max,
            o => ArithOp::Other(o.to_string()),
        }
    }

    pub fn symbol(&self) -> &str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Min => "min",
            ArithOp::Max => "max",
            ArithOp::Other(s) => s,
        }
    }

    /// Commutative and associative, so fold order is irrelevant.
    pub fn is_ac(&self) -> bool {
        matches!(self, ArithOp::Add | ArithOp::Mul | ArithOp::Min | ArithOp::Max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" => CmpOp::Eq,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// SMT-LIB term over real-sorted variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SmtTerm {
    Const(BigRational),
    Var(String),
    Bool(bool),
    Arith(ArithOp, Vec<SmtTerm>),
    Cmp(CmpOp, Vec<SmtTerm>),
    And(Vec<SmtTerm>),
    Or(Vec<SmtTerm>),
    Not(Box<SmtTerm>),
    Implies(Vec<SmtTerm>),
    Ite(Box<SmtTerm>, Box<SmtTerm>, Box<SmtTerm>),
    Quant(Quantifier, Vec<String>, Box<SmtTerm>),
}

impl SmtTerm {
    pub fn var(name: &str) -> SmtTerm {
        SmtTerm::Var(name.to_string())
    }

    pub fn int(n: i64) -> SmtTerm {
        SmtTerm::Const(BigRational::from_integer(BigInt::from(n)))
    }

    /// Decimal literal such as "0.01"; panics on malformed input (use for literals in code).
    pub fn dec(text: &str) -> SmtTerm {
        SmtTerm::Const(parse_decimal(text).expect("decimal literal"))
    }

    pub fn cmp(op: CmpOp, a: SmtTerm, b: SmtTerm) -> SmtTerm {
        SmtTerm::Cmp(op, vec![a, b])
    }

    pub fn not(t: SmtTerm) -> SmtTerm {
        SmtTerm::Not(Box::new(t))
    }

    /// Parse one term from text, e.g. `(<= cost 5)`.
    pub fn parse(text: &str) -> Result<SmtTerm, ParseError> {
        let mut c = Cursor::new(text)?;
        let s = c.sexpr()?;
        if !c.at_eof() {
            return c.error("trailing input after term");
        }
        SmtTerm::from_sexpr(&s)
    }

    /// Convert an s-expression, checking sorts. Bound variables shadow as usual.
    pub fn from_sexpr(s: &SExpr) -> Result<SmtTerm, ParseError> {
        let t = convert(s)?;
        if t.sort().is_none() {
            return Err(ParseError::new(s.span(), "ill-sorted term"));
        }
        Ok(t)
    }

    /// Sort of a well-sorted term, `None` if ill-sorted.
    pub fn sort(&self) -> Option<Sort> {
        use SmtTerm::*;
        let all = |ts: &[SmtTerm], s: Sort| ts.iter().all(|t| t.sort() == Some(s));
        match self {
            Const(_) | Var(_) => Some(Sort::Real),
            Bool(_) => Some(Sort::Bool),
            Arith(_, ts) => all(ts, Sort::Real).then_some(Sort::Real),
            Cmp(_, ts) => (ts.len() >= 2 && all(ts, Sort::Real)).then_some(Sort::Bool),
            And(ts) | Or(ts) | Implies(ts) => all(ts, Sort::Bool).then_some(Sort::Bool),
            Not(t) => (t.sort() == Some(Sort::Bool)).then_some(Sort::Bool),
            Ite(c, a, b) => {
                let s = a.sort()?;
                (c.sort() == Some(Sort::Bool) && b.sort() == Some(s)).then_some(s)
            }
            Quant(_, vs, b) => (!vs.is_empty() && b.sort() == Some(Sort::Bool)).then_some(Sort::Bool),
        }
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        use SmtTerm::*;
        match self {
            Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Const(_) | Bool(_) => {}
            Arith(_, ts) | Cmp(_, ts) | And(ts) | Or(ts) | Implies(ts) => {
                ts.iter().for_each(|t| t.collect_free(bound, out))
            }
            Not(t) => t.collect_free(bound, out),
            Ite(a, b, c) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
                c.collect_free(bound, out);
            }
            Quant(_, vs, b) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                b.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Names bound by quantifiers anywhere in the term.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let SmtTerm::Quant(_, vs, _) = t {
                out.extend(vs.iter().cloned());
            }
        });
        out
    }

    pub fn has_quantifier(&self) -> bool {
        let mut q = false;
        self.walk(&mut |t| q |= matches!(t, SmtTerm::Quant(..)));
        q
    }

    pub fn uses_op(&self, op: &ArithOp) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if let SmtTerm::Arith(o, _) = t {
                found |= o == op;
            }
        });
        found
    }

    fn walk(&self, f: &mut dyn FnMut(&SmtTerm)) {
        use SmtTerm::*;
        f(self);
        match self {
            Const(_) | Var(_) | Bool(_) => {}
            Arith(_, ts) | Cmp(_, ts) | And(ts) | Or(ts) | Implies(ts) => ts.iter().for_each(|t| t.walk(f)),
            Not(t) | Quant(_, _, t) => t.walk(f),
            Ite(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
        }
    }

    /// Capture-avoiding renaming of free variables (bound occurrences are left alone).
    pub fn rename(&self, map: &HashMap<String, String>) -> SmtTerm {
        self.rename_in(map, &mut Vec::new())
    }

    fn rename_in(&self, map: &HashMap<String, String>, bound: &mut Vec<String>) -> SmtTerm {
        use SmtTerm::*;
        let many = |ts: &[SmtTerm], bound: &mut Vec<String>| ts.iter().map(|t| t.rename_in(map, bound)).collect::<Vec<_>>();
        match self {
            Var(v) if !bound.contains(v) => Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Var(_) | Const(_) | Bool(_) => self.clone(),
            Arith(op, ts) => Arith(op.clone(), many(ts, bound)),
            Cmp(op, ts) => Cmp(*op, many(ts, bound)),
            And(ts) => And(many(ts, bound)),
            Or(ts) => Or(many(ts, bound)),
            Implies(ts) => Implies(many(ts, bound)),
            Not(t) => Not(Box::new(t.rename_in(map, bound))),
            Ite(a, b, c) => Ite(
                Box::new(a.rename_in(map, bound)),
                Box::new(b.rename_in(map, bound)),
                Box::new(c.rename_in(map, bound)),
            ),
            Quant(q, vs, b) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                let body = b.rename_in(map, bound);
                bound.truncate(n);
                Quant(*q, vs.clone(), Box::new(body))
            }
        }
    }
}

fn convert(s: &SExpr) -> Result<SmtTerm, ParseError> {
    let err = |m: String| ParseError::new(s.span(), m);
    match s {
        SExpr::Atom(a, _) => {
            if a.starts_with(|c: char| c.is_ascii_digit()) {
                return parse_decimal(a).map(SmtTerm::Const).ok_or_else(|| err(format!("bad numeral '{a}'")));
            }
            match a.as_str() {
                "true" => Ok(SmtTerm::Bool(true)),
                "false" => Ok(SmtTerm::Bool(false)),
                _ if a.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => Ok(SmtTerm::Var(a.clone())),
                _ => Err(err(format!("unexpected symbol '{a}'"))),
            }
        }
        SExpr::List(items, _) => {
            let Some(head) = items.first().and_then(|h| h.atom()) else {
                return Err(err("expected an operator".into()));
            };
            let args = &items[1..];
            let conv = || args.iter().map(convert).collect::<Result<Vec<_>, _>>();
            let need = |n: usize, ok: bool| if ok { Ok(()) } else { Err(err(format!("'{head}' expects {n} argument(s)"))) };
            match head {
                "+" | "*" => {
                    need(2, args.len() >= 2)?;
                    Ok(SmtTerm::Arith(ArithOp::from_symbol(head), conv()?))
                }
                "-" => {
                    need(1, !args.is_empty())?;
                    Ok(SmtTerm::Arith(ArithOp::Sub, conv()?))
                }
                "/" => {
                    need(2, args.len() >= 2)?;
                    Ok(SmtTerm::Arith(ArithOp::Div, conv()?))
                }
                "min" | "max" => {
                    need(2, args.len() == 2)?;
                    Ok(SmtTerm::Arith(ArithOp::from_symbol(head), conv()?))
                }
                "and" => Ok(SmtTerm::And(conv()?)),
                "or" => Ok(SmtTerm::Or(conv()?)),
                "=>" => {
                    need(2, args.len() >= 2)?;
                    Ok(SmtTerm::Implies(conv()?))
                }
                "not" => {
                    need(1, args.len() == 1)?;
                    Ok(SmtTerm::Not(Box::new(convert(&args[0])?)))
                }
                "ite" => {
                    need(3, args.len() == 3)?;
                    let mut v = conv()?.into_iter();
                    Ok(SmtTerm::Ite(Box::new(v.next().unwrap()), Box::new(v.next().unwrap()), Box::new(v.next().unwrap())))
                }
                "exists" | "forall" => {
                    need(2, args.len() == 2)?;
                    let SExpr::List(binders, _) = &args[0] else {
                        return Err(err("expected binder list".into()));
                    };
                    let mut vars = Vec::new();
                    for b in binders {
                        match b {
                            SExpr::List(p, _) if p.len() == 2 && p[1].atom() == Some("Real") => match p[0].atom() {
                                Some(v) if v.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => vars.push(v.to_string()),
                                _ => return Err(ParseError::new(b.span(), "bad bound variable")),
                            },
                            _ => return Err(ParseError::new(b.span(), "binders must have the form (x Real)")),
                        }
                    }
                    need(1, !vars.is_empty())?;
                    let q = if head == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                    Ok(SmtTerm::Quant(q, vars, Box::new(convert(&args[1])?)))
                }
                _ => match CmpOp::from_symbol(head) {
                    Some(op) => {
                        need(2, args.len() >= 2)?;
                        Ok(SmtTerm::Cmp(op, conv()?))
                    }
                    None => Err(err(format!("unknown operator '{head}'"))),
                },
            }
        }
    }
}

/// Exact value of a decimal numeral such as `12`, `0.01`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if text.contains('.') && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, denom))
}

/// Canonical numeral: integers print as `n.0`, finite decimals exactly, others as a quotient.
fn fmt_const(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_negative() {
        f.write_str("(- ")?;
        fmt_const(f, &-r)?;
        return f.write_str(")");
    }
    if r.is_integer() {
        return write!(f, "{}.0", r.numer());
    }
    let mut d = r.denom().clone();
    let mut digits = 0usize;
    let ten = BigInt::from(10);
    for p in [2, 5] {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
        }
    }
    if d.is_one() {
        let mut scaled = r.clone();
        while !scaled.is_integer() {
            scaled *= BigRational::from_integer(ten.clone());
            digits += 1;
        }
        let s = scaled.to_integer().to_string();
        let s = format!("{s:0>width$}", width = digits + 1);
        let (a, b) = s.split_at(s.len() - digits);
        return write!(f, "{a}.{b}");
    }
    write!(f, "(/ {}.0 {}.0)", r.numer(), r.denom())
}

impl fmt::Display for SmtTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SmtTerm::*;
        let list = |f: &mut fmt::Formatter<'_>, head: &str, ts: &[SmtTerm]| -> fmt::Result {
            write!(f, "({head}")?;
            for t in ts {
                write!(f, " {t}")?;
            }
            f.write_str(")")
        };
        match self {
            Const(r) => fmt_const(f, r),
            Var(v) => f.write_str(v),
            Bool(b) => write!(f, "{b}"),
            Arith(op, ts) => list(f, op.symbol(), ts),
            Cmp(op, ts) => list(f, op.symbol(), ts),
            And(ts) if ts.is_empty() => f.write_str("true"),
            Or(ts) if ts.is_empty() => f.write_str("false"),
            And(ts) => list(f, "and", ts),
            Or(ts) => list(f, "or", ts),
            Implies(ts) => list(f, "=>", ts),
            Not(t) => write!(f, "(not {t})"),
            Ite(a, b, c) => write!(f, "(ite {a} {b} {c})"),
            Quant(q, vs, b) => {
                let kw = if *q == Quantifier::Exists { "exists" } else { "forall" };
                write!(f, "({kw} (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({v} Real)")?;
                }
                write!(f, ") {b})")
            }
        }
    }
}
