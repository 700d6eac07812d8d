use std::collections::{BTreeSet, HashMap};

use super::{attributes_at, check_declared, terms_at, write_attributes};
use crate::model::{validate_system, Action, Machine, Participant, QosAttributeDecl, QosSpec, StateId, System, Transition};
use crate::smt::SmtTerm;
use crate::syntax::{describe, Cursor, ParseError, Span, Tok};

struct RawTransition {
    source: String,
    partner: usize,
    partner_span: Span,
    output: bool,
    message: String,
    target: String,
}

struct RawMachine {
    name: String,
    states: Vec<String>,
    initial: String,
    transitions: Vec<RawTransition>,
}

/// State names are identifiers or (possibly negative) numbers.
fn state_at(c: &mut Cursor) -> Result<(String, Span), ParseError> {
    if c.peek().is_sym("-") {
        let dash = c.peek().span;
        let n = c.peek_at(1);
        if n.kind == Tok::Number && n.span.line == dash.line && n.span.col_start == dash.col_end {
            c.next();
            let n = c.next();
            return Ok((format!("-{}", n.text), Span { col_end: n.span.col_end, ..dash }));
        }
    }
    let t = c.expect_name("state")?;
    Ok((t.text, t.span))
}

fn machine_at(c: &mut Cursor) -> Result<(RawMachine, Span), ParseError> {
    c.expect_word(".outputs")?;
    let name = c.expect_ident("machine name")?;
    let mut declared = Vec::new();
    if c.eat_word(".states") {
        while !c.peek().is_word(".state") && !c.at_eof() {
            declared.push(state_at(c)?.0);
        }
    }
    c.expect_word(".state")?;
    c.expect_word("graph")?;
    let mut transitions = Vec::new();
    while !c.peek().is_word(".marking") {
        if c.at_eof() {
            return c.error("expected '.marking'");
        }
        let (source, _) = state_at(c)?;
        let p = c.peek().clone();
        if p.kind != Tok::Number {
            return c.error(format!("expected partner index, found {}", describe(&p)));
        }
        c.next();
        let partner = p.text.parse::<usize>().map_err(|_| ParseError::new(p.span, "partner index must be a natural number"))?;
        let output = if c.eat_sym("!") {
            true
        } else if c.eat_sym("?") {
            false
        } else {
            return c.error(format!("expected '!' or '?', found {}", describe(c.peek())));
        };
        let message = c.expect_name("message")?.text;
        let (target, _) = state_at(c)?;
        transitions.push(RawTransition { source, partner, partner_span: p.span, output, message, target });
    }
    c.expect_word(".marking")?;
    let (initial, _) = state_at(c)?;
    c.expect_word(".end")?;

    // declared order, else initial first then order of appearance
    let mut states = declared;
    let mut add = |s: &String| {
        if !states.contains(s) {
            states.push(s.clone());
        }
    };
    add(&initial);
    for t in &transitions {
        add(&t.source);
        add(&t.target);
    }
    Ok((RawMachine { name: name.text, states, initial, transitions }, name.span))
}

/// Parse a `.qosfsa` system.
///
/// ```text
/// file     := 'fsa' '{' machine* '}' section*
/// machine  := '.outputs' NAME ['.states' STATE*] '.state' 'graph' trans* '.marking' STATE '.end'
/// trans    := STATE INDEX ('!' | '?') MSG STATE
/// section  := 'qos' '{' [NAME ':' OP (',' NAME ':' OP)*] '}'
///           | 'specs' '{' [spec (',' spec)*] '}'
///           | 'finals' '{' [NAME ':' '[' STATE,* ']' (',' ...)*] '}'
/// spec     := NAME '@' STATE ':' TERM+
/// ```
pub fn parse_qosfsa(text: &str) -> Result<System, ParseError> {
    let mut c = Cursor::new(text)?;
    let start = c.expect_word("fsa")?.span;
    c.expect_sym("{")?;
    let mut raws: Vec<RawMachine> = Vec::new();
    while !c.peek().is_sym("}") {
        let (m, span) = machine_at(&mut c)?;
        if raws.iter().any(|r| r.name == m.name) {
            return Err(ParseError::new(span, format!("duplicate machine '{}'", m.name)));
        }
        raws.push(m);
    }
    c.expect_sym("}")?;

    let mut attributes: Option<Vec<(QosAttributeDecl, Span)>> = None;
    let mut specs: Vec<(String, Span, String, Span, Vec<(SmtTerm, Span)>)> = Vec::new();
    let mut finals: HashMap<String, Vec<(String, Span)>> = HashMap::new();
    let mut seen = BTreeSet::new();
    while !c.at_eof() {
        let kw = c.expect_ident("'qos', 'specs' or 'finals'")?;
        if !seen.insert(kw.text.clone()) {
            return Err(ParseError::new(kw.span, format!("duplicate '{}' section", kw.text)));
        }
        match kw.text.as_str() {
            "qos" => attributes = Some(attributes_at(&mut c)?),
            "specs" => {
                c.expect_sym("{")?;
                while !c.peek().is_sym("}") {
                    let m = c.expect_ident("machine name")?;
                    c.expect_sym("@")?;
                    let (q, qspan) = state_at(&mut c)?;
                    c.expect_sym(":")?;
                    let ts = terms_at(&mut c)?;
                    if ts.is_empty() {
                        return c.error("expected a parenthesized constraint");
                    }
                    specs.push((m.text, m.span, q, qspan, ts));
                    if !c.eat_sym(",") {
                        break;
                    }
                }
                c.expect_sym("}")?;
            }
            "finals" => {
                c.expect_sym("{")?;
                while !c.peek().is_sym("}") {
                    let m = c.expect_ident("machine name")?;
                    c.expect_sym(":")?;
                    c.expect_sym("[")?;
                    let mut qs = Vec::new();
                    while !c.peek().is_sym("]") {
                        qs.push(state_at(&mut c)?);
                        if !c.eat_sym(",") {
                            break;
                        }
                    }
                    c.expect_sym("]")?;
                    if finals.insert(m.text.clone(), qs).is_some() {
                        return Err(ParseError::new(m.span, format!("duplicate finals for '{}'", m.text)));
                    }
                    if !c.eat_sym(",") {
                        break;
                    }
                }
                c.expect_sym("}")?;
            }
            other => return Err(ParseError::new(kw.span, format!("unknown section '{other}'"))),
        }
    }

    let attributes = attributes.unwrap_or_default();
    for (i, (a, span)) in attributes.iter().enumerate() {
        if attributes[..i].iter().any(|(b, _)| b.name == a.name) {
            return Err(ParseError::new(*span, format!("duplicate attribute '{}'", a.name)));
        }
    }
    let attributes: Vec<QosAttributeDecl> = attributes.into_iter().map(|(a, _)| a).collect();

    let names: Vec<Participant> = raws.iter().map(|r| Participant::new(&r.name)).collect();
    let mut machines = Vec::new();
    for (i, r) in raws.iter().enumerate() {
        let mut transitions = Vec::new();
        for t in &r.transitions {
            let Some(partner) = names.get(t.partner) else {
                return Err(ParseError::new(t.partner_span, format!("unknown partner index {}", t.partner)));
            };
            let me = &names[i];
            let action = if t.output {
                Action::output(me.as_str(), partner.as_str(), &t.message)
            } else {
                Action::input(partner.as_str(), me.as_str(), &t.message)
            };
            transitions.push(Transition { source: StateId(t.source.clone()), action, target: StateId(t.target.clone()) });
        }
        machines.push(Machine {
            name: names[i].clone(),
            states: r.states.iter().map(|s| StateId(s.clone())).collect(),
            initial: StateId(r.initial.clone()),
            accepting: BTreeSet::new(),
            transitions,
            specs: Vec::new(),
        });
    }

    for (m, mspan, q, qspan, ts) in specs {
        let Some(machine) = machines.iter_mut().find(|x| x.name.as_str() == m) else {
            return Err(ParseError::new(mspan, format!("unknown machine '{m}'")));
        };
        let q = StateId(q);
        if machine.state_index(&q).is_none() {
            return Err(ParseError::new(qspan, format!("spec on unknown state {q} of {m}")));
        }
        if machine.spec_of(&q).is_some() {
            return Err(ParseError::new(qspan, format!("duplicate spec for {m}@{q}")));
        }
        for (t, span) in &ts {
            check_declared(t, *span, &attributes)?;
        }
        machine.specs.push((q, QosSpec::new(ts.into_iter().map(|(t, _)| t).collect())));
    }
    for m in &mut machines {
        let order = m.states.clone();
        m.specs.sort_by_key(|(q, _)| order.iter().position(|s| s == q));
    }

    let mut finals: Vec<_> = finals.into_iter().collect();
    finals.sort_by(|a, b| a.0.cmp(&b.0));
    for (m, qs) in finals {
        let Some(machine) = machines.iter_mut().find(|x| x.name.as_str() == m) else {
            let span = qs.first().map(|(_, s)| *s).unwrap_or(start);
            return Err(ParseError::new(span, format!("finals for unknown machine '{m}'")));
        };
        for (q, span) in qs {
            let q = StateId(q);
            if machine.state_index(&q).is_none() {
                return Err(ParseError::new(span, format!("final state {q} is not a state of {m}")));
            }
            machine.accepting.insert(q);
        }
    }

    let sys = System { attributes, machines };
    let report = validate_system(&sys);
    if !report.is_valid() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(ParseError::new(start, format!("invalid system: {}", msgs.join("; "))));
    }
    Ok(sys)
}

/// Inverse of [`parse_qosfsa`] up to layout and comments.
pub fn serialize_qosfsa(sys: &System) -> String {
    let mut out = String::from("fsa {\n");
    for m in &sys.machines {
        out.push_str(&format!("  .outputs {}\n", m.name));
        let mut derived: Vec<&StateId> = vec![&m.initial];
        for t in &m.transitions {
            for s in [&t.source, &t.target] {
                if !derived.contains(&s) {
                    derived.push(s);
                }
            }
        }
        if derived.len() != m.states.len() || derived.iter().zip(&m.states).any(|(a, b)| *a != b) {
            let all: Vec<&str> = m.states.iter().map(|s| s.0.as_str()).collect();
            out.push_str(&format!("  .states {}\n", all.join(" ")));
        }
        out.push_str("  .state graph\n");
        for t in &m.transitions {
            let (partner, dir) = match t.action.kind {
                crate::model::Direction::Output => (&t.action.receiver, "!"),
                crate::model::Direction::Input => (&t.action.sender, "?"),
            };
            let idx = sys.participant_index(partner).expect("validated system");
            out.push_str(&format!("  {} {idx} {dir} {} {}\n", t.source, t.action.message, t.target));
        }
        out.push_str(&format!("  .marking {}\n  .end\n", m.initial));
    }
    out.push_str("}\n");
    write_attributes(&mut out, &sys.attributes);

    let specs: Vec<String> = sys
        .machines
        .iter()
        .flat_map(|m| {
            m.specs.iter().map(move |(q, spec)| {
                let ts: Vec<String> = spec.constraints.iter().map(|t| t.to_string()).collect();
                format!("  {}@{q} : {}", m.name, ts.join(" "))
            })
        })
        .collect();
    if !specs.is_empty() {
        out.push_str(&format!("specs {{\n{}\n}}\n", specs.join(",\n")));
    }

    let finals: Vec<String> = sys
        .machines
        .iter()
        .map(|m| {
            let qs: Vec<&str> = m.accepting.iter().map(|q| q.0.as_str()).collect();
            format!("{} : [{}]", m.name, qs.join(", "))
        })
        .collect();
    out.push_str(&format!("finals {{ {} }}\n", finals.join(", ")));
    out
}
