//! Domain types: participants, actions, qCFSMs, QoS attributes and specs.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::smt::{Sort, SmtTerm};

/// A participant name. Machine names double as participant names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Participant(Arc<str>);

impl Participant {
    pub fn new(name: &str) -> Self {
        Participant(Arc::from(name))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A message identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message(Arc<str>);

impl Message {
    pub fn new(name: &str) -> Self {
        Message(Arc::from(name))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Output,
    Input,
}

/// `A B ! m` or `A B ? m`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub sender: Participant,
    pub receiver: Participant,
    pub kind: Direction,
    pub message: Message,
}

impl Action {
    pub fn output(sender: &str, receiver: &str, message: &str) -> Self {
        Action {
            sender: Participant::new(sender),
            receiver: Participant::new(receiver),
            kind: Direction::Output,
            message: Message::new(message),
        }
    }

    pub fn input(sender: &str, receiver: &str, message: &str) -> Self {
        Action {
            sender: Participant::new(sender),
            receiver: Participant::new(receiver),
            kind: Direction::Input,
            message: Message::new(message),
        }
    }

    /// The participant executing the action.
    pub fn subject(&self) -> &Participant {
        match self.kind {
            Direction::Output => &self.sender,
            Direction::Input => &self.receiver,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.kind {
            Direction::Output => '!',
            Direction::Input => '?',
        };
        write!(f, "{} {} {} {}", self.sender, self.receiver, sym, self.message)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Local state identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub String);

impl StateId {
    pub fn new(s: &str) -> Self {
        StateId(s.to_string())
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub action: Action,
    pub target: StateId,
}

/// Conjunctive list of boolean constraints over attribute names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QosSpec {
    pub constraints: Vec<SmtTerm>,
}

impl QosSpec {
    pub fn new(constraints: Vec<SmtTerm>) -> Self {
        QosSpec { constraints }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QosAttributeDecl {
    pub name: String,
    pub op: String,
}

impl QosAttributeDecl {
    pub fn new(name: &str, op: &str) -> Self {
        QosAttributeDecl { name: name.to_string(), op: op.to_string() }
    }
}

/// A qCFSM. States keep insertion order; specs are stored in state order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: Participant,
    pub states: Vec<StateId>,
    pub initial: StateId,
    pub accepting: BTreeSet<StateId>,
    pub transitions: Vec<Transition>,
    pub specs: Vec<(StateId, QosSpec)>,
}

impl Machine {
    pub fn spec_of(&self, state: &StateId) -> Option<&QosSpec> {
        self.specs.iter().find(|(s, _)| s == state).map(|(_, q)| q)
    }

    pub fn state_index(&self, state: &StateId) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    pub attributes: Vec<QosAttributeDecl>,
    pub machines: Vec<Machine>,
}

impl System {
    pub fn participant_index(&self, p: &Participant) -> Option<usize> {
        self.machines.iter().position(|m| &m.name == p)
    }

    pub fn participants(&self) -> impl Iterator<Item = &Participant> {
        self.machines.iter().map(|m| &m.name)
    }

    pub fn attribute(&self, name: &str) -> Option<&QosAttributeDecl> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// Where a violation was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    System,
    Attribute(String),
    Machine(String),
    State { machine: String, state: String },
    Transition { machine: String, index: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::System => write!(f, "system"),
            Location::Attribute(a) => write!(f, "attribute {a}"),
            Location::Machine(m) => write!(f, "machine {m}"),
            Location::State { machine, state } => write!(f, "state {machine}@{state}"),
            Location::Transition { machine, index } => write!(f, "transition #{index} of {machine}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    TooFewMachines,
    DuplicateParticipant,
    EmptyName,
    DuplicateAttribute,
    EmptyOperator,
    InitialNotAState,
    AcceptingNotAState,
    EndpointNotAState,
    SelfMessage,
    ForeignSubject,
    UnknownParticipant,
    SpecOnUnknownState,
    DuplicateSpec,
    UnknownAttribute(String),
    IllSorted,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::TooFewMachines => write!(f, "fewer than two machines"),
            ViolationKind::DuplicateParticipant => write!(f, "duplicate participant"),
            ViolationKind::EmptyName => write!(f, "empty name"),
            ViolationKind::DuplicateAttribute => write!(f, "duplicate attribute"),
            ViolationKind::EmptyOperator => write!(f, "empty aggregation operator"),
            ViolationKind::InitialNotAState => write!(f, "initial state not a state"),
            ViolationKind::AcceptingNotAState => write!(f, "accepting state not a state"),
            ViolationKind::EndpointNotAState => write!(f, "transition endpoint not a state"),
            ViolationKind::SelfMessage => write!(f, "sender equals receiver"),
            ViolationKind::ForeignSubject => write!(f, "foreign subject"),
            ViolationKind::UnknownParticipant => write!(f, "unknown participant"),
            ViolationKind::SpecOnUnknownState => write!(f, "spec on unknown state"),
            ViolationKind::DuplicateSpec => write!(f, "duplicate spec"),
            ViolationKind::UnknownAttribute(a) => write!(f, "unknown attribute {a}"),
            ViolationKind::IllSorted => write!(f, "constraint is not boolean-sorted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: Location,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.kind)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every system invariant; violations are listed in a stable order.
pub fn validate_system(sys: &System) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |location: Location, kind: ViolationKind| out.push(Violation { location, kind });

    if sys.machines.len() < 2 {
        push(Location::System, ViolationKind::TooFewMachines);
    }

    let mut seen_attr = HashSet::new();
    for a in &sys.attributes {
        if a.name.is_empty() {
            push(Location::Attribute(a.name.clone()), ViolationKind::EmptyName);
        }
        if !seen_attr.insert(a.name.as_str()) {
            push(Location::Attribute(a.name.clone()), ViolationKind::DuplicateAttribute);
        }
        if a.op.is_empty() {
            push(Location::Attribute(a.name.clone()), ViolationKind::EmptyOperator);
        }
    }

    let mut names: HashMap<&Participant, usize> = HashMap::new();
    for m in &sys.machines {
        *names.entry(&m.name).or_default() += 1;
    }

    let mut reported_dup = HashSet::new();
    for m in &sys.machines {
        let mname = m.name.to_string();
        if m.name.as_str().is_empty() {
            push(Location::Machine(mname.clone()), ViolationKind::EmptyName);
        }
        if names[&m.name] > 1 && reported_dup.insert(&m.name) {
            push(Location::Machine(mname.clone()), ViolationKind::DuplicateParticipant);
        }
        let states: HashSet<&StateId> = m.states.iter().collect();
        if !states.contains(&m.initial) {
            push(Location::State { machine: mname.clone(), state: m.initial.0.clone() }, ViolationKind::InitialNotAState);
        }
        for s in &m.accepting {
            if !states.contains(s) {
                push(Location::State { machine: mname.clone(), state: s.0.clone() }, ViolationKind::AcceptingNotAState);
            }
        }
        for (i, t) in m.transitions.iter().enumerate() {
            let loc = || Location::Transition { machine: mname.clone(), index: i };
            if !states.contains(&t.source) || !states.contains(&t.target) {
                push(loc(), ViolationKind::EndpointNotAState);
            }
            if t.action.sender == t.action.receiver {
                push(loc(), ViolationKind::SelfMessage);
            }
            if t.action.subject() != &m.name {
                push(loc(), ViolationKind::ForeignSubject);
            }
            for p in [&t.action.sender, &t.action.receiver] {
                if !names.contains_key(p) {
                    push(loc(), ViolationKind::UnknownParticipant);
                }
            }
        }
        let mut spec_states = HashSet::new();
        for (s, spec) in &m.specs {
            let loc = || Location::State { machine: mname.clone(), state: s.0.clone() };
            if !states.contains(s) {
                push(loc(), ViolationKind::SpecOnUnknownState);
            }
            if !spec_states.insert(s) {
                push(loc(), ViolationKind::DuplicateSpec);
            }
            for c in &spec.constraints {
                if c.sort() != Some(Sort::Bool) {
                    push(loc(), ViolationKind::IllSorted);
                }
                for v in c.free_vars() {
                    if !seen_attr.contains(v.as_str()) {
                        push(loc(), ViolationKind::UnknownAttribute(v));
                    }
                }
            }
        }
    }
    ValidationReport { violations: out }
}
