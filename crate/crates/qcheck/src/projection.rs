//! Projection of QoS-annotated g-choreographies onto one qCFSM per participant.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::gchor::Chor;
use crate::model::{Action, Direction, Machine, Participant, QosAttributeDecl, QosSpec, StateId, System, Transition};
use crate::smt::SmtTerm;

/// QoS slots of one interaction: pre/post states of sender and receiver.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Slots {
    pub sqos: Vec<SmtTerm>,
    pub rqos: Vec<SmtTerm>,
    pub sqos_post: Vec<SmtTerm>,
    pub rqos_post: Vec<SmtTerm>,
}

impl Slots {
    pub fn is_empty(&self) -> bool {
        self.sqos.is_empty() && self.rqos.is_empty() && self.sqos_post.is_empty() && self.rqos_post.is_empty()
    }

    /// (surface name, constraints) in canonical order.
    pub fn entries(&self) -> [(&'static str, &Vec<SmtTerm>); 4] {
        [("sqos", &self.sqos), ("rqos", &self.rqos), ("sqos'", &self.sqos_post), ("rqos'", &self.rqos_post)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QGChor {
    pub attributes: Vec<QosAttributeDecl>,
    pub body: Chor<Slots>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("parallel not projectable")]
    Parallel,
    #[error("break outside of a loop")]
    BreakOutsideStar,
    #[error("spec collision at state {state} of {participant}")]
    SpecCollision { participant: String, state: String },
    #[error("choreography has fewer than two participants")]
    TooFewParticipants,
}

/// ε-NFA for one participant, built by Thompson's construction.
struct Nfa {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(Action, usize)>>,
    /// annotations landing on each state (one entry per slot)
    specs: Vec<Vec<Vec<SmtTerm>>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.specs.push(Vec::new());
        self.eps.len() - 1
    }

    fn annotate(&mut self, s: usize, terms: &[SmtTerm]) {
        if !terms.is_empty() {
            self.specs[s].push(terms.to_vec());
        }
    }

    /// Build the fragment for `g` from `from`; returns its exit state.
    /// `exit` is the exit of the innermost enclosing loop (for `break`).
    fn build(&mut self, g: &Chor<Slots>, me: &Participant, from: usize, exit: Option<usize>) -> Result<usize, ProjectionError> {
        Ok(match g {
            Chor::Interaction { sender, receiver, message, ann } => {
                let to = self.state();
                let act = |kind| Action { sender: sender.clone(), receiver: receiver.clone(), kind, message: message.clone() };
                if sender == me {
                    self.moves[from].push((act(Direction::Output), to));
                    self.annotate(from, &ann.sqos);
                    self.annotate(to, &ann.sqos_post);
                } else if receiver == me {
                    self.moves[from].push((act(Direction::Input), to));
                    self.annotate(from, &ann.rqos);
                    self.annotate(to, &ann.rqos_post);
                } else {
                    self.eps[from].push(to);
                }
                to
            }
            Chor::Seq(a, b) => {
                let mid = self.build(a, me, from, exit)?;
                self.build(b, me, mid, exit)?
            }
            Chor::Choice(a, b) => {
                let to = self.state();
                for branch in [a, b] {
                    let start = self.state();
                    self.eps[from].push(start);
                    let end = self.build(branch, me, start, exit)?;
                    self.eps[end].push(to);
                }
                to
            }
            Chor::Star(body) => {
                let head = self.state();
                let out = self.state();
                self.eps[from].push(head);
                let end = self.build(body, me, head, Some(out))?;
                self.eps[end].push(head);
                self.eps[head].push(out);
                out
            }
            Chor::Break => {
                let exit = exit.ok_or(ProjectionError::BreakOutsideStar)?;
                self.eps[from].push(exit);
                // nothing continues after a break
                self.state()
            }
            Chor::Empty => from,
            Chor::Par(..) => return Err(ProjectionError::Parallel),
        })
    }

    fn closure(&self, seed: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        let mut stack: Vec<usize> = seed.into_iter().collect();
        while let Some(s) = stack.pop() {
            if set.insert(s) {
                stack.extend(self.eps[s].iter().copied());
            }
        }
        set
    }
}

fn project_one(qg: &QGChor, me: &Participant) -> Result<Machine, ProjectionError> {
    let mut nfa = Nfa { eps: Vec::new(), moves: Vec::new(), specs: Vec::new() };
    let start = nfa.state();
    let fin = nfa.build(&qg.body, me, start, None)?;

    // subset construction, numbering states in discovery order
    let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut sets: Vec<BTreeSet<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let init = nfa.closure([start]);
    ids.insert(init.clone(), 0);
    sets.push(init.clone());
    queue.push_back(init);
    let mut transitions = Vec::new();
    while let Some(set) = queue.pop_front() {
        let src = ids[&set];
        // group moves by action, keeping first-occurrence order
        let mut order: Vec<Action> = Vec::new();
        let mut targets: HashMap<Action, Vec<usize>> = HashMap::new();
        for &s in &set {
            for (a, t) in &nfa.moves[s] {
                if !targets.contains_key(a) {
                    order.push(a.clone());
                }
                targets.entry(a.clone()).or_default().push(*t);
            }
        }
        for a in order {
            let tgt = nfa.closure(targets.remove(&a).unwrap());
            let id = match ids.get(&tgt) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    ids.insert(tgt.clone(), id);
                    sets.push(tgt.clone());
                    queue.push_back(tgt);
                    id
                }
            };
            transitions.push(Transition { source: StateId(src.to_string()), action: a, target: StateId(id.to_string()) });
        }
    }

    let mut specs = Vec::new();
    let mut accepting = BTreeSet::new();
    for (i, set) in sets.iter().enumerate() {
        let mut spec: Option<&Vec<SmtTerm>> = None;
        for here in set.iter().flat_map(|&s| &nfa.specs[s]) {
            match spec {
                Some(prev) if prev != here => {
                    return Err(ProjectionError::SpecCollision { participant: me.to_string(), state: i.to_string() });
                }
                _ => spec = Some(here),
            }
        }
        if let Some(c) = spec {
            specs.push((StateId(i.to_string()), QosSpec::new(c.clone())));
        }
        if set.contains(&fin) {
            accepting.insert(StateId(i.to_string()));
        }
    }

    Ok(Machine {
        name: me.clone(),
        states: (0..sets.len()).map(|i| StateId(i.to_string())).collect(),
        initial: StateId("0".into()),
        accepting,
        transitions,
        specs,
    })
}

/// One machine per participant (order of first appearance), ε-free and deterministic.
pub fn project(qg: &QGChor) -> Result<System, ProjectionError> {
    let parts = qg.body.participants();
    if parts.len() < 2 {
        return Err(ProjectionError::TooFewParticipants);
    }
    let machines = parts.iter().map(|p| project_one(qg, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(System { attributes: qg.attributes.clone(), machines })
}
