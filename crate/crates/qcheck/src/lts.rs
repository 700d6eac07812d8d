//! Asynchronous FIFO semantics: configurations, steps, bounded runs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use crate::model::{validate_system, Action, Direction, Message, StateId, System, ValidationReport};

pub type Word = Vec<Action>;

/// Local state indices (by machine order) and one FIFO per ordered channel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    locals: Vec<usize>,
    buffers: Vec<VecDeque<Message>>,
}

fn channel_index(n: usize, from: usize, to: usize) -> usize {
    debug_assert!(from != to);
    from * (n - 1) + if to < from { to } else { to - 1 }
}

impl Configuration {
    /// Index of each participant's local state within its machine.
    pub fn locals(&self) -> &[usize] {
        &self.locals
    }

    pub fn buffer(&self, from: usize, to: usize) -> &VecDeque<Message> {
        &self.buffers[channel_index(self.locals.len(), from, to)]
    }

    pub fn channel_count(&self) -> usize {
        self.buffers.len()
    }

    pub fn local_state<'a>(&self, sys: &'a System, participant: usize) -> &'a StateId {
        &sys.machines[participant].states[self.locals[participant]]
    }

    pub fn buffers_empty(&self) -> bool {
        self.buffers.iter().all(|b| b.is_empty())
    }

    /// Human-readable form, e.g. `A:3 B:3 | A->B:[] B->A:[]`.
    pub fn describe(&self, sys: &System) -> String {
        let n = self.locals.len();
        let mut s = String::new();
        for i in 0..n {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{}:{}", sys.machines[i].name, self.local_state(sys, i)).unwrap();
        }
        s.push_str(" |");
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let msgs: Vec<&str> = self.buffer(i, j).iter().map(|m| m.as_str()).collect();
                    write!(s, " {}->{}:[{}]", sys.machines[i].name, sys.machines[j].name, msgs.join(",")).unwrap();
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub action: Action,
    pub next: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub start: Configuration,
    pub steps: Vec<Step>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|s| &s.next).unwrap_or(&self.start)
    }

    /// Configuration after the first `i` steps.
    pub fn config_at(&self, i: usize) -> &Configuration {
        if i == 0 {
            &self.start
        } else {
            &self.steps[i - 1].next
        }
    }
}

pub fn trace_of(run: &Run) -> Word {
    run.steps.iter().map(|s| s.action.clone()).collect()
}

#[derive(Debug, Error)]
pub enum LtsError {
    #[error("invalid system: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
    #[error("buffer capacity must be positive")]
    ZeroCapacity,
}

struct Edge {
    action: Action,
    target: usize,
    channel: usize,
}

/// Precompiled step relation of a valid system.
pub struct Semantics<'s> {
    sys: &'s System,
    /// machine -> state -> outgoing edges in declaration order
    edges: Vec<Vec<Vec<Edge>>>,
    accepting: Vec<Vec<bool>>,
}

impl<'s> Semantics<'s> {
    pub fn new(sys: &'s System) -> Result<Self, LtsError> {
        let report = validate_system(sys);
        if !report.is_valid() {
            return Err(LtsError::Invalid(report));
        }
        let n = sys.machines.len();
        let part: HashMap<_, _> = sys.machines.iter().enumerate().map(|(i, m)| (&m.name, i)).collect();
        let mut edges = Vec::with_capacity(n);
        let mut accepting = Vec::with_capacity(n);
        for m in &sys.machines {
            let idx: HashMap<&StateId, usize> = m.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let mut out: Vec<Vec<Edge>> = (0..m.states.len()).map(|_| Vec::new()).collect();
            for t in &m.transitions {
                let (s, r) = (part[&t.action.sender], part[&t.action.receiver]);
                out[idx[&t.source]].push(Edge { action: t.action.clone(), target: idx[&t.target], channel: channel_index(n, s, r) });
            }
            edges.push(out);
            accepting.push(m.states.iter().map(|s| m.accepting.contains(s)).collect());
        }
        Ok(Semantics { sys, edges, accepting })
    }

    pub fn system(&self) -> &'s System {
        self.sys
    }

    pub fn initial_configuration(&self) -> Configuration {
        let n = self.sys.machines.len();
        Configuration {
            locals: self.sys.machines.iter().map(|m| m.state_index(&m.initial).expect("valid system")).collect(),
            buffers: vec![VecDeque::new(); n * (n - 1)],
        }
    }

    /// Steps licensed by the output and input rules, by participant then transition order.
    pub fn enabled_steps(&self, c: &Configuration) -> Vec<Step> {
        self.enabled_capped(c, usize::MAX)
    }

    fn enabled_capped(&self, c: &Configuration, cap: usize) -> Vec<Step> {
        let mut out = Vec::new();
        for (p, &q) in c.locals.iter().enumerate() {
            for e in &self.edges[p][q] {
                let buf = &c.buffers[e.channel];
                let ok = match e.action.kind {
                    Direction::Output => buf.len() < cap,
                    Direction::Input => buf.front() == Some(&e.action.message),
                };
                if !ok {
                    continue;
                }
                let mut next = c.clone();
                next.locals[p] = e.target;
                match e.action.kind {
                    Direction::Output => next.buffers[e.channel].push_back(e.action.message.clone()),
                    Direction::Input => {
                        next.buffers[e.channel].pop_front();
                    }
                }
                out.push(Step { action: e.action.clone(), next });
            }
        }
        out
    }

    /// Every local state accepting; buffers are not inspected.
    pub fn is_accepting(&self, c: &Configuration) -> bool {
        c.locals.iter().enumerate().all(|(p, &q)| self.accepting[p][q])
    }

    pub fn enumerate_runs(&self, k: usize) -> Runs<'_, 's> {
        Runs { cursor: RunCursor::new(self, k) }
    }

    /// Breadth-first exploration with every channel capped at `capacity`;
    /// returns (configurations, edges).
    pub fn reachable_graph(&self, capacity: usize) -> Result<(usize, usize), LtsError> {
        if capacity == 0 {
            return Err(LtsError::ZeroCapacity);
        }
        let mut seen = HashMap::new();
        let mut queue = VecDeque::new();
        let init = self.initial_configuration();
        seen.insert(init.clone(), ());
        queue.push_back(init);
        let mut edges = 0;
        while let Some(c) = queue.pop_front() {
            for s in self.enabled_capped(&c, capacity) {
                edges += 1;
                if !seen.contains_key(&s.next) {
                    seen.insert(s.next.clone(), ());
                    queue.push_back(s.next);
                }
            }
        }
        Ok((seen.len(), edges))
    }
}

struct Frame {
    steps: Vec<Step>,
    next: usize,
}

/// Iterative-deepening DFS over runs: all runs of length i, in canonical
/// order, before any run of length i+1. `advance` exposes the current path
/// without cloning it.
pub struct RunCursor<'a, 's> {
    sem: &'a Semantics<'s>,
    start: Configuration,
    k: usize,
    level: usize,
    started: bool,
    frames: Vec<Frame>,
    path: Vec<Step>,
    found_at_level: bool,
    done: bool,
}

impl<'a, 's> RunCursor<'a, 's> {
    pub fn new(sem: &'a Semantics<'s>, k: usize) -> Self {
        RunCursor {
            start: sem.initial_configuration(),
            sem,
            k,
            level: 0,
            started: false,
            frames: Vec::new(),
            path: Vec::new(),
            found_at_level: false,
            done: false,
        }
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    pub fn path(&self) -> &[Step] {
        &self.path
    }

    pub fn last(&self) -> &Configuration {
        self.path.last().map(|s| &s.next).unwrap_or(&self.start)
    }

    pub fn to_run(&self) -> Run {
        Run { start: self.start.clone(), steps: self.path.clone() }
    }

    /// Move to the next run; false when exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            // the empty run
            return true;
        }
        loop {
            if self.frames.is_empty() {
                // finished a level (or just yielded the empty run)
                if self.level > 0 && !self.found_at_level {
                    self.done = true;
                    return false;
                }
                self.level += 1;
                if self.level > self.k {
                    self.done = true;
                    return false;
                }
                self.found_at_level = false;
                self.path.clear();
                let steps = self.sem.enabled_steps(&self.start);
                self.frames.push(Frame { steps, next: 0 });
            }
            // the previously yielded leaf is popped lazily
            if self.path.len() == self.level {
                self.path.pop();
            }
            let top = self.frames.last_mut().expect("frame");
            if top.next < top.steps.len() {
                let step = top.steps[top.next].clone();
                top.next += 1;
                self.path.push(step);
                if self.path.len() == self.level {
                    self.found_at_level = true;
                    return true;
                }
                let steps = self.sem.enabled_steps(&self.path.last().unwrap().next);
                self.frames.push(Frame { steps, next: 0 });
            } else {
                self.frames.pop();
                if !self.frames.is_empty() {
                    self.path.pop();
                }
            }
        }
    }
}

pub struct Runs<'a, 's> {
    cursor: RunCursor<'a, 's>,
}

impl Iterator for Runs<'_, '_> {
    type Item = Run;
    fn next(&mut self) -> Option<Run> {
        self.cursor.advance().then(|| self.cursor.to_run())
    }
}
