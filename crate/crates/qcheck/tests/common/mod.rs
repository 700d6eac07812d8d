//! Reference oracle shared by the integration tests. It shares no code with the
//! checker: runs come from its own breadth-first search, g-choreography languages
//! from explicit word sets, and entailment from interval arithmetic over the
//! bound constraints the generators emit.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::rc::Rc;
use std::time::Duration;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use qcheck::gchor::{Chor, GChor};
use qcheck::lts::Run;
use qcheck::model::{Action, Direction, QosSpec, System};
use qcheck::ql::{Checker, Formula};
use qcheck::smt::{resolve_solver_command, ArithOp, CmpOp, ProcessSolver, SmtTerm};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn checker(sys: &System) -> Checker<'_> {
    let solver = ProcessSolver::new(&resolve_solver_command(None), Duration::from_secs(60)).expect("solver available");
    Checker::new(sys, Box::new(solver)).expect("valid system")
}

// ---------------------------------------------------------------- runs

/// One move: the action, its subject and the subject's new local state (index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefStep {
    pub action: Action,
    pub subject: usize,
    pub target: usize,
}

pub type RefRun = Vec<RefStep>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Conf {
    locals: Vec<usize>,
    queues: BTreeMap<(usize, usize), VecDeque<String>>,
}

fn index_of(sys: &System, name: &str) -> usize {
    sys.machines.iter().position(|m| m.name.as_str() == name).expect("known participant")
}

fn state_index(sys: &System, p: usize, s: &qcheck::model::StateId) -> usize {
    sys.machines[p].states.iter().position(|x| x == s).expect("known state")
}

fn initial(sys: &System) -> Conf {
    let locals = (0..sys.machines.len()).map(|p| state_index(sys, p, &sys.machines[p].initial)).collect();
    Conf { locals, queues: BTreeMap::new() }
}

fn moves(sys: &System, c: &Conf) -> Vec<(RefStep, Conf)> {
    let mut out = Vec::new();
    for (p, m) in sys.machines.iter().enumerate() {
        let here = &m.states[c.locals[p]];
        for t in m.transitions.iter().filter(|t| &t.source == here) {
            let a = &t.action;
            let (s, r) = (index_of(sys, a.sender.as_str()), index_of(sys, a.receiver.as_str()));
            let mut next = c.clone();
            match a.kind {
                Direction::Output => next.queues.entry((s, r)).or_default().push_back(a.message.to_string()),
                Direction::Input => {
                    let q = next.queues.entry((s, r)).or_default();
                    if q.front().map(String::as_str) != Some(a.message.as_str()) {
                        continue;
                    }
                    q.pop_front();
                }
            }
            let target = state_index(sys, p, &t.target);
            next.locals[p] = target;
            out.push((RefStep { action: a.clone(), subject: p, target }, next));
        }
    }
    out
}

fn accepting(sys: &System, c: &Conf) -> bool {
    c.locals.iter().enumerate().all(|(p, &q)| sys.machines[p].accepting.contains(&sys.machines[p].states[q]))
}

/// Every run of length at most `k` (the empty one included), with whether
/// its last configuration is accepting and whether it can still move.
pub fn all_runs(sys: &System, k: usize) -> Vec<(RefRun, bool, bool)> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(Vec::new(), initial(sys))]);
    while let Some((run, conf)) = queue.pop_front() {
        let next = moves(sys, &conf);
        out.push((run.clone(), accepting(sys, &conf), !next.is_empty()));
        if run.len() == k {
            continue;
        }
        for (step, c) in next {
            let mut r = run.clone();
            r.push(step);
            queue.push_back((r, c));
        }
    }
    out
}

pub fn from_run(sys: &System, run: &Run) -> RefRun {
    run.steps
        .iter()
        .map(|s| {
            let p = index_of(sys, s.action.subject().as_str());
            RefStep { action: s.action.clone(), subject: p, target: s.next.locals()[p] }
        })
        .collect()
}

pub fn word(steps: &[RefStep]) -> Vec<Action> {
    steps.iter().map(|s| s.action.clone()).collect()
}

// ---------------------------------------------------------------- languages

/// Complete words of a star-free g-choreography, and all their prefixes.
pub struct Lang {
    pub complete: BTreeSet<Vec<Action>>,
    pub prefixes: BTreeSet<Vec<Action>>,
}

fn interleave(a: &[Action], b: &[Action], weak: bool, acc: &mut Vec<Action>, out: &mut BTreeSet<Vec<Action>>) {
    if a.is_empty() && b.is_empty() {
        out.insert(acc.clone());
        return;
    }
    if let Some((x, rest)) = a.split_first() {
        acc.push(x.clone());
        interleave(rest, b, weak, acc, out);
        acc.pop();
    }
    if let Some((y, rest)) = b.split_first() {
        // in a sequence, y waits for every pending action of its subject on the left
        if !weak || a.iter().all(|x| x.subject() != y.subject()) {
            acc.push(y.clone());
            interleave(a, rest, weak, acc, out);
            acc.pop();
        }
    }
}

pub fn complete_words(g: &GChor) -> BTreeSet<Vec<Action>> {
    match g {
        Chor::Interaction { sender, receiver, message, .. } => {
            let out = Action::output(sender.as_str(), receiver.as_str(), message.as_str());
            let inp = Action::input(sender.as_str(), receiver.as_str(), message.as_str());
            BTreeSet::from([vec![out, inp]])
        }
        Chor::Empty => BTreeSet::from([Vec::new()]),
        Chor::Choice(a, b) => complete_words(a).union(&complete_words(b)).cloned().collect(),
        Chor::Seq(a, b) | Chor::Par(a, b) => {
            let weak = matches!(g, Chor::Seq(..));
            let (wa, wb) = (complete_words(a), complete_words(b));
            let mut out = BTreeSet::new();
            for x in &wa {
                for y in &wb {
                    interleave(x, y, weak, &mut Vec::new(), &mut out);
                }
            }
            out
        }
        Chor::Star(_) | Chor::Break => panic!("the oracle handles star-free, break-free choreographies only"),
    }
}

pub fn lang(g: &GChor) -> Lang {
    let complete = complete_words(g);
    let mut prefixes = BTreeSet::new();
    for w in &complete {
        for i in 0..=w.len() {
            prefixes.insert(w[..i].to_vec());
        }
    }
    Lang { complete, prefixes }
}

// ---------------------------------------------------------------- intervals

type Q = BigRational;

/// Closed interval; `None` is an infinite end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iv {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
}

impl Iv {
    pub fn top() -> Iv {
        Iv { lo: None, hi: None }
    }

    pub fn point(q: Q) -> Iv {
        Iv { lo: Some(q.clone()), hi: Some(q) }
    }

    fn is_empty(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(l), Some(h)) if l > h)
    }

    fn meet_lo(&mut self, q: Q) {
        if self.lo.as_ref().is_none_or(|l| &q > l) {
            self.lo = Some(q);
        }
    }

    fn meet_hi(&mut self, q: Q) {
        if self.hi.as_ref().is_none_or(|h| &q < h) {
            self.hi = Some(q);
        }
    }

    fn add(&self, o: &Iv) -> Iv {
        let plus = |a: &Option<Q>, b: &Option<Q>| Some(a.as_ref()? + b.as_ref()?);
        Iv { lo: plus(&self.lo, &o.lo), hi: plus(&self.hi, &o.hi) }
    }

    fn scale(&self, k: &Q) -> Iv {
        assert!(!k.is_negative(), "only non-negative scaling is supported");
        Iv { lo: self.lo.as_ref().map(|x| x * k), hi: self.hi.as_ref().map(|x| x * k) }
    }

    fn max(&self, o: &Iv) -> Iv {
        let lo = match (&self.lo, &o.lo) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (a, b) => a.clone().or(b.clone()),
        };
        let hi = match (&self.hi, &o.hi) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            _ => None,
        };
        Iv { lo, hi }
    }
}

fn constant(t: &SmtTerm) -> Option<Q> {
    match t {
        SmtTerm::Const(q) => Some(q.clone()),
        _ => None,
    }
}

/// A spec as a box: each constraint must bound a single attribute by a constant.
pub fn spec_box(spec: &QosSpec) -> BTreeMap<String, Iv> {
    let mut out: BTreeMap<String, Iv> = BTreeMap::new();
    for c in &spec.constraints {
        bound(c, &mut out);
    }
    out
}

fn bound(c: &SmtTerm, out: &mut BTreeMap<String, Iv>) {
    match c {
        SmtTerm::And(cs) => cs.iter().for_each(|c| bound(c, out)),
        SmtTerm::Cmp(op, args) if args.len() == 2 => {
            let (var, k, flipped) = match (&args[0], &args[1]) {
                (SmtTerm::Var(v), k) => (v, constant(k).expect("constant bound"), false),
                (k, SmtTerm::Var(v)) => (v, constant(k).expect("constant bound"), true),
                _ => panic!("unsupported spec constraint {c}"),
            };
            let iv = out.entry(var.clone()).or_insert_with(Iv::top);
            // normalise to `var op k`
            let op = match (op, flipped) {
                (CmpOp::Le, true) => CmpOp::Ge,
                (CmpOp::Ge, true) => CmpOp::Le,
                (CmpOp::Lt, true) | (CmpOp::Gt, true) => panic!("strict spec bounds are not supported"),
                (op, _) => *op,
            };
            match op {
                CmpOp::Le => iv.meet_hi(k),
                CmpOp::Ge => iv.meet_lo(k),
                CmpOp::Eq => {
                    iv.meet_lo(k.clone());
                    iv.meet_hi(k);
                }
                _ => panic!("strict spec bounds are not supported"),
            }
        }
        _ => panic!("unsupported spec constraint {c}"),
    }
}

/// Spec-carrying local states visited along a prefix: initial states, then each move's target.
pub fn occurrence_specs<'s>(sys: &'s System, prefix: &[RefStep]) -> Vec<&'s QosSpec> {
    let init = initial(sys);
    let mut out = Vec::new();
    let mut visit = |p: usize, q: usize| {
        let m = &sys.machines[p];
        if let Some(s) = m.spec_of(&m.states[q]) {
            out.push(s);
        }
    };
    for (p, &q) in init.locals.iter().enumerate() {
        visit(p, q);
    }
    for s in prefix {
        visit(s.subject, s.target);
    }
    out
}

/// Range of each aggregated attribute, or `None` when the constraints are unsatisfiable.
pub fn aggregated_box(sys: &System, prefix: &[RefStep]) -> Option<BTreeMap<String, Iv>> {
    let mut copies: BTreeMap<String, Vec<Iv>> = BTreeMap::new();
    for spec in occurrence_specs(sys, prefix) {
        for (a, iv) in spec_box(spec) {
            if iv.is_empty() {
                return None;
            }
            copies.entry(a).or_default().push(iv);
        }
    }
    let mut out = BTreeMap::new();
    for decl in &sys.attributes {
        let Some(list) = copies.get(&decl.name) else {
            out.insert(decl.name.clone(), Iv::top());
            continue;
        };
        let fold = |f: &dyn Fn(&Iv, &Iv) -> Iv| list[1..].iter().fold(list[0].clone(), |acc, x| f(&acc, x));
        let iv = match decl.op.as_str() {
            "+" => fold(&|a, b| a.add(b)),
            "max" => fold(&|a, b| a.max(b)),
            o => panic!("oracle does not model operator {o}"),
        };
        out.insert(decl.name.clone(), iv);
    }
    Some(out)
}

fn range(t: &SmtTerm, env: &BTreeMap<String, Iv>) -> Iv {
    match t {
        SmtTerm::Const(q) => Iv::point(q.clone()),
        SmtTerm::Var(v) => env[v].clone(),
        SmtTerm::Arith(ArithOp::Add, xs) => xs[1..].iter().fold(range(&xs[0], env), |acc, x| acc.add(&range(x, env))),
        SmtTerm::Arith(ArithOp::Mul, xs) if xs.len() == 2 => match (constant(&xs[0]), constant(&xs[1])) {
            (Some(k), _) => range(&xs[1], env).scale(&k),
            (_, Some(k)) => range(&xs[0], env).scale(&k),
            _ => panic!("nonlinear term {t}"),
        },
        _ => panic!("unsupported term {t}"),
    }
}

fn vars(t: &SmtTerm) -> BTreeSet<String> {
    t.free_vars()
}

/// Does every point of the box satisfy ψ? Exact for comparisons whose two
/// sides share no attribute, and conjunctions of those.
pub fn box_entails(env: &BTreeMap<String, Iv>, psi: &SmtTerm) -> bool {
    match psi {
        SmtTerm::Bool(b) => *b,
        SmtTerm::And(cs) => cs.iter().all(|c| box_entails(env, c)),
        SmtTerm::Cmp(op, args) if args.len() == 2 => {
            assert!(vars(&args[0]).is_disjoint(&vars(&args[1])), "sides must be independent: {psi}");
            let (l, r) = (range(&args[0], env), range(&args[1], env));
            let le = |a: &Option<Q>, b: &Option<Q>| matches!((a, b), (Some(a), Some(b)) if a <= b);
            let lt = |a: &Option<Q>, b: &Option<Q>| matches!((a, b), (Some(a), Some(b)) if a < b);
            match op {
                CmpOp::Le => le(&l.hi, &r.lo),
                CmpOp::Lt => lt(&l.hi, &r.lo),
                CmpOp::Ge => le(&r.hi, &l.lo),
                CmpOp::Gt => lt(&r.hi, &l.lo),
                CmpOp::Eq => le(&l.hi, &r.lo) && le(&r.hi, &l.lo),
            }
        }
        _ => panic!("unsupported property constraint {psi}"),
    }
}

pub fn entails(sys: &System, prefix: &[RefStep], psi: &SmtTerm) -> bool {
    match aggregated_box(sys, prefix) {
        None => true,
        Some(env) => box_entails(&env, psi),
    }
}

// ---------------------------------------------------------------- satisfaction

/// The satisfaction relation evaluated directly on surface formulas.
pub struct Oracle<'s> {
    pub sys: &'s System,
    langs: HashMap<GChor, Rc<Lang>>,
}

impl<'s> Oracle<'s> {
    pub fn new(sys: &'s System) -> Self {
        Oracle { sys, langs: HashMap::new() }
    }

    pub fn lang(&mut self, g: &GChor) -> Rc<Lang> {
        self.langs.entry(g.clone()).or_insert_with(|| Rc::new(lang(g))).clone()
    }

    /// ⟨π, π[..j]⟩ ⊨ Φ
    pub fn sat(&mut self, f: &Formula, run: &[RefStep], j: usize) -> bool {
        match f {
            Formula::True => true,
            Formula::Qos(psi) => entails(self.sys, &run[..j], psi),
            Formula::Not(a) => !self.sat(a, run, j),
            Formula::And(a, b) => self.sat(a, run, j) && self.sat(b, run, j),
            Formula::Or(a, b) => self.sat(a, run, j) || self.sat(b, run, j),
            Formula::Implies(a, b) => !self.sat(a, run, j) || self.sat(b, run, j),
            Formula::Until(a, g, b) => self.until_from(a, g, b, run, j, 0),
            Formula::Possibly(g, a) => self.until_from(&Formula::True, g, a, run, j, 0),
            Formula::Necessarily(g, a) => !self.until_from(&Formula::True, g, &Formula::not((**a).clone()), run, j, 0),
        }
    }

    /// Is there a completion run[j..j+l] with l ≥ `min`, a complete word of G,
    /// satisfying Φ₂ at its end and Φ₁ at every shorter extension?
    pub fn until_from(&mut self, f1: &Formula, g: &GChor, f2: &Formula, run: &[RefStep], j: usize, min: usize) -> bool {
        let lang = self.lang(g);
        (min..=run.len() - j).any(|l| {
            lang.complete.contains(&word(&run[j..j + l])) && self.sat(f2, run, j + l) && (0..l).all(|m| self.sat(f1, run, j + m))
        })
    }

    /// Some accepting run of length ≤ k satisfies Φ.
    pub fn satisfiable(&mut self, f: &Formula, k: usize) -> bool {
        all_runs(self.sys, k).iter().any(|(r, acc, _)| *acc && self.sat(f, r, 0))
    }
}

// ---------------------------------------------------------------- generators

const PARTICIPANTS: [&str; 3] = ["A", "B", "C"];
const MESSAGES: [&str; 2] = ["m", "n"];
const ATTRIBUTES: [&str; 2] = ["x", "y"];

/// A random instance: at most 3 participants, 4 states per machine and 2 attributes,
/// with interval specs. Returned as `.qosfsa` text together with its interactions.
pub struct RandomSystem {
    pub text: String,
    pub interactions: Vec<(String, String, String)>,
    pub attributes: Vec<String>,
}

pub fn random_system(rng: &mut impl Rng) -> RandomSystem {
    let n = rng.gen_range(2..=3);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
    let mut trans: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut interactions = Vec::new();
    // a random walk of interactions, so that sends tend to meet their receives
    let mut cursor = vec![0usize; n];
    for _ in 0..rng.gen_range(2..=5) {
        let s = rng.gen_range(0..n);
        let r = (s + rng.gen_range(1..n)) % n;
        let m = *MESSAGES.choose(rng).unwrap();
        for (p, dir, other) in [(s, '!', r), (r, '?', s)] {
            let a = if rng.gen_bool(0.8) { cursor[p] } else { rng.gen_range(0..sizes[p]) };
            let b = if rng.gen_bool(0.7) { (a + 1) % sizes[p] } else { rng.gen_range(0..sizes[p]) };
            trans[p].push(format!("{a} {other} {dir} {m} {b}"));
            cursor[p] = b;
        }
        let i = (PARTICIPANTS[s].to_string(), PARTICIPANTS[r].to_string(), m.to_string());
        if !interactions.contains(&i) {
            interactions.push(i);
        }
    }
    let nattr = rng.gen_range(1..=2);
    let attributes: Vec<String> = ATTRIBUTES[..nattr].iter().map(|s| s.to_string()).collect();

    let mut text = String::from("fsa {\n");
    for p in 0..n {
        text.push_str(&format!(".outputs {}\n.states {}\n.state graph\n", PARTICIPANTS[p], (0..sizes[p]).map(|q| q.to_string()).collect::<Vec<_>>().join(" ")));
        for t in &trans[p] {
            text.push_str(t);
            text.push('\n');
        }
        text.push_str(".marking 0\n.end\n");
    }
    text.push_str("}\nqos { ");
    let decls: Vec<String> = attributes.iter().map(|a| format!("{a} : {}", if rng.gen_bool(0.5) { "+" } else { "max" })).collect();
    text.push_str(&decls.join(", "));
    text.push_str(" }\nspecs {\n");
    let mut specs = Vec::new();
    for p in 0..n {
        for q in 0..sizes[p] {
            if !rng.gen_bool(0.5) {
                continue;
            }
            let mut terms = Vec::new();
            for a in &attributes {
                if !rng.gen_bool(0.7) {
                    continue;
                }
                let lo = rng.gen_range(1..6);
                let hi = if rng.gen_bool(0.05) { lo - 1 } else { lo + rng.gen_range(0..5) };
                match rng.gen_range(0..5) {
                    0 => terms.push(format!("(<= {a} {hi})")),
                    1 => terms.push(format!("(= {a} {lo})")),
                    2 => terms.push(format!("(and (<= {lo} {a}) (<= {a} {hi}))")),
                    _ => terms.push(format!("(>= {a} {lo}) (<= {a} {hi})")),
                }
            }
            if !terms.is_empty() {
                specs.push(format!("  {}@{q} : {}", PARTICIPANTS[p], terms.join(" ")));
            }
        }
    }
    text.push_str(&specs.join(",\n"));
    text.push_str("\n}\nfinals { ");
    let finals: Vec<String> = (0..n)
        .map(|p| {
            let mut fs: Vec<String> = (0..sizes[p]).filter(|&q| q == cursor[p] || rng.gen_bool(0.3)).map(|q| q.to_string()).collect();
            fs.sort_by_key(|q| q.parse::<usize>().unwrap());
            format!("{} : [{}]", PARTICIPANTS[p], fs.join(", "))
        })
        .collect();
    text.push_str(&finals.join(", "));
    text.push_str(" }\n");
    RandomSystem { text, interactions, attributes }
}

pub fn random_psi(rng: &mut impl Rng, attributes: &[String]) -> SmtTerm {
    let c = SmtTerm::int(rng.gen_range(0..15));
    let ops = [CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt];
    let op = *ops.choose(rng).unwrap();
    let lhs = if attributes.len() == 2 && rng.gen_bool(0.25) {
        SmtTerm::Arith(ArithOp::Add, vec![SmtTerm::var(&attributes[0]), SmtTerm::var(&attributes[1])])
    } else {
        SmtTerm::var(attributes.choose(rng).unwrap())
    };
    let atom = if rng.gen_bool(0.5) { SmtTerm::cmp(op, lhs, c) } else { SmtTerm::cmp(op, c, lhs) };
    if rng.gen_bool(0.15) {
        SmtTerm::And(vec![atom, random_psi(rng, attributes)])
    } else {
        atom
    }
}

/// Star-free g-choreography over the given interactions.
pub fn random_chor(rng: &mut impl Rng, interactions: &[(String, String, String)], depth: usize) -> GChor {
    if depth == 0 || rng.gen_bool(0.35) {
        if rng.gen_bool(0.05) {
            return Chor::Empty;
        }
        let (s, r, m) = interactions.choose(rng).unwrap();
        return GChor::interaction(s, r, m);
    }
    let a = random_chor(rng, interactions, depth - 1);
    let b = random_chor(rng, interactions, depth - 1);
    match rng.gen_range(0..10) {
        0..=4 => Chor::seq(a, b),
        5..=8 => Chor::choice(a, b),
        _ => Chor::par(a, b),
    }
}

pub fn random_formula(rng: &mut impl Rng, sys: &RandomSystem, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.15) { Formula::True } else { Formula::Qos(random_psi(rng, &sys.attributes)) };
    }
    let sub = |rng: &mut _| random_formula(rng, sys, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 | 5 => {
            let (a, b) = (sub(rng), sub(rng));
            Formula::until(a, random_chor(rng, &sys.interactions, 2), b)
        }
        6 => Formula::possibly(random_chor(rng, &sys.interactions, 2), sub(rng)),
        _ => Formula::necessarily(random_chor(rng, &sys.interactions, 2), sub(rng)),
    }
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn is_zero(x: &BigRational) -> bool {
    x.is_zero()
}
