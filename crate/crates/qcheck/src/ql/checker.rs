use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::{Core, Formula};
use crate::aggregation::{self, AggregationError};
use crate::gchor::{GChor, GChorError, Language};
use crate::lts::{LtsError, Run, RunCursor, Semantics, Step, Word};
use crate::model::System;
use crate::smt::{SmtTerm, Solver};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    GChor(#[from] GChorError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
}

/// Switches for the three memo tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheConfig {
    /// pomsets of (G, u)
    pub languages: bool,
    /// entailment verdicts keyed by the serialized query
    pub entailment: bool,
    /// word membership keyed by (G, u, word)
    pub membership: bool,
}

impl CacheConfig {
    pub fn all() -> Self {
        CacheConfig { languages: true, entailment: true, membership: true }
    }
    pub fn none() -> Self {
        CacheConfig { languages: false, entailment: false, membership: false }
    }
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// runs produced by the enumerator
    pub runs: u64,
    /// queries actually sent to the solver
    pub queries: u64,
    pub cache_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    ModelFound(Run),
    NoModelWithinBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidityOutcome {
    CounterexampleFound(Run),
    NoCounterexampleWithinBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict<O> {
    pub outcome: O,
    pub stats: Stats,
}

/// Core formula with until indices replaced by interned ids.
enum Compiled {
    True,
    Atomic(SmtTerm),
    Not(Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Until(Box<Compiled>, usize, Box<Compiled>),
}

/// One checking session: a system, a solver and the memo tables.
pub struct Checker<'s> {
    sem: Rc<Semantics<'s>>,
    solver: Box<dyn Solver + 's>,
    caches: CacheConfig,
    unfoldings: usize,
    chors: Vec<GChor>,
    chor_ids: HashMap<GChor, usize>,
    languages: HashMap<(usize, usize), Rc<Language>>,
    entailment: BTreeMap<String, bool>,
    membership: HashMap<(usize, usize, bool, Word), bool>,
    stats: Stats,
}

impl<'s> Checker<'s> {
    pub fn new(sys: &'s System, solver: Box<dyn Solver + 's>) -> Result<Self, CheckError> {
        let sem = Rc::new(Semantics::new(sys)?);
        for a in aggregation::order_sensitive_attributes(sys) {
            tracing::warn!("attribute {a} uses an order-sensitive aggregation operator; copies are folded left to right");
        }
        Ok(Checker {
            sem,
            solver,
            caches: CacheConfig::all(),
            unfoldings: 0,
            chors: Vec::new(),
            chor_ids: HashMap::new(),
            languages: HashMap::new(),
            entailment: BTreeMap::new(),
            membership: HashMap::new(),
            stats: Stats::default(),
        })
    }

    pub fn with_caches(mut self, caches: CacheConfig) -> Self {
        self.caches = caches;
        self
    }

    pub fn system(&self) -> &'s System {
        self.sem.system()
    }

    pub fn semantics(&self) -> &Semantics<'s> {
        &self.sem
    }

    /// Counters accumulated since construction.
    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Unfolding bound used for until indices by the `q_*` entry points.
    pub fn set_unfoldings(&mut self, u: usize) {
        self.unfoldings = u;
    }

    /// Reject atoms over undeclared attributes before any run is explored.
    fn check_attributes(&self, f: &Core) -> Result<(), CheckError> {
        match f {
            Core::True => Ok(()),
            Core::Atomic(t) => match t.free_vars().into_iter().find(|v| self.system().attribute(v).is_none()) {
                Some(v) => Err(AggregationError::UnknownAttribute(v).into()),
                None => Ok(()),
            },
            Core::Not(a) => self.check_attributes(a),
            Core::Or(a, b) | Core::Until(a, _, b) => {
                self.check_attributes(a)?;
                self.check_attributes(b)
            }
        }
    }

    fn compile(&mut self, f: &Core) -> Compiled {
        match f {
            Core::True => Compiled::True,
            Core::Atomic(t) => Compiled::Atomic(t.clone()),
            Core::Not(a) => Compiled::Not(Box::new(self.compile(a))),
            Core::Or(a, b) => Compiled::Or(Box::new(self.compile(a)), Box::new(self.compile(b))),
            Core::Until(a, g, b) => {
                let id = match self.chor_ids.get(g) {
                    Some(&id) => id,
                    None => {
                        let id = self.chors.len();
                        self.chors.push(g.clone());
                        self.chor_ids.insert(g.clone(), id);
                        id
                    }
                };
                Compiled::Until(Box::new(self.compile(a)), id, Box::new(self.compile(b)))
            }
        }
    }

    fn language(&mut self, id: usize) -> Result<Rc<Language>, CheckError> {
        let key = (id, self.unfoldings);
        if self.caches.languages {
            if let Some(l) = self.languages.get(&key) {
                self.stats.cache_hits += 1;
                return Ok(l.clone());
            }
        }
        let l = Rc::new(Language::new(&self.chors[id], self.unfoldings)?);
        if self.caches.languages {
            self.languages.insert(key, l.clone());
        }
        Ok(l)
    }

    fn member(&mut self, id: usize, lang: &Language, steps: &[Step], maximal: bool) -> bool {
        let word: Word = steps.iter().map(|s| s.action.clone()).collect();
        let compute = |w: &Word| if maximal { lang.contains_maximal(w) } else { lang.contains_prefix(w) };
        if !self.caches.membership {
            return compute(&word);
        }
        let key = (id, self.unfoldings, maximal, word);
        if let Some(&b) = self.membership.get(&key) {
            self.stats.cache_hits += 1;
            return b;
        }
        let b = compute(&key.3);
        self.membership.insert(key, b);
        b
    }

    fn entails(&mut self, run: &[Step], j: usize, psi: &SmtTerm) -> Result<bool, CheckError> {
        let sys = self.sem.system();
        let start = self.sem.initial_configuration();
        let occs = aggregation::occurrences(sys, &start, &run[..j]);
        let script = aggregation::build_entailment_query(sys, &occs, psi)?;
        if !self.caches.entailment {
            self.stats.queries += 1;
            return Ok(aggregation::decide(&script, self.solver.as_mut())?);
        }
        let key = script.serialize();
        if let Some(&b) = self.entailment.get(&key) {
            self.stats.cache_hits += 1;
            return Ok(b);
        }
        self.stats.queries += 1;
        let b = aggregation::decide(&script, self.solver.as_mut())?;
        self.entailment.insert(key, b);
        Ok(b)
    }

    /// ⟨π, π′⟩ ⊨ Φ where π′ is the prefix of length `j`.
    fn models(&mut self, f: &Compiled, run: &[Step], j: usize) -> Result<bool, CheckError> {
        Ok(match f {
            Compiled::True => true,
            Compiled::Atomic(psi) => self.entails(run, j, psi)?,
            Compiled::Not(a) => !self.models(a, run, j)?,
            Compiled::Or(a, b) => self.models(a, run, j)? || self.models(b, run, j)?,
            Compiled::Until(a, id, b) => self.until(a, *id, b, run, j, 0)?,
        })
    }

    /// The until recursion, unrolled: π″ = run[j..j+l] grows one step of π at a time.
    fn until(&mut self, f1: &Compiled, id: usize, f2: &Compiled, run: &[Step], j: usize, mut l: usize) -> Result<bool, CheckError> {
        let lang = self.language(id)?;
        loop {
            let end = j + l;
            if self.member(id, &lang, &run[j..end], true) && self.models(f2, run, end)? {
                return Ok(true);
            }
            if !self.models(f1, run, end)? {
                return Ok(false);
            }
            if end == run.len() || !self.member(id, &lang, &run[j..end + 1], false) {
                return Ok(false);
            }
            l += 1;
        }
    }

    /// q_models(Φ, π, π′) with π′ the prefix of `run` of length `prefix`.
    pub fn q_models(&mut self, f: &Core, run: &Run, prefix: usize, u: usize) -> Result<bool, CheckError> {
        self.unfoldings = u;
        let c = self.compile(f);
        self.models(&c, &run.steps, prefix)
    }

    /// q_until(Φ₁, G, Φ₂, π, π′, π″) with π′ = run[..prefix], π″ = run[prefix..prefix+ext].
    #[allow(clippy::too_many_arguments)]
    pub fn q_until(&mut self, f1: &Core, g: &GChor, f2: &Core, run: &Run, prefix: usize, ext: usize, u: usize) -> Result<bool, CheckError> {
        self.unfoldings = u;
        let c = self.compile(&Core::until(f1.clone(), g.clone(), f2.clone()));
        let Compiled::Until(a, id, b) = c else { unreachable!() };
        self.until(&a, id, &b, &run.steps, prefix, ext)
    }

    pub fn q_sat(&mut self, f: &Core, k: usize, u: usize) -> Result<Verdict<SatOutcome>, CheckError> {
        self.q_sat_with_progress(f, k, u, &mut |_, _| {})
    }

    /// As [`q_sat`](Self::q_sat), reporting `(length, runs of that length)` as each length is finished.
    pub fn q_sat_with_progress(
        &mut self,
        f: &Core,
        k: usize,
        u: usize,
        progress: &mut dyn FnMut(usize, u64),
    ) -> Result<Verdict<SatOutcome>, CheckError> {
        self.check_attributes(f)?;
        let before = self.stats;
        self.unfoldings = u;
        let c = self.compile(f);
        let sem = self.sem.clone();
        let mut cursor = RunCursor::new(&sem, k);
        let (mut level, mut count) = (0usize, 0u64);
        let mut outcome = SatOutcome::NoModelWithinBound;
        while cursor.advance() {
            let len = cursor.path().len();
            if len != level {
                progress(level, count);
                level = len;
                count = 0;
            }
            count += 1;
            self.stats.runs += 1;
            if sem.is_accepting(cursor.last()) && self.models(&c, cursor.path(), 0)? {
                outcome = SatOutcome::ModelFound(cursor.to_run());
                break;
            }
        }
        progress(level, count);
        Ok(Verdict { outcome, stats: diff(self.stats, before) })
    }

    /// Validity by counterexample search: q_sat(¬Φ).
    pub fn q_valid(&mut self, f: &Core, k: usize, u: usize) -> Result<Verdict<ValidityOutcome>, CheckError> {
        self.q_valid_with_progress(f, k, u, &mut |_, _| {})
    }

    pub fn q_valid_with_progress(
        &mut self,
        f: &Core,
        k: usize,
        u: usize,
        progress: &mut dyn FnMut(usize, u64),
    ) -> Result<Verdict<ValidityOutcome>, CheckError> {
        let v = self.q_sat_with_progress(&Core::not(f.clone()), k, u, progress)?;
        let outcome = match v.outcome {
            SatOutcome::ModelFound(r) => ValidityOutcome::CounterexampleFound(r),
            SatOutcome::NoModelWithinBound => ValidityOutcome::NoCounterexampleWithinBound,
        };
        Ok(Verdict { outcome, stats: v.stats })
    }

    /// Convenience for surface formulas.
    pub fn satisfiable(&mut self, f: &Formula, k: usize, u: usize) -> Result<Verdict<SatOutcome>, CheckError> {
        self.q_sat(&f.desugar(), k, u)
    }

    pub fn valid(&mut self, f: &Formula, k: usize, u: usize) -> Result<Verdict<ValidityOutcome>, CheckError> {
        self.q_valid(&f.desugar(), k, u)
    }
}

fn diff(after: Stats, before: Stats) -> Stats {
    Stats {
        runs: after.runs - before.runs,
        queries: after.queries - before.queries,
        cache_hits: after.cache_hits - before.cache_hits,
    }
}
