//! Aggregation of QoS specs along a run and the entailment query.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::lts::{Configuration, Run, Step};
use crate::model::{QosSpec, StateId, System};
use crate::smt::{ArithOp, CmpOp, SatResult, SmtError, SmtScript, SmtTerm, Solver};

/// A spec-carrying local state visited along a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateOccurrence<'s> {
    pub participant: usize,
    pub state: &'s StateId,
    pub index: usize,
    pub spec: &'s QosSpec,
}

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("unknown attribute '{0}' in property")]
    UnknownAttribute(String),
    #[error("solver answered unknown on an entailment query")]
    Unknown,
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Initial states in participant order, then each move's target state;
/// states without a spec are skipped. `steps` is the run prefix.
pub fn occurrences<'s>(sys: &'s System, start: &Configuration, steps: &[Step]) -> Vec<StateOccurrence<'s>> {
    let mut out = Vec::new();
    let push = |p: usize, q: usize, out: &mut Vec<StateOccurrence<'s>>| {
        let m = &sys.machines[p];
        let state = &m.states[q];
        if let Some(spec) = m.spec_of(state) {
            let index = out.len();
            out.push(StateOccurrence { participant: p, state, index, spec });
        }
    };
    for (p, &q) in start.locals().iter().enumerate() {
        push(p, q, &mut out);
    }
    for s in steps {
        let p = sys.participant_index(s.action.subject()).expect("action of the system");
        push(p, s.next.locals()[p], &mut out);
    }
    out
}

pub fn occurrences_of_run<'s>(sys: &'s System, run: &Run) -> Vec<StateOccurrence<'s>> {
    occurrences(sys, &run.start, &run.steps)
}

/// Copy variables per attribute and the renamed constraints of each occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationContext {
    /// attribute name -> copies in occurrence order
    pub copies: Vec<(String, Vec<String>)>,
    pub constraints: Vec<SmtTerm>,
    /// `attr = fold(op, copies)` for attributes with at least one copy
    pub definitions: Vec<SmtTerm>,
}

/// Build the aggregation context. An occurrence gets a copy of an attribute
/// only when its spec mentions that attribute.
pub fn aggregate(sys: &System, occs: &[StateOccurrence<'_>], psi: &SmtTerm) -> AggregationContext {
    let attrs: Vec<&str> = sys.attributes.iter().map(|a| a.name.as_str()).collect();
    let mut reserved: HashSet<String> = attrs.iter().map(|s| s.to_string()).collect();
    reserved.extend(psi.bound_vars());
    for o in occs {
        for c in &o.spec.constraints {
            reserved.extend(c.bound_vars());
        }
    }
    let mentioned: Vec<BTreeSet<String>> = occs
        .iter()
        .map(|o| o.spec.constraints.iter().flat_map(|c| c.free_vars()).collect())
        .collect();

    // the separator is "_" unless that would clash with a declared name
    let mut sep = "_".to_string();
    loop {
        let mut names = HashSet::new();
        let clash = occs.iter().zip(&mentioned).any(|(o, vs)| {
            vs.iter().any(|v| {
                let n = format!("{v}{sep}{}", o.index);
                reserved.contains(&n) || !names.insert(n)
            })
        });
        if !clash {
            break;
        }
        sep.push('_');
    }

    let mut copies: Vec<(String, Vec<String>)> = attrs.iter().map(|a| (a.to_string(), Vec::new())).collect();
    let mut constraints = Vec::new();
    for (o, vs) in occs.iter().zip(&mentioned) {
        let map: HashMap<String, String> = vs.iter().map(|v| (v.clone(), format!("{v}{sep}{}", o.index))).collect();
        for (a, list) in copies.iter_mut() {
            if let Some(n) = map.get(a) {
                list.push(n.clone());
            }
        }
        constraints.extend(o.spec.constraints.iter().map(|c| c.rename(&map)));
    }

    let mut definitions = Vec::new();
    for (decl, (name, list)) in sys.attributes.iter().zip(&copies) {
        let mut it = list.iter().map(|c| SmtTerm::Var(c.clone()));
        let Some(first) = it.next() else { continue };
        let op = ArithOp::from_symbol(&decl.op);
        let folded = it.fold(first, |acc, c| SmtTerm::Arith(op.clone(), vec![acc, c]));
        definitions.push(SmtTerm::cmp(CmpOp::Eq, SmtTerm::Var(name.clone()), folded));
    }
    AggregationContext { copies, constraints, definitions }
}

/// Script whose unsatisfiability means the aggregated constraints entail ψ.
pub fn build_entailment_query(sys: &System, occs: &[StateOccurrence<'_>], psi: &SmtTerm) -> Result<SmtScript, AggregationError> {
    for v in psi.free_vars() {
        if sys.attribute(&v).is_none() {
            return Err(AggregationError::UnknownAttribute(v));
        }
    }
    let ctx = aggregate(sys, occs, psi);
    let mut decls: Vec<String> = sys.attributes.iter().map(|a| a.name.clone()).collect();
    for (_, list) in &ctx.copies {
        decls.extend(list.iter().cloned());
    }
    let mut assertions = ctx.constraints;
    assertions.extend(ctx.definitions);
    assertions.push(SmtTerm::not(psi.clone()));
    Ok(SmtScript::new(decls, assertions))
}

/// Decide agg(π′) ⊢ ψ; `unknown` is an error, never a verdict.
pub fn entails(
    sys: &System,
    start: &Configuration,
    steps: &[Step],
    psi: &SmtTerm,
    solver: &mut dyn Solver,
) -> Result<bool, AggregationError> {
    let script = build_entailment_query(sys, &occurrences(sys, start, steps), psi)?;
    decide(&script, solver)
}

pub fn decide(script: &SmtScript, solver: &mut dyn Solver) -> Result<bool, AggregationError> {
    match solver.check_sat(script)? {
        SatResult::Unsat => Ok(true),
        SatResult::Sat => Ok(false),
        SatResult::Unknown => Err(AggregationError::Unknown),
    }
}

/// Attributes whose operator is not commutative-associative (fold order matters).
pub fn order_sensitive_attributes(sys: &System) -> Vec<&str> {
    sys.attributes
        .iter()
        .filter(|a| !ArithOp::from_symbol(&a.op).is_ac())
        .map(|a| a.name.as_str())
        .collect()
}
