//! Synthetic benchmark generators.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gchor::Chor;
use crate::model::{Message, Participant, QosAttributeDecl};
use crate::projection::{QGChor, Slots};
use crate::ql::Formula;
use crate::smt::{CmpOp, SmtTerm};

pub const NESTED_ATTRIBUTES: usize = 5;
pub const MAX_NESTING: usize = 16;

/// A nested-choices instance: the annotated choreography, the formula and the leaf its ψ singles out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedChoices {
    pub n: usize,
    pub qosgc: QGChor,
    pub formula: Formula,
    /// 1-based index of the leaf (`leafK`) whose attribute vector ψ pins
    pub target: usize,
    pub values: Vec<[i64; NESTED_ATTRIBUTES]>,
}

fn attr(i: usize) -> String {
    format!("a{i}")
}

/// Two parties taking `n` turns, Bob first; each turn's sender picks `m0` or `m1`,
/// and the sender of turn n+1 closes with a distinct `leafK` whose receiver's final
/// state pins the five attributes.
pub fn nested_choices(n: usize, seed: u64) -> NestedChoices {
    assert!((1..=MAX_NESTING).contains(&n), "nesting depth must be in 1..={MAX_NESTING}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = 1usize << n;
    let mut seen = HashSet::new();
    let mut values = Vec::with_capacity(leaves);
    while values.len() < leaves {
        let v: [i64; NESTED_ATTRIBUTES] = std::array::from_fn(|_| rng.gen_range(0..1000));
        if seen.insert(v) {
            values.push(v);
        }
    }
    let target = rng.gen_range(1..=leaves);

    let mut next_leaf = 0;
    let body = turn(n, true, &values, &mut next_leaf);
    let attributes = (0..NESTED_ATTRIBUTES).map(|i| QosAttributeDecl::new(&attr(i), "+")).collect();
    let qosgc = QGChor { attributes, body };
    let formula = Formula::until(Formula::True, qosgc.body.erase(), Formula::Qos(pin(&values[target - 1])));
    NestedChoices { n, qosgc, formula, target, values }
}

fn pin(v: &[i64; NESTED_ATTRIBUTES]) -> SmtTerm {
    SmtTerm::And(v.iter().enumerate().map(|(i, &x)| SmtTerm::cmp(CmpOp::Eq, SmtTerm::var(&attr(i)), SmtTerm::int(x))).collect())
}

fn interaction(bob_sends: bool, msg: &str, ann: Slots) -> Chor<Slots> {
    let (s, r) = if bob_sends { ("Bob", "Alice") } else { ("Alice", "Bob") };
    Chor::Interaction { sender: Participant::new(s), receiver: Participant::new(r), message: Message::new(msg), ann }
}

fn turn(depth: usize, bob: bool, values: &[[i64; NESTED_ATTRIBUTES]], next_leaf: &mut usize) -> Chor<Slots> {
    if depth == 0 {
        let v = &values[*next_leaf];
        *next_leaf += 1;
        let terms = v.iter().enumerate().map(|(i, &x)| SmtTerm::cmp(CmpOp::Eq, SmtTerm::var(&attr(i)), SmtTerm::int(x))).collect();
        return interaction(bob, &format!("leaf{next_leaf}"), Slots { rqos_post: terms, ..Default::default() });
    }
    let mut branch = |m: &str| Chor::seq(interaction(bob, m, Slots::default()), turn(depth - 1, !bob, values, next_leaf));
    let a = branch("m0");
    let b = branch("m1");
    Chor::choice(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let a = nested_choices(2, 7);
        assert_eq!(a, nested_choices(2, 7));
        assert_eq!(a.values.len(), 4);
        // 2 + 4 choice interactions, 4 leaves
        assert_eq!(a.qosgc.body.interaction_count(), 10);
        assert!(matches!(&a.qosgc.body, Chor::Choice(l, _) if matches!(&**l, Chor::Seq(_, r) if matches!(**r, Chor::Choice(..)))));
        assert_eq!(nested_choices(1, 0).values.len(), 2);
    }
}
