use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use super::{unfold, Chor, GChor, GChorError};
use crate::model::Action;

/// Labelled strict partial order. Events are stored in a topological order;
/// `preds[e]` is the (transitively closed) set of events below `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pomset {
    pub events: Vec<Action>,
    preds: Vec<FixedBitSet>,
}

impl Pomset {
    pub fn empty() -> Self {
        Pomset { events: Vec::new(), preds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// e < f in the order.
    pub fn less(&self, e: usize, f: usize) -> bool {
        self.preds[f].contains(e)
    }

    fn interaction(out: Action, inp: Action) -> Self {
        let mut p0 = FixedBitSet::with_capacity(2);
        let mut p1 = FixedBitSet::with_capacity(2);
        p0.grow(2);
        p1.insert(0);
        p1.grow(2);
        Pomset { events: vec![out, inp], preds: vec![p0, p1] }
    }

    fn shifted(&self, offset: usize, total: usize) -> Vec<FixedBitSet> {
        self.preds
            .iter()
            .map(|p| {
                let mut b = FixedBitSet::with_capacity(total);
                for i in p.ones() {
                    b.insert(i + offset);
                }
                b
            })
            .collect()
    }

    fn par(a: &Pomset, b: &Pomset) -> Pomset {
        let total = a.len() + b.len();
        let mut preds = a.shifted(0, total);
        preds.extend(b.shifted(a.len(), total));
        Pomset { events: a.events.iter().chain(&b.events).cloned().collect(), preds }
    }

    /// Sequential composition: events of `a` precede events of `b` with the same subject.
    fn seq(a: &Pomset, b: &Pomset) -> Pomset {
        let mut p = Pomset::par(a, b);
        let n = a.len();
        for j in 0..b.len() {
            let f = n + j;
            for e in 0..n {
                if a.events[e].subject() == b.events[j].subject() {
                    p.preds[f].insert(e);
                    let below = p.preds[e].clone();
                    p.preds[f].union_with(&below);
                }
            }
        }
        // close transitively inside b (topological order)
        for f in n..p.len() {
            let inner: Vec<usize> = p.preds[f].ones().filter(|&x| x >= n).collect();
            for x in inner {
                let below = p.preds[x].clone();
                p.preds[f].union_with(&below);
            }
        }
        p
    }

    /// Is `w` a prefix of some linearization? Backtracks over order-minimal events.
    pub fn accepts_prefix(&self, w: &[Action]) -> bool {
        if w.len() > self.len() {
            return false;
        }
        let mut done = FixedBitSet::with_capacity(self.len());
        let mut failed = HashSet::new();
        self.matches(w, &mut done, &mut failed)
    }

    /// Is `w` a complete linearization?
    pub fn accepts_complete(&self, w: &[Action]) -> bool {
        w.len() == self.len() && self.accepts_prefix(w)
    }

    fn matches(&self, w: &[Action], done: &mut FixedBitSet, failed: &mut HashSet<FixedBitSet>) -> bool {
        let Some((a, rest)) = w.split_first() else {
            return true;
        };
        if failed.contains(done) {
            return false;
        }
        for e in 0..self.len() {
            if done.contains(e) || &self.events[e] != a || !self.preds[e].is_subset(done) {
                continue;
            }
            done.insert(e);
            let ok = self.matches(rest, done, failed);
            done.set(e, false);
            if ok {
                return true;
            }
        }
        failed.insert(done.clone());
        false
    }
}

/// One pomset per choice resolution of a star-free, break-free g-choreography.
pub fn pomsets_of(g: &GChor) -> Result<Vec<Pomset>, GChorError> {
    Ok(match g {
        Chor::Interaction { sender, receiver, message, .. } => {
            let out = Action { sender: sender.clone(), receiver: receiver.clone(), kind: crate::model::Direction::Output, message: message.clone() };
            let inp = Action { kind: crate::model::Direction::Input, ..out.clone() };
            vec![Pomset::interaction(out, inp)]
        }
        Chor::Empty => vec![Pomset::empty()],
        Chor::Choice(a, b) => {
            let mut v = pomsets_of(a)?;
            v.extend(pomsets_of(b)?);
            v
        }
        Chor::Seq(a, b) | Chor::Par(a, b) => {
            let (pa, pb) = (pomsets_of(a)?, pomsets_of(b)?);
            let seq = matches!(g, Chor::Seq(..));
            let mut v = Vec::with_capacity(pa.len() * pb.len());
            for x in &pa {
                for y in &pb {
                    v.push(if seq { Pomset::seq(x, y) } else { Pomset::par(x, y) });
                }
            }
            v
        }
        Chor::Star(_) | Chor::Break => return Err(GChorError::NotStarFree),
    })
}

/// The pomsets of `unfold(g, u)`, ready for membership queries.
#[derive(Clone, Debug)]
pub struct Language {
    pomsets: Vec<Pomset>,
}

impl Language {
    pub fn new(g: &GChor, u: usize) -> Result<Self, GChorError> {
        Ok(Language { pomsets: pomsets_of(&unfold(g, u)?)? })
    }

    pub fn pomsets(&self) -> &[Pomset] {
        &self.pomsets
    }

    pub fn contains_prefix(&self, w: &[Action]) -> bool {
        self.pomsets.iter().any(|p| p.accepts_prefix(w))
    }

    pub fn contains_maximal(&self, w: &[Action]) -> bool {
        self.pomsets.iter().any(|p| p.accepts_complete(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(s: &str, r: &str, m: &str) -> GChor {
        GChor::interaction(s, r, m)
    }

    #[test]
    fn single_interaction() {
        let ps = pomsets_of(&i("A", "B", "m")).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].len(), 2);
        assert!(ps[0].less(0, 1) && !ps[0].less(1, 0));
    }

    #[test]
    fn seq_orders_through_shared_subject() {
        let p = &pomsets_of(&Chor::seq(i("A", "B", "m"), i("B", "A", "n"))).unwrap()[0];
        // AB!m < AB?m < BA!n < BA?n
        for (e, f) in [(0, 1), (1, 2), (2, 3), (0, 2), (0, 3), (1, 3)] {
            assert!(p.less(e, f), "{e} < {f}");
        }
    }

    #[test]
    fn par_has_no_cross_order() {
        let p = &pomsets_of(&Chor::par(i("A", "B", "m"), i("C", "D", "n"))).unwrap()[0];
        assert_eq!(p.len(), 4);
        for e in 0..2 {
            for f in 2..4 {
                assert!(!p.less(e, f) && !p.less(f, e));
            }
        }
    }

    #[test]
    fn membership_basics() {
        let g = i("A", "B", "x");
        let l = Language::new(&g, 0).unwrap();
        assert!(l.contains_prefix(&[]));
        assert!(l.contains_prefix(&[Action::output("A", "B", "x")]));
        assert!(!l.contains_prefix(&[Action::input("A", "B", "x")]));
        assert!(l.contains_maximal(&[Action::output("A", "B", "x"), Action::input("A", "B", "x")]));
        assert!(!l.contains_maximal(&[Action::output("A", "B", "x")]));
    }
}
