use std::cell::Cell;
use std::collections::BTreeMap;

use crate::kb::{DaggerMap, PositiveInclusion};
use crate::rewrite::{consume, RewritePolicy};
use crate::semiring::{Monomial, SemiringMode};

/// What the annotation of the matched tuple must look like, in terms of the
/// original (unmarked) variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Any,
    Exact(Monomial),
}

/// Annotation of an atom rewritten over a marked instance.
///
/// `slots` holds one entry per original query atom folded into this atom.
/// A tracked slot collects the marked inclusion annotations consumed so far;
/// times the matched tuple's annotation it gives the annotation of the
/// canonical-model tuple the original atom maps to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftedAnn {
    pub pattern: Pattern,
    pub slots: BTreeMap<u32, Option<Monomial>>,
}

impl LiftedAnn {
    pub fn new(slot: u32, pattern: Pattern, tracked: bool) -> Self {
        LiftedAnn {
            pattern,
            slots: BTreeMap::from([(slot, tracked.then(Monomial::one))]),
        }
    }
}

/// Rewrites over a marked instance, resolving the marked annotations of the
/// target lazily through the dagger map.
pub struct Lifted<'a> {
    pub dagger: &'a DaggerMap,
    pub mode: SemiringMode,
    /// Rewritings whose tracked slots grow past this length are dropped.
    pub slot_bound: Option<usize>,
    /// Set once a rewriting has been dropped by `slot_bound`.
    pub pruned: Cell<bool>,
}

impl<'a> Lifted<'a> {
    pub fn new(dagger: &'a DaggerMap, mode: SemiringMode) -> Self {
        Lifted {
            dagger,
            mode,
            slot_bound: None,
            pruned: Cell::new(false),
        }
    }
}

impl RewritePolicy for Lifted<'_> {
    type Ann = LiftedAnn;

    fn apply(&self, ann: &LiftedAnn, inclusion: &PositiveInclusion) -> Vec<LiftedAnn> {
        let marked = &inclusion.annotation;
        let slots: BTreeMap<u32, Option<Monomial>> = ann
            .slots
            .iter()
            .map(|(k, v)| (*k, v.as_ref().map(|c| c.mul(marked, self.mode))))
            .collect();
        if let Some(bound) = self.slot_bound {
            if slots.values().flatten().any(|m| m.len() > bound) {
                self.pruned.set(true);
                return Vec::new();
            }
        }
        match &ann.pattern {
            Pattern::Any => vec![LiftedAnn {
                pattern: Pattern::Any,
                slots,
            }],
            Pattern::Exact(e) => {
                let original = self.dagger.monomial(marked, self.mode);
                consume(e, &original, self.mode)
                    .into_iter()
                    .map(|rest| LiftedAnn {
                        pattern: Pattern::Exact(rest),
                        slots: slots.clone(),
                    })
                    .collect()
            }
        }
    }

    fn unify(&self, a: &LiftedAnn, b: &LiftedAnn) -> Option<LiftedAnn> {
        let pattern = match (&a.pattern, &b.pattern) {
            (Pattern::Any, p) | (p, Pattern::Any) => p.clone(),
            (Pattern::Exact(x), Pattern::Exact(y)) if x == y => a.pattern.clone(),
            _ => return None,
        };
        let mut slots = a.slots.clone();
        slots.extend(b.slots.iter().map(|(k, v)| (*k, v.clone())));
        Some(LiftedAnn { pattern, slots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{name, BasicConcept};
    use crate::semiring::ProvVariable;

    #[test]
    fn exact_patterns_consume_the_dagger_image() {
        let mut dagger = DaggerMap::default();
        dagger
            .forward
            .insert(ProvVariable::new("_f1"), Monomial::parse_free("s"));
        let policy = Lifted::new(&dagger, SemiringMode::Free);
        let inc = PositiveInclusion::concept(
            BasicConcept::Atomic(name("B")),
            BasicConcept::Atomic(name("A")),
            Monomial::parse_free("_f1"),
        );
        let ann = LiftedAnn::new(0, Pattern::Exact(Monomial::parse_free("p*s")), true);
        let out = policy.apply(&ann, &inc);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].pattern, Pattern::Exact(Monomial::parse_free("p")));
        assert_eq!(out[0].slots[&0], Some(Monomial::parse_free("_f1")));
        let miss = LiftedAnn::new(0, Pattern::Exact(Monomial::parse_free("p")), true);
        assert!(policy.apply(&miss, &inc).is_empty());
    }

    #[test]
    fn any_unifies_with_exact() {
        let dagger = DaggerMap::default();
        let policy = Lifted::new(&dagger, SemiringMode::Free);
        let a = LiftedAnn::new(0, Pattern::Any, false);
        let b = LiftedAnn::new(1, Pattern::Exact(Monomial::parse_free("u")), true);
        let u = policy.unify(&a, &b).unwrap();
        assert_eq!(u.pattern, b.pattern);
        assert_eq!(u.slots.len(), 2);
        let c = LiftedAnn::new(2, Pattern::Exact(Monomial::parse_free("v")), true);
        assert!(policy.unify(&b, &c).is_none());
    }
}
