use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;

use crate::kb::{AnnotatedAssertion, Assertion, Name};
use crate::semiring::Monomial;

/// A finite annotated interpretation: individuals, and per predicate the set
/// of annotated tuples. Annotations are canonical monomials, so the monomial
/// domain is the set of annotations that occur.
#[derive(Clone, Debug, Default)]
pub struct FiniteAnnotatedInterpretation {
    domain: BTreeSet<Name>,
    concepts: BTreeMap<Name, IndexSet<(Name, Monomial)>>,
    roles: BTreeMap<Name, IndexSet<(Name, Name, Monomial)>>,
}

impl FiniteAnnotatedInterpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_individual(&mut self, a: Name) {
        self.domain.insert(a);
    }

    /// Returns the tuple's index in its extension when it is new.
    pub fn insert_concept(&mut self, concept: Name, a: Name, m: Monomial) -> Option<usize> {
        if !self.domain.contains(&a) {
            self.domain.insert(a.clone());
        }
        let (idx, fresh) = self.concepts.entry(concept).or_default().insert_full((a, m));
        fresh.then_some(idx)
    }

    pub fn insert_role(&mut self, role: Name, a: Name, b: Name, m: Monomial) -> Option<usize> {
        for x in [&a, &b] {
            if !self.domain.contains(x) {
                self.domain.insert(x.clone());
            }
        }
        let (idx, fresh) = self.roles.entry(role).or_default().insert_full((a, b, m));
        fresh.then_some(idx)
    }

    pub fn contains_concept(&self, concept: &str, a: &Name, m: &Monomial) -> bool {
        self.concepts
            .get(concept)
            .is_some_and(|ext| ext.contains(&(a.clone(), m.clone())))
    }

    pub fn contains_role(&self, role: &str, a: &Name, b: &Name, m: &Monomial) -> bool {
        self.roles
            .get(role)
            .is_some_and(|ext| ext.contains(&(a.clone(), b.clone(), m.clone())))
    }

    pub fn concept_ext(&self, concept: &str) -> impl Iterator<Item = &(Name, Monomial)> + '_ {
        self.concepts.get(concept).into_iter().flatten()
    }

    pub fn role_ext(&self, role: &str) -> impl Iterator<Item = &(Name, Name, Monomial)> + '_ {
        self.roles.get(role).into_iter().flatten()
    }

    /// Arguments of a tuple of `pred` carrying annotation `m`.
    pub fn args_with_annotation(&self, pred: &str, m: &Monomial) -> Option<Vec<Name>> {
        if let Some(ext) = self.concepts.get(pred) {
            if let Some((a, _)) = ext.iter().find(|(_, x)| x == m) {
                return Some(vec![a.clone()]);
            }
        }
        let (a, b, _) = self.roles.get(pred)?.iter().find(|(_, _, x)| x == m)?;
        Some(vec![a.clone(), b.clone()])
    }

    pub fn concept_tuple(&self, concept: &str, idx: usize) -> &(Name, Monomial) {
        &self.concepts[concept][idx]
    }

    pub fn role_tuple(&self, role: &str, idx: usize) -> &(Name, Name, Monomial) {
        &self.roles[role][idx]
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &Name> {
        self.concepts.keys()
    }

    pub fn role_names(&self) -> impl Iterator<Item = &Name> {
        self.roles.keys()
    }

    pub fn domain(&self) -> &BTreeSet<Name> {
        &self.domain
    }

    pub fn monomial_domain(&self) -> BTreeSet<Monomial> {
        let c = self.concepts.values().flatten().map(|(_, m)| m.clone());
        let r = self.roles.values().flatten().map(|(_, _, m)| m.clone());
        c.chain(r).collect()
    }

    /// Number of annotated tuples.
    pub fn len(&self) -> usize {
        self.concepts.values().map(IndexSet::len).sum::<usize>()
            + self.roles.values().map(IndexSet::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every annotated tuple as a sorted list of assertions.
    pub fn assertions(&self) -> Vec<AnnotatedAssertion> {
        let mut out = Vec::with_capacity(self.len());
        for (c, ext) in &self.concepts {
            for (a, m) in ext {
                out.push(AnnotatedAssertion {
                    assertion: Assertion::Concept {
                        concept: c.clone(),
                        individual: a.clone(),
                    },
                    annotation: m.clone(),
                });
            }
        }
        for (r, ext) in &self.roles {
            for (a, b, m) in ext {
                out.push(AnnotatedAssertion {
                    assertion: Assertion::Role {
                        role: r.clone(),
                        subject: a.clone(),
                        object: b.clone(),
                    },
                    annotation: m.clone(),
                });
            }
        }
        out.sort();
        out
    }

    /// One `P(args) @ m` line per tuple, sorted textually.
    pub fn dump(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.assertions().iter().map(ToString::to_string).collect();
        lines.sort();
        lines
    }
}

impl PartialEq for FiniteAnnotatedInterpretation {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.assertions() == other.assertions()
    }
}

impl Eq for FiniteAnnotatedInterpretation {}

/// The finite interpretation whose extensions are exactly the given
/// annotated assertions.
pub fn interp_of_assertions(assertions: &[AnnotatedAssertion]) -> FiniteAnnotatedInterpretation {
    let mut i = FiniteAnnotatedInterpretation::new();
    for a in assertions {
        match &a.assertion {
            Assertion::Concept {
                concept,
                individual,
            } => {
                i.insert_concept(concept.clone(), individual.clone(), a.annotation.clone());
            }
            Assertion::Role {
                role,
                subject,
                object,
            } => {
                i.insert_role(
                    role.clone(),
                    subject.clone(),
                    object.clone(),
                    a.annotation.clone(),
                );
            }
        }
    }
    i
}
