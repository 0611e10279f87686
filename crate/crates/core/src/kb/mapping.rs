use std::collections::{HashMap, HashSet};

use super::{
    alias_name, AnnotatedAssertion, AnnotatedDataInstance, AnnotatedRule, Assertion, BodyAtom,
    DataTuple, Name, RuleHead, Schema,
};
use crate::error::{Error, Result};
use crate::semiring::{Monomial, ProvVariable, SemiringMode};

/// Materializes the virtual annotated assertions `M(D)`.
///
/// Each body homomorphism of a rule contributes the head instantiated by the
/// homomorphism, annotated with the rule annotation times the annotations of
/// the matched tuples.
pub fn apply_mappings(
    mapping: &[AnnotatedRule],
    schema: &Schema,
    data: &AnnotatedDataInstance,
    mode: SemiringMode,
) -> Result<Vec<AnnotatedAssertion>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rule in mapping {
        for b in &rule.body {
            match schema.arity(&b.predicate) {
                None => return Err(Error::UnknownPredicate(b.predicate.to_string())),
                Some(n) if n != b.args.len() => {
                    return Err(Error::ArityMismatch {
                        predicate: b.predicate.to_string(),
                        expected: n,
                        found: b.args.len(),
                    })
                }
                Some(_) => {}
            }
        }
        let mut binding = HashMap::new();
        let mut provs = Vec::with_capacity(rule.body.len());
        homomorphisms(&rule.body, data, &mut binding, &mut provs, &mut |binding, provs| {
            let assertion = instantiate(&rule.head, binding);
            let annotation = rule
                .annotation
                .mul(&Monomial::from_factors(provs.iter().copied(), mode), mode);
            let a = AnnotatedAssertion {
                assertion,
                annotation,
            };
            if seen.insert(a.clone()) {
                out.push(a);
            }
        });
    }
    Ok(out)
}

fn instantiate(head: &RuleHead, binding: &HashMap<Name, Name>) -> Assertion {
    match head {
        RuleHead::Concept { concept, arg } => Assertion::Concept {
            concept: concept.clone(),
            individual: binding[arg].clone(),
        },
        RuleHead::Role {
            role,
            subject,
            object,
            pair_alias,
        } => {
            let (a, b) = (binding[subject].clone(), binding[object].clone());
            let role = if *pair_alias {
                alias_name(role, &a, &b)
            } else {
                role.clone()
            };
            Assertion::Role {
                role,
                subject: a,
                object: b,
            }
        }
    }
}

type Binding = HashMap<Name, Name>;

fn homomorphisms(
    body: &[BodyAtom],
    data: &AnnotatedDataInstance,
    binding: &mut HashMap<Name, Name>,
    provs: &mut Vec<ProvVariable>,
    emit: &mut dyn FnMut(&Binding, &[ProvVariable]),
) {
    let Some((atom, rest)) = body.split_first() else {
        emit(binding, provs);
        return;
    };
    let Some(tuples) = data.relations.get(&atom.predicate) else {
        return;
    };
    for DataTuple { values, annotation } in tuples {
        if values.len() != atom.args.len() {
            continue;
        }
        let mut bound = Vec::new();
        let mut ok = true;
        for (var, val) in atom.args.iter().zip(values) {
            match binding.get(var) {
                Some(existing) if existing != val => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    binding.insert(var.clone(), val.clone());
                    bound.push(var.clone());
                }
            }
        }
        if ok {
            provs.push(*annotation);
            homomorphisms(rest, data, binding, provs, emit);
            provs.pop();
        }
        for var in bound {
            binding.remove(&var);
        }
    }
}
