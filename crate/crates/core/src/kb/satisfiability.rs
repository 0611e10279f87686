use std::ops::ControlFlow;

use super::{
    positive_inclusions, AnnotatedAxiom, AnnotatedOBDAInstance, Axiom, BasicConcept, ConceptExpr,
    Role, RoleExpr,
};
use crate::error::Result;
use crate::query::{for_each_match, interp_of_assertions, Atom, Pred, Query, Term};
use crate::rewrite::{perfect_ref_with, Ignore, Limits};

fn concept_atom(b: &BasicConcept, x: &Term) -> Atom<()> {
    match b {
        BasicConcept::Atomic(a) => Atom::concept(a.clone(), x.clone(), ()),
        BasicConcept::Exists(r) => role_atom(r, x.clone(), Term::Blank),
    }
}

fn role_atom(r: &Role, first: Term, second: Term) -> Atom<()> {
    let (s, o) = if r.inverse {
        (second, first)
    } else {
        (first, second)
    };
    Atom {
        pred: Pred::Role(r.name.clone()),
        args: vec![s, o],
        ann: (),
    }
}

/// One query per negative inclusion, matching exactly its violations.
pub fn clash_queries(ontology: &[AnnotatedAxiom]) -> Vec<Query<()>> {
    let x = Term::Var(super::name("x"));
    let y = Term::Var(super::name("y"));
    ontology
        .iter()
        .filter_map(|ax| match &ax.axiom {
            Axiom::Concept {
                lhs,
                rhs: ConceptExpr::Not(c),
            } => Some(Query::new(vec![concept_atom(lhs, &x), concept_atom(c, &x)])),
            Axiom::Role {
                lhs,
                rhs: RoleExpr::Not(s),
            } => Some(Query::new(vec![
                role_atom(lhs, x.clone(), y.clone()),
                role_atom(s, x.clone(), y.clone()),
            ])),
            _ => None,
        })
        .collect()
}

/// Classical satisfiability of the instance with annotations dropped: no
/// rewriting of a clash query has a match in the virtual assertions.
pub fn check_satisfiability(inst: &AnnotatedOBDAInstance) -> Result<bool> {
    let clashes = clash_queries(&inst.ontology);
    if clashes.is_empty() {
        return Ok(true);
    }
    let interp = interp_of_assertions(&inst.virtual_assertions()?);
    let inclusions = positive_inclusions(&inst.ontology);
    for q in clashes {
        for r in perfect_ref_with(&q, &inclusions, &Ignore, None, &Limits::default())? {
            let flow = for_each_match(&r.atoms, &interp, None, &|_, _| true, &mut |_, _, _| {
                ControlFlow::Break(())
            });
            if flow.is_break() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
