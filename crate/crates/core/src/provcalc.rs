//! The provenance polynomial of a standard query under a fully idempotent
//! semiring, via the star variant of PerfectRef.

use std::collections::HashSet;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::kb::{normalize_inverses, AnnotatedOBDAInstance, PositiveInclusion};
use crate::query::{for_each_match, interp_of_assertions, Atom, ProvBCQ, ProvTerm, Query};
use crate::rewrite::{perfect_ref_visit, perfect_ref_with, rewrite_structure, Extend, Limits, RewritePolicy};
use crate::semiring::{Monomial, Polynomial, ProvVariable, SemiringMode};

/// A query whose provenance positions are monomials over the variables and
/// the placeholder `⋆`.
pub type StarQuery = Query<Monomial>;

/// Replaces every provenance variable of a standard query by `⋆`.
pub fn star_substitute(q: &ProvBCQ) -> Result<StarQuery> {
    if !q.is_standard() {
        return Err(Error::NotStandard(q.to_source()));
    }
    Ok(q.map_ann(|_, _| Monomial::var(ProvVariable::star())))
}

/// Applicability ignoring annotations.
pub fn applicable_star(inclusion: &PositiveInclusion, g: &Atom<Monomial>) -> bool {
    rewrite_structure(&g.pred, &g.args, &inclusion.inclusion, None).is_some()
}

/// Applies `inclusion` to `g`, adding its annotation to the monomial once.
pub fn rewrite_atom_star(g: &Atom<Monomial>, inclusion: &PositiveInclusion) -> Option<Atom<Monomial>> {
    let (pred, args) = rewrite_structure(&g.pred, &g.args, &inclusion.inclusion, None)?;
    let ann = Extend.apply(&g.ann, inclusion).pop()?;
    Some(Atom { pred, args, ann })
}

pub fn perfect_ref_star(
    qstar: &StarQuery,
    inclusions: &[PositiveInclusion],
    limits: &Limits,
) -> Result<Vec<StarQuery>> {
    perfect_ref_with(qstar, inclusions, &Extend, None, limits)
}

/// The provenance of `q0` over the instance. Requires a fully idempotent
/// semiring.
pub fn compute_prov(q0: &ProvBCQ, inst: &AnnotatedOBDAInstance) -> Result<Polynomial> {
    compute_prov_with(q0, inst, &Limits::default())
}

pub fn compute_prov_with(
    q0: &ProvBCQ,
    inst: &AnnotatedOBDAInstance,
    limits: &Limits,
) -> Result<Polynomial> {
    if inst.mode != SemiringMode::FullyIdempotent {
        return Err(Error::Mode(format!(
            "provenance computation needs the fully idempotent semiring, not `{}`",
            inst.mode
        )));
    }
    let qstar = star_substitute(q0)?;
    let ontology = normalize_inverses(&inst.ontology);
    let inclusions: Vec<PositiveInclusion> =
        ontology.iter().filter_map(|ax| ax.positive()).collect();
    let interp = interp_of_assertions(&inst.virtual_assertions()?);
    let mode = SemiringMode::FullyIdempotent;
    let star = ProvVariable::star();
    let mut monomials: HashSet<Monomial> = HashSet::new();
    perfect_ref_visit(&qstar, &inclusions, &Extend, None, limits, &mut |r| {
        let accumulated: Vec<Monomial> = r
            .atoms
            .iter()
            .map(|a| Monomial::from_factors(a.ann.factors().iter().filter(|v| **v != star).copied(), mode))
            .collect();
        let _ = for_each_match(&r.atoms, &interp, None, &|_, _| true, &mut |_, _, anns| {
            let m = accumulated
                .iter()
                .zip(anns)
                .fold(Monomial::one(), |acc, (a, m)| acc.mul(a, mode).mul(m, mode));
            monomials.insert(m);
            ControlFlow::Continue(())
        });
        ControlFlow::Continue(())
    })?;
    Ok(Polynomial::from_terms(monomials, mode))
}

/// The rewritings produced for `q0` with their star annotations, as shown by
/// the `rewrite` command.
pub fn star_rewritings(q0: &ProvBCQ, inst: &AnnotatedOBDAInstance, limits: &Limits) -> Result<Vec<ProvBCQ>> {
    let qstar = star_substitute(q0)?;
    let inclusions: Vec<PositiveInclusion> = normalize_inverses(&inst.ontology)
        .iter()
        .filter_map(|ax| ax.positive())
        .collect();
    Ok(perfect_ref_star(&qstar, &inclusions, limits)?
        .into_iter()
        .map(|r| r.map_ann(|_, m| ProvTerm::Mono(m.clone())))
        .collect())
}
