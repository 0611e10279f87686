//! Entailment of provenance-annotated BCQs: `(P, D) ⊨ (q, p)`.
//!
//! The instance is normalized and marked, so that distinct derivations in the
//! canonical model carry distinct annotations. Each monomial of the target is
//! split over the query atoms, the split query is rewritten with PerfectRef
//! over the marked inclusions, and the rewritings are evaluated over the
//! marked virtual assertions.

mod eager;
mod lifted;
mod tr;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::kb::{
    check_satisfiability, mark_instance, normalize_inverses, AnnotatedOBDAInstance, DaggerMap,
    Name, PositiveInclusion,
};
use crate::query::{
    for_each_match, interp_of_assertions, Atom, FiniteAnnotatedInterpretation, Pred, ProvBCQ,
    ProvTerm, Query, QueryAtom, Term,
};
use crate::rewrite::{perfect_ref_visit, perfect_ref_with, rewrite_structure, Consume, Limits};
use crate::semiring::{Monomial, Polynomial, SemiringMode};

pub use lifted::{Lifted, LiftedAnn, Pattern};
pub use tr::{factorizations, translate_tr, TrQueries};

/// How preimages of the target under the dagger map are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Resolved during rewriting through the dagger map.
    #[default]
    Lazy,
    /// Enumerated up front, then rewritten with plain consumption. Only
    /// supported without multiplicative idempotency.
    Eager,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EntailOptions {
    pub limits: Limits,
    pub strategy: Strategy,
}

/// A match of a rewriting that witnesses one monomial of the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// `None` when the target is `0`.
    pub target: Option<Monomial>,
    pub rewriting: String,
    /// The marked virtual assertions matched by the rewriting.
    pub matched: Vec<String>,
    /// Per query atom, the annotation of the canonical-model tuple it maps to.
    pub marked: Vec<Monomial>,
    /// The same annotations after the dagger map.
    pub original: Vec<Monomial>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.target {
            Some(t) => writeln!(f, "monomial {t}")?,
            None => writeln!(f, "query match")?,
        }
        writeln!(f, "  rewriting: {}", self.rewriting)?;
        for m in &self.matched {
            writeln!(f, "  matched: {m}")?;
        }
        for (i, (m, o)) in self.marked.iter().zip(&self.original).enumerate() {
            writeln!(f, "  atom {}: {m} -> {o}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub entailed: bool,
    pub satisfiable: bool,
    pub witnesses: Vec<Witness>,
}

/// Whether `inclusion` can rewrite `g`: its right-hand side fits the atom
/// and its annotation divides the atom's monomial.
pub fn applicable(inclusion: &PositiveInclusion, g: &QueryAtom) -> bool {
    match &g.ann {
        ProvTerm::Mono(m) => {
            m.includes(&inclusion.annotation)
                && rewrite_structure(&g.pred, &g.args, &inclusion.inclusion, None).is_some()
        }
        ProvTerm::Var(_) => false,
    }
}

/// The atom obtained from `g` by applying `inclusion`, with the inclusion's
/// annotation removed from the monomial.
pub fn rewrite_atom(g: &QueryAtom, inclusion: &PositiveInclusion) -> Option<QueryAtom> {
    let ProvTerm::Mono(m) = &g.ann else {
        return None;
    };
    let rest = m.divide(&inclusion.annotation)?;
    let (pred, args) = rewrite_structure(&g.pred, &g.args, &inclusion.inclusion, None)?;
    Some(Atom {
        pred,
        args,
        ann: ProvTerm::Mono(rest),
    })
}

/// The PerfectRef closure of a query whose provenance positions are all
/// monomials.
pub fn perfect_ref(
    q: &ProvBCQ,
    inclusions: &[PositiveInclusion],
    mode: SemiringMode,
    limits: &Limits,
) -> Result<Vec<ProvBCQ>> {
    let q = monomial_query(q)?;
    let pr = perfect_ref_with(&q, inclusions, &Consume { mode }, None, limits)?;
    Ok(pr
        .into_iter()
        .map(|r| r.map_ann(|_, m| ProvTerm::Mono(m.clone())))
        .collect())
}

fn monomial_query(q: &ProvBCQ) -> Result<Query<Monomial>> {
    let mut atoms = Vec::with_capacity(q.atoms.len());
    for a in &q.atoms {
        match &a.ann {
            ProvTerm::Mono(m) => atoms.push(a.with_ann(m.clone())),
            ProvTerm::Var(v) => {
                return Err(Error::Invalid(format!(
                    "provenance position `{v}` must be a monomial"
                )))
            }
        }
    }
    Ok(Query { atoms })
}

/// `(P, D) ⊨ (q, p)`. A zero target asks only for a match of `q` that
/// respects its monomial constants and repeated provenance variables.
pub fn entails(inst: &AnnotatedOBDAInstance, q: &ProvBCQ, p: &Polynomial) -> Result<bool> {
    Ok(entails_with(inst, q, p, &EntailOptions::default())?.entailed)
}

pub fn entails_with(
    inst: &AnnotatedOBDAInstance,
    q: &ProvBCQ,
    p: &Polynomial,
    opts: &EntailOptions,
) -> Result<Report> {
    if q.atoms.is_empty() {
        return Err(Error::Invalid("query without atoms".into()));
    }
    if !check_satisfiability(inst)? {
        return Ok(Report {
            entailed: true,
            satisfiable: false,
            witnesses: Vec::new(),
        });
    }
    let ctx = Prepared::new(inst)?;
    let p = p.normalize(inst.mode);
    let mut witnesses = Vec::new();
    let entailed = if p.is_zero() {
        match ctx.lazy_zero(q, &opts.limits)? {
            Some(w) => {
                witnesses.push(w);
                true
            }
            None => false,
        }
    } else {
        let mut all = true;
        for (t, k) in p.counted_terms() {
            let found = match opts.strategy {
                Strategy::Lazy => ctx.lazy_monomial(q, &t, k, &opts.limits)?,
                Strategy::Eager => eager::monomial(&ctx, q, &t, k, &opts.limits)?,
            };
            if found.len() < k {
                all = false;
                break;
            }
            witnesses.extend(found);
        }
        all
    };
    if !entailed {
        witnesses.clear();
    }
    Ok(Report {
        entailed,
        satisfiable: true,
        witnesses,
    })
}

/// The normalized, marked instance with its virtual assertions.
pub(crate) struct Prepared {
    pub dagger: DaggerMap,
    pub interp: FiniteAnnotatedInterpretation,
    pub inclusions: Vec<PositiveInclusion>,
    pub mode: SemiringMode,
}

impl Prepared {
    pub fn new(inst: &AnnotatedOBDAInstance) -> Result<Self> {
        let normalized = AnnotatedOBDAInstance {
            ontology: normalize_inverses(&inst.ontology),
            ..inst.clone()
        };
        let (marked, dagger) = mark_instance(&normalized)?;
        let interp = interp_of_assertions(&marked.virtual_assertions()?);
        Ok(Prepared {
            inclusions: marked.positive_inclusions(),
            dagger,
            interp,
            mode: inst.mode,
        })
    }

    fn lifted_query(q: &ProvBCQ, anns: impl Fn(usize) -> LiftedAnn) -> Query<LiftedAnn> {
        Query {
            atoms: q
                .atoms
                .iter()
                .enumerate()
                .map(|(j, a)| Atom {
                    pred: family(&a.pred),
                    args: a.args.clone(),
                    ann: anns(j),
                })
                .collect(),
        }
    }

    fn pattern_filter<'a>(&'a self, r: &'a Query<LiftedAnn>) -> impl Fn(usize, &Monomial) -> bool + 'a {
        move |i, m| match &r.atoms[i].ann.pattern {
            Pattern::Any => true,
            Pattern::Exact(e) => self.dagger.monomial(m, self.mode) == *e,
        }
    }

    fn slot_values(&self, r: &Query<LiftedAnn>, anns: &[Monomial]) -> BTreeMap<u32, Monomial> {
        let mut out = BTreeMap::new();
        for (a, m) in r.atoms.iter().zip(anns) {
            for (slot, consumed) in &a.ann.slots {
                if let Some(c) = consumed {
                    out.insert(*slot, c.mul(m, self.mode));
                }
            }
        }
        out
    }

    fn lazy_zero(&self, q: &ProvBCQ, limits: &Limits) -> Result<Option<Witness>> {
        let prov = q.prov_vars();
        let lq = Self::lifted_query(q, |j| match &q.atoms[j].ann {
            ProvTerm::Mono(c) => {
                LiftedAnn::new(j as u32, Pattern::Exact(c.normalize(self.mode)), false)
            }
            ProvTerm::Var(v) => LiftedAnn::new(j as u32, Pattern::Any, prov[v].len() > 1),
        });
        let groups: Vec<Vec<u32>> = prov
            .values()
            .filter(|atoms| atoms.len() > 1)
            .map(|atoms| atoms.iter().map(|&j| j as u32).collect())
            .collect();
        let mut policy = Lifted::new(&self.dagger, self.mode);
        if !self.mode.mult_idempotent() {
            policy.slot_bound = Some(limits.max_tracked_len);
        }
        let mut witness = None;
        perfect_ref_visit(&lq, &self.inclusions, &policy, Some(&self.dagger), limits, &mut |r| {
            let filter = self.pattern_filter(r);
            for_each_match(&r.atoms, &self.interp, Some(&self.dagger), &filter, &mut |vars, values, anns| {
                let slots = self.slot_values(r, anns);
                let cobound = groups.iter().all(|g| {
                    let images: BTreeSet<Monomial> = g
                        .iter()
                        .map(|s| self.dagger.monomial(&slots[s], self.mode))
                        .collect();
                    images.len() == 1
                });
                if !cobound {
                    return ControlFlow::Continue(());
                }
                witness = Some(self.witness(None, r, vars, values, anns, &slots));
                ControlFlow::Break(())
            })
        })?;
        if witness.is_none() && policy.pruned.get() {
            return Err(Error::CapExceeded {
                what: "tracked annotation length",
                limit: limits.max_tracked_len,
            });
        }
        Ok(witness)
    }

    /// Witnesses for `t`, one per distinct match, stopping once `k` are found.
    fn lazy_monomial(
        &self,
        q: &ProvBCQ,
        t: &Monomial,
        k: usize,
        limits: &Limits,
    ) -> Result<Vec<Witness>> {
        let policy = Lifted::new(&self.dagger, self.mode);
        let mut seen: BTreeSet<Vec<Monomial>> = BTreeSet::new();
        let mut found = Vec::new();
        for parts in admissible_splits(q, t, self.mode) {
            let lq = Self::lifted_query(q, |j| {
                LiftedAnn::new(j as u32, Pattern::Exact(parts[j].clone()), true)
            });
            perfect_ref_visit(&lq, &self.inclusions, &policy, Some(&self.dagger), limits, &mut |r| {
                let filter = self.pattern_filter(r);
                for_each_match(&r.atoms, &self.interp, Some(&self.dagger), &filter, &mut |vars, values, anns| {
                    let slots = self.slot_values(r, anns);
                    let vector: Vec<Monomial> = slots.values().cloned().collect();
                    if seen.insert(vector) {
                        found.push(self.witness(Some(t.clone()), r, vars, values, anns, &slots));
                        if found.len() >= k {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                })
            })?;
            if found.len() >= k {
                break;
            }
        }
        Ok(found)
    }

    fn witness(
        &self,
        target: Option<Monomial>,
        r: &Query<LiftedAnn>,
        vars: &[Name],
        values: &[Name],
        anns: &[Monomial],
        slots: &BTreeMap<u32, Monomial>,
    ) -> Witness {
        let binding: BTreeMap<&Name, &Name> = vars.iter().zip(values).collect();
        let matched = r
            .atoms
            .iter()
            .zip(anns)
            .map(|(a, m)| {
                let args: Vec<Name> = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => binding[v].clone(),
                        Term::Ind(c) => c.clone(),
                        Term::Blank => crate::kb::name("_"),
                    })
                    .collect();
                let pred = self.concrete_pred(&a.pred, &args, m);
                let args = self.interp.args_with_annotation(&pred, m).unwrap_or(args);
                format!("{pred}({}) @ {m}", args.join(","))
            })
            .collect();
        let marked: Vec<Monomial> = slots.values().cloned().collect();
        Witness {
            target,
            rewriting: r.to_string(),
            matched,
            original: marked
                .iter()
                .map(|m| self.dagger.monomial(m, self.mode))
                .collect(),
            marked,
        }
    }

    fn concrete_pred(&self, pred: &Pred, args: &[Name], m: &Monomial) -> Name {
        match pred {
            Pred::RoleFamily(r) => self
                .interp
                .role_names()
                .find(|n| {
                    self.dagger.in_family(n, r)
                        && self.interp.role_ext(n).any(|(a, b, x)| {
                            x == m && (args[0].as_ref() == "_" || *a == args[0])
                                && (args[1].as_ref() == "_" || *b == args[1])
                        })
                })
                .cloned()
                .unwrap_or_else(|| r.clone()),
            p => p.name().clone(),
        }
    }
}

impl fmt::Display for LiftedAnn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern {
            Pattern::Any => f.write_str("@_"),
            Pattern::Exact(m) => write!(f, "@{m}"),
        }
    }
}

fn family(pred: &Pred) -> Pred {
    match pred {
        Pred::Role(r) => Pred::RoleFamily(r.clone()),
        p => p.clone(),
    }
}

/// Splits of `t` over the atoms of `q` that respect its monomial constants
/// and give atoms sharing a provenance variable the same part.
pub(crate) fn admissible_splits(q: &ProvBCQ, t: &Monomial, mode: SemiringMode) -> Vec<Vec<Monomial>> {
    let prov = q.prov_vars();
    factorizations(t, q.atoms.len(), mode)
        .into_iter()
        .filter(|parts| {
            q.atoms.iter().zip(parts).all(|(a, part)| match &a.ann {
                ProvTerm::Mono(c) => c.normalize(mode) == *part,
                ProvTerm::Var(_) => true,
            }) && prov
                .values()
                .all(|atoms| atoms.iter().all(|&j| parts[j] == parts[atoms[0]]))
        })
        .collect()
}
