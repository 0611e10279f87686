use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use super::{admissible_splits, Prepared, Witness};
use crate::error::{Error, Result};
use crate::kb::Name;
use crate::query::{for_each_match, Atom, Pred, ProvBCQ, Query};
use crate::rewrite::{perfect_ref_visit, Consume, Limits};
use crate::semiring::{Monomial, ProvVariable};

/// Marked monomials whose dagger image is `t`: products of marked variables
/// with non-identity images, optionally times one marked rule annotation
/// whose image is the identity.
fn preimages(ctx: &Prepared, t: &Monomial) -> Vec<Monomial> {
    let mut proper: Vec<(ProvVariable, Monomial)> = Vec::new();
    let mut silent: Vec<ProvVariable> = Vec::new();
    for (v, image) in &ctx.dagger.forward {
        if image.is_one() {
            silent.push(*v);
        } else if t.includes(image) {
            proper.push((*v, image.clone()));
        }
    }
    let mut out = Vec::new();
    collect(&proper, 0, t, Monomial::one(), ctx, &mut out);
    let base = out.clone();
    for m in &base {
        for s in &silent {
            out.push(m.mul_var(s, ctx.mode));
        }
    }
    out
}

fn collect(
    candidates: &[(ProvVariable, Monomial)],
    from: usize,
    rest: &Monomial,
    acc: Monomial,
    ctx: &Prepared,
    out: &mut Vec<Monomial>,
) {
    if rest.is_one() {
        out.push(acc);
        return;
    }
    for (i, (v, image)) in candidates.iter().enumerate().skip(from) {
        if let Some(r) = rest.divide(image) {
            collect(candidates, i, &r, acc.mul_var(v, ctx.mode), ctx, out);
        }
    }
}

fn role_choices(ctx: &Prepared, pred: &Pred) -> Vec<Pred> {
    match pred {
        Pred::Role(r) | Pred::RoleFamily(r) => {
            let mut out = vec![Pred::Role(r.clone())];
            out.extend(
                ctx.dagger
                    .role_aliases
                    .iter()
                    .filter(|(_, orig)| *orig == r)
                    .map(|(alias, _)| Pred::Role(alias.clone())),
            );
            out
        }
        p => vec![p.clone()],
    }
}

fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for item in list {
                let mut p = prefix.clone();
                p.push(item.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Distinct matches realizing `t`, found by enumerating marked preimages
/// and role aliases before rewriting.
pub(super) fn monomial(
    ctx: &Prepared,
    q: &ProvBCQ,
    t: &Monomial,
    k: usize,
    limits: &Limits,
) -> Result<Vec<Witness>> {
    if ctx.mode.mult_idempotent() {
        return Err(Error::Mode(
            "eager preimage enumeration requires the free semiring".into(),
        ));
    }
    let policy = Consume { mode: ctx.mode };
    let preds: Vec<Vec<Pred>> = q.atoms.iter().map(|a| role_choices(ctx, &a.pred)).collect();
    let pred_choices = product(&preds);
    let mut found: BTreeMap<Vec<Monomial>, Witness> = BTreeMap::new();
    let mut cache: BTreeMap<Monomial, Vec<Monomial>> = BTreeMap::new();
    for parts in admissible_splits(q, t, ctx.mode) {
        let lists: Vec<Vec<Monomial>> = parts
            .iter()
            .map(|p| cache.entry(p.clone()).or_insert_with(|| preimages(ctx, p)).clone())
            .collect();
        for marked in product(&lists) {
            if found.contains_key(&marked) {
                continue;
            }
            for preds in &pred_choices {
                let mq = Query {
                    atoms: q
                        .atoms
                        .iter()
                        .zip(preds)
                        .zip(&marked)
                        .map(|((a, pred), m)| Atom {
                            pred: pred.clone(),
                            args: a.args.clone(),
                            ann: m.clone(),
                        })
                        .collect(),
                };
                let mut hit: Option<Witness> = None;
                perfect_ref_visit(&mq, &ctx.inclusions, &policy, None, limits, &mut |r| {
                    let filter = |i: usize, m: &Monomial| r.atoms[i].ann == *m;
                    for_each_match(&r.atoms, &ctx.interp, None, &filter, &mut |vars, values, anns| {
                        hit = Some(witness(t, r, vars, values, anns, &marked, ctx));
                        ControlFlow::Break(())
                    })
                })?;
                if let Some(w) = hit {
                    found.insert(marked.clone(), w);
                    break;
                }
            }
            if found.len() >= k {
                return Ok(found.into_values().collect());
            }
        }
    }
    Ok(found.into_values().collect())
}

fn witness(
    t: &Monomial,
    r: &Query<Monomial>,
    vars: &[Name],
    values: &[Name],
    anns: &[Monomial],
    marked: &[Monomial],
    ctx: &Prepared,
) -> Witness {
    let binding: BTreeSet<(Name, Name)> = vars.iter().cloned().zip(values.iter().cloned()).collect();
    let matched = r
        .atoms
        .iter()
        .zip(anns)
        .map(|(a, m)| {
            let args: Vec<String> = a
                .args
                .iter()
                .map(|t| match t {
                    crate::query::Term::Var(v) => binding
                        .iter()
                        .find(|(x, _)| x == v)
                        .map(|(_, c)| c.to_string())
                        .unwrap_or_default(),
                    other => other.to_string(),
                })
                .collect();
            let args = ctx
                .interp
                .args_with_annotation(a.pred.name(), m)
                .map_or(args, |found| found.iter().map(ToString::to_string).collect());
            format!("{}({}) @ {m}", a.pred.name(), args.join(","))
        })
        .collect();
    Witness {
        target: Some(t.clone()),
        rewriting: r.to_string(),
        matched,
        marked: marked.to_vec(),
        original: marked
            .iter()
            .map(|m| ctx.dagger.monomial(m, ctx.mode))
            .collect(),
    }
}
