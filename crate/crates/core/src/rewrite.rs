//! The PerfectRef closure, generic over how atom annotations evolve when an
//! inclusion is applied and when two atoms are unified.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;
use std::ops::ControlFlow;
use std::sync::OnceLock;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::kb::{name, BasicConcept, DaggerMap, Inclusion, Name, PositiveInclusion, Role};
use crate::query::{Atom, Pred, Query, Term};
use crate::semiring::{Monomial, SemiringMode};

/// How annotations change along a rewriting.
pub trait RewritePolicy {
    type Ann: Clone + Ord + Hash + Debug;

    /// Annotations of the rewritten atom when `inclusion` is applied to an
    /// atom annotated with `ann`. Empty when the inclusion is not applicable.
    fn apply(&self, ann: &Self::Ann, inclusion: &PositiveInclusion) -> Vec<Self::Ann>;

    /// Annotation of the atom obtained by unifying two atoms.
    fn unify(&self, a: &Self::Ann, b: &Self::Ann) -> Option<Self::Ann>;
}

/// Applying an inclusion consumes its annotation from the atom's monomial.
#[derive(Clone, Copy, Debug)]
pub struct Consume {
    pub mode: SemiringMode,
}

impl RewritePolicy for Consume {
    type Ann = Monomial;

    fn apply(&self, ann: &Monomial, inclusion: &PositiveInclusion) -> Vec<Monomial> {
        consume(ann, &inclusion.annotation, self.mode)
    }

    fn unify(&self, a: &Monomial, b: &Monomial) -> Option<Monomial> {
        (a == b).then(|| a.clone())
    }
}

/// Every monomial `n'` with `n' ⊗ a = n`.
pub fn consume(n: &Monomial, a: &Monomial, mode: SemiringMode) -> Vec<Monomial> {
    if !mode.mult_idempotent() {
        return n.divide(a).into_iter().collect();
    }
    if !n.includes_support(a) {
        return Vec::new();
    }
    let rest = n.without_support(a);
    let support = a.support();
    let mut out = Vec::with_capacity(1 << support.len());
    for mask in 0u32..(1 << support.len()) {
        let kept = support
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| *v);
        out.push(rest.mul(&Monomial::from_factors(kept, mode), mode));
    }
    out
}

/// Applying an inclusion adds its variables to the monomial once.
#[derive(Clone, Copy, Debug, Default)]
pub struct Extend;

impl RewritePolicy for Extend {
    type Ann = Monomial;

    fn apply(&self, ann: &Monomial, inclusion: &PositiveInclusion) -> Vec<Monomial> {
        vec![inclusion
            .annotation
            .factors()
            .iter()
            .fold(ann.clone(), |m, v| m.extend_idem(v))]
    }

    fn unify(&self, a: &Monomial, b: &Monomial) -> Option<Monomial> {
        Some(a.mul(b, SemiringMode::FullyIdempotent))
    }
}

/// Annotations are ignored.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ignore;

impl RewritePolicy for Ignore {
    type Ann = ();

    fn apply(&self, _: &(), _: &PositiveInclusion) -> Vec<()> {
        vec![()]
    }

    fn unify(&self, _: &(), _: &()) -> Option<()> {
        Some(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of queries in the closure.
    pub max_pr: usize,
    /// Maximum number of queries expanded.
    pub max_iterations: usize,
    /// Maximum length of an accumulated annotation under the free semiring
    /// when the target leaves it unconstrained.
    pub max_tracked_len: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_pr: 100_000,
            max_iterations: 1_000_000,
            max_tracked_len: 48,
        }
    }
}

fn role_matches(pred: &Pred, role: &Name, aliases: Option<&DaggerMap>) -> bool {
    match pred {
        Pred::Role(r) => r == role,
        Pred::RoleFamily(r) => {
            r == role || aliases.is_some_and(|d| d.role_aliases.get(role) == Some(r))
        }
        Pred::Concept(_) => false,
    }
}

/// `(t1, t2)` as seen through `role`: swapped when `role` is an inverse.
fn view(role: &Role, args: &[Term]) -> (Term, Term) {
    if role.inverse {
        (args[1].clone(), args[0].clone())
    } else {
        (args[0].clone(), args[1].clone())
    }
}

fn role_atom_args(role: &Role, first: Term, second: Term) -> Vec<Term> {
    if role.inverse {
        vec![second, first]
    } else {
        vec![first, second]
    }
}

fn basic_atom(b: &BasicConcept, t: Term) -> (Pred, Vec<Term>) {
    match b {
        BasicConcept::Atomic(a) => (Pred::Concept(a.clone()), vec![t]),
        BasicConcept::Exists(r) => (Pred::Role(r.name.clone()), role_atom_args(r, t, Term::Blank)),
    }
}

/// The predicate and arguments obtained by applying `inclusion` to an atom,
/// or `None` when the inclusion's right-hand side does not fit the atom.
/// Role families fit inclusions on the role and on any of its aliases.
pub fn rewrite_structure(
    pred: &Pred,
    args: &[Term],
    inclusion: &Inclusion,
    aliases: Option<&DaggerMap>,
) -> Option<(Pred, Vec<Term>)> {
    match (inclusion, pred) {
        (Inclusion::Concept(lhs, BasicConcept::Atomic(a)), Pred::Concept(c)) if a == c => {
            Some(basic_atom(lhs, args[0].clone()))
        }
        (Inclusion::Concept(lhs, BasicConcept::Exists(s)), p) if role_matches(p, &s.name, aliases) => {
            let (x, other) = view(s, args);
            (other == Term::Blank).then(|| basic_atom(lhs, x))
        }
        (Inclusion::Role(lhs, rhs), p) if role_matches(p, &rhs.name, aliases) => {
            let (u, v) = view(rhs, args);
            Some((Pred::Role(lhs.name.clone()), role_atom_args(lhs, u, v)))
        }
        _ => None,
    }
}

fn unify_preds(a: &Pred, b: &Pred, aliases: Option<&DaggerMap>) -> Option<Pred> {
    match (a, b) {
        _ if a == b => Some(a.clone()),
        (Pred::RoleFamily(_), Pred::Role(r)) if role_matches(a, r, aliases) => Some(b.clone()),
        (Pred::Role(r), Pred::RoleFamily(_)) if role_matches(b, r, aliases) => Some(a.clone()),
        _ => None,
    }
}

fn resolve(subst: &HashMap<Name, Term>, t: &Term) -> Term {
    let mut t = t.clone();
    while let Term::Var(v) = &t {
        match subst.get(v) {
            Some(next) => t = next.clone(),
            None => break,
        }
    }
    t
}

/// The most general unifier of two argument lists; `_` unifies with any term.
fn mgu(a: &[Term], b: &[Term]) -> Option<(HashMap<Name, Term>, Vec<Term>)> {
    if a.len() != b.len() {
        return None;
    }
    let mut subst: HashMap<Name, Term> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (resolve(&subst, x), resolve(&subst, y));
        match (&x, &y) {
            (Term::Blank, _) | (_, Term::Blank) => {}
            _ if x == y => {}
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                subst.insert(v.clone(), t.clone());
            }
            (Term::Ind(_), Term::Ind(_)) => return None,
        }
    }
    let merged = a
        .iter()
        .zip(b)
        .map(|(x, y)| match x {
            Term::Blank => resolve(&subst, y),
            _ => resolve(&subst, x),
        })
        .collect();
    Some((subst, merged))
}

fn canonical_var(i: usize) -> Name {
    static NAMES: OnceLock<Vec<Name>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        ["x", "y", "z", "w"]
            .iter()
            .map(|s| name(s))
            .chain((4..64).map(|i| name(&format!("x{i}"))))
            .collect()
    });
    names.get(i).cloned().unwrap_or_else(|| name(&format!("x{i}")))
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Tok {
    Me,
    Var(usize),
    Ind(Name),
    Blank,
}

type Signature<A> = (usize, Vec<(Pred, Vec<Tok>, A)>);

/// Replaces variables occurring once by `_`, renames variables canonically
/// and sorts the atoms, so that queries equal up to renaming and atom order
/// become identical.
pub fn canonical<A: Clone + Ord>(q: &Query<A>) -> Query<A> {
    let mut occurrences: BTreeMap<&Name, usize> = BTreeMap::new();
    for a in &q.atoms {
        for v in a.vars() {
            *occurrences.entry(v).or_default() += 1;
        }
    }
    let vars: Vec<Name> = occurrences
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(v, _)| (*v).clone())
        .collect();
    let index: HashMap<&Name, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let atoms: Vec<Atom<A>> = q
        .atoms
        .iter()
        .map(|a| Atom {
            pred: a.pred.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) if !index.contains_key(v) => Term::Blank,
                    t => t.clone(),
                })
                .collect(),
            ann: a.ann.clone(),
        })
        .collect();
    if vars.is_empty() {
        let mut atoms = atoms;
        atoms.sort();
        return Query { atoms };
    }

    let mut colors = vec![0usize; vars.len()];
    let mut classes = 1;
    loop {
        let sigs: Vec<Signature<A>> = (0..vars.len())
            .map(|i| {
                let mut shapes: Vec<(Pred, Vec<Tok>, A)> = atoms
                    .iter()
                    .filter(|a| a.args.iter().any(|t| matches!(t, Term::Var(v) if index[v] == i)))
                    .map(|a| {
                        let toks = a
                            .args
                            .iter()
                            .map(|t| match t {
                                Term::Var(v) if index[v] == i => Tok::Me,
                                Term::Var(v) => Tok::Var(colors[index[v]]),
                                Term::Ind(c) => Tok::Ind(c.clone()),
                                Term::Blank => Tok::Blank,
                            })
                            .collect();
                        (a.pred.clone(), toks, a.ann.clone())
                    })
                    .collect();
                shapes.sort();
                (colors[i], shapes)
            })
            .collect();
        let mut distinct: Vec<&Signature<A>> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).expect("present"))
            .collect();
        let refined = distinct.len();
        colors = next;
        if refined == classes {
            break;
        }
        classes = refined;
    }

    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by_key(|&i| colors[i]);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if colors[g[0]] == colors[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut budget: usize = 1;
    for g in &groups {
        for k in 2..=g.len() {
            budget = budget.saturating_mul(k);
        }
    }

    let render = |order: &[usize]| -> Vec<Atom<A>> {
        let mut rank = vec![0usize; vars.len()];
        for (pos, &i) in order.iter().enumerate() {
            rank[i] = pos;
        }
        let mut out: Vec<Atom<A>> = atoms
            .iter()
            .map(|a| Atom {
                pred: a.pred.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(canonical_var(rank[index[v]])),
                        t => t.clone(),
                    })
                    .collect(),
                ann: a.ann.clone(),
            })
            .collect();
        out.sort();
        out
    };

    if budget <= 720 && budget > 1 {
        let mut best: Option<Vec<Atom<A>>> = None;
        let mut current: Vec<usize> = Vec::with_capacity(vars.len());
        permute_groups(&groups, 0, &mut current, &mut |ord| {
            let candidate = render(ord);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        });
        Query {
            atoms: best.expect("at least one ordering"),
        }
    } else {
        Query {
            atoms: render(&order),
        }
    }
}

fn permute_groups(
    groups: &[Vec<usize>],
    g: usize,
    current: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if g == groups.len() {
        visit(current);
        return;
    }
    let mut items = groups[g].clone();
    permute(&mut items, 0, &mut |perm| {
        let len = current.len();
        current.extend_from_slice(perm);
        permute_groups(groups, g + 1, current, visit);
        current.truncate(len);
    });
}

fn permute(items: &mut [usize], k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// One-step rewritings of atom `i` of `q` by `inclusion`.
pub fn rewrite_step<P: RewritePolicy>(
    q: &Query<P::Ann>,
    i: usize,
    inclusion: &PositiveInclusion,
    policy: &P,
    aliases: Option<&DaggerMap>,
) -> Vec<Query<P::Ann>> {
    let g = &q.atoms[i];
    let Some((pred, args)) = rewrite_structure(&g.pred, &g.args, &inclusion.inclusion, aliases)
    else {
        return Vec::new();
    };
    policy
        .apply(&g.ann, inclusion)
        .into_iter()
        .map(|ann| {
            let mut atoms = q.atoms.clone();
            atoms[i] = Atom {
                pred: pred.clone(),
                args: args.clone(),
                ann,
            };
            Query { atoms }
        })
        .collect()
}

/// The query obtained by unifying atoms `i` and `j` of `q`, if they unify.
pub fn reduce_step<P: RewritePolicy>(
    q: &Query<P::Ann>,
    i: usize,
    j: usize,
    policy: &P,
    aliases: Option<&DaggerMap>,
) -> Option<Query<P::Ann>> {
    let (g1, g2) = (&q.atoms[i], &q.atoms[j]);
    let pred = unify_preds(&g1.pred, &g2.pred, aliases)?;
    let ann = policy.unify(&g1.ann, &g2.ann)?;
    let (subst, args) = mgu(&g1.args, &g2.args)?;
    let mut atoms = Vec::with_capacity(q.atoms.len() - 1);
    for (k, a) in q.atoms.iter().enumerate() {
        if k == j {
            continue;
        }
        if k == i {
            atoms.push(Atom {
                pred: pred.clone(),
                args: args.clone(),
                ann: ann.clone(),
            });
        } else {
            atoms.push(Atom {
                pred: a.pred.clone(),
                args: a.args.iter().map(|t| resolve(&subst, t)).collect(),
                ann: a.ann.clone(),
            });
        }
    }
    Some(Query { atoms })
}

/// The closure of `q` under atom rewriting and reduction, in canonical form
/// and in discovery order (breadth first, inclusions in the given order).
pub fn perfect_ref_with<P: RewritePolicy>(
    q: &Query<P::Ann>,
    inclusions: &[PositiveInclusion],
    policy: &P,
    aliases: Option<&DaggerMap>,
    limits: &Limits,
) -> Result<Vec<Query<P::Ann>>> {
    let mut out = Vec::new();
    perfect_ref_visit(q, inclusions, policy, aliases, limits, &mut |q| {
        out.push(q.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Builds the same closure as [`perfect_ref_with`], handing every new query
/// to `visit` as soon as it is found. Stops early when `visit` breaks.
pub fn perfect_ref_visit<P: RewritePolicy>(
    q: &Query<P::Ann>,
    inclusions: &[PositiveInclusion],
    policy: &P,
    aliases: Option<&DaggerMap>,
    limits: &Limits,
    visit: &mut dyn FnMut(&Query<P::Ann>) -> ControlFlow<()>,
) -> Result<()> {
    let mut pr: IndexSet<Query<P::Ann>> = IndexSet::new();
    let first = canonical(q);
    if visit(&first).is_break() {
        return Ok(());
    }
    pr.insert(first);
    let mut next = 0;
    while next < pr.len() {
        if next >= limits.max_iterations {
            return Err(Error::CapExceeded {
                what: "rewriting iterations",
                limit: limits.max_iterations,
            });
        }
        let current = pr[next].clone();
        next += 1;
        let mut produced = Vec::new();
        for i in 0..current.atoms.len() {
            for inc in inclusions {
                produced.extend(rewrite_step(&current, i, inc, policy, aliases));
            }
        }
        for i in 0..current.atoms.len() {
            for j in i + 1..current.atoms.len() {
                produced.extend(reduce_step(&current, i, j, policy, aliases));
            }
        }
        for q in produced {
            let q = canonical(&q);
            if pr.contains(&q) {
                continue;
            }
            if pr.len() >= limits.max_pr {
                return Err(Error::CapExceeded {
                    what: "rewriting set size",
                    limit: limits.max_pr,
                });
            }
            if visit(&q).is_break() {
                return Ok(());
            }
            pr.insert(q);
        }
    }
    Ok(())
}
