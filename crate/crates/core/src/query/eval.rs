use std::collections::BTreeMap;
use std::ops::ControlFlow;

use super::{Atom, FiniteAnnotatedInterpretation, Pred, ProvBCQ, ProvTerm, Term};
use crate::kb::{DaggerMap, Name};
use crate::semiring::{Monomial, Polynomial, SemiringMode};

/// Called with the variable names, their values and the matched annotations.
pub type MatchVisitor<'a> = dyn FnMut(&[Name], &[Name], &[Monomial]) -> ControlFlow<()> + 'a;

/// Decides whether the tuple annotation `m` is acceptable for atom `i`.
pub type AtomFilter<'a> = dyn Fn(usize, &Monomial) -> bool + 'a;

/// A match of a provenance-annotated BCQ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub individuals: BTreeMap<Name, Name>,
    pub provenance: BTreeMap<Name, Monomial>,
    /// The annotation of the tuple matched by each atom, in atom order.
    pub annotations: Vec<Monomial>,
}

enum Tuple<'a> {
    Unary(&'a Name),
    Binary(&'a Name, &'a Name),
}

/// Enumerates every match of `atoms` in `interp`, calling `visit` with the
/// variable names, their bound values and the per-atom tuple annotations.
///
/// Role families resolve through `aliases`; `_` matches anything.
pub fn for_each_match<A>(
    atoms: &[Atom<A>],
    interp: &FiniteAnnotatedInterpretation,
    aliases: Option<&DaggerMap>,
    filter: &AtomFilter<'_>,
    visit: &mut MatchVisitor,
) -> ControlFlow<()> {
    let mut vars: Vec<Name> = Vec::new();
    let mut slots: Vec<Vec<Option<usize>>> = Vec::with_capacity(atoms.len());
    for a in atoms {
        let mut s = Vec::with_capacity(a.args.len());
        for t in &a.args {
            s.push(match t {
                Term::Var(v) => Some(match vars.iter().position(|x| x == v) {
                    Some(i) => i,
                    None => {
                        vars.push(v.clone());
                        vars.len() - 1
                    }
                }),
                _ => None,
            });
        }
        slots.push(s);
    }
    let order = plan(atoms, &slots);
    let relations: Vec<Vec<&Name>> = atoms
        .iter()
        .map(|a| match &a.pred {
            Pred::Concept(c) => vec![c],
            Pred::Role(r) => vec![r],
            Pred::RoleFamily(r) => interp
                .role_names()
                .filter(|n| match aliases {
                    Some(d) => d.in_family(n, r),
                    None => *n == r,
                })
                .collect(),
        })
        .collect();
    let mut state = Search {
        atoms,
        interp,
        filter,
        slots: &slots,
        relations: &relations,
        order: &order,
        values: vec![None; vars.len()],
        anns: vec![Monomial::one(); atoms.len()],
        vars: &vars,
    };
    state.step(0, visit)
}

fn plan<A>(atoms: &[Atom<A>], slots: &[Vec<Option<usize>>]) -> Vec<usize> {
    let mut bound: Vec<usize> = Vec::new();
    let mut order = Vec::with_capacity(atoms.len());
    let mut left: Vec<usize> = (0..atoms.len()).collect();
    while !left.is_empty() {
        let score = |i: usize| {
            let a = &atoms[i];
            let consts = a.args.iter().filter(|t| matches!(t, Term::Ind(_))).count();
            let joined = slots[i]
                .iter()
                .flatten()
                .filter(|v| bound.contains(v))
                .count();
            (consts + joined, usize::MAX - i)
        };
        let (pos, &best) = left
            .iter()
            .enumerate()
            .max_by_key(|(_, &i)| score(i))
            .expect("nonempty");
        left.remove(pos);
        bound.extend(slots[best].iter().flatten());
        order.push(best);
    }
    order
}

struct Search<'a, A> {
    atoms: &'a [Atom<A>],
    interp: &'a FiniteAnnotatedInterpretation,
    filter: &'a AtomFilter<'a>,
    slots: &'a [Vec<Option<usize>>],
    relations: &'a [Vec<&'a Name>],
    order: &'a [usize],
    values: Vec<Option<Name>>,
    anns: Vec<Monomial>,
    vars: &'a [Name],
}

impl<A> Search<'_, A> {
    fn step(
        &mut self,
        depth: usize,
        visit: &mut MatchVisitor,
    ) -> ControlFlow<()> {
        if depth == self.order.len() {
            let values: Vec<Name> = self
                .values
                .iter()
                .map(|v| v.clone().expect("every variable occurs in an atom"))
                .collect();
            return visit(self.vars, &values, &self.anns);
        }
        let i = self.order[depth];
        let relations = self.relations[i].clone();
        for rel in relations {
            let tuples: Vec<(Tuple<'_>, &Monomial)> = match &self.atoms[i].pred {
                Pred::Concept(_) => self
                    .interp
                    .concept_ext(rel)
                    .map(|(a, m)| (Tuple::Unary(a), m))
                    .collect(),
                _ => self
                    .interp
                    .role_ext(rel)
                    .map(|(a, b, m)| (Tuple::Binary(a, b), m))
                    .collect(),
            };
            for (tuple, m) in tuples {
                if !(self.filter)(i, m) {
                    continue;
                }
                let values: [Option<&Name>; 2] = match tuple {
                    Tuple::Unary(a) => [Some(a), None],
                    Tuple::Binary(a, b) => [Some(a), Some(b)],
                };
                let mut newly = Vec::new();
                let mut ok = true;
                for (k, term) in self.atoms[i].args.iter().enumerate() {
                    let value = values[k].expect("arity checked");
                    match term {
                        Term::Blank => {}
                        Term::Ind(c) => {
                            if c != value {
                                ok = false;
                            }
                        }
                        Term::Var(_) => {
                            let slot = self.slots[i][k].expect("variable slot");
                            match &self.values[slot] {
                                Some(bound) if bound != value => ok = false,
                                Some(_) => {}
                                None => {
                                    self.values[slot] = Some(value.clone());
                                    newly.push(slot);
                                }
                            }
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    self.anns[i] = m.clone();
                    let flow = self.step(depth + 1, visit);
                    if flow.is_break() {
                        return flow;
                    }
                }
                for s in newly {
                    self.values[s] = None;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// All matches of `q` in `interp`. Monomial constants must equal the tuple
/// annotation and repeated provenance variables must bind the same monomial.
pub fn enumerate_matches(q: &ProvBCQ, interp: &FiniteAnnotatedInterpretation) -> Vec<Match> {
    let filter = |i: usize, m: &Monomial| match &q.atoms[i].ann {
        ProvTerm::Mono(c) => c == m,
        ProvTerm::Var(_) => true,
    };
    let mut out = Vec::new();
    let _ = for_each_match(&q.atoms, interp, None, &filter, &mut |vars, values, anns| {
        let mut provenance: BTreeMap<Name, Monomial> = BTreeMap::new();
        for (a, m) in q.atoms.iter().zip(anns) {
            if let ProvTerm::Var(v) = &a.ann {
                match provenance.get(v) {
                    Some(prev) if prev != m => return ControlFlow::Continue(()),
                    Some(_) => {}
                    None => {
                        provenance.insert(v.clone(), m.clone());
                    }
                }
            }
        }
        out.push(Match {
            individuals: vars.iter().cloned().zip(values.iter().cloned()).collect(),
            provenance,
            annotations: anns.to_vec(),
        });
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

/// `Prov_I(q)`: the sum over matches of the product of matched annotations.
pub fn provenance_on(
    q: &ProvBCQ,
    interp: &FiniteAnnotatedInterpretation,
    mode: SemiringMode,
) -> Polynomial {
    let terms = enumerate_matches(q, interp).into_iter().map(|m| {
        m.annotations
            .iter()
            .fold(Monomial::one(), |acc, a| acc.mul(a, mode))
    });
    Polynomial::from_terms(terms, mode)
}

/// `I ⊨ (q, p)`: `q` has a match and `p ⊆ Prov_I(q)`.
pub fn satisfies_with(
    q: &ProvBCQ,
    p: &Polynomial,
    interp: &FiniteAnnotatedInterpretation,
    mode: SemiringMode,
) -> bool {
    if enumerate_matches(q, interp).is_empty() {
        return false;
    }
    provenance_on(q, interp, mode).contains(&p.normalize(mode))
}
