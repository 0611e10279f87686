use crate::error::{Error, Result};
use crate::kb::name;
use crate::query::{Atom, ProvBCQ, ProvTerm, Query, Term};
use crate::semiring::{Monomial, Polynomial, ProvVariable, SemiringMode};

/// All ordered ways to write `t` as a product of `k` nonempty monomials.
///
/// Without multiplicative idempotency the parts split the occurrences of
/// `t`; with it they are sets whose union is `t`.
pub fn factorizations(t: &Monomial, k: usize, mode: SemiringMode) -> Vec<Vec<Monomial>> {
    if k == 0 {
        return if t.is_one() { vec![Vec::new()] } else { Vec::new() };
    }
    if mode.mult_idempotent() {
        set_covers(t, k, mode)
    } else {
        let mut counts: Vec<(ProvVariable, usize)> = Vec::new();
        for v in t.factors() {
            match counts.last_mut() {
                Some((w, n)) if w == v => *n += 1,
                _ => counts.push((*v, 1)),
            }
        }
        let mut out = Vec::new();
        split_multiset(&counts, k, &mut Vec::new(), &mut out);
        out
    }
}

fn split_multiset(
    rest: &[(ProvVariable, usize)],
    k: usize,
    prefix: &mut Vec<Monomial>,
    out: &mut Vec<Vec<Monomial>>,
) {
    let total: usize = rest.iter().map(|(_, n)| n).sum();
    if k == 1 {
        if total > 0 {
            let last = Monomial::from_factors(
                rest.iter().flat_map(|(v, n)| std::iter::repeat_n(*v, *n)),
                SemiringMode::Free,
            );
            prefix.push(last);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    if total < k {
        return;
    }
    let mut take = vec![0usize; rest.len()];
    loop {
        let mut i = 0;
        while i < take.len() && take[i] == rest[i].1 {
            take[i] = 0;
            i += 1;
        }
        if i == take.len() {
            break;
        }
        take[i] += 1;
        let taken: usize = take.iter().sum();
        if total - taken < k - 1 {
            continue;
        }
        let part = Monomial::from_factors(
            rest.iter()
                .zip(&take)
                .flat_map(|((v, _), n)| std::iter::repeat_n(*v, *n)),
            SemiringMode::Free,
        );
        let remaining: Vec<(ProvVariable, usize)> = rest
            .iter()
            .zip(&take)
            .map(|((v, n), t)| (*v, n - t))
            .filter(|(_, n)| *n > 0)
            .collect();
        prefix.push(part);
        split_multiset(&remaining, k - 1, prefix, out);
        prefix.pop();
    }
}

fn set_covers(t: &Monomial, k: usize, mode: SemiringMode) -> Vec<Vec<Monomial>> {
    let support = t.support();
    if support.is_empty() || k > 16 {
        return Vec::new();
    }
    let masks = (1u32 << k) - 1;
    let mut choice = vec![1u32; support.len()];
    let mut out = Vec::new();
    loop {
        let mut parts: Vec<Vec<ProvVariable>> = vec![Vec::new(); k];
        for (v, mask) in support.iter().zip(&choice) {
            for (j, part) in parts.iter_mut().enumerate() {
                if mask & (1 << j) != 0 {
                    part.push(*v);
                }
            }
        }
        if parts.iter().all(|p| !p.is_empty()) {
            out.push(
                parts
                    .into_iter()
                    .map(|p| Monomial::from_factors(p, mode))
                    .collect(),
            );
        }
        let mut i = 0;
        while i < choice.len() && choice[i] == masks {
            choice[i] = 1;
            i += 1;
        }
        if i == choice.len() {
            break;
        }
        choice[i] += 1;
    }
    out.sort();
    out
}

/// The queries of `Tr(q, p)`, produced on demand.
pub struct TrQueries {
    template: ProvBCQ,
    per_copy: Vec<Vec<Vec<Monomial>>>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for TrQueries {
    type Item = ProvBCQ;

    fn next(&mut self) -> Option<ProvBCQ> {
        if self.done {
            return None;
        }
        let mut atoms = Vec::with_capacity(self.per_copy.len() * self.template.atoms.len());
        for (i, choices) in self.per_copy.iter().enumerate() {
            let parts = &choices[self.cursor[i]];
            for (a, part) in self.template.atoms.iter().zip(parts) {
                atoms.push(Atom {
                    pred: a.pred.clone(),
                    args: a
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => Term::Var(name(&format!("{v}_{}", i + 1))),
                            t => t.clone(),
                        })
                        .collect(),
                    ann: ProvTerm::Mono(part.clone()),
                });
            }
        }
        let mut i = 0;
        loop {
            if i == self.cursor.len() {
                self.done = true;
                break;
            }
            self.cursor[i] += 1;
            if self.cursor[i] < self.per_copy[i].len() {
                break;
            }
            self.cursor[i] = 0;
            i += 1;
        }
        Some(Query { atoms })
    }
}

/// `Tr(q, p)`: one variable-renamed copy of `q` per monomial of `p`, with
/// the copy's atoms annotated by a factorization of that monomial. Copy `i`
/// renames variable `x` to `x_i`.
pub fn translate_tr(q: &ProvBCQ, p: &Polynomial, mode: SemiringMode) -> Result<TrQueries> {
    if q.atoms.is_empty() {
        return Err(Error::Invalid("query without atoms".into()));
    }
    if let Some(a) = q.atoms.iter().find(|a| matches!(a.ann, ProvTerm::Mono(_))) {
        return Err(Error::Invalid(format!(
            "provenance position of `{a}` is not a variable"
        )));
    }
    let p = p.normalize(mode);
    if p.has_duplicates() {
        return Err(Error::DuplicateMonomials(p.to_string()));
    }
    if p.is_zero() {
        return Err(Error::Invalid("target polynomial is 0".into()));
    }
    let k = q.atoms.len();
    let mut per_copy = Vec::with_capacity(p.len());
    for t in p.terms() {
        let f = factorizations(t, k, mode);
        if f.is_empty() {
            return Err(Error::NoFactorization {
                monomial: t.to_string(),
                atoms: k,
            });
        }
        per_copy.push(f);
    }
    Ok(TrQueries {
        template: q.clone(),
        cursor: vec![0; per_copy.len()],
        per_copy,
        done: false,
    })
}
