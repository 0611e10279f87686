//! Annotated Boolean conjunctive queries and their evaluation over finite
//! annotated interpretations.

mod eval;
mod interp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::kb::Name;
use crate::semiring::Monomial;

pub use eval::{
    enumerate_matches, for_each_match, provenance_on, satisfies_with, AtomFilter, Match,
};
pub use interp::{interp_of_assertions, FiniteAnnotatedInterpretation};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Ind(Name),
    /// The unshared placeholder `_`.
    Blank,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Ind(v) => f.write_str(v),
            Term::Blank => f.write_str("_"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Concept(Name),
    Role(Name),
    /// A role together with all of its pair aliases.
    RoleFamily(Name),
}

impl Pred {
    pub fn name(&self) -> &Name {
        match self {
            Pred::Concept(n) | Pred::Role(n) | Pred::RoleFamily(n) => n,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Pred::Concept(_) => 1,
            _ => 2,
        }
    }

    pub fn is_role(&self) -> bool {
        !matches!(self, Pred::Concept(_))
    }
}

/// The provenance position of a query atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProvTerm {
    Var(Name),
    Mono(Monomial),
}

impl fmt::Display for ProvTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProvTerm::Var(v) => write!(f, "@{v}"),
            ProvTerm::Mono(m) => write!(f, "@{m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom<A> {
    pub pred: Pred,
    pub args: Vec<Term>,
    pub ann: A,
}

impl<A> Atom<A> {
    pub fn concept(name: impl Into<Name>, t: Term, ann: A) -> Self {
        Atom {
            pred: Pred::Concept(name.into()),
            args: vec![t],
            ann,
        }
    }

    pub fn role(name: impl Into<Name>, t1: Term, t2: Term, ann: A) -> Self {
        Atom {
            pred: Pred::Role(name.into()),
            args: vec![t1, t2],
            ann,
        }
    }

    pub fn with_ann<B>(&self, ann: B) -> Atom<B> {
        Atom {
            pred: self.pred.clone(),
            args: self.args.clone(),
            ann,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            _ => None,
        })
    }
}

impl<A: fmt::Display> fmt::Display for Atom<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred.name())?;
        for a in &self.args {
            write!(f, "{a},")?;
        }
        write!(f, "{})", self.ann)
    }
}

/// An existentially closed conjunction of atoms. Every variable is
/// existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query<A> {
    pub atoms: Vec<Atom<A>>,
}

impl<A> Query<A> {
    pub fn new(atoms: Vec<Atom<A>>) -> Self {
        Query { atoms }
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in &self.atoms {
            for v in a.vars() {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn individuals(&self) -> BTreeSet<Name> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Ind(i) => Some(i.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn map_ann<B>(&self, mut f: impl FnMut(usize, &A) -> B) -> Query<B> {
        Query {
            atoms: self
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| a.with_ann(f(i, &a.ann)))
                .collect(),
        }
    }
}

impl<A: fmt::Display> fmt::Display for Query<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = self.vars();
        if !vars.is_empty() {
            let names: Vec<&str> = vars.iter().map(|v| &**v).collect();
            write!(f, "∃{}. ", names.join(","))?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A BCQ whose atoms carry a provenance variable or monomial.
pub type ProvBCQ = Query<ProvTerm>;
pub type QueryAtom = Atom<ProvTerm>;

impl ProvBCQ {
    /// Provenance variables with the indices of the atoms using them.
    pub fn prov_vars(&self) -> BTreeMap<Name, Vec<usize>> {
        let mut out: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if let ProvTerm::Var(v) = &a.ann {
                out.entry(v.clone()).or_default().push(i);
            }
        }
        out
    }

    /// Every provenance position is a variable used exactly once.
    pub fn is_standard(&self) -> bool {
        let vars = self.prov_vars();
        self.atoms.iter().all(|a| matches!(a.ann, ProvTerm::Var(_)))
            && vars.values().all(|v| v.len() == 1)
            && vars.keys().all(|v| self.vars().iter().all(|x| x != v))
    }

    /// Renders in the query file syntax.
    pub fn to_source(&self) -> String {
        let mut vars: Vec<String> = self.vars().iter().map(|v| v.to_string()).collect();
        vars.extend(self.prov_vars().keys().map(|v| v.to_string()));
        let atoms: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        format!("ASK {}: {}", vars.join(","), atoms.join(" AND "))
    }
}
