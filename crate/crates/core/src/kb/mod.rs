//! Annotated DL-Lite knowledge bases: axioms, GAV mappings, data and the
//! transformations that prepare them for reasoning.

mod mapping;
mod marking;
mod normalize;
mod satisfiability;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::semiring::{Monomial, ProvVariable, SemiringMode};

pub use mapping::apply_mappings;
pub use marking::{alias_name, mark_instance, DaggerMap};
pub use normalize::{inverse_name, normalize_inverses};
pub use satisfiability::{check_satisfiability, clash_queries};

/// Concept, role, predicate and individual names.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    pub name: Name,
    pub inverse: bool,
}

impl Role {
    pub fn named(name: impl Into<Name>) -> Self {
        Role {
            name: name.into(),
            inverse: false,
        }
    }

    pub fn inv(name: impl Into<Name>) -> Self {
        Role {
            name: name.into(),
            inverse: true,
        }
    }

    pub fn inverse(&self) -> Role {
        Role {
            name: self.name.clone(),
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "inv({})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// `A` or `∃S`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicConcept {
    Atomic(Name),
    Exists(Role),
}

impl BasicConcept {
    pub fn role(&self) -> Option<&Role> {
        match self {
            BasicConcept::Exists(r) => Some(r),
            BasicConcept::Atomic(_) => None,
        }
    }
}

impl fmt::Display for BasicConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicConcept::Atomic(a) => f.write_str(a),
            BasicConcept::Exists(r) => write!(f, "exists {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptExpr {
    Basic(BasicConcept),
    Not(BasicConcept),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleExpr {
    Basic(Role),
    Not(Role),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Concept { lhs: BasicConcept, rhs: ConceptExpr },
    Role { lhs: Role, rhs: RoleExpr },
}

impl Axiom {
    pub fn is_positive(&self) -> bool {
        matches!(
            self,
            Axiom::Concept {
                rhs: ConceptExpr::Basic(_),
                ..
            } | Axiom::Role {
                rhs: RoleExpr::Basic(_),
                ..
            }
        )
    }

    /// Every role mentioned, with its polarity as written.
    pub fn roles(&self) -> Vec<&Role> {
        match self {
            Axiom::Concept { lhs, rhs } => {
                let rhs = match rhs {
                    ConceptExpr::Basic(b) | ConceptExpr::Not(b) => b,
                };
                lhs.role().into_iter().chain(rhs.role()).collect()
            }
            Axiom::Role { lhs, rhs } => {
                let rhs = match rhs {
                    RoleExpr::Basic(r) | RoleExpr::Not(r) => r,
                };
                vec![lhs, rhs]
            }
        }
    }

    pub(crate) fn map_roles(&self, mut f: impl FnMut(&Role) -> Role) -> Axiom {
        let mut basic = |b: &BasicConcept| match b {
            BasicConcept::Atomic(a) => BasicConcept::Atomic(a.clone()),
            BasicConcept::Exists(r) => BasicConcept::Exists(f(r)),
        };
        match self {
            Axiom::Concept { lhs, rhs } => {
                let lhs = basic(lhs);
                let rhs = match rhs {
                    ConceptExpr::Basic(b) => ConceptExpr::Basic(basic(b)),
                    ConceptExpr::Not(b) => ConceptExpr::Not(basic(b)),
                };
                Axiom::Concept { lhs, rhs }
            }
            Axiom::Role { lhs, rhs } => {
                let lhs = f(lhs);
                let rhs = match rhs {
                    RoleExpr::Basic(r) => RoleExpr::Basic(f(r)),
                    RoleExpr::Not(r) => RoleExpr::Not(f(r)),
                };
                Axiom::Role { lhs, rhs }
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Concept { lhs, rhs } => match rhs {
                ConceptExpr::Basic(b) => write!(f, "{lhs} sub {b}"),
                ConceptExpr::Not(b) => write!(f, "{lhs} sub not {b}"),
            },
            Axiom::Role { lhs, rhs } => match rhs {
                RoleExpr::Basic(r) => write!(f, "{lhs} subrole {r}"),
                RoleExpr::Not(r) => write!(f, "{lhs} subrole not {r}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedAxiom {
    pub axiom: Axiom,
    pub annotation: Monomial,
}

impl AnnotatedAxiom {
    pub fn new(axiom: Axiom, annotation: Monomial) -> Self {
        AnnotatedAxiom { axiom, annotation }
    }

    pub fn positive(&self) -> Option<PositiveInclusion> {
        let inclusion = match &self.axiom {
            Axiom::Concept {
                lhs,
                rhs: ConceptExpr::Basic(rhs),
            } => Inclusion::Concept(lhs.clone(), rhs.clone()),
            Axiom::Role {
                lhs,
                rhs: RoleExpr::Basic(rhs),
            } => Inclusion::Role(lhs.clone(), rhs.clone()),
            _ => return None,
        };
        Some(PositiveInclusion {
            inclusion,
            annotation: self.annotation.clone(),
        })
    }
}

impl fmt::Display for AnnotatedAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.annotation.is_one() {
            write!(f, "{}", self.axiom)
        } else {
            write!(f, "{} @ {}", self.axiom, self.annotation)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Inclusion {
    Concept(BasicConcept, BasicConcept),
    Role(Role, Role),
}

/// An annotated inclusion without negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositiveInclusion {
    pub inclusion: Inclusion,
    pub annotation: Monomial,
}

impl PositiveInclusion {
    pub fn concept(lhs: BasicConcept, rhs: BasicConcept, annotation: Monomial) -> Self {
        PositiveInclusion {
            inclusion: Inclusion::Concept(lhs, rhs),
            annotation,
        }
    }

    pub fn role(lhs: Role, rhs: Role, annotation: Monomial) -> Self {
        PositiveInclusion {
            inclusion: Inclusion::Role(lhs, rhs),
            annotation,
        }
    }
}

impl fmt::Display for PositiveInclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inclusion {
            Inclusion::Concept(l, r) => write!(f, "{l} sub {r} @ {}", self.annotation),
            Inclusion::Role(l, r) => write!(f, "{l} subrole {r} @ {}", self.annotation),
        }
    }
}

pub fn positive_inclusions(ontology: &[AnnotatedAxiom]) -> Vec<PositiveInclusion> {
    ontology.iter().filter_map(AnnotatedAxiom::positive).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    pub predicates: BTreeMap<Name, usize>,
}

impl Schema {
    pub fn declare(&mut self, predicate: &Name, arity: usize) -> Result<()> {
        match self.predicates.get(predicate) {
            Some(&expected) if expected != arity => Err(Error::ArityMismatch {
                predicate: predicate.to_string(),
                expected,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.predicates.insert(predicate.clone(), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.predicates.get(predicate).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataTuple {
    pub values: Vec<Name>,
    pub annotation: ProvVariable,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedDataInstance {
    pub relations: BTreeMap<Name, Vec<DataTuple>>,
}

impl AnnotatedDataInstance {
    /// Adds a tuple unless the identical annotated tuple is already present.
    pub fn insert(&mut self, predicate: Name, values: Vec<Name>, annotation: ProvVariable) {
        let rel = self.relations.entry(predicate).or_default();
        let t = DataTuple { values, annotation };
        if !rel.contains(&t) {
            rel.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for AnnotatedDataInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, tuples) in &self.relations {
            for t in tuples {
                write!(f, "{p}")?;
                for v in &t.values {
                    write!(f, ", {v}")?;
                }
                writeln!(f, ", @{}", t.annotation)?;
            }
        }
        Ok(())
    }
}

/// `P(args, @prov)` in a rule body. Arguments are rule variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BodyAtom {
    pub predicate: Name,
    pub args: Vec<Name>,
    pub prov: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleHead {
    Concept {
        concept: Name,
        arg: Name,
    },
    /// With `pair_alias`, the produced assertion uses the role alias indexed
    /// by the produced pair of individuals.
    Role {
        role: Name,
        subject: Name,
        object: Name,
        pair_alias: bool,
    },
}

impl RuleHead {
    pub fn vars(&self) -> Vec<&Name> {
        match self {
            RuleHead::Concept { arg, .. } => vec![arg],
            RuleHead::Role {
                subject, object, ..
            } => vec![subject, object],
        }
    }

    pub fn symbol(&self) -> &Name {
        match self {
            RuleHead::Concept { concept, .. } => concept,
            RuleHead::Role { role, .. } => role,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedRule {
    pub head: RuleHead,
    pub body: Vec<BodyAtom>,
    pub annotation: Monomial,
}

impl AnnotatedRule {
    pub fn validate(&self) -> Result<()> {
        if self.body.is_empty() {
            return Err(Error::Invalid("rule with empty body".into()));
        }
        let mut provs: Vec<&Name> = self.body.iter().map(|b| &b.prov).collect();
        provs.sort();
        if provs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid(
                "provenance positions of a rule body must be distinct".into(),
            ));
        }
        for b in &self.body {
            if b.args.iter().any(|a| provs.contains(&a)) {
                return Err(Error::Invalid(format!(
                    "provenance variable reused as a term in `{}`",
                    b.predicate
                )));
            }
        }
        for v in self.head.vars() {
            if !self.body.iter().any(|b| b.args.contains(v)) {
                return Err(Error::Invalid(format!(
                    "head variable `{v}` does not occur in the rule body"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for AnnotatedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            RuleHead::Concept { concept, arg } => write!(f, "{concept}({arg})")?,
            RuleHead::Role {
                role,
                subject,
                object,
                ..
            } => write!(f, "{role}({subject},{object})")?,
        }
        f.write_str(" <- ")?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}(", b.predicate)?;
            for a in &b.args {
                write!(f, "{a},")?;
            }
            write!(f, "@{})", b.prov)?;
        }
        if !self.annotation.is_one() {
            write!(f, " @ {}", self.annotation)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Concept {
        concept: Name,
        individual: Name,
    },
    Role {
        role: Name,
        subject: Name,
        object: Name,
    },
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept {
                concept,
                individual,
            } => write!(f, "{concept}({individual})"),
            Assertion::Role {
                role,
                subject,
                object,
            } => write!(f, "{role}({subject},{object})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedAssertion {
    pub assertion: Assertion,
    pub annotation: Monomial,
}

impl fmt::Display for AnnotatedAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.assertion, self.annotation)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedOBDAInstance {
    pub ontology: Vec<AnnotatedAxiom>,
    pub mapping: Vec<AnnotatedRule>,
    pub schema: Schema,
    pub data: AnnotatedDataInstance,
    pub mode: SemiringMode,
}

impl AnnotatedOBDAInstance {
    /// Builds an instance, inferring the schema from the mapping bodies and
    /// the data. Annotations are normalized under `mode`.
    pub fn new(
        mut ontology: Vec<AnnotatedAxiom>,
        mut mapping: Vec<AnnotatedRule>,
        data: AnnotatedDataInstance,
        mode: SemiringMode,
    ) -> Result<Self> {
        for ax in &mut ontology {
            ax.annotation = ax.annotation.normalize(mode);
        }
        for r in &mut mapping {
            r.annotation = r.annotation.normalize(mode);
        }
        let mut schema = Schema::default();
        for (p, tuples) in &data.relations {
            for t in tuples {
                schema.declare(p, t.values.len())?;
            }
        }
        for r in &mapping {
            r.validate()?;
            for b in &r.body {
                schema.declare(&b.predicate, b.args.len())?;
            }
        }
        let inst = AnnotatedOBDAInstance {
            ontology,
            mapping,
            schema,
            data,
            mode,
        };
        inst.check_signature()?;
        Ok(inst)
    }

    fn check_signature(&self) -> Result<()> {
        for p in self.schema.predicates.keys() {
            let clash = self.ontology.iter().any(|ax| {
                ax.axiom.roles().iter().any(|r| r.name == *p) || axiom_concepts(&ax.axiom).contains(&p)
            }) || self.mapping.iter().any(|r| r.head.symbol() == p);
            if clash {
                return Err(Error::Invalid(format!(
                    "source predicate `{p}` is also used as an ontology symbol"
                )));
            }
        }
        Ok(())
    }

    pub fn positive_inclusions(&self) -> Vec<PositiveInclusion> {
        positive_inclusions(&self.ontology)
    }

    pub fn virtual_assertions(&self) -> Result<Vec<AnnotatedAssertion>> {
        apply_mappings(&self.mapping, &self.schema, &self.data, self.mode)
    }

    pub fn with_mode(mut self, mode: SemiringMode) -> Self {
        for ax in &mut self.ontology {
            ax.annotation = ax.annotation.normalize(mode);
        }
        for r in &mut self.mapping {
            r.annotation = r.annotation.normalize(mode);
        }
        self.mode = mode;
        self
    }

    pub fn has_inverse(&self) -> bool {
        self.ontology
            .iter()
            .any(|ax| ax.axiom.roles().iter().any(|r| r.inverse))
    }
}

fn axiom_concepts(axiom: &Axiom) -> Vec<&Name> {
    let mut out = Vec::new();
    if let Axiom::Concept { lhs, rhs } = axiom {
        if let BasicConcept::Atomic(a) = lhs {
            out.push(a);
        }
        if let ConceptExpr::Basic(BasicConcept::Atomic(a)) | ConceptExpr::Not(BasicConcept::Atomic(a)) = rhs {
            out.push(a);
        }
    }
    out
}
