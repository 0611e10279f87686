use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{
    name, AnnotatedAxiom, AnnotatedDataInstance, AnnotatedOBDAInstance, AnnotatedRule, Assertion,
    Axiom, BasicConcept, ConceptExpr, Name, Role, RoleExpr, RuleHead,
};
use crate::error::Result;
use crate::semiring::{Monomial, Polynomial, ProvVariable, SemiringMode};

/// Name of the fresh role holding the single pair `(a, b)` of `role`.
pub fn alias_name(role: &str, a: &str, b: &str) -> Name {
    name(&format!("{role}__{a}__{b}"))
}

/// Maps the fresh symbols of a marked instance back to the originals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DaggerMap {
    /// Fresh variable to the annotation it replaces.
    pub forward: BTreeMap<ProvVariable, Monomial>,
    /// Role alias to its original role.
    pub role_aliases: BTreeMap<Name, Name>,
    /// Role alias to the only pair it may hold.
    pub alias_pairs: BTreeMap<Name, (Name, Name)>,
}

impl DaggerMap {
    pub fn var(&self, v: &ProvVariable) -> Monomial {
        self.forward
            .get(v)
            .cloned()
            .unwrap_or_else(|| Monomial::var(*v))
    }

    pub fn monomial(&self, m: &Monomial, mode: SemiringMode) -> Monomial {
        m.substitute(|v| self.forward.get(v).cloned(), mode)
    }

    pub fn polynomial(&self, p: &Polynomial, mode: SemiringMode) -> Polynomial {
        p.map_monomials(|m| self.monomial(m, mode), mode)
    }

    pub fn is_alias(&self, role: &str) -> bool {
        self.role_aliases.contains_key(role)
    }

    pub fn role<'a>(&'a self, role: &'a Name) -> &'a Name {
        self.role_aliases.get(role).unwrap_or(role)
    }

    /// Whether `candidate` is `role` itself or one of its aliases.
    pub fn in_family(&self, candidate: &Name, role: &Name) -> bool {
        candidate == role || self.role_aliases.get(candidate) == Some(role)
    }

    /// Undoes a marking: drops the alias axioms and maps every annotation
    /// and role back to the original.
    pub fn restore(&self, marked: &AnnotatedOBDAInstance) -> AnnotatedOBDAInstance {
        let ontology = marked
            .ontology
            .iter()
            .filter(|ax| ax.axiom.roles().iter().all(|r| !self.is_alias(&r.name)))
            .map(|ax| AnnotatedAxiom::new(ax.axiom.clone(), self.monomial(&ax.annotation, marked.mode)))
            .collect();
        let mapping = marked
            .mapping
            .iter()
            .map(|r| {
                let head = match &r.head {
                    RuleHead::Role {
                        role,
                        subject,
                        object,
                        ..
                    } => RuleHead::Role {
                        role: self.role(role).clone(),
                        subject: subject.clone(),
                        object: object.clone(),
                        pair_alias: false,
                    },
                    h => h.clone(),
                };
                AnnotatedRule {
                    head,
                    body: r.body.clone(),
                    annotation: self.monomial(&r.annotation, marked.mode),
                }
            })
            .collect();
        let mut data = AnnotatedDataInstance::default();
        for (p, tuples) in &marked.data.relations {
            for t in tuples {
                let image = self.var(&t.annotation);
                let v = match image.factors() {
                    [v] => *v,
                    _ => t.annotation,
                };
                data.insert(p.clone(), t.values.clone(), v);
            }
        }
        AnnotatedOBDAInstance {
            ontology,
            mapping,
            schema: marked.schema.clone(),
            data,
            mode: marked.mode,
        }
    }
}

struct Marker {
    dagger: DaggerMap,
    used: HashSet<String>,
    next: usize,
}

impl Marker {
    fn fresh(&mut self, original: Monomial) -> Monomial {
        loop {
            let candidate = format!("_f{}", self.next);
            self.next += 1;
            if !self.used.contains(&candidate) {
                let v = ProvVariable::new(&candidate);
                self.dagger.forward.insert(v, original);
                return Monomial::var(v);
            }
        }
    }

    fn annotation(&mut self, original: &Monomial) -> Monomial {
        if original.is_one() {
            Monomial::one()
        } else {
            self.fresh(original.clone())
        }
    }

    fn alias(&mut self, role: &Name, a: &Name, b: &Name) -> Name {
        let alias = alias_name(role, a, b);
        self.dagger.role_aliases.insert(alias.clone(), role.clone());
        self.dagger
            .alias_pairs
            .insert(alias.clone(), (a.clone(), b.clone()));
        alias
    }

    /// The alias of `role` whose extension holds what `role` sees as `(a, b)`.
    fn alias_at(&mut self, role: &Role, (a, b): &(Name, Name)) -> Role {
        if role.inverse {
            Role::inv(self.alias(&role.name, b, a))
        } else {
            Role::named(self.alias(&role.name, a, b))
        }
    }

    fn concept_variants(&mut self, c: &BasicConcept, pairs: &[(Name, Name)]) -> Vec<BasicConcept> {
        let mut out = vec![c.clone()];
        if let BasicConcept::Exists(r) = c {
            for p in pairs {
                out.push(BasicConcept::Exists(self.alias_at(r, p)));
            }
        }
        out
    }
}

/// Builds the marked instance: role assertions are produced on per-pair role
/// aliases, inclusions are copied for every alias, and every annotation is
/// replaced by a unique fresh variable (identity annotations stay identity
/// on axioms).
pub fn mark_instance(inst: &AnnotatedOBDAInstance) -> Result<(AnnotatedOBDAInstance, DaggerMap)> {
    let assertions = inst.virtual_assertions()?;
    let mut pairs: BTreeSet<(Name, Name)> = BTreeSet::new();
    for a in &assertions {
        if let Assertion::Role {
            subject, object, ..
        } = &a.assertion
        {
            pairs.insert((subject.clone(), object.clone()));
        }
    }
    if inst.has_inverse() {
        let swapped: Vec<_> = pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        pairs.extend(swapped);
    }
    let pairs: Vec<(Name, Name)> = pairs.into_iter().collect();

    let mut used = HashSet::new();
    for ax in &inst.ontology {
        used.extend(ax.annotation.factors().iter().map(|v| v.name().to_string()));
    }
    for r in &inst.mapping {
        used.extend(r.annotation.factors().iter().map(|v| v.name().to_string()));
    }
    for tuples in inst.data.relations.values() {
        used.extend(tuples.iter().map(|t| t.annotation.name().to_string()));
    }
    let mut m = Marker {
        dagger: DaggerMap::default(),
        used,
        next: 1,
    };

    let mut roles: BTreeSet<Name> = BTreeSet::new();
    for ax in &inst.ontology {
        roles.extend(ax.axiom.roles().into_iter().map(|r| r.name.clone()));
    }
    for r in &inst.mapping {
        if let RuleHead::Role { role, .. } = &r.head {
            roles.insert(role.clone());
        }
    }
    for r in &roles {
        for (a, b) in &pairs {
            m.alias(r, a, b);
        }
    }

    let mut ontology = Vec::new();
    for ax in &inst.ontology {
        let ann = m.annotation(&ax.annotation);
        ontology.push(AnnotatedAxiom::new(ax.axiom.clone(), ann));
        let mut copies = Vec::new();
        match &ax.axiom {
            Axiom::Concept {
                lhs: BasicConcept::Exists(s),
                rhs: ConceptExpr::Basic(c),
            } => {
                for p in &pairs {
                    copies.push(Axiom::Concept {
                        lhs: BasicConcept::Exists(m.alias_at(s, p)),
                        rhs: ConceptExpr::Basic(c.clone()),
                    });
                }
            }
            Axiom::Concept {
                rhs: ConceptExpr::Basic(_),
                ..
            } => {}
            Axiom::Role {
                lhs,
                rhs: RoleExpr::Basic(t),
            } => {
                for p in &pairs {
                    copies.push(Axiom::Role {
                        lhs: m.alias_at(lhs, p),
                        rhs: RoleExpr::Basic(m.alias_at(t, p)),
                    });
                }
            }
            Axiom::Concept {
                lhs,
                rhs: ConceptExpr::Not(c),
            } => {
                let lefts = m.concept_variants(lhs, &pairs);
                let rights = m.concept_variants(c, &pairs);
                for (i, l) in lefts.iter().enumerate() {
                    for (j, r) in rights.iter().enumerate() {
                        if i + j > 0 {
                            copies.push(Axiom::Concept {
                                lhs: l.clone(),
                                rhs: ConceptExpr::Not(r.clone()),
                            });
                        }
                    }
                }
            }
            Axiom::Role {
                lhs,
                rhs: RoleExpr::Not(t),
            } => {
                for p in &pairs {
                    copies.push(Axiom::Role {
                        lhs: m.alias_at(lhs, p),
                        rhs: RoleExpr::Not(m.alias_at(t, p)),
                    });
                }
            }
        }
        for axiom in copies {
            let ann = m.annotation(&ax.annotation);
            ontology.push(AnnotatedAxiom::new(axiom, ann));
        }
    }

    let mapping = inst
        .mapping
        .iter()
        .map(|r| {
            let head = match &r.head {
                RuleHead::Role {
                    role,
                    subject,
                    object,
                    ..
                } => RuleHead::Role {
                    role: role.clone(),
                    subject: subject.clone(),
                    object: object.clone(),
                    pair_alias: true,
                },
                h => h.clone(),
            };
            AnnotatedRule {
                head,
                body: r.body.clone(),
                annotation: m.fresh(r.annotation.clone()),
            }
        })
        .collect();

    let mut data = AnnotatedDataInstance::default();
    for (p, tuples) in &inst.data.relations {
        for t in tuples {
            let f = m.fresh(Monomial::var(t.annotation));
            data.insert(p.clone(), t.values.clone(), f.factors()[0]);
        }
    }

    let marked = AnnotatedOBDAInstance {
        ontology,
        mapping,
        schema: inst.schema.clone(),
        data,
        mode: inst.mode,
    };
    Ok((marked, m.dagger))
}
