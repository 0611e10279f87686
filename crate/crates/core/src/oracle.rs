//! Brute-force verification: the annotated canonical-model chase, and
//! entailment and provenance read off the chased model.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::kb::{
    check_satisfiability, mark_instance, name, normalize_inverses, AnnotatedOBDAInstance,
    BasicConcept, DaggerMap, Inclusion, Name, PositiveInclusion, Role,
};
use crate::query::{
    for_each_match, interp_of_assertions, provenance_on, Atom, FiniteAnnotatedInterpretation, Pred,
    ProvBCQ, ProvTerm,
};
use crate::semiring::{Monomial, Polynomial, SemiringMode};

/// Order in which pending rule applications are processed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fairness {
    /// First in, first out, inclusions in ontology order.
    #[default]
    Fifo,
    /// First in, first out over reversed initial tuples and inclusions.
    FifoReversed,
}

#[derive(Clone, Debug, Default)]
pub struct ChaseConfig {
    pub mode: SemiringMode,
    /// Tuples at this level are not expanded.
    pub depth_bound: Option<usize>,
    /// Tuples whose annotation, after the dagger map when one is given, is
    /// longer than this are not produced.
    pub max_annotation_len: Option<usize>,
    /// An anonymous element gets no successors once the creation key of some
    /// element on its path from a named individual occurs more than this
    /// many times. Defaults to 2 under idempotent modes.
    pub block_after: Option<usize>,
    pub fairness: Fairness,
    pub dagger: Option<DaggerMap>,
}

impl ChaseConfig {
    pub fn new(mode: SemiringMode) -> Self {
        ChaseConfig {
            mode,
            ..ChaseConfig::default()
        }
    }
}

/// A tuple of the chased model: predicate index into
/// [`ChaseModel::predicates`] and position in its extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleRef {
    pub pred: u32,
    pub index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChaseStep {
    /// Index into [`ChaseModel::inclusions`].
    pub inclusion: usize,
    pub source: TupleRef,
    pub produced: TupleRef,
}

#[derive(Clone, Debug)]
pub struct ChaseModel {
    pub interp: FiniteAnnotatedInterpretation,
    pub inclusions: Vec<PositiveInclusion>,
    /// `(is_role, name)` per predicate.
    pub predicates: Vec<(bool, Name)>,
    /// One entry per produced tuple.
    pub log: Vec<ChaseStep>,
    /// Derivation depth per tuple, indexed like the extensions.
    pub levels: Vec<Vec<u32>>,
    /// A depth bound prevented some new tuple.
    pub truncated: bool,
    /// Rule applications skipped by the annotation length bound.
    pub pruned: usize,
    /// Anonymous elements left without successors by blocking.
    pub blocked: usize,
}

impl ChaseModel {
    pub fn level(&self, t: TupleRef) -> u32 {
        self.levels[t.pred as usize][t.index as usize]
    }

    /// Renders a tuple as `P(a,b) @ m`.
    pub fn render(&self, t: TupleRef) -> String {
        let (is_role, p) = &self.predicates[t.pred as usize];
        if *is_role {
            let (a, b, m) = self.interp.role_tuple(p, t.index as usize);
            format!("{p}({a},{b}) @ {m}")
        } else {
            let (a, m) = self.interp.concept_tuple(p, t.index as usize);
            format!("{p}({a}) @ {m}")
        }
    }

    pub fn dump(&self) -> Vec<String> {
        self.interp.dump()
    }
}

struct Element {
    parent: Option<Name>,
    key: Option<(Role, Monomial)>,
}

struct Chaser<'a> {
    cfg: &'a ChaseConfig,
    inclusions: Vec<PositiveInclusion>,
    by_concept: HashMap<Name, Vec<usize>>,
    by_role: HashMap<Name, Vec<usize>>,
    interp: FiniteAnnotatedInterpretation,
    pred_ids: HashMap<(bool, Name), u32>,
    predicates: Vec<(bool, Name)>,
    levels: Vec<Vec<u32>>,
    log: Vec<ChaseStep>,
    queue: VecDeque<TupleRef>,
    edges: HashSet<(Name, bool, Name, Monomial)>,
    elements: HashMap<Name, Element>,
    next_fresh: usize,
    truncated: bool,
    pruned: usize,
    blocked: usize,
    block_after: Option<usize>,
}

enum Fact {
    Concept(Name, Name),
    Role(Name, Name, Name),
}

impl Chaser<'_> {
    fn pred_id(&mut self, is_role: bool, p: &Name) -> u32 {
        if let Some(id) = self.pred_ids.get(&(is_role, p.clone())) {
            return *id;
        }
        let id = self.predicates.len() as u32;
        self.predicates.push((is_role, p.clone()));
        self.pred_ids.insert((is_role, p.clone()), id);
        self.levels.push(Vec::new());
        id
    }

    fn insert(&mut self, fact: Fact, m: Monomial, level: u32) -> Option<TupleRef> {
        let (is_role, p, idx) = match fact {
            Fact::Concept(c, a) => {
                let idx = self.interp.insert_concept(c.clone(), a, m)?;
                (false, c, idx)
            }
            Fact::Role(r, a, b) => {
                self.edges.insert((r.clone(), false, a.clone(), m.clone()));
                self.edges.insert((r.clone(), true, b.clone(), m.clone()));
                let idx = self.interp.insert_role(r.clone(), a, b, m)?;
                (true, r, idx)
            }
        };
        let pred = self.pred_id(is_role, &p);
        self.levels[pred as usize].push(level);
        let t = TupleRef {
            pred,
            index: idx as u32,
        };
        self.queue.push_back(t);
        Some(t)
    }

    fn within_length(&mut self, m: &Monomial) -> bool {
        let Some(max) = self.cfg.max_annotation_len else {
            return true;
        };
        let len = match &self.cfg.dagger {
            Some(d) => d.monomial(m, self.cfg.mode).len(),
            None => m.len(),
        };
        if len > max {
            self.pruned += 1;
            false
        } else {
            true
        }
    }

    fn is_blocked(&self, e: &Name) -> bool {
        let Some(limit) = self.block_after else {
            return false;
        };
        let mut counts: HashMap<(&Role, &Monomial), usize> = HashMap::new();
        let mut cur = self.elements.get(e);
        while let Some(el) = cur {
            if let Some((r, m)) = &el.key {
                let c = counts.entry((r, m)).or_default();
                *c += 1;
                if *c > limit {
                    return true;
                }
            }
            cur = el.parent.as_ref().and_then(|p| self.elements.get(p));
        }
        false
    }

    fn fresh(&mut self) -> Name {
        loop {
            let n = name(&format!("_e{}", self.next_fresh));
            self.next_fresh += 1;
            if !self.interp.domain().contains(&n) {
                return n;
            }
        }
    }

    /// The fact `C(e)` with annotation `m`, creating a witness for an
    /// existential when none with that annotation exists.
    fn concept_fact(&mut self, c: &BasicConcept, e: &Name, m: &Monomial) -> Option<Fact> {
        match c {
            BasicConcept::Atomic(a) => {
                if self.interp.contains_concept(a, e, m) {
                    None
                } else {
                    Some(Fact::Concept(a.clone(), e.clone()))
                }
            }
            BasicConcept::Exists(s) => {
                let key = (s.name.clone(), s.inverse, e.clone(), m.clone());
                if self.edges.contains(&key) {
                    return None;
                }
                if self.is_blocked(e) {
                    self.blocked += 1;
                    return None;
                }
                let f = self.fresh();
                self.elements.insert(
                    f.clone(),
                    Element {
                        parent: Some(e.clone()),
                        key: Some((s.clone(), m.clone())),
                    },
                );
                self.interp.add_individual(f.clone());
                Some(if s.inverse {
                    Fact::Role(s.name.clone(), f, e.clone())
                } else {
                    Fact::Role(s.name.clone(), e.clone(), f)
                })
            }
        }
    }

    fn role_fact(&self, s: &Role, u: &Name, v: &Name, m: &Monomial) -> Option<Fact> {
        let (a, b) = if s.inverse { (v, u) } else { (u, v) };
        if self.interp.contains_role(&s.name, a, b, m) {
            None
        } else {
            Some(Fact::Role(s.name.clone(), a.clone(), b.clone()))
        }
    }

    fn expand(&mut self, t: TupleRef) {
        let level = self.levels[t.pred as usize][t.index as usize];
        let at_bound = self.cfg.depth_bound.is_some_and(|d| level as usize >= d);
        let (is_role, p) = self.predicates[t.pred as usize].clone();
        let rules: Vec<usize> = if is_role {
            self.by_role.get(&p).cloned().unwrap_or_default()
        } else {
            self.by_concept.get(&p).cloned().unwrap_or_default()
        };
        let (x, y, m) = if is_role {
            let (a, b, m) = self.interp.role_tuple(&p, t.index as usize).clone();
            (a, Some(b), m)
        } else {
            let (a, m) = self.interp.concept_tuple(&p, t.index as usize).clone();
            (a, None, m)
        };
        for i in rules {
            let inc = self.inclusions[i].clone();
            let produced = m.mul(&inc.annotation, self.cfg.mode);
            if !self.within_length(&produced) {
                continue;
            }
            if at_bound {
                let would = match (&inc.inclusion, &y) {
                    (Inclusion::Concept(_, BasicConcept::Atomic(a)), _) => {
                        let e = self.subject(&inc.inclusion, &x, y.as_ref());
                        !self.interp.contains_concept(a, &e, &produced)
                    }
                    (Inclusion::Concept(_, BasicConcept::Exists(s)), _) => {
                        let e = self.subject(&inc.inclusion, &x, y.as_ref());
                        !self.edges.contains(&(s.name.clone(), s.inverse, e, produced.clone()))
                    }
                    (Inclusion::Role(l, r), Some(y)) => {
                        let (u, v) = if l.inverse { (y, &x) } else { (&x, y) };
                        self.role_fact(r, u, v, &produced).is_some()
                    }
                    _ => false,
                };
                if would {
                    self.truncated = true;
                }
                continue;
            }
            let fact = match &inc.inclusion {
                Inclusion::Concept(_, rhs) => {
                    let e = self.subject(&inc.inclusion, &x, y.as_ref());
                    self.concept_fact(rhs, &e, &produced)
                }
                Inclusion::Role(l, r) => {
                    let y = y.as_ref().expect("role inclusions fire on role tuples");
                    let (u, v) = if l.inverse { (y, &x) } else { (&x, y) };
                    self.role_fact(r, u, v, &produced)
                }
            };
            if let Some(fact) = fact {
                if let Some(out) = self.insert(fact, produced, level + 1) {
                    self.log.push(ChaseStep {
                        inclusion: i,
                        source: t,
                        produced: out,
                    });
                }
            }
        }
    }

    /// The element a concept inclusion's left-hand side holds for.
    fn subject(&self, inc: &Inclusion, x: &Name, y: Option<&Name>) -> Name {
        match inc {
            Inclusion::Concept(BasicConcept::Exists(s), _) if s.inverse => {
                y.expect("existential on a role tuple").clone()
            }
            _ => x.clone(),
        }
    }
}

/// Chases the instance's virtual assertions with its positive inclusions.
///
/// Under the free semiring a depth or annotation length bound is required,
/// since the canonical model may be infinite.
pub fn chase(inst: &AnnotatedOBDAInstance, cfg: &ChaseConfig) -> Result<ChaseModel> {
    if !cfg.mode.mult_idempotent() && cfg.depth_bound.is_none() && cfg.max_annotation_len.is_none()
    {
        return Err(Error::Mode(
            "a chase under the free semiring needs a depth or annotation length bound".into(),
        ));
    }
    let mut inclusions = inst.positive_inclusions();
    let mut initial = inst.virtual_assertions()?;
    if cfg.fairness == Fairness::FifoReversed {
        inclusions.reverse();
        initial.reverse();
    }
    let mut by_concept: HashMap<Name, Vec<usize>> = HashMap::new();
    let mut by_role: HashMap<Name, Vec<usize>> = HashMap::new();
    for (i, inc) in inclusions.iter().enumerate() {
        match &inc.inclusion {
            Inclusion::Concept(BasicConcept::Atomic(a), _) => {
                by_concept.entry(a.clone()).or_default().push(i)
            }
            Inclusion::Concept(BasicConcept::Exists(r), _) | Inclusion::Role(r, _) => {
                by_role.entry(r.name.clone()).or_default().push(i)
            }
        }
    }
    let block_after = cfg
        .block_after
        .or(cfg.mode.mult_idempotent().then_some(2));
    let mut c = Chaser {
        cfg,
        inclusions,
        by_concept,
        by_role,
        interp: FiniteAnnotatedInterpretation::new(),
        pred_ids: HashMap::new(),
        predicates: Vec::new(),
        levels: Vec::new(),
        log: Vec::new(),
        queue: VecDeque::new(),
        edges: HashSet::new(),
        elements: HashMap::new(),
        next_fresh: 1,
        truncated: false,
        pruned: 0,
        blocked: 0,
        block_after,
    };
    for a in initial {
        let m = a.annotation.normalize(cfg.mode);
        let fact = match a.assertion {
            crate::kb::Assertion::Concept {
                concept,
                individual,
            } => Fact::Concept(concept, individual),
            crate::kb::Assertion::Role {
                role,
                subject,
                object,
            } => Fact::Role(role, subject, object),
        };
        c.insert(fact, m, 0);
    }
    while let Some(t) = c.queue.pop_front() {
        c.expand(t);
    }
    Ok(ChaseModel {
        interp: c.interp,
        inclusions: c.inclusions,
        predicates: c.predicates,
        log: c.log,
        levels: c.levels,
        truncated: c.truncated,
        pruned: c.pruned,
        blocked: c.blocked,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Entailed,
    NotEntailed,
    /// The depth bound cut the model before a witness was found.
    Indeterminate,
}

/// Entailment decided on the chased marked instance: a zero target asks for
/// one match, otherwise each monomial `t` of `p` needs as many distinct
/// matches whose annotations map to `t` as it has occurrences.
pub fn oracle_entails(
    inst: &AnnotatedOBDAInstance,
    q: &ProvBCQ,
    p: &Polynomial,
) -> Result<Decision> {
    if !check_satisfiability(inst)? {
        return Ok(Decision::Entailed);
    }
    let mode = inst.mode;
    let p = p.normalize(mode);
    let normalized = AnnotatedOBDAInstance {
        ontology: normalize_inverses(&inst.ontology),
        ..inst.clone()
    };
    let (marked, dagger) = mark_instance(&normalized)?;
    let constants: Vec<&Monomial> = q
        .atoms
        .iter()
        .filter_map(|a| match &a.ann {
            ProvTerm::Mono(m) => Some(m),
            ProvTerm::Var(_) => None,
        })
        .collect();
    let mut cfg = ChaseConfig::new(mode);
    cfg.block_after = Some(q.atoms.len() + 1);
    if !mode.mult_idempotent() {
        let occurrences: usize = p.terms().iter().map(Monomial::len).sum();
        cfg.depth_bound = Some(occurrences + inst.ontology.len() + q.atoms.len());
        let all_constant = constants.len() == q.atoms.len();
        if !p.is_zero() || all_constant {
            let longest = p
                .terms()
                .iter()
                .chain(constants.iter().copied())
                .map(Monomial::len)
                .max()
                .unwrap_or(0);
            cfg.max_annotation_len = Some(longest);
        }
    }
    cfg.dagger = Some(dagger.clone());
    let model = chase(&marked, &cfg)?;

    let atoms: Vec<Atom<ProvTerm>> = q
        .atoms
        .iter()
        .map(|a| Atom {
            pred: match &a.pred {
                Pred::Role(r) => Pred::RoleFamily(r.clone()),
                p => p.clone(),
            },
            args: a.args.clone(),
            ann: a.ann.clone(),
        })
        .collect();
    let prov = q.prov_vars();
    let filter = |i: usize, m: &Monomial| match &atoms[i].ann {
        ProvTerm::Mono(c) => dagger.monomial(m, mode) == c.normalize(mode),
        ProvTerm::Var(_) => true,
    };
    let targets: BTreeMap<Monomial, usize> = p.counted_terms().into_iter().collect();
    let mut found: BTreeMap<Monomial, BTreeSet<Vec<Monomial>>> = BTreeMap::new();
    let mut any = false;
    let _ = for_each_match(&atoms, &model.interp, Some(&dagger), &filter, &mut |_, _, anns| {
        let images: Vec<Monomial> = anns.iter().map(|m| dagger.monomial(m, mode)).collect();
        let cobound = prov
            .values()
            .all(|js| js.iter().all(|&j| images[j] == images[js[0]]));
        if !cobound {
            return ControlFlow::Continue(());
        }
        any = true;
        if targets.is_empty() {
            return ControlFlow::Break(());
        }
        let product = images
            .iter()
            .fold(Monomial::one(), |acc, m| acc.mul(m, mode));
        if targets.contains_key(&product) {
            found.entry(product).or_default().insert(anns.to_vec());
        }
        ControlFlow::Continue(())
    });
    let satisfied = if targets.is_empty() {
        any
    } else {
        targets
            .iter()
            .all(|(t, k)| found.get(t).map_or(0, BTreeSet::len) >= *k)
    };
    Ok(if satisfied {
        Decision::Entailed
    } else if model.truncated {
        Decision::Indeterminate
    } else {
        Decision::NotEntailed
    })
}

/// The provenance of a standard query on the chased (unmarked) instance
/// under the fully idempotent semiring.
pub fn oracle_prov(q0: &ProvBCQ, inst: &AnnotatedOBDAInstance) -> Result<Polynomial> {
    if inst.mode != SemiringMode::FullyIdempotent {
        return Err(Error::Mode(format!(
            "oracle provenance needs the fully idempotent semiring, not `{}`",
            inst.mode
        )));
    }
    if !q0.is_standard() {
        return Err(Error::NotStandard(q0.to_source()));
    }
    let normalized = AnnotatedOBDAInstance {
        ontology: normalize_inverses(&inst.ontology),
        ..inst.clone()
    };
    let mut cfg = ChaseConfig::new(SemiringMode::FullyIdempotent);
    cfg.block_after = Some(q0.atoms.len() + 1);
    let model = chase(&normalized, &cfg)?;
    Ok(provenance_on(q0, &model.interp, SemiringMode::FullyIdempotent))
}

/// The virtual assertions as a model, without any chase step.
pub fn initial_model(inst: &AnnotatedOBDAInstance) -> Result<FiniteAnnotatedInterpretation> {
    Ok(interp_of_assertions(&inst.virtual_assertions()?))
}
