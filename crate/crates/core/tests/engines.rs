mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{cases, random_sample, seed_base, Sample};
use prov_obda::entail::{entails_with, perfect_ref, translate_tr, EntailOptions, Strategy};
use prov_obda::kb::{
    apply_mappings, name, normalize_inverses, AnnotatedDataInstance, AnnotatedOBDAInstance,
    AnnotatedRule, BodyAtom, RuleHead,
};
use prov_obda::parse::{parse_data, parse_mapping, parse_ontology};
use prov_obda::provcalc::{compute_prov, perfect_ref_star, star_substitute};
use prov_obda::query::{ProvBCQ, ProvTerm};
use prov_obda::rewrite::{canonical, Limits};
use prov_obda::semiring::{Monomial, Polynomial, ProvVariable, SemiringMode};
use prov_obda::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entailed(
    inst: &AnnotatedOBDAInstance,
    q: &ProvBCQ,
    p: &Polynomial,
    strategy: Strategy,
) -> Option<bool> {
    entailed_within(inst, q, p, strategy, Limits::default())
}

fn entailed_within(
    inst: &AnnotatedOBDAInstance,
    q: &ProvBCQ,
    p: &Polynomial,
    strategy: Strategy,
    limits: Limits,
) -> Option<bool> {
    let opts = EntailOptions { limits, strategy };
    match entails_with(inst, q, p, &opts) {
        Ok(r) => Some(r.entailed),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn lazy_and_eager_strategies_agree_under_the_free_semiring() {
    let mut compared = 0;
    for seed in seed_base()..seed_base() + cases(300) {
        let s = random_sample(seed);
        let inst = s.instance(SemiringMode::Free);
        let spec = s.query(SemiringMode::Free);
        if spec.target.is_zero() {
            continue;
        }
        let lazy = entailed(&inst, &spec.query, &spec.target, Strategy::Lazy);
        let eager = entailed(&inst, &spec.query, &spec.target, Strategy::Eager);
        if let (Some(a), Some(b)) = (lazy, eager) {
            assert_eq!(a, b, "{s}");
            compared += 1;
        }
    }
    assert!(compared > 0);
}

fn fidem(s: &Sample) -> Option<(AnnotatedOBDAInstance, ProvBCQ)> {
    let spec = s.query(SemiringMode::FullyIdempotent);
    spec.query
        .is_standard()
        .then(|| (s.instance(SemiringMode::FullyIdempotent), spec.query))
}

#[test]
fn every_computed_monomial_is_entailed() {
    let limits = Limits {
        max_pr: 2_000,
        ..Limits::default()
    };
    let (mut checked, mut skipped) = (0, 0);
    for seed in seed_base()..seed_base() + cases(300) {
        let s = random_sample(seed);
        let Some((inst, q)) = fidem(&s) else { continue };
        let p = compute_prov(&q, &inst).unwrap();
        for m in p.terms() {
            let target = Polynomial::from(m.clone());
            match entailed_within(&inst, &q, &target, Strategy::Lazy, limits) {
                Some(e) => {
                    assert!(e, "{m} is not entailed\n{s}");
                    checked += 1;
                }
                None => skipped += 1,
            }
        }
    }
    assert!(checked > 0);
    assert!(skipped * 10 < checked, "{skipped} skipped, {checked} checked");
}

#[test]
fn provenance_ignores_axiom_and_tuple_order() {
    for seed in seed_base()..seed_base() + cases(300) {
        let s = random_sample(seed);
        let Some((inst, q)) = fidem(&s) else { continue };
        let reverse_lines = |text: &str| {
            let mut lines: Vec<&str> = text.lines().collect();
            lines.reverse();
            lines.join("\n") + "\n"
        };
        let shuffled = AnnotatedOBDAInstance::new(
            parse_ontology(&reverse_lines(&s.ontology)).unwrap(),
            parse_mapping(&reverse_lines(&s.mapping)).unwrap(),
            parse_data(&reverse_lines(&s.data)).unwrap(),
            SemiringMode::FullyIdempotent,
        )
        .unwrap();
        assert_eq!(
            compute_prov(&q, &inst).unwrap(),
            compute_prov(&q, &shuffled).unwrap(),
            "{s}"
        );
    }
}

#[test]
fn star_rewriting_is_a_fixpoint() {
    let limits = Limits::default();
    for seed in seed_base()..seed_base() + cases(150) {
        let s = random_sample(seed);
        let Some((inst, q)) = fidem(&s) else { continue };
        let inclusions: Vec<_> = normalize_inverses(&inst.ontology)
            .iter()
            .filter_map(|a| a.positive())
            .collect();
        let pr = perfect_ref_star(&star_substitute(&q).unwrap(), &inclusions, &limits).unwrap();
        let closure: BTreeSet<_> = pr.iter().map(canonical).collect();
        assert_eq!(closure.len(), pr.len(), "duplicate rewritings\n{s}");
        for r in pr.iter().take(20) {
            for again in perfect_ref_star(r, &inclusions, &limits).unwrap() {
                assert!(closure.contains(&canonical(&again)), "{again} is new\n{s}");
            }
        }
    }
}

#[test]
fn monomial_rewritings_are_distinct_up_to_renaming() {
    let limits = Limits::default();
    for seed in seed_base()..seed_base() + cases(300) {
        let s = random_sample(seed);
        let inst = s.instance(SemiringMode::Free);
        let spec = s.query(SemiringMode::Free);
        let Ok(tr) = translate_tr(&spec.query, &spec.target, SemiringMode::Free) else {
            continue;
        };
        let inclusions = inst.positive_inclusions();
        for q in tr.take(5) {
            let pr = match perfect_ref(&q, &inclusions, SemiringMode::Free, &limits) {
                Ok(pr) => pr,
                Err(Error::CapExceeded { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let monomial = |q: &ProvBCQ| {
                q.map_ann(|_, a| match a {
                    ProvTerm::Mono(m) => m.clone(),
                    ProvTerm::Var(_) => unreachable!(),
                })
            };
            let distinct: BTreeSet<_> = pr.iter().map(|r| canonical(&monomial(r))).collect();
            assert_eq!(distinct.len(), pr.len(), "{q}\n{s}");
            assert!(distinct.contains(&canonical(&monomial(&q))));
        }
    }
}

fn random_target(rng: &mut ChaCha8Rng) -> Polynomial {
    let vars = ["s", "t", "r", "u"];
    let terms = (0..rng.gen_range(1..=2)).map(|_| {
        Monomial::from_factors(
            (0..rng.gen_range(1..=4)).map(|_| *vars.choose(rng).unwrap()),
            SemiringMode::Free,
        )
    });
    Polynomial::from_terms(terms, SemiringMode::Free)
}

#[test]
fn translated_copies_multiply_back_to_the_target() {
    let q = common::query("ASK x,y,z,w: headGov(x,y,@z) AND City(y,@w)", SemiringMode::Free).query;
    let q1 = common::query("ASK x,z: Mayor(x,@z)", SemiringMode::Free).query;
    for seed in seed_base()..seed_base() + cases(500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_target(&mut rng);
        if p.has_duplicates() {
            continue;
        }
        for q in [&q, &q1] {
            let k = q.atoms.len();
            let Ok(tr) = translate_tr(q, &p, SemiringMode::Free) else {
                assert!(p.terms().iter().any(|t| t.len() < k), "{p}");
                continue;
            };
            let mut count = 0;
            for out in tr {
                count += 1;
                assert_eq!(out.atoms.len(), p.len() * k);
                let copies = out.atoms.chunks(k).map(|copy| {
                    copy.iter().fold(Monomial::one(), |acc, a| match &a.ann {
                        ProvTerm::Mono(m) => acc.mul(m, SemiringMode::Free),
                        ProvTerm::Var(_) => panic!("variable left in {out}"),
                    })
                });
                assert_eq!(Polynomial::from_terms(copies, SemiringMode::Free), p, "{out}");
            }
            assert!(count > 0);
        }
    }
}

fn random_mapping(rng: &mut ChaCha8Rng) -> (Vec<AnnotatedRule>, AnnotatedDataInstance) {
    let vars = ["X", "Y", "Z"];
    let mut rules = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let body: Vec<BodyAtom> = (0..rng.gen_range(1..=2))
            .map(|j| BodyAtom {
                predicate: name(["T1", "T2"].choose(rng).unwrap()),
                args: vec![
                    name(vars.choose(rng).unwrap()),
                    name(vars.choose(rng).unwrap()),
                ],
                prov: name(&format!("W{j}")),
            })
            .collect();
        let bound: Vec<&str> = body
            .iter()
            .flat_map(|b| b.args.iter().map(|a| &**a))
            .collect();
        let head = if rng.gen_bool(0.5) {
            RuleHead::Concept {
                concept: name("A"),
                arg: name(bound.choose(rng).unwrap()),
            }
        } else {
            RuleHead::Role {
                role: name("R"),
                subject: name(bound.choose(rng).unwrap()),
                object: name(bound.choose(rng).unwrap()),
                pair_alias: false,
            }
        };
        rules.push(AnnotatedRule {
            head,
            body,
            annotation: Monomial::var(ProvVariable::new(format!("m{i}"))),
        });
    }
    let mut data = AnnotatedDataInstance::default();
    for k in 0..rng.gen_range(1..=5) {
        let ind = |rng: &mut ChaCha8Rng| name(["a", "b", "c"].choose(rng).unwrap());
        let (x, y) = (ind(rng), ind(rng));
        data.insert(
            name(["T1", "T2"].choose(rng).unwrap()),
            vec![x, y],
            ProvVariable::new(format!("d{k}")),
        );
    }
    (rules, data)
}

/// The virtual assertions by nested loops over the body atoms.
fn naive_assertions(rules: &[AnnotatedRule], data: &AnnotatedDataInstance) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for r in rules {
        let mut choices: Vec<Vec<(Vec<prov_obda::kb::Name>, ProvVariable)>> = Vec::new();
        for b in &r.body {
            choices.push(
                data.relations
                    .get(&b.predicate)
                    .map(|ts| ts.iter().map(|t| (t.values.clone(), t.annotation)).collect())
                    .unwrap_or_default(),
            );
        }
        let total: usize = choices.iter().map(Vec::len).product();
        for mut idx in 0..total {
            let mut bind: BTreeMap<&str, &str> = BTreeMap::new();
            let mut ann = r.annotation.clone();
            let mut ok = true;
            for (b, ts) in r.body.iter().zip(&choices) {
                let (values, v) = &ts[idx % ts.len()];
                idx /= ts.len();
                for (x, val) in b.args.iter().zip(values) {
                    if *bind.entry(x).or_insert(val) != &**val {
                        ok = false;
                    }
                }
                ann = ann.mul(&Monomial::var(*v), SemiringMode::Free);
            }
            if !ok {
                continue;
            }
            let head = match &r.head {
                RuleHead::Concept { concept, arg } => format!("{concept}({})", bind[&**arg]),
                RuleHead::Role {
                    role,
                    subject,
                    object,
                    ..
                } => format!("{role}({},{})", bind[&**subject], bind[&**object]),
            };
            out.insert(format!("{head} @ {ann}"));
        }
    }
    out
}

#[test]
fn mappings_match_a_nested_loop_join() {
    for seed in seed_base()..seed_base() + cases(1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rules, data) = random_mapping(&mut rng);
        let inst = AnnotatedOBDAInstance::new(vec![], rules.clone(), data.clone(), SemiringMode::Free)
            .unwrap();
        let got = apply_mappings(&inst.mapping, &inst.schema, &inst.data, SemiringMode::Free).unwrap();
        let rendered: BTreeSet<String> = got.iter().map(ToString::to_string).collect();
        assert_eq!(rendered.len(), got.len(), "seed {seed}: duplicate assertion");
        assert_eq!(rendered, naive_assertions(&rules, &data), "seed {seed}");
    }
}
