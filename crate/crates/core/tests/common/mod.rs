#![allow(dead_code)]

pub mod algebra;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use std::collections::BTreeMap;

use prov_obda::kb::{mark_instance, normalize_inverses, AnnotatedOBDAInstance, DaggerMap};
use prov_obda::oracle::{chase, ChaseConfig};
use prov_obda::parse::{
    load_instance, load_query, parse_data, parse_mapping, parse_ontology, parse_query, QuerySpec,
};
use prov_obda::query::{Pred, ProvTerm};
use prov_obda::semiring::{Monomial, ProvVariable, SemiringMode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(dir: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(dir)
}

pub fn load_fixture(dir: &str, mode: SemiringMode) -> AnnotatedOBDAInstance {
    let d = fixture(dir);
    let part = |f: &str| {
        let p = d.join(f);
        p.exists().then_some(p)
    };
    load_instance(
        part("ontology.txt").as_deref(),
        part("mapping.txt").as_deref(),
        part("data.txt").as_deref(),
        mode,
    )
    .unwrap()
}

pub fn fixture_query(dir: &str, file: &str, mode: SemiringMode) -> QuerySpec {
    load_query(&fixture(dir).join(file), mode).unwrap()
}

pub fn query(src: &str, mode: SemiringMode) -> QuerySpec {
    parse_query(src, mode).unwrap()
}

/// An instance given in the file syntaxes.
#[derive(Clone, Debug)]
pub struct Sample {
    pub seed: u64,
    pub ontology: String,
    pub mapping: String,
    pub data: String,
    pub query: String,
}

impl Sample {
    pub fn instance(&self, mode: SemiringMode) -> AnnotatedOBDAInstance {
        AnnotatedOBDAInstance::new(
            parse_ontology(&self.ontology).unwrap(),
            parse_mapping(&self.mapping).unwrap(),
            parse_data(&self.data).unwrap(),
            mode,
        )
        .unwrap()
    }

    pub fn query(&self, mode: SemiringMode) -> QuerySpec {
        parse_query(&self.query, mode).unwrap()
    }
}

impl std::fmt::Display for Sample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "seed {}\n--- ontology\n{}--- mapping\n{}--- data\n{}--- query\n{}\n",
            self.seed, self.ontology, self.mapping, self.data, self.query
        )
    }
}

const CONCEPTS: [&str; 3] = ["A", "B", "C"];
const ROLES: [&str; 2] = ["R", "S"];
const INDIVIDUALS: [&str; 3] = ["a", "b", "c"];
const AXIOM_VARS: [&str; 4] = ["u", "v", "w", "t"];

fn role_expr(rng: &mut ChaCha8Rng) -> String {
    let r = ROLES.choose(rng).unwrap();
    if rng.gen_bool(0.3) {
        format!("inv({r})")
    } else {
        r.to_string()
    }
}

fn basic_expr(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.6) {
        CONCEPTS.choose(rng).unwrap().to_string()
    } else {
        format!("exists {}", role_expr(rng))
    }
}

fn axiom_annotation(rng: &mut ChaCha8Rng) -> String {
    let v = AXIOM_VARS.choose(rng).unwrap();
    if rng.gen_bool(0.15) {
        format!("{v}*{}", AXIOM_VARS.choose(rng).unwrap())
    } else {
        v.to_string()
    }
}

/// A random instance with at most five positive inclusions, at most four
/// data tuples and a query of at most two atoms whose target has at most two
/// monomials of length at most four.
pub fn random_sample(seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ontology = String::new();
    for _ in 0..rng.gen_range(0..=5) {
        if rng.gen_bool(0.7) {
            let lhs = basic_expr(&mut rng);
            let mut rhs = basic_expr(&mut rng);
            while rhs == lhs {
                rhs = basic_expr(&mut rng);
            }
            writeln!(ontology, "{lhs} sub {rhs} @ {}", axiom_annotation(&mut rng)).unwrap();
        } else {
            let lhs = role_expr(&mut rng);
            let mut rhs = role_expr(&mut rng);
            while rhs == lhs {
                rhs = role_expr(&mut rng);
            }
            writeln!(ontology, "{lhs} subrole {rhs} @ {}", axiom_annotation(&mut rng)).unwrap();
        }
    }
    if rng.gen_bool(0.1) {
        if rng.gen_bool(0.5) {
            let lhs = basic_expr(&mut rng);
            let mut rhs = basic_expr(&mut rng);
            while rhs == lhs {
                rhs = basic_expr(&mut rng);
            }
            writeln!(ontology, "{lhs} sub not {rhs}").unwrap();
        } else {
            writeln!(ontology, "R subrole not S").unwrap();
        }
    }

    let mut mapping = String::new();
    for (i, c) in CONCEPTS.iter().enumerate() {
        write!(mapping, "{c}(X) <- T{c}(X,@W)").unwrap();
        if rng.gen_bool(0.5) {
            write!(mapping, " @ m{i}").unwrap();
        }
        mapping.push('\n');
    }
    for (i, r) in ROLES.iter().enumerate() {
        write!(mapping, "{r}(X,Y) <- T{r}(X,Y,@W)").unwrap();
        if rng.gen_bool(0.5) {
            write!(mapping, " @ n{i}").unwrap();
        }
        mapping.push('\n');
    }

    let mut data = String::new();
    for i in 1..=rng.gen_range(1..=4) {
        if rng.gen_bool(0.5) {
            let c = CONCEPTS.choose(&mut rng).unwrap();
            let a = INDIVIDUALS.choose(&mut rng).unwrap();
            writeln!(data, "T{c}, {a}, @p{i}").unwrap();
        } else {
            let r = ROLES.choose(&mut rng).unwrap();
            let a = INDIVIDUALS.choose(&mut rng).unwrap();
            let b = INDIVIDUALS.choose(&mut rng).unwrap();
            writeln!(data, "T{r}, {a}, {b}, @p{i}").unwrap();
        }
    }

    let mut sample = Sample {
        seed,
        ontology,
        mapping,
        data,
        query: String::new(),
    };
    sample.query = random_query(&mut rng, &sample);
    sample
}

/// Concepts and roles with tuples in a shallow chase of the sample.
fn populated(sample: &Sample) -> (Vec<String>, Vec<String>) {
    let inst = AnnotatedOBDAInstance::new(
        parse_ontology(&sample.ontology).unwrap(),
        parse_mapping(&sample.mapping).unwrap(),
        parse_data(&sample.data).unwrap(),
        SemiringMode::Free,
    )
    .unwrap();
    let mut cfg = ChaseConfig::new(SemiringMode::Free);
    cfg.depth_bound = Some(3);
    let model = chase(&inst, &cfg).unwrap();
    let concepts = CONCEPTS
        .iter()
        .filter(|c| model.interp.concept_ext(c).next().is_some())
        .map(|c| c.to_string())
        .collect();
    let roles = ROLES
        .iter()
        .filter(|r| model.interp.role_ext(r).next().is_some())
        .map(|r| r.to_string())
        .collect();
    (concepts, roles)
}

fn random_query(rng: &mut ChaCha8Rng, sample: &Sample) -> String {
    let (live_concepts, live_roles) = populated(sample);
    let pick = |rng: &mut ChaCha8Rng, live: &[String], all: &[&str]| -> String {
        if !live.is_empty() && rng.gen_bool(0.8) {
            live.choose(rng).unwrap().clone()
        } else {
            all.choose(rng).unwrap().to_string()
        }
    };
    let n = rng.gen_range(1..=2);
    let term = |rng: &mut ChaCha8Rng| -> &'static str {
        let r: f64 = rng.gen();
        if r < 0.45 {
            "x"
        } else if r < 0.85 {
            "y"
        } else {
            "a"
        }
    };
    let repeated = n == 2 && rng.gen_bool(0.15);
    let mut atoms = Vec::new();
    for j in 0..n {
        let prov = if rng.gen_bool(0.12) {
            format!("@{}", random_monomial(rng, sample, 2))
        } else if repeated {
            "@z1".to_string()
        } else {
            format!("@z{}", j + 1)
        };
        if rng.gen_bool(0.5) {
            let c = pick(rng, &live_concepts, &CONCEPTS);
            atoms.push(format!("{c}({},{prov})", term(rng)));
        } else {
            let r = pick(rng, &live_roles, &ROLES);
            atoms.push(format!("{r}({},{},{prov})", term(rng), term(rng)));
        }
    }
    let mut src = format!("ASK x,y,z1,z2: {}", atoms.join(" AND "));
    if rng.gen_bool(0.8) {
        let k = if rng.gen_bool(0.6) { 1 } else { 2 };
        let monos: Vec<String> = (0..k).map(|_| target_monomial(rng, sample, &src)).collect();
        write!(src, " WITH {}", monos.join(" + ")).unwrap();
    }
    src
}

fn vocabulary(sample: &Sample) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for text in [&sample.ontology, &sample.mapping, &sample.data] {
        for piece in text.split('@').skip(1) {
            let word: String = piece
                .trim_start()
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '*')
                .collect();
            for v in word.split('*') {
                if !v.is_empty() && !v.starts_with('W') && !vars.iter().any(|x| x == v) {
                    vars.push(v.to_string());
                }
            }
        }
    }
    vars
}

fn random_monomial(rng: &mut ChaCha8Rng, sample: &Sample, max_len: usize) -> String {
    let vars = vocabulary(sample);
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| vars.choose(rng).unwrap().clone())
        .collect::<Vec<_>>()
        .join("*")
}

/// Mostly a product of annotations of chased tuples for the query
/// predicates, so that targets are often entailed.
fn target_monomial(rng: &mut ChaCha8Rng, sample: &Sample, query_src: &str) -> String {
    if rng.gen_bool(0.2) {
        return random_monomial(rng, sample, 4);
    }
    let inst = AnnotatedOBDAInstance::new(
        parse_ontology(&sample.ontology).unwrap(),
        parse_mapping(&sample.mapping).unwrap(),
        parse_data(&sample.data).unwrap(),
        SemiringMode::Free,
    )
    .unwrap();
    let mut cfg = ChaseConfig::new(SemiringMode::Free);
    cfg.depth_bound = Some(3);
    let Ok(model) = chase(&inst, &cfg) else {
        return random_monomial(rng, sample, 4);
    };
    let q = parse_query(query_src, SemiringMode::Free).unwrap().query;
    let mut product = Monomial::one();
    for a in &q.atoms {
        let anns: Vec<Monomial> = match &a.pred {
            Pred::Concept(c) => model.interp.concept_ext(c).map(|(_, m)| m.clone()).collect(),
            Pred::Role(r) | Pred::RoleFamily(r) => {
                model.interp.role_ext(r).map(|(_, _, m)| m.clone()).collect()
            }
        };
        let m = match (&a.ann, anns.choose(rng)) {
            (ProvTerm::Mono(c), _) => c.clone(),
            (_, Some(m)) => m.clone(),
            (_, None) => return random_monomial(rng, sample, 4),
        };
        product = product.mul(&m, SemiringMode::Free);
    }
    if product.is_one() || product.len() > 4 {
        return random_monomial(rng, sample, 4);
    }
    product.to_string()
}

/// The exponential family: a chain of n diamonds, whose fidem provenance for
/// `D(a)` has 2^(n-1) monomials.
pub fn diamond_chain(n: usize) -> (String, String, String, String) {
    let mut o = String::from("A sub B1 @ x\nA sub C1 @ x\n");
    for i in 1..n {
        let j = i + 1;
        writeln!(o, "B{i} sub B{j} @ x{i}").unwrap();
        writeln!(o, "B{i} sub C{j} @ y{i}").unwrap();
        writeln!(o, "C{i} sub B{j} @ x{i}").unwrap();
        writeln!(o, "C{i} sub C{j} @ y{i}").unwrap();
    }
    writeln!(o, "B{n} sub D @ x").unwrap();
    writeln!(o, "C{n} sub D @ x").unwrap();
    (
        o,
        "A(X) <- SA(X,@W)\n".into(),
        "SA, a, @p\n".into(),
        "ASK z: D(a,@z)".into(),
    )
}

/// The complete graph over concepts `C1..Cn` (no self-loops), data `C1(a)`
/// and the query `C2(a)`.
pub fn complete_graph(n: usize) -> (String, String, String, String) {
    let mut o = String::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                writeln!(o, "C{i} sub C{j} @ x{i}_{j}").unwrap();
            }
        }
    }
    (
        o,
        "C1(X) <- S(X,@W)\n".into(),
        "S, a, @xa\n".into(),
        "ASK z: C2(a,@z)".into(),
    )
}

pub fn build(
    parts: &(String, String, String, String),
    mode: SemiringMode,
) -> (AnnotatedOBDAInstance, QuerySpec) {
    let inst = AnnotatedOBDAInstance::new(
        parse_ontology(&parts.0).unwrap(),
        parse_mapping(&parts.1).unwrap(),
        parse_data(&parts.2).unwrap(),
        mode,
    )
    .unwrap();
    (inst, parse_query(&parts.3, mode).unwrap())
}

/// Number of simple paths from node 1 to node 2 in the complete digraph on
/// n nodes.
pub fn simple_paths(n: usize) -> usize {
    fn dfs(cur: usize, n: usize, seen: &mut Vec<bool>) -> usize {
        if cur == 2 {
            return 1;
        }
        let mut total = 0;
        for next in 1..=n {
            if !seen[next] {
                seen[next] = true;
                total += dfs(next, n, seen);
                seen[next] = false;
            }
        }
        total
    }
    let mut seen = vec![false; n + 1];
    seen[1] = true;
    dfs(1, n, &mut seen)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Both sides agree; the flag is the shared answer.
    Agree(bool),
    Disagree(String),
    /// The oracle hit its depth bound, or the rewriting its caps.
    Undecided(String),
}

/// Compares `entails` with the chase oracle on one sample.
pub fn compare_entailment(sample: &Sample, mode: SemiringMode) -> Verdict {
    use prov_obda::entail::entails;
    use prov_obda::oracle::{oracle_entails, Decision};
    let inst = sample.instance(mode);
    let spec = sample.query(mode);
    let oracle = match oracle_entails(&inst, &spec.query, &spec.target) {
        Ok(d) => d,
        Err(e) => return Verdict::Disagree(format!("oracle error: {e}")),
    };
    let fast = match entails(&inst, &spec.query, &spec.target) {
        Ok(b) => b,
        Err(prov_obda::Error::CapExceeded { .. }) => {
            return Verdict::Undecided("rewriting cap".into())
        }
        Err(e) => return Verdict::Disagree(format!("entails error: {e}")),
    };
    match oracle {
        Decision::Indeterminate => Verdict::Undecided("oracle depth bound".into()),
        Decision::Entailed if fast => Verdict::Agree(true),
        Decision::NotEntailed if !fast => Verdict::Agree(false),
        d => Verdict::Disagree(format!("entails = {fast}, oracle = {d:?}")),
    }
}

/// Compares `compute_prov` with the chase oracle, for standard queries.
pub fn compare_provenance(sample: &Sample) -> Option<Verdict> {
    use prov_obda::oracle::oracle_prov;
    use prov_obda::provcalc::compute_prov;
    let mode = SemiringMode::FullyIdempotent;
    let spec = sample.query(mode);
    if !spec.query.is_standard() {
        return None;
    }
    let inst = sample.instance(mode);
    let fast = compute_prov(&spec.query, &inst);
    let slow = oracle_prov(&spec.query, &inst);
    Some(match (fast, slow) {
        (Ok(a), Ok(b)) if a == b => Verdict::Agree(!a.is_zero()),
        (Ok(a), Ok(b)) => Verdict::Disagree(format!("compute_prov = {a}, oracle = {b}")),
        (Err(prov_obda::Error::CapExceeded { .. }), _) => Verdict::Undecided("rewriting cap".into()),
        (a, b) => Verdict::Disagree(format!("{a:?} vs {b:?}")),
    })
}

/// First seed of the random corpus, from `PROV_OBDA_SEED` (default 0).
pub fn seed_base() -> u64 {
    std::env::var("PROV_OBDA_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

/// Corpus size, from `PROV_OBDA_CASES` when set.
pub fn cases(default: u64) -> u64 {
    std::env::var("PROV_OBDA_CASES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

pub fn marked_variables(marked: &AnnotatedOBDAInstance) -> Vec<ProvVariable> {
    marked
        .ontology
        .iter()
        .flat_map(|a| a.annotation.factors().to_vec())
        .chain(marked.mapping.iter().flat_map(|r| r.annotation.factors().to_vec()))
        .chain(marked.data.relations.values().flatten().map(|t| t.annotation))
        .collect()
}

pub fn normalized(inst: &AnnotatedOBDAInstance) -> AnnotatedOBDAInstance {
    AnnotatedOBDAInstance {
        ontology: normalize_inverses(&inst.ontology),
        ..inst.clone()
    }
}

/// The fact a chased tuple of a marked, inverse-normalized instance stands
/// for: role aliases are replaced by their role, and `R__inv(b,a)` is the
/// fact `R(a,b)`.
pub fn original_fact(tuple: &str, dagger: &DaggerMap) -> String {
    let (pred, args) = tuple.split_once('(').unwrap();
    let args: Vec<&str> = args.trim_end_matches(')').split(',').collect();
    let pred = dagger.role(&prov_obda::kb::name(pred)).to_string();
    match (pred.strip_suffix("__inv"), args.as_slice()) {
        (Some(base), [a, b]) => format!("{base}({b},{a})"),
        _ => format!("{pred}({})", args.join(",")),
    }
}

/// Facts of the depth-bounded free chase of the marked instance that share
/// an annotation with a different fact.
pub fn shared_annotations(inst: &AnnotatedOBDAInstance, depth: usize) -> Vec<(String, String, String)> {
    let (marked, dagger) = mark_instance(&normalized(inst)).unwrap();
    let mut cfg = ChaseConfig::new(SemiringMode::Free);
    cfg.depth_bound = Some(depth);
    let model = chase(&marked, &cfg).unwrap();
    let mut owner: BTreeMap<Monomial, String> = BTreeMap::new();
    let mut shared = Vec::new();
    for line in model.dump() {
        let (tuple, ann) = line.rsplit_once(" @ ").unwrap();
        let fact = original_fact(tuple, &dagger);
        match owner.insert(Monomial::parse_free(ann), fact.clone()) {
            Some(prev) if prev != fact => shared.push((prev, fact, ann.to_string())),
            _ => {}
        }
    }
    shared
}
