//! Provenance monomials and polynomials in the commutative semiring N[X].
//!
//! Values are always kept in expanded canonical form: a [`Monomial`] is a
//! sorted multiset of variables and a [`Polynomial`] is a sorted multiset
//! of monomials. Structural equality therefore coincides with equality modulo
//! associativity, commutativity and distributivity, and natural coefficients
//! are represented as repeated terms (`2a` is `a + a`).
//!
//! The semiring mode decides how duplicates collapse:
//!
//! * [`SemiringMode::Free`] keeps every multiplicity,
//! * [`SemiringMode::MultIdempotent`] turns monomials into sets (`a*a = a`),
//! * [`SemiringMode::FullyIdempotent`] additionally turns polynomials into
//!   sets of monomials (`a + a = a`).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};

/// Name of the reserved placeholder variable used by the star rewriting.
pub const STAR: &str = "⋆";

/// A provenance variable, interned process-wide.
///
/// Variables order by interning id, which is stable within a process; every
/// rendering sorts by name instead so that output never depends on that order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProvVariable(u32);

struct Interner {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        RwLock::new(Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

impl ProvVariable {
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        assert!(!name.is_empty(), "provenance variable names are non-empty");
        if let Some(id) = interner().read().expect("interner poisoned").ids.get(name) {
            return ProvVariable(*id);
        }
        let mut table = interner().write().expect("interner poisoned");
        if let Some(id) = table.ids.get(name) {
            return ProvVariable(*id);
        }
        let id = table.names.len() as u32;
        let name: Arc<str> = Arc::from(name);
        table.names.push(name.clone());
        table.ids.insert(name, id);
        ProvVariable(id)
    }

    /// The reserved star placeholder.
    pub fn star() -> Self {
        ProvVariable::new(STAR)
    }

    pub fn is_star(&self) -> bool {
        *self == ProvVariable::star()
    }

    pub fn name(&self) -> Arc<str> {
        interner().read().expect("interner poisoned").names[self.0 as usize].clone()
    }
}

impl fmt::Debug for ProvVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for ProvVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<&str> for ProvVariable {
    fn from(s: &str) -> Self {
        ProvVariable::new(s)
    }
}

impl From<&ProvVariable> for ProvVariable {
    fn from(v: &ProvVariable) -> Self {
        *v
    }
}

impl Serialize for ProvVariable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for ProvVariable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty provenance variable"));
        }
        Ok(ProvVariable::new(s))
    }
}

/// How duplicates are collapsed by the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SemiringMode {
    #[default]
    Free,
    MultIdempotent,
    FullyIdempotent,
}

impl SemiringMode {
    pub fn mult_idempotent(self) -> bool {
        !matches!(self, SemiringMode::Free)
    }

    pub fn add_idempotent(self) -> bool {
        matches!(self, SemiringMode::FullyIdempotent)
    }
}

impl FromStr for SemiringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "free" => Ok(SemiringMode::Free),
            "midem" => Ok(SemiringMode::MultIdempotent),
            "fidem" => Ok(SemiringMode::FullyIdempotent),
            other => Err(Error::Mode(format!("unknown semiring mode `{other}`"))),
        }
    }
}

impl fmt::Display for SemiringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemiringMode::Free => "free",
            SemiringMode::MultIdempotent => "midem",
            SemiringMode::FullyIdempotent => "fidem",
        })
    }
}

/// A finite product of provenance variables. The empty product is `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial {
    factors: Vec<ProvVariable>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: impl Into<ProvVariable>) -> Self {
        Monomial {
            factors: vec![v.into()],
        }
    }

    /// Builds a monomial from factors in any order.
    pub fn from_factors<I, V>(factors: I, mode: SemiringMode) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<ProvVariable>,
    {
        let mut factors: Vec<ProvVariable> = factors.into_iter().map(Into::into).collect();
        factors.sort();
        if mode.mult_idempotent() {
            factors.dedup();
        }
        Monomial { factors }
    }

    /// Shorthand for tests and examples: `Monomial::parse_free("n*p*s")`.
    pub fn parse_free(s: &str) -> Self {
        Monomial::from_factors(
            s.split('*').map(str::trim).filter(|f| !f.is_empty() && *f != "1"),
            SemiringMode::Free,
        )
    }

    pub fn factors(&self) -> &[ProvVariable] {
        &self.factors
    }

    /// Variable names in lexicographic order, with repetitions.
    pub fn sorted_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.factors.iter().map(|v| v.name().to_string()).collect();
        names.sort();
        names
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of variable occurrences.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn contains(&self, v: &ProvVariable) -> bool {
        self.factors.binary_search(v).is_ok()
    }

    pub fn count(&self, v: &ProvVariable) -> usize {
        self.factors.iter().filter(|f| *f == v).count()
    }

    /// Distinct variables in canonical order.
    pub fn support(&self) -> Vec<ProvVariable> {
        let mut s = self.factors.clone();
        s.dedup();
        s
    }

    pub fn normalize(&self, mode: SemiringMode) -> Monomial {
        if mode.mult_idempotent() {
            let mut factors = self.factors.clone();
            factors.dedup();
            Monomial { factors }
        } else {
            self.clone()
        }
    }

    /// Canonical product of two monomials.
    pub fn mul(&self, other: &Monomial, mode: SemiringMode) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            if self.factors[i] <= other.factors[j] {
                factors.push(self.factors[i]);
                i += 1;
            } else {
                factors.push(other.factors[j]);
                j += 1;
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        if mode.mult_idempotent() {
            factors.dedup();
        }
        Monomial { factors }
    }

    pub fn mul_var(&self, v: &ProvVariable, mode: SemiringMode) -> Monomial {
        self.mul(&Monomial::var(*v), mode)
    }

    /// Removes one occurrence of `v`.
    pub fn remove(&self, v: &ProvVariable) -> Result<Monomial, Error> {
        match self.factors.iter().position(|f| f == v) {
            Some(pos) => {
                let mut factors = self.factors.clone();
                factors.remove(pos);
                Ok(Monomial { factors })
            }
            None => Err(Error::VariableAbsent {
                variable: v.to_string(),
                monomial: self.to_string(),
            }),
        }
    }

    /// `self ⊕̂ v`: appends `v` unless it already occurs.
    pub fn extend_idem(&self, v: &ProvVariable) -> Monomial {
        if self.contains(v) {
            self.clone()
        } else {
            self.mul_var(v, SemiringMode::Free)
        }
    }

    /// Whether `other` is a sub-multiset of `self`.
    pub fn includes(&self, other: &Monomial) -> bool {
        let mut i = 0;
        for f in &other.factors {
            while i < self.factors.len() && self.factors[i] < *f {
                i += 1;
            }
            if i == self.factors.len() || self.factors[i] != *f {
                return false;
            }
            i += 1;
        }
        true
    }

    /// Whether every variable of `other` occurs in `self` (set inclusion).
    pub fn includes_support(&self, other: &Monomial) -> bool {
        other.factors.iter().all(|f| self.contains(f))
    }

    /// Multiset difference `self - other`; `None` unless `other ⊆ self`.
    pub fn divide(&self, other: &Monomial) -> Option<Monomial> {
        let mut rest = self.factors.clone();
        for f in &other.factors {
            let pos = rest.iter().position(|r| r == f)?;
            rest.remove(pos);
        }
        Some(Monomial { factors: rest })
    }

    /// Set difference of supports.
    pub fn without_support(&self, other: &Monomial) -> Monomial {
        Monomial {
            factors: self
                .factors
                .iter()
                .filter(|f| !other.contains(f))
                .cloned()
                .collect(),
        }
    }

    /// Replaces every variable by a monomial (a semiring homomorphism on
    /// monomials); variables without an image are kept.
    pub fn substitute<F>(&self, mut image: F, mode: SemiringMode) -> Monomial
    where
        F: FnMut(&ProvVariable) -> Option<Monomial>,
    {
        let mut out = Monomial::one();
        for f in &self.factors {
            match image(f) {
                Some(m) => out = out.mul(&m, mode),
                None => out = out.mul_var(f, mode),
            }
        }
        out.normalize(mode)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&self.sorted_names().join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finite sum of monomials in expanded form. The empty sum is `0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::from(Monomial::one())
    }

    pub fn from_terms<I: IntoIterator<Item = Monomial>>(terms: I, mode: SemiringMode) -> Self {
        let mut terms: Vec<Monomial> = terms.into_iter().map(|m| m.normalize(mode)).collect();
        terms.sort();
        if mode.add_idempotent() {
            terms.dedup();
        }
        Polynomial { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Every term as its sorted variable names, in lexicographic order.
    pub fn sorted_monomials(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self.terms.iter().map(Monomial::sorted_names).collect();
        out.sort();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomial occurrences.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Distinct monomials with their multiplicities.
    pub fn counted_terms(&self) -> Vec<(Monomial, usize)> {
        let mut out: Vec<(Monomial, usize)> = Vec::new();
        for t in &self.terms {
            match out.last_mut() {
                Some((m, c)) if m == t => *c += 1,
                _ => out.push((t.clone(), 1)),
            }
        }
        out
    }

    pub fn has_duplicates(&self) -> bool {
        self.terms.windows(2).any(|w| w[0] == w[1])
    }

    pub fn normalize(&self, mode: SemiringMode) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().cloned(), mode)
    }

    pub fn add(&self, other: &Polynomial, mode: SemiringMode) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            if self.terms[i] <= other.terms[j] {
                terms.push(self.terms[i].clone());
                i += 1;
            } else {
                terms.push(other.terms[j].clone());
                j += 1;
            }
        }
        terms.extend_from_slice(&self.terms[i..]);
        terms.extend_from_slice(&other.terms[j..]);
        if mode.add_idempotent() {
            terms.dedup();
        }
        Polynomial { terms }
    }

    pub fn add_monomial(&mut self, m: Monomial, mode: SemiringMode) {
        let m = m.normalize(mode);
        let pos = match self.terms.binary_search(&m) {
            Ok(_) if mode.add_idempotent() => return,
            Ok(p) | Err(p) => p,
        };
        self.terms.insert(pos, m);
    }

    pub fn mul(&self, other: &Polynomial, mode: SemiringMode) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .flat_map(|a| other.terms.iter().map(move |b| a.mul(b, mode)));
        Polynomial::from_terms(terms, mode)
    }

    /// The `p ⊆ Prov` relation: every occurrence of a monomial of `candidate`
    /// is matched by a distinct occurrence in `self`.
    pub fn contains(&self, candidate: &Polynomial) -> bool {
        let mut i = 0;
        for t in &candidate.terms {
            while i < self.terms.len() && self.terms[i] < *t {
                i += 1;
            }
            if i == self.terms.len() || self.terms[i] != *t {
                return false;
            }
            i += 1;
        }
        true
    }

    pub fn map_monomials<F>(&self, f: F, mode: SemiringMode) -> Polynomial
    where
        F: FnMut(&Monomial) -> Monomial,
    {
        Polynomial::from_terms(self.terms.iter().map(f), mode)
    }
}

impl From<Monomial> for Polynomial {
    fn from(m: Monomial) -> Self {
        Polynomial { terms: vec![m] }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let rendered: Vec<String> = self
            .sorted_monomials()
            .iter()
            .map(|names| {
                if names.is_empty() {
                    "1".to_string()
                } else {
                    names.join("*")
                }
            })
            .collect();
        f.write_str(&rendered.join(" + "))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn mono_mul(a: &Monomial, b: &Monomial, mode: SemiringMode) -> Monomial {
    a.mul(b, mode)
}

pub fn poly_add(a: &Polynomial, b: &Polynomial, mode: SemiringMode) -> Polynomial {
    a.add(b, mode)
}

pub fn poly_mul(a: &Polynomial, b: &Polynomial, mode: SemiringMode) -> Polynomial {
    a.mul(b, mode)
}

pub fn math_equal(a: &Monomial, b: &Monomial) -> bool {
    a == b
}

pub fn poly_contains(target: &Polynomial, candidate: &Polynomial) -> bool {
    target.contains(candidate)
}

pub fn mono_remove(p: &Monomial, v: &ProvVariable) -> Result<Monomial, Error> {
    p.remove(v)
}

pub fn mono_extend_idem(p: &Monomial, v: &ProvVariable) -> Monomial {
    p.extend_idem(v)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses a polynomial expression with `+`, `*`, `^n`, parentheses and the
/// constants `0` / `1`, expanding it into canonical form under `mode`.
pub fn parse_polynomial(src: &str, mode: SemiringMode) -> Result<Polynomial, ParseError> {
    let mut p = PolyParser {
        chars: src.chars().collect(),
        pos: 0,
        mode,
    };
    let poly = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(poly)
}

/// Parses a single monomial; sums are rejected.
pub fn parse_monomial(src: &str, mode: SemiringMode) -> Result<Monomial, ParseError> {
    let poly = parse_polynomial(src, mode)?;
    match poly.terms() {
        [m] => Ok(m.clone()),
        _ => Err(ParseError::new(1, 1, format!("`{src}` is not a monomial"))),
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '-' || c == '.'
}

struct PolyParser {
    chars: Vec<char>,
    pos: usize,
    mode: SemiringMode,
}

impl PolyParser {
    fn error(&self, msg: String) -> ParseError {
        ParseError::new(1, self.pos + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.product()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let rhs = self.product()?;
            acc = acc.add(&rhs, self.mode);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.power()?;
        while matches!(self.peek(), Some('*') | Some('·') | Some('×')) {
            self.pos += 1;
            let rhs = self.power()?;
            acc = acc.mul(&rhs, self.mode);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected exponent".into()));
            }
            let exp: usize = self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| self.error("exponent too large".into()))?;
            let mut acc = Polynomial::one();
            for _ in 0..exp {
                acc = acc.mul(&base, self.mode);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n: usize = self.chars[start..self.pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| self.error("coefficient too large".into()))?;
                let mut acc = Polynomial::zero();
                for _ in 0..n {
                    acc = acc.add(&Polynomial::one(), self.mode);
                }
                Ok(acc)
            }
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                Ok(Polynomial::from(Monomial::var(name.as_str())))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Monomial {
        Monomial::parse_free(s)
    }

    fn p(s: &str, mode: SemiringMode) -> Polynomial {
        parse_polynomial(s, mode).unwrap()
    }

    use SemiringMode::*;

    #[test]
    fn mono_mul_examples() {
        assert_eq!(mono_mul(&m("p*n"), &m("s"), Free), m("n*p*s"));
        assert_eq!(mono_mul(&Monomial::one(), &m("m"), Free), m("m"));
        assert_eq!(mono_mul(&m("s"), &m("s"), MultIdempotent), m("s"));
        assert_eq!(mono_mul(&m("s"), &m("s"), Free).len(), 2);
    }

    #[test]
    fn poly_add_examples() {
        let a = p("a", Free);
        let two_a = poly_add(&a, &a, Free);
        assert_eq!(two_a.len(), 2);
        assert_eq!(two_a.to_string(), "a + a");
        assert_eq!(poly_add(&a, &a, FullyIdempotent), a);
        let pns = p("p*n*s", Free);
        assert_eq!(poly_add(&Polynomial::zero(), &pns, Free), pns);
    }

    #[test]
    fn poly_mul_examples() {
        let lhs = p("p*n + q*n", Free);
        let s = p("s", Free);
        assert_eq!(poly_mul(&lhs, &s, Free).to_string(), "n*p*s + n*q*s");
        assert_eq!(poly_mul(&Polynomial::zero(), &s, Free), Polynomial::zero());
        let st = p("s + t", FullyIdempotent);
        assert_eq!(
            poly_mul(&st, &st, FullyIdempotent).to_string(),
            "s + s*t + t"
        );
    }

    #[test]
    fn math_equal_examples() {
        assert!(math_equal(&m("p*q"), &m("q*p")));
        assert!(!math_equal(&m("p*p"), &m("p")));
        assert!(!math_equal(&m("p*n*s"), &m("p*n")));
    }

    #[test]
    fn poly_contains_examples() {
        let target = p("p*n*s + q*n*s", Free);
        assert!(poly_contains(&target, &p("p*n*s", Free)));
        assert!(!poly_contains(&p("a", Free), &p("a + a", Free)));
        assert!(poly_contains(&target, &Polynomial::zero()));
        assert!(poly_contains(&Polynomial::zero(), &Polynomial::zero()));
    }

    #[test]
    fn mono_remove_examples() {
        assert_eq!(mono_remove(&m("p*n*s"), &"s".into()).unwrap(), m("n*p"));
        assert!(mono_remove(&m("v"), &"v".into()).unwrap().is_one());
        assert_eq!(mono_remove(&m("v*w*v"), &"v".into()).unwrap(), m("v*w"));
        assert!(matches!(
            mono_remove(&m("p*n"), &"s".into()),
            Err(Error::VariableAbsent { .. })
        ));
    }

    #[test]
    fn mono_extend_idem_examples() {
        assert_eq!(mono_extend_idem(&m("v*w"), &"v".into()), m("v*w"));
        assert_eq!(mono_extend_idem(&Monomial::one(), &"v".into()), m("v"));
        let star = Monomial::var(ProvVariable::star());
        let ext = mono_extend_idem(&star, &"s".into());
        assert!(ext.contains(&ProvVariable::star()));
        assert!(ext.contains(&"s".into()));
        assert_eq!(ext.len(), 2);
    }

    #[test]
    fn rendering() {
        assert_eq!(Monomial::one().to_string(), "1");
        assert_eq!(Polynomial::zero().to_string(), "0");
        assert_eq!(m("s*p*n").to_string(), "n*p*s");
    }

    #[test]
    fn parsing_expands_and_normalizes() {
        let poly = p("((p*n) + (q*n)) * s", Free);
        assert_eq!(poly.to_string(), "n*p*s + n*q*s");
        assert_eq!(p("s^2 * t", Free).to_string(), "s*s*t");
        assert_eq!(p("s^2 * t", MultIdempotent).to_string(), "s*t");
        assert!(parse_polynomial("a + ", Free).is_err());
        assert!(parse_polynomial("(a", Free).is_err());
        let two = parse_polynomial("2*a*b + c", Free).unwrap();
        assert_eq!(two.counted_terms().len(), 2);
        assert_eq!(two.len(), 3);
        assert_eq!(parse_polynomial(&two.to_string(), Free).unwrap(), two);
        assert!(parse_monomial("a + b", Free).is_err());
        assert_eq!(p("0 + a*1", Free).to_string(), "a");
    }
}
