//! Concrete syntaxes of the ontology, mapping, data and query files.
//!
//! ```text
//! ontology  ::= { axiom [ "@" monomial ] }            one per line
//! axiom     ::= basic "sub" [ "not" ] basic
//!             | role "subrole" [ "not" ] role
//! basic     ::= IDENT | "exists" role
//! role      ::= IDENT | "inv" "(" IDENT ")"
//!
//! mapping   ::= { head "<-" body { "," body } [ "@" monomial ] }
//! head      ::= IDENT "(" IDENT [ "," IDENT ] ")"
//! body      ::= IDENT "(" IDENT { "," IDENT } [ "," "@" IDENT ] ")"
//!
//! data      ::= { IDENT "," value { "," value } "," "@" IDENT }
//!
//! query     ::= "ASK" [ IDENT { "," IDENT } ] ":" atom { "AND" atom }
//!               [ "WITH" polynomial ]
//! atom      ::= IDENT "(" term [ "," term ] [ "," "@" prov ] ")"
//! term      ::= IDENT | "_"
//! monomial  ::= IDENT { "*" IDENT }
//! ```
//!
//! `#` starts a comment. Positive inclusions need an annotation other than
//! `1`. Query identifiers listed after `ASK` are variables, the others are
//! individuals or, after `@`, monomial constants. An atom without `@` gets a
//! fresh provenance variable.

mod lexer;

use std::collections::BTreeSet;
use std::path::Path;

use lexer::{end_of, lex, lines, Cursor, Kind, Tok};

use crate::error::{Error, ParseError, Result};
use crate::kb::{
    name, AnnotatedAxiom, AnnotatedDataInstance, AnnotatedOBDAInstance, AnnotatedRule, Axiom,
    BasicConcept, BodyAtom, ConceptExpr, Role, RoleExpr, RuleHead,
};
use crate::query::{Atom, Pred, ProvBCQ, ProvTerm, Query, Term};
use crate::semiring::{parse_polynomial, Monomial, Polynomial, ProvVariable, SemiringMode};

/// A parsed query file: the query and its target polynomial (zero when the
/// file has no `WITH` clause).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub query: ProvBCQ,
    pub target: Polynomial,
}

impl QuerySpec {
    pub fn to_source(&self) -> String {
        if self.target.is_zero() {
            self.query.to_source()
        } else {
            format!("{} WITH {}", self.query.to_source(), self.target)
        }
    }
}

fn monomial(c: &mut Cursor) -> Result<(Monomial, Tok), ParseError> {
    let first = c.peek().cloned().ok_or_else(|| c.eof_error("a monomial"))?;
    if let Kind::Number(n) = &first.kind {
        c.next();
        if n != "1" {
            return Err(first.error(format!("expected a monomial, found `{n}`")));
        }
        return Ok((Monomial::one(), first));
    }
    let mut vars = Vec::new();
    loop {
        let (v, _) = c.ident("a provenance variable")?;
        vars.push(v);
        if !(c.eat_sym('*') || c.eat_sym('·') || c.eat_sym('×')) {
            break;
        }
    }
    Ok((
        Monomial::from_factors(vars.iter().map(ProvVariable::new), SemiringMode::Free),
        first,
    ))
}

fn role(c: &mut Cursor) -> Result<Role, ParseError> {
    if c.is_keyword("inv") {
        c.next();
        c.sym('(')?;
        let (r, _) = c.ident("a role name")?;
        c.sym(')')?;
        Ok(Role::inv(r.as_str()))
    } else {
        let (r, _) = c.ident("a role name")?;
        Ok(Role::named(r.as_str()))
    }
}

fn basic(c: &mut Cursor) -> Result<BasicConcept, ParseError> {
    if c.eat_keyword("exists") {
        Ok(BasicConcept::Exists(role(c)?))
    } else {
        let (a, _) = c.ident("a concept name or `exists`")?;
        Ok(BasicConcept::Atomic(name(&a)))
    }
}

fn axiom(c: &mut Cursor) -> Result<AnnotatedAxiom, ParseError> {
    let is_role = c.is_keyword("inv")
        || matches!(c.ahead(1), Some(Tok { kind: Kind::Ident(s), .. }) if s == "subrole");
    let axiom = if is_role {
        let lhs = role(c)?;
        if !c.eat_keyword("subrole") {
            return Err(c.unexpected("`subrole`"));
        }
        let negated = c.eat_keyword("not");
        let rhs = role(c)?;
        Axiom::Role {
            lhs,
            rhs: if negated {
                RoleExpr::Not(rhs)
            } else {
                RoleExpr::Basic(rhs)
            },
        }
    } else {
        let lhs = basic(c)?;
        if !c.eat_keyword("sub") {
            return Err(c.unexpected("`sub`"));
        }
        let negated = c.eat_keyword("not");
        let rhs = basic(c)?;
        Axiom::Concept {
            lhs,
            rhs: if negated {
                ConceptExpr::Not(rhs)
            } else {
                ConceptExpr::Basic(rhs)
            },
        }
    };
    let annotation = if c.eat_sym('@') {
        let (m, at) = monomial(c)?;
        if m.is_one() && axiom.is_positive() {
            return Err(at.error("a positive inclusion needs an annotation other than `1`"));
        }
        m
    } else if axiom.is_positive() {
        return Err(match c.peek() {
            Some(t) => t.error(format!("expected `@`, found {}", t.describe())),
            None => c.eof_error("`@` and the annotation of the positive inclusion"),
        });
    } else {
        Monomial::one()
    };
    c.finish()?;
    Ok(AnnotatedAxiom::new(axiom, annotation))
}

pub fn parse_ontology(src: &str) -> Result<Vec<AnnotatedAxiom>, ParseError> {
    lines(lex(src)?)
        .iter()
        .map(|line| axiom(&mut Cursor::new(line, end_of(line, src))))
        .collect()
}

type Arg = (String, Tok);

fn arg_list(c: &mut Cursor, what: &str) -> Result<(Vec<Arg>, Option<Arg>), ParseError> {
    c.sym('(')?;
    let mut args = Vec::new();
    let mut prov = None;
    loop {
        if c.eat_sym('@') {
            let (v, t) = c.ident("a provenance variable")?;
            prov = Some((v, t.clone()));
            c.sym(')')?;
            break;
        }
        let (a, t) = c.ident(what)?;
        args.push((a, t.clone()));
        if c.eat_sym(')') {
            break;
        }
        c.sym(',')?;
    }
    Ok((args, prov))
}

fn rule(c: &mut Cursor, fresh: &mut usize) -> Result<AnnotatedRule, ParseError> {
    let (head_name, head_tok) = c.ident("a concept or role name")?;
    let head_tok = head_tok.clone();
    let (head_args, head_prov) = arg_list(c, "a rule variable")?;
    if let Some((_, t)) = head_prov {
        return Err(t.error("rule heads carry no provenance position"));
    }
    let head = match head_args.as_slice() {
        [(x, _)] => RuleHead::Concept {
            concept: name(&head_name),
            arg: name(x),
        },
        [(x, _), (y, _)] => RuleHead::Role {
            role: name(&head_name),
            subject: name(x),
            object: name(y),
            pair_alias: false,
        },
        _ => return Err(head_tok.error("a rule head has one or two arguments")),
    };
    match c.next() {
        Some(Tok {
            kind: Kind::Arrow, ..
        }) => {}
        _ => {
            c.back();
            return Err(c.unexpected("`<-`"));
        }
    }
    let mut body = Vec::new();
    loop {
        let (p, _) = c.ident("a source predicate")?;
        let (args, prov) = arg_list(c, "a rule variable")?;
        let prov = match prov {
            Some((v, _)) => name(&v),
            None => {
                *fresh += 1;
                name(&format!("_W{fresh}"))
            }
        };
        body.push(BodyAtom {
            predicate: name(&p),
            args: args.iter().map(|(a, _)| name(a)).collect(),
            prov,
        });
        if !c.eat_sym(',') {
            break;
        }
    }
    let annotation = if c.eat_sym('@') {
        monomial(c)?.0
    } else {
        Monomial::one()
    };
    c.finish()?;
    let r = AnnotatedRule {
        head,
        body,
        annotation,
    };
    r.validate()
        .map_err(|e| head_tok.error(e.to_string()))?;
    Ok(r)
}

pub fn parse_mapping(src: &str) -> Result<Vec<AnnotatedRule>, ParseError> {
    let mut fresh = 0;
    lines(lex(src)?)
        .iter()
        .map(|line| rule(&mut Cursor::new(line, end_of(line, src)), &mut fresh))
        .collect()
}

pub fn parse_data(src: &str) -> Result<AnnotatedDataInstance, ParseError> {
    let mut data = AnnotatedDataInstance::default();
    for line in lines(lex(src)?) {
        let mut c = Cursor::new(&line, end_of(&line, src));
        let (p, _) = c.ident("a source predicate")?;
        let mut values = Vec::new();
        loop {
            c.sym(',')?;
            if c.eat_sym('@') {
                break;
            }
            match c.next() {
                Some(Tok {
                    kind: Kind::Ident(v) | Kind::Number(v),
                    ..
                }) => values.push(name(v)),
                _ => {
                    c.back();
                    return Err(c.unexpected("a value or `@`"));
                }
            }
        }
        let (v, _) = c.ident("a provenance variable")?;
        c.finish()?;
        if values.is_empty() {
            return Err(line[0].error("a tuple needs at least one value"));
        }
        data.insert(name(&p), values, ProvVariable::new(v));
    }
    Ok(data)
}

/// Maps a character index inside `src[offset..]` to a line and column of
/// `src`.
fn locate(src: &str, offset: usize, chars: usize) -> (usize, usize) {
    let mut line = src[..offset].matches('\n').count() + 1;
    let mut col = src[..offset].rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    for ch in src[offset..].chars().take(chars) {
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn strip_comments(s: &str) -> String {
    s.lines()
        .map(|l| match l.find('#') {
            Some(i) => format!("{}{}", &l[..i], " ".repeat(l[i..].chars().count())),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_query(src: &str, mode: SemiringMode) -> Result<QuerySpec, ParseError> {
    let toks = lex(src)?;
    let with = toks
        .iter()
        .position(|t| matches!(&t.kind, Kind::Ident(s) if s == "WITH"));
    let head = &toks[..with.unwrap_or(toks.len())];
    let mut c = Cursor::new(head, end_of(head, src));
    if !c.eat_keyword("ASK") {
        return Err(c.unexpected("`ASK`"));
    }
    let mut vars: BTreeSet<String> = BTreeSet::new();
    if !c.is_sym(':') {
        loop {
            let (v, t) = c.ident("a variable")?;
            if !vars.insert(v.clone()) {
                return Err(t.error(format!("variable `{v}` listed twice")));
            }
            if !c.eat_sym(',') {
                break;
            }
        }
    }
    c.sym(':')?;
    let mut atoms = Vec::new();
    let mut fresh = 0usize;
    let mut term_vars: BTreeSet<String> = BTreeSet::new();
    let mut prov_vars: BTreeSet<String> = BTreeSet::new();
    loop {
        let (p, ptok) = c.ident("a concept or role name")?;
        let ptok = ptok.clone();
        c.sym('(')?;
        let mut args = Vec::new();
        let mut ann = None;
        loop {
            if c.eat_sym('@') {
                let t = c.peek().cloned().ok_or_else(|| c.eof_error("a provenance term"))?;
                let is_var = matches!(&t.kind, Kind::Ident(s) if vars.contains(s))
                    && !matches!(c.ahead(1), Some(Tok { kind: Kind::Sym('*' | '·' | '×'), .. }));
                if is_var {
                    let (v, _) = c.ident("a provenance variable")?;
                    prov_vars.insert(v.clone());
                    ann = Some(ProvTerm::Var(name(&v)));
                } else {
                    let (m, at) = monomial(&mut c)?;
                    if m.is_one() {
                        return Err(at.error("a provenance constant must contain a variable"));
                    }
                    ann = Some(ProvTerm::Mono(m.normalize(mode)));
                }
                c.sym(')')?;
                break;
            }
            match c.next() {
                Some(Tok {
                    kind: Kind::Ident(s),
                    ..
                }) => {
                    if s == "_" {
                        args.push(Term::Blank);
                    } else if vars.contains(s) {
                        term_vars.insert(s.clone());
                        args.push(Term::Var(name(s)));
                    } else {
                        args.push(Term::Ind(name(s)));
                    }
                }
                Some(Tok {
                    kind: Kind::Number(s),
                    ..
                }) => args.push(Term::Ind(name(s))),
                _ => {
                    c.back();
                    return Err(c.unexpected("a term or `@`"));
                }
            }
            if c.eat_sym(')') {
                break;
            }
            c.sym(',')?;
        }
        let ann = ann.unwrap_or_else(|| {
            fresh += 1;
            let mut v = format!("_z{fresh}");
            while vars.contains(&v) {
                fresh += 1;
                v = format!("_z{fresh}");
            }
            ProvTerm::Var(name(&v))
        });
        let pred = match args.len() {
            1 => Pred::Concept(name(&p)),
            2 => Pred::Role(name(&p)),
            _ => return Err(ptok.error("an atom has one or two terms")),
        };
        atoms.push(Atom { pred, args, ann });
        if !c.eat_keyword("AND") {
            break;
        }
    }
    c.finish()?;
    if let Some(v) = term_vars.intersection(&prov_vars).next() {
        return Err(ParseError::new(
            head[0].line,
            head[0].column,
            format!("`{v}` is used both as a term and as a provenance variable"),
        ));
    }
    let target = match with {
        None => Polynomial::zero(),
        Some(i) => {
            let t = &toks[i];
            let start = t.offset + "WITH".len();
            let rest = strip_comments(&src[start..]);
            if rest.trim().is_empty() {
                return Err(t.error("expected a polynomial after `WITH`"));
            }
            parse_polynomial(&rest, mode).map_err(|e| {
                let (line, column) = locate(src, start, e.column.saturating_sub(1));
                ParseError::new(line, column, e.message)
            })?
        }
    };
    Ok(QuerySpec {
        query: Query::new(atoms),
        target,
    })
}

pub fn render_ontology(ontology: &[AnnotatedAxiom]) -> String {
    ontology.iter().map(|a| format!("{a}\n")).collect()
}

pub fn render_mapping(mapping: &[AnnotatedRule]) -> String {
    mapping.iter().map(|r| format!("{r}\n")).collect()
}

pub fn render_data(data: &AnnotatedDataInstance) -> String {
    data.to_string()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn located<T>(path: &Path, r: Result<T, ParseError>) -> Result<T> {
    r.map_err(|e| Error::Parse(e.in_file(path.display().to_string())))
}

/// Reads an instance from files; a missing file stands for an empty part.
pub fn load_instance(
    ontology: Option<&Path>,
    mapping: Option<&Path>,
    data: Option<&Path>,
    mode: SemiringMode,
) -> Result<AnnotatedOBDAInstance> {
    let ontology = match ontology {
        Some(p) => located(p, parse_ontology(&read(p)?))?,
        None => Vec::new(),
    };
    let mapping = match mapping {
        Some(p) => located(p, parse_mapping(&read(p)?))?,
        None => Vec::new(),
    };
    let data = match data {
        Some(p) => located(p, parse_data(&read(p)?))?,
        None => AnnotatedDataInstance::default(),
    };
    AnnotatedOBDAInstance::new(ontology, mapping, data, mode)
}

pub fn load_query(path: &Path, mode: SemiringMode) -> Result<QuerySpec> {
    located(path, parse_query(&read(path)?, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ontology_lines() {
        let src = "exists headGov sub Mayor @ s  # inclusion\n\
                   Mayor sub exists inv(R) @ t\n\
                   A sub not B\n\
                   R subrole inv(S) @ u*v\n\
                   inv(R) subrole not S\n";
        let o = parse_ontology(src).unwrap();
        assert_eq!(o.len(), 5);
        assert_eq!(o[0].to_string(), "exists headGov sub Mayor @ s");
        assert_eq!(o[1].to_string(), "Mayor sub exists inv(R) @ t");
        assert_eq!(o[3].annotation, Monomial::parse_free("u*v"));
        assert!(!o[4].axiom.is_positive());
        assert_eq!(parse_ontology(&render_ontology(&o)).unwrap(), o);
    }

    #[test]
    fn ontology_errors_are_located() {
        let e = parse_ontology("A sub B @ s\nA sub B").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        let e = parse_ontology("A sub B @ 1").unwrap_err();
        assert_eq!((e.line, e.column), (1, 11));
        let e = parse_ontology("A sup B @ s").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }

    #[test]
    fn mapping_rules() {
        let src = "City(Y) <- Mayors(X,Y,@W) @ m\nheadGov(X,Y) <- Mayors(X,Y,@W) @ n\n\
                   R(X,Y) <- P(X,Z,@W1), Q(Z,Y,@W2)\n";
        let m = parse_mapping(src).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].to_string(), "City(Y) <- Mayors(X,Y,@W) @ m");
        assert!(m[2].annotation.is_one());
        assert_eq!(parse_mapping(&render_mapping(&m)).unwrap(), m);
        let e = parse_mapping("City(Y) <- Mayors(X,Z,@W)").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn data_lines() {
        let d = parse_data("Mayors, Renier, Venice, @p\nMayors, Brugnaro, Venice, @q\nAge, Renier, 42, @r\n").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(parse_data(&render_data(&d)).unwrap(), d);
        let e = parse_data("Mayors, Renier, Venice").unwrap_err();
        assert_eq!((e.line, e.column), (1, 23));
    }

    #[test]
    fn queries() {
        let q = parse_query(
            "ASK x,y,s: headGov(x,y,@s) AND City(y,@z*n) WITH (s*t) + (s*r)",
            SemiringMode::Free,
        )
        .unwrap();
        assert_eq!(q.query.atoms.len(), 2);
        assert_eq!(q.query.atoms[0].ann, ProvTerm::Var(name("s")));
        assert_eq!(q.query.atoms[1].ann, ProvTerm::Mono(Monomial::parse_free("n*z")));
        assert_eq!(q.target.to_string(), "r*s + s*t");
        assert_eq!(parse_query(&q.to_source(), SemiringMode::Free).unwrap(), q);

        let q = parse_query("ASK x: Mayor(x) AND headGov(x, Venice)", SemiringMode::Free).unwrap();
        assert!(q.query.is_standard());
        assert_eq!(q.query.atoms[1].args[1], Term::Ind(name("Venice")));
        assert!(q.target.is_zero());
        assert_eq!(parse_query(&q.to_source(), SemiringMode::Free).unwrap(), q);
    }

    #[test]
    fn query_errors_are_located() {
        let e = parse_query("ASK x: A(x) AND\n  B(x,y,z)", SemiringMode::Free).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_query("ASK x: A(x) WITH s +", SemiringMode::Free).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.column >= 17);
    }
}
