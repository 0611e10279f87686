use crate::error::ParseError;
use crate::semiring::{is_ident_char, is_ident_start};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Ident(String),
    Number(String),
    Sym(char),
    Arrow,
}

#[derive(Clone, Debug)]
pub struct Tok {
    pub kind: Kind,
    pub line: usize,
    pub column: usize,
    /// Byte offset into the source.
    pub offset: usize,
}

impl Tok {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Ident(s) | Kind::Number(s) => format!("`{s}`"),
            Kind::Sym(c) => format!("`{c}`"),
            Kind::Arrow => "`<-`".into(),
        }
    }
}

/// Splits the source into tokens; `#` starts a comment running to the end
/// of the line.
pub fn lex(src: &str) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut it = src.char_indices().peekable();
    while let Some(&(offset, c)) = it.peek() {
        let start_col = column;
        if c == '\n' {
            it.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            column += 1;
            continue;
        }
        if c == '#' {
            while it.peek().is_some_and(|&(_, c)| c != '\n') {
                it.next();
            }
            continue;
        }
        let kind = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&(_, c)) = it.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                it.next();
                column += 1;
            }
            Kind::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = it.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                it.next();
                column += 1;
            }
            Kind::Number(s)
        } else if c == '<' {
            it.next();
            column += 1;
            if it.peek().map(|&(_, c)| c) == Some('-') {
                it.next();
                column += 1;
                Kind::Arrow
            } else {
                return Err(ParseError::new(line, start_col, "expected `<-`"));
            }
        } else if "()[],@*:+^·×".contains(c) {
            it.next();
            column += 1;
            Kind::Sym(c)
        } else {
            return Err(ParseError::new(line, start_col, format!("unexpected character `{c}`")));
        };
        out.push(Tok {
            kind,
            line,
            column: start_col,
            offset,
        });
    }
    Ok(out)
}

/// Groups tokens by source line.
pub fn lines(toks: Vec<Tok>) -> Vec<Vec<Tok>> {
    let mut out: Vec<Vec<Tok>> = Vec::new();
    for t in toks {
        match out.last_mut() {
            Some(cur) if cur[0].line == t.line => cur.push(t),
            _ => out.push(vec![t]),
        }
    }
    out
}

/// A cursor over the tokens of one construct.
pub struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    /// Position reported when input ends early.
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Tok], end: (usize, usize)) -> Self {
        Cursor { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    pub fn ahead(&self, n: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + n)
    }

    pub fn back(&mut self) {
        self.pos -= 1;
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    pub fn eof_error(&self, expected: &str) -> ParseError {
        ParseError::new(self.end.0, self.end.1, format!("expected {expected}, found end of input"))
    }

    pub fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => t.error(format!("expected {expected}, found {}", t.describe())),
            None => self.eof_error(expected),
        }
    }

    pub fn ident(&mut self, expected: &str) -> Result<(String, &'a Tok), ParseError> {
        match self.peek() {
            Some(t @ Tok {
                kind: Kind::Ident(s),
                ..
            }) => {
                self.pos += 1;
                Ok((s.clone(), t))
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    pub fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok { kind: Kind::Sym(s), .. }) if *s == c)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok { kind: Kind::Ident(s), .. }) if s == kw)
    }

    pub fn sym(&mut self, c: char) -> Result<&'a Tok, ParseError> {
        if self.is_sym(c) {
            Ok(self.next().expect("peeked"))
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) => Err(t.error(format!("unexpected {}", t.describe()))),
            None => Ok(()),
        }
    }
}

/// End-of-line position of a token group, for errors about missing input.
pub fn end_of(toks: &[Tok], src: &str) -> (usize, usize) {
    match toks.last() {
        Some(t) => {
            let line_start = src[..t.offset].rfind('\n').map_or(0, |i| i + 1);
            let line_end = src[t.offset..].find('\n').map_or(src.len(), |i| t.offset + i);
            let text = &src[line_start..line_end];
            let trimmed = text.split('#').next().unwrap_or("").trim_end();
            (t.line, trimmed.chars().count() + 1)
        }
        None => (1, 1),
    }
}
