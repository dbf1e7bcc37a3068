//! Functionally recursive systems and the text format that describes them.
//!
//! ```text
//! alphabet 2
//! # the binary adding machine
//! a = (e, a) [1 0]
//! b = (a, b)
//! ```
//!
//! A definition lists one section word per letter followed by the root
//! permutation as an image table; an omitted permutation is the identity.
//! Words are `e` or factors `sym` / `sym^-1` joined by `*`.

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::perm::{Alphabet, Perm};

/// One factor `sym` or `sym^-1` of a section word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolPower {
    pub name: String,
    pub inverse: bool,
}

/// A word over symbols; the empty word is the trivial automorphism `e`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<SymbolPower>);

impl Word {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbol(name: &str) -> Self {
        Word(vec![SymbolPower {
            name: name.to_string(),
            inverse: false,
        }])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let s = self
            .0
            .iter()
            .map(|p| {
                if p.inverse {
                    format!("{}^-1", p.name)
                } else {
                    p.name.clone()
                }
            })
            .join("*");
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub perm: Perm,
    pub sections: Vec<Word>,
}

/// A set of automorphisms `g_i = (w_i0, .., w_i(d-1)) pi_i` defined by mutual recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FRSystem {
    pub alphabet: Alphabet,
    pub definitions: Vec<Definition>,
}

impl FRSystem {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    /// Checks the structural invariants: unique names, `d` sections each, no undefined references.
    pub fn validate(&self) -> Result<()> {
        let d = self.alphabet.degree();
        let mut names = HashSet::new();
        for def in &self.definitions {
            if def.name == "e" {
                return Err(Error::DuplicateSymbol("e".into()));
            }
            if !names.insert(def.name.as_str()) {
                return Err(Error::DuplicateSymbol(def.name.clone()));
            }
            if def.sections.len() != d {
                return Err(Error::SectionCount {
                    name: def.name.clone(),
                    expected: d,
                    found: def.sections.len(),
                });
            }
            if def.perm.degree() != d {
                return Err(Error::NotBijective(def.perm.images().collect()));
            }
        }
        for def in &self.definitions {
            for w in &def.sections {
                for p in &w.0 {
                    if !names.contains(p.name.as_str()) {
                        return Err(Error::UnknownSymbol(p.name.clone()));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for FRSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet {}", self.alphabet.degree())?;
        for def in &self.definitions {
            write!(f, "{} = ({})", def.name, def.sections.iter().join(", "))?;
            if !def.perm.is_identity() {
                write!(f, " {}", def.perm.literal())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parses a whole system.
pub fn parse_system(text: &str) -> Result<FRSystem> {
    let mut alphabet = None;
    let mut definitions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, line_no);
        match alphabet {
            None => {
                cur.skip_ws();
                cur.keyword("alphabet")?;
                cur.skip_ws();
                let d = cur.number()?;
                cur.expect_end()?;
                alphabet = Some(Alphabet::new(d)?);
            }
            Some(alpha) => definitions.push(cur.definition(alpha)?),
        }
    }
    let alphabet = alphabet.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "expected `alphabet <d>`".into(),
    })?;
    let system = FRSystem {
        alphabet,
        definitions,
    };
    system.validate()?;
    Ok(system)
}

/// Parses a section word such as `a*b^-1` or `e`.
pub fn parse_word(text: &str) -> Result<Word> {
    let mut cur = Cursor::new(text, 1);
    cur.skip_ws();
    let w = cur.word()?;
    cur.expect_end()?;
    Ok(w)
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let ident = self.ident()?;
        if ident == kw {
            Ok(())
        } else {
            self.err(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.pos += 1,
            _ => return self.err("expected a name"),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().or_else(|_| self.err("number out of range"))
    }

    fn word(&mut self) -> Result<Word> {
        let mut factors = Vec::new();
        loop {
            let name = self.ident()?;
            let mut inverse = false;
            if self.eat('^') {
                if !self.eat('-') {
                    return self.err("only the exponent `^-1` is allowed");
                }
                let start = self.pos;
                if self.number()? != 1 {
                    self.pos = start;
                    return self.err("only the exponent `^-1` is allowed");
                }
                inverse = true;
            }
            if name == "e" {
                if inverse {
                    return self.err("`e^-1` is not allowed; write `e`");
                }
            } else {
                factors.push(SymbolPower { name, inverse });
            }
            if !self.eat('*') {
                break;
            }
        }
        Ok(Word(factors))
    }

    fn definition(&mut self, alphabet: Alphabet) -> Result<Definition> {
        let name = self.ident()?;
        if name == "e" {
            return self.err("`e` is reserved for the trivial automorphism");
        }
        self.expect('=')?;
        self.expect('(')?;
        let mut sections = vec![self.word()?];
        while self.eat(',') {
            sections.push(self.word()?);
        }
        self.expect(')')?;
        let d = alphabet.degree();
        if sections.len() != d {
            return Err(Error::SectionCount {
                name,
                expected: d,
                found: sections.len(),
            });
        }
        let perm = if self.eat('[') {
            let mut images = Vec::new();
            loop {
                self.skip_ws();
                if self.eat(']') {
                    break;
                }
                images.push(self.number()?);
            }
            if images.len() != d {
                return Err(Error::NotBijective(images));
            }
            Perm::from_images(images)?
        } else {
            Perm::identity(d)
        };
        self.expect_end()?;
        Ok(Definition {
            name,
            perm,
            sections,
        })
    }
}
