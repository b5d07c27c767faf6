use std::fmt;

use crate::error::{Error, Result};

/// A generator or its formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    /// Column in a coset table: `2g` for the generator, `2g + 1` for its
    /// inverse.
    pub fn column(self) -> usize {
        2 * self.gen + usize::from(self.inverse)
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn generator(gen: usize) -> Self {
        Word(vec![Letter::new(gen, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        Word::new((0..k.unsigned_abs()).flat_map(|_| base.0.iter().copied()))
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.gen).max()
    }

    /// Renders with generator names, collapsing runs into powers; the empty
    /// word is `1`.
    pub fn display<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = &self.word.0;
        if letters.is_empty() {
            return write!(f, "1");
        }
        let mut i = 0;
        let mut first = true;
        while i < letters.len() {
            let mut j = i;
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let name = &self.names[letters[i].gen];
            let run = (j - i) as i64;
            let exp = if letters[i].inverse { -run } else { run };
            if exp == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{exp}")?;
            }
            i = j;
        }
        Ok(())
    }
}

/// A syntax error in a word, with the 0-based character column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSyntaxError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for WordSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column + 1, self.message)
    }
}

struct WordParser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a [String],
}

impl WordParser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> std::result::Result<T, WordSyntaxError> {
        Err(WordSyntaxError {
            column: self.pos,
            message: message.into(),
        })
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

    fn word(&mut self) -> std::result::Result<Word, WordSyntaxError> {
        let mut w = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            w = w.concat(&self.factor()?);
        }
        Ok(w)
    }

    fn factor(&mut self) -> std::result::Result<Word, WordSyntaxError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> std::result::Result<i64, WordSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.chars.get(self.pos), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().or_else(|_| {
            self.pos = start;
            self.err("expected an integer exponent")
        })
    }

    fn atom(&mut self) -> std::result::Result<Word, WordSyntaxError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let w = self.word()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(w)
            }
            Some('1') => {
                self.pos += 1;
                Ok(Word::empty())
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len() && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match self.names.iter().position(|n| *n == name) {
                    Some(g) => Ok(Word::generator(g)),
                    None => {
                        self.pos = start;
                        self.err(format!("unknown generator '{name}'"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of word"),
        }
    }
}

/// Parses `a*b^-1*(a*b)^3`, with `1` for the empty word.
pub fn parse_word(text: &str, names: &[String]) -> std::result::Result<Word, WordSyntaxError> {
    let mut p = WordParser {
        chars: text.chars().collect(),
        pos: 0,
        names,
    };
    let w = p.word()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(w)
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Generators and relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if !is_name(g) {
                return Err(Error::InvalidWord(format!("'{g}' is not a valid generator name")));
            }
            if generators[..i].contains(g) {
                return Err(Error::InvalidWord(format!("generator '{g}' declared twice")));
            }
        }
        for r in &relators {
            if let Some(g) = r.max_generator() {
                if g >= generators.len() {
                    return Err(Error::InvalidWord(format!("relator uses undeclared generator {g}")));
                }
            }
        }
        let relators = relators.into_iter().filter(|r| !r.is_empty()).collect();
        Ok(Presentation { generators, relators })
    }

    /// Builds a presentation from generator names and relator strings.
    pub fn parse(generators: &[&str], relators: &[&str]) -> Result<Self> {
        let names: Vec<String> = generators.iter().map(|s| s.to_string()).collect();
        let rels = relators
            .iter()
            .map(|r| parse_word(r, &names).map_err(|e| Error::InvalidWord(format!("{r}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, rels)
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        parse_word(text, &self.generators).map_err(|e| Error::InvalidWord(format!("{text}: {e}")))
    }

    pub fn show(&self, w: &Word) -> String {
        w.display(&self.generators).to_string()
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.max_generator() {
            Some(g) if g >= self.generators.len() => {
                Err(Error::InvalidWord(format!("word uses undeclared generator {g}")))
            }
            _ => Ok(()),
        }
    }
}

/// An endomorphism given by the image word of every generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEndo {
    images: Vec<Word>,
}

impl WordEndo {
    pub fn new(pres: &Presentation, images: Vec<Word>) -> Result<Self> {
        if images.len() != pres.num_generators() {
            return Err(Error::DimensionMismatch {
                expected: pres.num_generators(),
                found: images.len(),
            });
        }
        images.iter().try_for_each(|w| pres.check_word(w))?;
        Ok(WordEndo { images })
    }

    pub fn identity(pres: &Presentation) -> Self {
        WordEndo {
            images: (0..pres.num_generators()).map(Word::generator).collect(),
        }
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// `wφ`, freely reduced.
    pub fn apply(&self, w: &Word) -> Word {
        Word::new(w.letters().iter().flat_map(|l| {
            let img = if l.inverse {
                self.images[l.gen].inverse()
            } else {
                self.images[l.gen].clone()
            };
            img.0
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_and_display() {
        let n = names(&["a", "b"]);
        let w = parse_word("a*b^-1*b*a^2", &n).unwrap();
        assert_eq!(w.display(&n).to_string(), "a^3");
        let w = parse_word("(a*b)^3", &n).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(parse_word("1", &n).unwrap(), Word::empty());
        assert_eq!(parse_word("(a*b)^-1", &n).unwrap().display(&n).to_string(), "b^-1*a^-1");
        assert_eq!(Word::empty().display(&n).to_string(), "1");
    }

    #[test]
    fn display_round_trips() {
        let n = names(&["x", "y"]);
        for text in ["x^2*y^-3*x", "y", "1", "x^-1*y*x"] {
            let w = parse_word(text, &n).unwrap();
            let again = parse_word(&w.display(&n).to_string(), &n).unwrap();
            assert_eq!(w, again);
        }
    }

    #[test]
    fn positioned_errors() {
        let n = names(&["a"]);
        let e = parse_word("a*c", &n).unwrap_err();
        assert_eq!(e.column, 2);
        assert!(e.message.contains("unknown generator"));
        assert!(parse_word("a^", &n).is_err());
        assert!(parse_word("(a", &n).is_err());
        assert!(parse_word("a a", &n).is_err());
    }

    #[test]
    fn presentations_validate_names() {
        assert!(Presentation::parse(&["a", "a"], &[]).is_err());
        assert!(Presentation::parse(&["a"], &["b"]).is_err());
        let p = Presentation::parse(&["a", "b"], &["a^2", "a*a^-1"]).unwrap();
        assert_eq!(p.relators().len(), 1);
    }

    #[test]
    fn endomorphism_substitution() {
        let p = Presentation::parse(&["a", "b"], &[]).unwrap();
        let phi = WordEndo::new(&p, vec![p.parse_word("a*b").unwrap(), p.parse_word("b^-1").unwrap()]).unwrap();
        let w = p.parse_word("a*b").unwrap();
        assert_eq!(p.show(&phi.apply(&w)), "a");
        assert!(WordEndo::new(&p, vec![Word::empty()]).is_err());
    }
}
