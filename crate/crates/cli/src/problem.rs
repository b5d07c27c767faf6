//! Problem files: a line-oriented description of one group, one
//! endomorphism, one target set and a list of queries.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use phi_spectrum::finite::FiniteGroupTable;
use phi_spectrum::fp::{parse_word, Word};
use phi_spectrum::lattice::IntVector;

/// The grammar, as printed by `phispec formats`.
pub const GRAMMAR: &str = "\
Problem files are read line by line. `#` starts a comment. The first line
must be `backend abelian`, `backend finite` or `backend fp`. Declarations
must precede the lines that refer to them.

Common lines
  option horizon N            orbit search horizon (default 64)
  option coset-cap N          coset enumeration cap (default 50000)
  option quotient-cap N       finite quotient size cap (default 20000)
  option strict-invariant-core
                              fp: use the fully invariant core
  query order ELEM            relative order of ELEM
  query spectrum              spectrum of the target
  query preorder N            elements of relative order exactly N
  query stable-image ELEM     abelian, finite: is ELEM in the stable image
  query period ELEM           abelian, finite: is ELEM periodic
  query coset-analysis        finite, fp: stable image against cosets
  query auto-spectrum         finite: spectrum via the cover condition

abelian (Z^m, endomorphism = integer matrix acting on row vectors)
  matrix [[2,1],[0,1]]
  target finite [8,0] [2,0]   finite target, zero or more vectors
  target cosets [1,0] lattice [[3,0],[0,1]]
                              union of offset + lattice
  ELEM is a vector such as [1,0]

finite (elements are indices 0..n-1, identity 0)
  group cyclic N | dihedral N | dicyclic N | symmetric N | quaternion
        | alternating4 | trivial
  group perms [1,2,0] [1,0,2] generated by permutations of 0..d-1
  group table [[0,1],[1,0]]   explicit multiplication table
  endo map [0,2,4,0,2,4]      image of every element
  endo generators 1 -> 2, 3 -> 0
                              images of generating elements
  target finite 0 3           finite target
  target cosets 1 4 subgroup 0 3
                              union of cosets r*S
  ELEM is an element index

fp (finitely presented group)
  generators a b
  relator a^2                 one relator per line
  endo a -> b*a^-1            one line per generator
  subgroup a^3, b             generators of the finite-index subgroup H
  target cosets 1, a          target = union of H*w
  normal a^6                  normal subgroup for coset-analysis
  ELEM is a word: names, `*`, `^k` with k signed, parentheses, `1`
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendTag {
    Abelian,
    Finite,
    Fp,
}

impl fmt::Display for BackendTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendTag::Abelian => "abelian",
            BackendTag::Finite => "finite",
            BackendTag::Fp => "fp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbelianTarget {
    Finite(Vec<IntVector>),
    Cosets { reps: Vec<IntVector>, lattice: Vec<IntVector> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianProblem {
    pub matrix: Vec<Vec<BigInt>>,
    pub target: Option<AbelianTarget>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Trivial,
    Cyclic(usize),
    Dihedral(usize),
    Dicyclic(usize),
    Symmetric(usize),
    Quaternion,
    Alternating4,
    Perms(Vec<Vec<usize>>),
    Table(Vec<Vec<usize>>),
}

impl GroupSpec {
    pub fn build(&self) -> phi_spectrum::Result<FiniteGroupTable> {
        use phi_spectrum::finite::{group_from_permutations, DEFAULT_CLOSURE_CAP};
        Ok(match self {
            GroupSpec::Trivial => FiniteGroupTable::trivial(),
            GroupSpec::Cyclic(n) => FiniteGroupTable::cyclic(*n),
            GroupSpec::Dihedral(n) => FiniteGroupTable::dihedral(*n),
            GroupSpec::Dicyclic(n) => FiniteGroupTable::dicyclic(*n),
            GroupSpec::Symmetric(n) => FiniteGroupTable::symmetric(*n)?,
            GroupSpec::Quaternion => FiniteGroupTable::quaternion(),
            GroupSpec::Alternating4 => FiniteGroupTable::alternating4(),
            GroupSpec::Perms(p) => group_from_permutations(p, DEFAULT_CLOSURE_CAP)?,
            GroupSpec::Table(t) => FiniteGroupTable::from_table(t.clone())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteEndoSpec {
    Map(Vec<usize>),
    Generators(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteTarget {
    Finite(Vec<usize>),
    Cosets { reps: Vec<usize>, subgroup: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteProblem {
    pub group: GroupSpec,
    pub endo: Option<FiniteEndoSpec>,
    pub target: Option<FiniteTarget>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpProblem {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
    /// One image per generator.
    pub endo: Vec<Word>,
    pub subgroup: Vec<Word>,
    pub target: Option<Vec<Word>>,
    pub normal: Option<Vec<Word>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Abelian(AbelianProblem),
    Finite(FiniteProblem),
    Fp(FpProblem),
}

impl Payload {
    pub fn tag(&self) -> BackendTag {
        match self {
            Payload::Abelian(_) => BackendTag::Abelian,
            Payload::Finite(_) => BackendTag::Finite,
            Payload::Fp(_) => BackendTag::Fp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elem {
    Vector(IntVector),
    Index(usize),
    Word(Word),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Order(Elem),
    Spectrum,
    Preorder(u64),
    StableImage(Elem),
    Period(Elem),
    CosetAnalysis,
    AutoSpectrum,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    pub horizon: Option<u64>,
    pub coset_cap: Option<usize>,
    pub quotient_cap: Option<usize>,
    pub strict_invariant_core: bool,
}

impl Options {
    /// `self`, with every setting present in `over` replaced.
    pub fn overridden_by(&self, over: &Options) -> Options {
        Options {
            horizon: over.horizon.or(self.horizon),
            coset_cap: over.coset_cap.or(self.coset_cap),
            quotient_cap: over.quotient_cap.or(self.quotient_cap),
            strict_invariant_core: self.strict_invariant_core || over.strict_invariant_core,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub payload: Payload,
    pub queries: Vec<Query>,
    pub options: Options,
}

/// A line being parsed, with 0-based character positions.
struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Cursor {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        self.err_at(self.pos, message)
    }

    fn err_at<T>(&self, pos: usize, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            line: self.line,
            column: pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn finish(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        let matches = self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    /// A keyword made of letters, digits, `-` and `_`.
    fn keyword(&mut self) -> PResult<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_alphanumeric() || *c == '-' || *c == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a keyword");
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn integer_text(&mut self) -> PResult<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.chars.get(self.pos), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if !text.chars().any(|c| c.is_ascii_digit()) {
            self.pos = start;
            return self.err("expected an integer");
        }
        Ok((start, text))
    }

    fn bigint(&mut self) -> PResult<BigInt> {
        let (start, text) = self.integer_text()?;
        BigInt::from_str(&text).or_else(|_| self.err_at(start, "invalid integer"))
    }

    fn natural<T: FromStr>(&mut self) -> PResult<T> {
        let (start, text) = self.integer_text()?;
        text.parse().or_else(|_| self.err_at(start, "expected a nonnegative integer"))
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn vector(&mut self) -> PResult<(usize, IntVector)> {
        self.skip_ws();
        let start = self.pos;
        Ok((start, IntVector(self.list(Cursor::bigint)?)))
    }

    /// The rest of the line, split at commas, each piece with its start.
    fn comma_pieces(&mut self) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        let mut start = self.pos;
        let mut piece = String::new();
        for i in self.pos..self.chars.len() {
            if self.chars[i] == ',' {
                out.push((start, std::mem::take(&mut piece)));
                start = i + 1;
            } else {
                piece.push(self.chars[i]);
            }
        }
        out.push((start, piece));
        self.pos = self.chars.len();
        if out.len() == 1 && out[0].1.trim().is_empty() {
            return Vec::new();
        }
        out
    }

    fn word(&self, start: usize, text: &str, names: &[String]) -> PResult<Word> {
        parse_word(text, names).or_else(|e| self.err_at(start + e.column, e.message))
    }

    fn words(&mut self, names: &[String]) -> PResult<Vec<Word>> {
        let pieces = self.comma_pieces();
        pieces.iter().map(|(s, t)| self.word(*s, t, names)).collect()
    }
}

enum State {
    Abelian {
        matrix: Option<Vec<Vec<BigInt>>>,
        target: Option<AbelianTarget>,
    },
    Finite {
        group: Option<(GroupSpec, usize)>,
        endo: Option<FiniteEndoSpec>,
        target: Option<FiniteTarget>,
    },
    Fp {
        generators: Option<Vec<String>>,
        relators: Vec<Word>,
        endo: Vec<Option<Word>>,
        subgroup: Vec<Word>,
        target: Option<Vec<Word>>,
        normal: Option<Vec<Word>>,
    },
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl State {
    fn dim(&self, c: &Cursor) -> PResult<usize> {
        match self {
            State::Abelian { matrix: Some(m), .. } => Ok(m.len()),
            _ => c.err_at(0, "`matrix` must come first"),
        }
    }

    fn order(&self, c: &Cursor) -> PResult<usize> {
        match self {
            State::Finite { group: Some((_, n)), .. } => Ok(*n),
            _ => c.err_at(0, "`group` must come first"),
        }
    }

    fn names(&self, c: &Cursor) -> PResult<&[String]> {
        match self {
            State::Fp {
                generators: Some(g), ..
            } => Ok(g),
            _ => c.err_at(0, "`generators` must come first"),
        }
    }

    fn vector_of_dim(&self, c: &mut Cursor) -> PResult<IntVector> {
        let m = self.dim(c)?;
        let (start, v) = c.vector()?;
        if v.dim() != m {
            return c.err_at(start, format!("dimension mismatch: expected {m} entries, found {}", v.dim()));
        }
        Ok(v)
    }

    fn index(&self, c: &mut Cursor) -> PResult<usize> {
        let n = self.order(c)?;
        c.skip_ws();
        let start = c.pos;
        let x: usize = c.natural()?;
        if x >= n {
            return c.err_at(start, format!("element {x} is out of range for a group of order {n}"));
        }
        Ok(x)
    }

    fn elem(&self, c: &mut Cursor) -> PResult<Elem> {
        Ok(match self {
            State::Abelian { .. } => Elem::Vector(self.vector_of_dim(c)?),
            State::Finite { .. } => Elem::Index(self.index(c)?),
            State::Fp { .. } => {
                let names = self.names(c)?.to_vec();
                c.skip_ws();
                let start = c.pos;
                let text: String = c.chars[start..].iter().collect();
                c.pos = c.chars.len();
                if text.trim().is_empty() {
                    return c.err_at(start, "expected a word");
                }
                Elem::Word(c.word(start, &text, &names)?)
            }
        })
    }

    /// Parses one backend-specific declaration starting with `key`.
    fn declaration(&mut self, c: &mut Cursor, key_pos: usize, key: &str) -> PResult<()> {
        match (self, key) {
            (State::Abelian { matrix, .. }, "matrix") => {
                c.skip_ws();
                let start = c.pos;
                let rows = c.list(|c| c.list(Cursor::bigint))?;
                let m = rows.len();
                if m == 0 {
                    return c.err_at(start, "matrix must be nonempty");
                }
                if let Some(r) = rows.iter().find(|r| r.len() != m) {
                    return c.err_at(start, format!("matrix must be square: row of length {} in dimension {m}", r.len()));
                }
                if matrix.is_some() {
                    return c.err_at(key_pos, "duplicate `matrix`");
                }
                *matrix = Some(rows);
            }
            (state @ State::Abelian { .. }, "target") => {
                let (kpos, kind) = c.keyword()?;
                let t = match kind.as_str() {
                    "finite" => {
                        let mut xs = Vec::new();
                        while !c.at_end() {
                            xs.push(state.vector_of_dim(c)?);
                        }
                        AbelianTarget::Finite(xs)
                    }
                    "cosets" => {
                        let mut reps = Vec::new();
                        while c.peek() == Some('[') {
                            reps.push(state.vector_of_dim(c)?);
                        }
                        if !c.eat_str("lattice") {
                            return c.err("expected `lattice`");
                        }
                        let m = state.dim(c)?;
                        c.skip_ws();
                        let start = c.pos;
                        let rows = c.list(|c| c.list(Cursor::bigint))?;
                        if let Some(r) = rows.iter().find(|r| r.len() != m) {
                            return c.err_at(start, format!("dimension mismatch: expected {m} entries, found {}", r.len()));
                        }
                        AbelianTarget::Cosets {
                            reps,
                            lattice: rows.into_iter().map(IntVector).collect(),
                        }
                    }
                    _ => return c.err_at(kpos, "expected `finite` or `cosets`"),
                };
                let State::Abelian { target, .. } = state else { unreachable!() };
                if target.is_some() {
                    return c.err_at(key_pos, "duplicate `target`");
                }
                *target = Some(t);
            }
            (State::Finite { group, .. }, "group") => {
                let (kpos, kind) = c.keyword()?;
                let spec = match kind.as_str() {
                    "trivial" => GroupSpec::Trivial,
                    "quaternion" => GroupSpec::Quaternion,
                    "alternating4" => GroupSpec::Alternating4,
                    "cyclic" | "dihedral" | "dicyclic" | "symmetric" => {
                        c.skip_ws();
                        let start = c.pos;
                        let n: usize = c.natural()?;
                        let ok = match kind.as_str() {
                            "cyclic" => (1..=100_000).contains(&n),
                            "dihedral" | "dicyclic" => (1..=10_000).contains(&n),
                            _ => (1..=5).contains(&n),
                        };
                        if !ok {
                            return c.err_at(start, format!("unsupported size {n} for `{kind}`"));
                        }
                        match kind.as_str() {
                            "cyclic" => GroupSpec::Cyclic(n),
                            "dihedral" => GroupSpec::Dihedral(n),
                            "dicyclic" => GroupSpec::Dicyclic(n),
                            _ => GroupSpec::Symmetric(n),
                        }
                    }
                    "perms" => {
                        let mut gens = Vec::new();
                        while !c.at_end() {
                            gens.push(c.list(Cursor::natural)?);
                        }
                        GroupSpec::Perms(gens)
                    }
                    "table" => GroupSpec::Table(c.list(|c| c.list(Cursor::natural))?),
                    _ => return c.err_at(kpos, format!("unknown group family `{kind}`")),
                };
                if group.is_some() {
                    return c.err_at(key_pos, "duplicate `group`");
                }
                let built = spec.build().or_else(|e| c.err_at(kpos, e.to_string()))?;
                *group = Some((spec, built.order()));
            }
            (state @ State::Finite { .. }, "endo") => {
                let n = state.order(c)?;
                let (kpos, kind) = c.keyword()?;
                let spec = match kind.as_str() {
                    "map" => {
                        c.skip_ws();
                        let start = c.pos;
                        let map: Vec<usize> = c.list(Cursor::natural)?;
                        if map.len() != n {
                            return c.err_at(start, format!("dimension mismatch: expected {n} images, found {}", map.len()));
                        }
                        if let Some(x) = map.iter().find(|&&x| x >= n) {
                            return c.err_at(start, format!("element {x} is out of range for a group of order {n}"));
                        }
                        FiniteEndoSpec::Map(map)
                    }
                    "generators" => {
                        let mut pairs = Vec::new();
                        loop {
                            let a = state.index(c)?;
                            if !c.eat_str("->") {
                                return c.err("expected `->`");
                            }
                            let b = state.index(c)?;
                            pairs.push((a, b));
                            if !c.eat(',') {
                                break;
                            }
                        }
                        FiniteEndoSpec::Generators(pairs)
                    }
                    _ => return c.err_at(kpos, "expected `map` or `generators`"),
                };
                let State::Finite { endo, .. } = state else { unreachable!() };
                if endo.is_some() {
                    return c.err_at(key_pos, "duplicate `endo`");
                }
                *endo = Some(spec);
            }
            (state @ State::Finite { .. }, "target") => {
                let (kpos, kind) = c.keyword()?;
                let t = match kind.as_str() {
                    "finite" => {
                        let mut xs = Vec::new();
                        while !c.at_end() {
                            xs.push(state.index(c)?);
                        }
                        FiniteTarget::Finite(xs)
                    }
                    "cosets" => {
                        let mut reps = Vec::new();
                        while c.peek().is_some_and(|ch| ch.is_ascii_digit()) {
                            reps.push(state.index(c)?);
                        }
                        if !c.eat_str("subgroup") {
                            return c.err("expected `subgroup`");
                        }
                        let mut subgroup = Vec::new();
                        while !c.at_end() {
                            subgroup.push(state.index(c)?);
                        }
                        FiniteTarget::Cosets { reps, subgroup }
                    }
                    _ => return c.err_at(kpos, "expected `finite` or `cosets`"),
                };
                let State::Finite { target, .. } = state else { unreachable!() };
                if target.is_some() {
                    return c.err_at(key_pos, "duplicate `target`");
                }
                *target = Some(t);
            }
            (State::Fp { generators, endo, .. }, "generators") => {
                if generators.is_some() {
                    return c.err_at(key_pos, "duplicate `generators`");
                }
                let mut names: Vec<String> = Vec::new();
                while !c.at_end() {
                    let start = c.pos;
                    let (_, name) = c.keyword()?;
                    if !is_name(&name) {
                        return c.err_at(start, format!("invalid generator name `{name}`"));
                    }
                    if names.contains(&name) {
                        return c.err_at(start, format!("duplicate generator `{name}`"));
                    }
                    names.push(name);
                }
                *endo = vec![None; names.len()];
                *generators = Some(names);
            }
            (state @ State::Fp { .. }, "relator") => {
                let names = state.names(c)?.to_vec();
                let words = c.words(&names)?;
                let State::Fp { relators, .. } = state else { unreachable!() };
                if words.len() != 1 {
                    return c.err_at(key_pos, "expected exactly one relator");
                }
                relators.extend(words);
            }
            (state @ State::Fp { .. }, "subgroup") => {
                let names = state.names(c)?.to_vec();
                let words = c.words(&names)?;
                let State::Fp { subgroup, .. } = state else { unreachable!() };
                subgroup.extend(words);
            }
            (state @ State::Fp { .. }, "target") => {
                let (kpos, kind) = c.keyword()?;
                if kind != "cosets" {
                    return c.err_at(kpos, "expected `cosets`");
                }
                let names = state.names(c)?.to_vec();
                let words = c.words(&names)?;
                let State::Fp { target, .. } = state else { unreachable!() };
                if target.is_some() {
                    return c.err_at(key_pos, "duplicate `target`");
                }
                *target = Some(words);
            }
            (state @ State::Fp { .. }, "normal") => {
                let names = state.names(c)?.to_vec();
                let words = c.words(&names)?;
                let State::Fp { normal, .. } = state else { unreachable!() };
                if normal.is_some() {
                    return c.err_at(key_pos, "duplicate `normal`");
                }
                *normal = Some(words);
            }
            (state @ State::Fp { .. }, "endo") => {
                let names = state.names(c)?.to_vec();
                c.skip_ws();
                let gpos = c.pos;
                let (_, g) = c.keyword()?;
                let Some(gi) = names.iter().position(|n| *n == g) else {
                    return c.err_at(gpos, format!("unknown generator '{g}'"));
                };
                if !c.eat_str("->") {
                    return c.err("expected `->`");
                }
                c.skip_ws();
                let start = c.pos;
                let text: String = c.chars[start..].iter().collect();
                c.pos = c.chars.len();
                let w = c.word(start, &text, &names)?;
                let State::Fp { endo, .. } = state else { unreachable!() };
                if endo[gi].is_some() {
                    return c.err_at(gpos, format!("duplicate image for '{g}'"));
                }
                endo[gi] = Some(w);
            }
            (_, other) => return c.err_at(key_pos, format!("unknown or misplaced keyword `{other}`")),
        }
        c.finish()
    }
}

fn parse_option(c: &mut Cursor, options: &mut Options) -> PResult<()> {
    let (kpos, key) = c.keyword()?;
    match key.as_str() {
        "horizon" => options.horizon = Some(c.natural()?),
        "coset-cap" => options.coset_cap = Some(c.natural()?),
        "quotient-cap" => options.quotient_cap = Some(c.natural()?),
        "strict-invariant-core" => options.strict_invariant_core = true,
        _ => return c.err_at(kpos, format!("unknown option `{key}`")),
    }
    c.finish()
}

fn parse_query(c: &mut Cursor, state: &State) -> PResult<Query> {
    let (kpos, key) = c.keyword()?;
    let q = match key.as_str() {
        "order" => Query::Order(state.elem(c)?),
        "spectrum" => Query::Spectrum,
        "preorder" => Query::Preorder(c.natural()?),
        "stable-image" => Query::StableImage(state.elem(c)?),
        "period" => Query::Period(state.elem(c)?),
        "coset-analysis" => Query::CosetAnalysis,
        "auto-spectrum" => Query::AutoSpectrum,
        _ => return c.err_at(kpos, format!("unknown query `{key}`")),
    };
    let supported = match (&q, state) {
        (Query::StableImage(_) | Query::Period(_), State::Fp { .. }) => false,
        (Query::CosetAnalysis, State::Abelian { .. }) => false,
        (Query::AutoSpectrum, State::Abelian { .. } | State::Fp { .. }) => false,
        _ => true,
    };
    if !supported {
        return c.err_at(kpos, format!("query `{key}` is not available for this backend"));
    }
    c.finish()?;
    Ok(q)
}

/// Parses a problem file, reporting the first error with its position.
pub fn parse_problem(text: &str) -> PResult<ProblemFile> {
    let mut state: Option<State> = None;
    let mut queries = Vec::new();
    let mut options = Options::default();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut c = Cursor {
            line: i + 1,
            chars: content.chars().collect(),
            pos: 0,
        };
        last_line = i + 1;
        if c.at_end() {
            continue;
        }
        let (kpos, key) = c.keyword()?;
        match (key.as_str(), &mut state) {
            ("backend", None) => {
                let (bpos, tag) = c.keyword()?;
                state = Some(match tag.as_str() {
                    "abelian" => State::Abelian {
                        matrix: None,
                        target: None,
                    },
                    "finite" => State::Finite {
                        group: None,
                        endo: None,
                        target: None,
                    },
                    "fp" => State::Fp {
                        generators: None,
                        relators: Vec::new(),
                        endo: Vec::new(),
                        subgroup: Vec::new(),
                        target: None,
                        normal: None,
                    },
                    _ => return c.err_at(bpos, format!("unknown backend `{tag}`")),
                });
                c.finish()?;
            }
            ("backend", Some(_)) => return c.err_at(kpos, "duplicate `backend`"),
            (_, None) => return c.err_at(kpos, "the first line must be `backend abelian|finite|fp`"),
            ("option", Some(_)) => parse_option(&mut c, &mut options)?,
            ("query", Some(s)) => queries.push(parse_query(&mut c, s)?),
            (_, Some(s)) => s.declaration(&mut c, kpos, &key)?,
        }
    }
    let end = |message: String| ParseError {
        line: last_line.max(1),
        column: 1,
        message,
    };
    let payload = match state {
        None => return Err(end("missing `backend` line".into())),
        Some(State::Abelian { matrix, target }) => Payload::Abelian(AbelianProblem {
            matrix: matrix.ok_or_else(|| end("missing `matrix`".into()))?,
            target,
        }),
        Some(State::Finite { group, endo, target }) => Payload::Finite(FiniteProblem {
            group: group.ok_or_else(|| end("missing `group`".into()))?.0,
            endo,
            target,
        }),
        Some(State::Fp {
            generators,
            relators,
            endo,
            subgroup,
            target,
            normal,
        }) => {
            let generators = generators.ok_or_else(|| end("missing `generators`".into()))?;
            let endo = endo
                .into_iter()
                .zip(&generators)
                .map(|(w, g)| w.ok_or_else(|| end(format!("missing `endo {g} -> ...`"))))
                .collect::<PResult<Vec<Word>>>()?;
            Payload::Fp(FpProblem {
                generators,
                relators,
                endo,
                subgroup,
                target,
                normal,
            })
        }
    };
    Ok(ProblemFile {
        payload,
        queries,
        options,
    })
}

struct Ints<'a, T>(&'a [T]);

impl<T: fmt::Display> fmt::Display for Ints<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn show_vector(v: &IntVector) -> String {
    Ints(&v.0).to_string()
}

fn show_rows<T: fmt::Display>(rows: &[Vec<T>]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| Ints(r).to_string()).collect();
    format!("[{}]", inner.join(","))
}

fn show_words(words: &[Word], names: &[String]) -> String {
    words
        .iter()
        .map(|w| w.display(names).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ProblemFile {
    /// Text form of an element, as written in a query.
    pub fn show_elem(&self, e: &Elem) -> String {
        match (e, &self.payload) {
            (Elem::Vector(v), _) => show_vector(v),
            (Elem::Index(x), _) => x.to_string(),
            (Elem::Word(w), Payload::Fp(p)) => w.display(&p.generators).to_string(),
            (Elem::Word(w), _) => format!("{w:?}"),
        }
    }

    pub fn show_query(&self, q: &Query) -> String {
        match q {
            Query::Order(e) => format!("order {}", self.show_elem(e)),
            Query::Spectrum => "spectrum".into(),
            Query::Preorder(n) => format!("preorder {n}"),
            Query::StableImage(e) => format!("stable-image {}", self.show_elem(e)),
            Query::Period(e) => format!("period {}", self.show_elem(e)),
            Query::CosetAnalysis => "coset-analysis".into(),
            Query::AutoSpectrum => "auto-spectrum".into(),
        }
    }
}

/// Canonical text; parsing it gives back an equal [`ProblemFile`].
impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "backend {}", self.payload.tag())?;
        match &self.payload {
            Payload::Abelian(p) => {
                writeln!(f, "matrix {}", show_rows(&p.matrix))?;
                match &p.target {
                    Some(AbelianTarget::Finite(xs)) => {
                        write!(f, "target finite")?;
                        for x in xs {
                            write!(f, " {}", show_vector(x))?;
                        }
                        writeln!(f)?;
                    }
                    Some(AbelianTarget::Cosets { reps, lattice }) => {
                        write!(f, "target cosets")?;
                        for r in reps {
                            write!(f, " {}", show_vector(r))?;
                        }
                        let rows: Vec<Vec<BigInt>> = lattice.iter().map(|v| v.0.clone()).collect();
                        writeln!(f, " lattice {}", show_rows(&rows))?;
                    }
                    None => {}
                }
            }
            Payload::Finite(p) => {
                match &p.group {
                    GroupSpec::Trivial => writeln!(f, "group trivial")?,
                    GroupSpec::Cyclic(n) => writeln!(f, "group cyclic {n}")?,
                    GroupSpec::Dihedral(n) => writeln!(f, "group dihedral {n}")?,
                    GroupSpec::Dicyclic(n) => writeln!(f, "group dicyclic {n}")?,
                    GroupSpec::Symmetric(n) => writeln!(f, "group symmetric {n}")?,
                    GroupSpec::Quaternion => writeln!(f, "group quaternion")?,
                    GroupSpec::Alternating4 => writeln!(f, "group alternating4")?,
                    GroupSpec::Perms(ps) => {
                        write!(f, "group perms")?;
                        for p in ps {
                            write!(f, " {}", Ints(p))?;
                        }
                        writeln!(f)?;
                    }
                    GroupSpec::Table(t) => writeln!(f, "group table {}", show_rows(t))?,
                }
                match &p.endo {
                    Some(FiniteEndoSpec::Map(m)) => writeln!(f, "endo map {}", Ints(m))?,
                    Some(FiniteEndoSpec::Generators(pairs)) => {
                        let parts: Vec<String> = pairs.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
                        writeln!(f, "endo generators {}", parts.join(", "))?;
                    }
                    None => {}
                }
                match &p.target {
                    Some(FiniteTarget::Finite(xs)) => {
                        write!(f, "target finite")?;
                        for x in xs {
                            write!(f, " {x}")?;
                        }
                        writeln!(f)?;
                    }
                    Some(FiniteTarget::Cosets { reps, subgroup }) => {
                        write!(f, "target cosets")?;
                        for x in reps {
                            write!(f, " {x}")?;
                        }
                        write!(f, " subgroup")?;
                        for x in subgroup {
                            write!(f, " {x}")?;
                        }
                        writeln!(f)?;
                    }
                    None => {}
                }
            }
            Payload::Fp(p) => {
                writeln!(f, "generators {}", p.generators.join(" "))?;
                for r in &p.relators {
                    writeln!(f, "relator {}", r.display(&p.generators))?;
                }
                for (g, w) in p.generators.iter().zip(&p.endo) {
                    writeln!(f, "endo {g} -> {}", w.display(&p.generators))?;
                }
                if !p.subgroup.is_empty() {
                    writeln!(f, "subgroup {}", show_words(&p.subgroup, &p.generators))?;
                }
                if let Some(t) = &p.target {
                    writeln!(f, "target cosets {}", show_words(t, &p.generators))?;
                }
                if let Some(n) = &p.normal {
                    writeln!(f, "normal {}", show_words(n, &p.generators))?;
                }
            }
        }
        let o = &self.options;
        if let Some(h) = o.horizon {
            writeln!(f, "option horizon {h}")?;
        }
        if let Some(c) = o.coset_cap {
            writeln!(f, "option coset-cap {c}")?;
        }
        if let Some(c) = o.quotient_cap {
            writeln!(f, "option quotient-cap {c}")?;
        }
        if o.strict_invariant_core {
            writeln!(f, "option strict-invariant-core")?;
        }
        for q in &self.queries {
            writeln!(f, "query {}", self.show_query(q))?;
        }
        Ok(())
    }
}
