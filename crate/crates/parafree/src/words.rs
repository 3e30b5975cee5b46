//! Exact word arithmetic in finite-rank free groups: free and cyclic
//! reduction, primitive roots (the proper-power test) and abelianization
//! images.
//!
//! Words are stored as freely reduced sequences of signed generator
//! indices. Generator names live only at the parsing boundary.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator index {index} out of range for rank {rank}")]
    InvalidLetter { index: usize, rank: usize },
    #[error("the identity word has no root decomposition")]
    EmptyWord,
    #[error("alphabet must have at least one generator")]
    EmptyAlphabet,
    #[error("invalid generator name `{0}`")]
    BadName(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
}

/// A finite ordered set of named generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        for (i, n) in names.iter().enumerate() {
            if !is_valid_name(n) {
                return Err(WordError::BadName(n.clone()));
            }
            if names[..i].iter().any(|m| m == n) {
                return Err(WordError::DuplicateName(n.clone()));
            }
        }
        Ok(Self { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A single signed letter: generator index plus sign (`+1` or `-1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub sign: i8,
}

impl Letter {
    pub fn new(gen: usize, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Letter { gen, sign }
    }

    pub fn pos(gen: usize) -> Self {
        Letter { gen, sign: 1 }
    }

    pub fn neg(gen: usize) -> Self {
        Letter { gen, sign: -1 }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, sign: -self.sign }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.sign == -other.sign
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    /// Builds a word from raw letters, cancelling adjacent inverse pairs.
    pub fn reduced<I: IntoIterator<Item = Letter>>(raw: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in raw {
            if stack.last().is_some_and(|t| t.cancels(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::reduced(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(self.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word::reduced(letters)
    }

    /// Conjugate `c * self * c^-1`, freely reduced.
    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.concat(self).concat(&c.inverse())
    }

    pub fn check_rank(&self, rank: usize) -> Result<(), WordError> {
        for l in &self.letters {
            if l.gen >= rank {
                return Err(WordError::InvalidLetter { index: l.gen, rank });
            }
        }
        Ok(())
    }

    /// Re-indexes every letter by `offset` (embedding a vertex word into a
    /// larger presentation alphabet).
    pub fn shift(&self, offset: usize) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|l| Letter::new(l.gen + offset, l.sign))
                .collect(),
        }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alphabet }
    }
}

/// Renders a word in the `name` / `name^k` surface syntax, with runs of a
/// single letter compressed into one token.
pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        let ls = self.word.letters();
        while i < ls.len() {
            let mut j = i + 1;
            while j < ls.len() && ls[j] == ls[i] {
                j += 1;
            }
            let exp = (j - i) as i64 * ls[i].sign as i64;
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let name = self.alphabet.name(ls[i].gen);
            if exp == 1 {
                f.write_str(name)?;
            } else {
                write!(f, "{name}^{exp}")?;
            }
            i = j;
        }
        Ok(())
    }
}

/// Freely reduces a raw letter sequence after checking generator indices.
pub fn free_reduce(raw: &[Letter], rank: usize) -> Result<Word, WordError> {
    for l in raw {
        if l.gen >= rank {
            return Err(WordError::InvalidLetter { index: l.gen, rank });
        }
    }
    Ok(Word::reduced(raw.iter().copied()))
}

/// Splits `w = conjugator * core * conjugator^-1` with `core` cyclically
/// reduced and the conjugator of minimal length.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let ls = w.letters();
    let mut lo = 0;
    let mut hi = ls.len();
    while hi - lo >= 2 && ls[lo].cancels(ls[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    let core = Word { letters: ls[lo..hi].to_vec() };
    let conjugator = Word { letters: ls[..lo].to_vec() };
    (core, conjugator)
}

/// A maximal root decomposition `w = conjugator * root^exponent * conjugator^-1`
/// with `root` cyclically reduced and primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDecomposition {
    pub conjugator: Word,
    pub root: Word,
    pub exponent: u32,
}

impl RootDecomposition {
    /// Rebuilds the decomposed word; used to re-validate certificates.
    pub fn reassemble(&self) -> Word {
        self.root.pow(self.exponent as i64).conjugate_by(&self.conjugator)
    }
}

/// Smallest period of a letter sequence via the KMP failure function.
fn smallest_period(ls: &[Letter]) -> usize {
    let n = ls.len();
    let mut fail = vec![0usize; n];
    for i in 1..n {
        let mut k = fail[i - 1];
        while k > 0 && ls[i] != ls[k] {
            k = fail[k - 1];
        }
        if ls[i] == ls[k] {
            k += 1;
        }
        fail[i] = k;
    }
    n - fail[n - 1]
}

/// Extracts the primitive root of a nonempty word. The exponent is maximal,
/// so it is `>= 2` exactly when the word is a proper power.
pub fn primitive_root(w: &Word) -> Result<RootDecomposition, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let (core, conjugator) = cyclic_reduce(w);
    let n = core.len();
    let p = smallest_period(core.letters());
    let (root_len, exponent) = if n % p == 0 { (p, n / p) } else { (n, 1) };
    let root = Word { letters: core.letters()[..root_len].to_vec() };
    Ok(RootDecomposition {
        conjugator,
        root,
        exponent: exponent as u32,
    })
}

/// Signed letter counts: the image of `w` in the free abelianization Z^rank.
pub fn exponent_vector(w: &Word, rank: usize) -> Vec<i64> {
    let mut v = vec![0i64; rank];
    for l in w.letters() {
        assert!(l.gen < rank, "letter index {} out of range for rank {}", l.gen, rank);
        v[l.gen] += l.sign as i64;
    }
    v
}

/// Byte position plus message for a word-syntax diagnostic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("word syntax error at byte {position}: {message}")]
pub struct WordParseError {
    pub position: usize,
    pub message: String,
}

const MAX_EXPANDED_LETTERS: usize = 1 << 20;

/// Parses the shared word surface syntax: whitespace-separated tokens, each
/// `name` or `name^<nonzero integer>`. Exponents expand before reduction.
pub fn parse_word(alphabet: &Alphabet, text: &str) -> Result<Word, WordParseError> {
    let letters = parse_tokens(text, &mut |name, pos| {
        alphabet.index_of(name).ok_or_else(|| WordParseError {
            position: pos,
            message: format!("unknown generator `{name}`"),
        })
    })?;
    Ok(Word::reduced(letters))
}

/// Tokenizer shared by vertex words and mixed words: the caller resolves
/// token names to generator indices.
pub(crate) fn parse_tokens(
    text: &str,
    resolve: &mut dyn FnMut(&str, usize) -> Result<usize, WordParseError>,
) -> Result<Vec<Letter>, WordParseError> {
    let mut letters = Vec::new();
    let mut offset = 0;
    for raw in text.split_whitespace() {
        let pos = offset + text[offset..].find(raw).expect("token comes from text");
        offset = pos + raw.len();
        let (name, exp) = match raw.split_once('^') {
            None => (raw, 1i64),
            Some((name, e)) => {
                let exp: i64 = e.parse().map_err(|_| WordParseError {
                    position: pos + name.len() + 1,
                    message: format!("invalid exponent `{e}`"),
                })?;
                if exp == 0 {
                    return Err(WordParseError {
                        position: pos + name.len() + 1,
                        message: "zero exponent forbidden".into(),
                    });
                }
                (name, exp)
            }
        };
        if !is_valid_name(name) {
            return Err(WordParseError {
                position: pos,
                message: format!("invalid token `{name}`"),
            });
        }
        let gen = resolve(name, pos)?;
        let count = exp.unsigned_abs() as usize;
        if letters.len() + count > MAX_EXPANDED_LETTERS {
            return Err(WordParseError {
                position: pos,
                message: "word too long after exponent expansion".into(),
            });
        }
        let sign = if exp > 0 { 1 } else { -1 };
        letters.extend(std::iter::repeat_n(Letter::new(gen, sign), count));
    }
    Ok(letters)
}
