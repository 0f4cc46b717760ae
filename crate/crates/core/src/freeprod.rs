//! Reduced words in the finite free products `G_1 * ... * G_k`.
//!
//! A [`FiniteWord`] is always in normal form: no identity letters and no two
//! adjacent letters from the same summand. Equality of group elements is
//! therefore equality of words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::summands::{Elem, Index, WedgeConfig};
use crate::syntax::Cursor;

/// A letter `j:g`, an element `g` of summand `G_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub summand: Index,
    pub elem: Elem,
}

impl Letter {
    pub fn new(summand: Index, elem: Elem) -> Self {
        Letter { summand, elem }
    }

    pub fn int(summand: Index, x: i64) -> Self {
        Letter::new(summand, Elem::Int(x))
    }

    pub fn inverse(&self, cfg: &WedgeConfig) -> Result<Letter> {
        Ok(Letter::new(self.summand, cfg.group_inv(self.summand, &self.elem)?))
    }

    pub fn display<'a>(&'a self, cfg: &'a WedgeConfig) -> impl fmt::Display + 'a {
        LetterDisplay { letter: self, cfg }
    }
}

struct LetterDisplay<'a> {
    letter: &'a Letter,
    cfg: &'a WedgeConfig,
}

impl fmt::Display for LetterDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}",
            self.letter.summand,
            self.cfg.format_elem(self.letter.summand, &self.letter.elem)
        )
    }
}

/// A reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FiniteWord {
    letters: Vec<Letter>,
}

/// `w = prefix · tail` with `prefix` not ending in a letter of the chosen summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtDecomposition {
    pub prefix: FiniteWord,
    /// Possibly the identity.
    pub tail: Elem,
}

impl FiniteWord {
    pub fn empty() -> Self {
        FiniteWord::default()
    }

    /// The one-letter word `j:g` (empty when `g` is the identity).
    pub fn from_elem(j: Index, g: Elem, cfg: &WedgeConfig) -> Result<Self> {
        reduce(&[Letter::new(j, g)], cfg)
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

    pub fn last(&self) -> Option<&Letter> {
        self.letters.last()
    }

    pub fn max_summand(&self) -> Option<Index> {
        self.letters.iter().map(|l| l.summand).max()
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn display<'a>(&'a self, cfg: &'a WedgeConfig) -> impl fmt::Display + 'a {
        WordDisplay { word: self, cfg }
    }

    /// Parses the word literal syntax: `j:g` tokens separated by whitespace, or `e`.
    pub fn parse(text: &str, cfg: &WedgeConfig) -> Result<Self> {
        let mut cur = Cursor::new(text, 1);
        let w = parse_word_tokens(&mut cur, cfg)?;
        cur.finish()?;
        Ok(w)
    }
}

struct WordDisplay<'a> {
    word: &'a FiniteWord,
    cfg: &'a WedgeConfig,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", l.display(self.cfg))?;
        }
        Ok(())
    }
}

/// Parses a single `j:g` token.
pub(crate) fn parse_letter_token(
    text: &str,
    pos: crate::error::Pos,
    cfg: &WedgeConfig,
) -> Result<Letter> {
    let (js, gs) = text
        .split_once(':')
        .ok_or_else(|| Error::parse(pos, format!("expected a letter `j:g`, found `{text}`")))?;
    let j: Index = js
        .parse()
        .map_err(|_| Error::parse(pos, format!("bad summand index `{js}`")))?;
    if j == 0 {
        return Err(Error::parse(pos, "summand indices start at 1"));
    }
    let g = cfg
        .parse_elem(j, gs)
        .map_err(|e| Error::parse(pos, e.to_string()))?;
    Ok(Letter::new(j, g))
}

fn parse_word_tokens(cur: &mut Cursor, cfg: &WedgeConfig) -> Result<FiniteWord> {
    if cur.peek_text() == Some("e") {
        cur.next()?;
        return Ok(FiniteWord::empty());
    }
    let mut letters = Vec::new();
    while let Some(tok) = cur.peek().cloned() {
        cur.next()?;
        letters.push(parse_letter_token(&tok.text, tok.pos, cfg)?);
    }
    reduce(&letters, cfg)
}

/// Pushes one letter onto a reduced stack, merging or cancelling at the top.
fn push_letter(stack: &mut Vec<Letter>, l: Letter, cfg: &WedgeConfig) -> Result<()> {
    let g = cfg.summand(l.summand)?;
    if !g.is_valid(&l.elem) {
        cfg.check(l.summand, &l.elem)?;
    }
    if g.is_identity(&l.elem) {
        return Ok(());
    }
    match stack.last_mut() {
        Some(top) if top.summand == l.summand => {
            let prod = g.mul(&top.elem, &l.elem);
            if g.is_identity(&prod) {
                stack.pop();
            } else {
                top.elem = prod;
            }
        }
        _ => stack.push(l),
    }
    Ok(())
}

/// Normal form of an arbitrary letter sequence (identity letters allowed).
pub fn reduce(letters: &[Letter], cfg: &WedgeConfig) -> Result<FiniteWord> {
    let mut stack = Vec::with_capacity(letters.len());
    for l in letters {
        push_letter(&mut stack, l.clone(), cfg)?;
    }
    Ok(FiniteWord { letters: stack })
}

pub fn multiply(u: &FiniteWord, v: &FiniteWord, cfg: &WedgeConfig) -> Result<FiniteWord> {
    let mut stack = u.letters.clone();
    for l in &v.letters {
        push_letter(&mut stack, l.clone(), cfg)?;
    }
    Ok(FiniteWord { letters: stack })
}

pub fn invert(u: &FiniteWord, cfg: &WedgeConfig) -> Result<FiniteWord> {
    let letters = u
        .letters
        .iter()
        .rev()
        .map(|l| l.inverse(cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteWord { letters })
}

/// Image under the homomorphism deleting every letter whose summand is not kept.
pub fn project_by(
    w: &FiniteWord,
    keep: impl Fn(Index) -> bool,
    cfg: &WedgeConfig,
) -> Result<FiniteWord> {
    let mut stack = Vec::with_capacity(w.len());
    for l in w.letters.iter().filter(|l| keep(l.summand)) {
        push_letter(&mut stack, l.clone(), cfg)?;
    }
    Ok(FiniteWord { letters: stack })
}

pub fn project(w: &FiniteWord, keep: &BTreeSet<Index>, cfg: &WedgeConfig) -> Result<FiniteWord> {
    project_by(w, |j| keep.contains(&j), cfg)
}

/// Projection onto `G_1 * ... * G_k`.
pub fn project_to_level(w: &FiniteWord, k: Index, cfg: &WedgeConfig) -> Result<FiniteWord> {
    project_by(w, |j| j <= k, cfg)
}

/// The bonding homomorphism from level `from_level` to `from_level - 1`.
pub fn bonding(w: &FiniteWord, from_level: Index, cfg: &WedgeConfig) -> Result<FiniteWord> {
    if from_level < 2 {
        return Err(Error::LevelExceeded {
            summand: from_level,
            level: from_level,
        });
    }
    if let Some(l) = w.letters.iter().find(|l| l.summand > from_level) {
        return Err(Error::LevelExceeded {
            summand: l.summand,
            level: from_level,
        });
    }
    project_to_level(w, from_level - 1, cfg)
}

/// Splits off the terminal `G_j` letter, if there is one.
pub fn decompose_nt(w: &FiniteWord, j: Index, cfg: &WedgeConfig) -> Result<NtDecomposition> {
    let id = cfg.identity(j)?;
    match w.last() {
        Some(l) if l.summand == j => {
            let mut prefix = w.clone();
            let tail = prefix.letters.pop().map(|l| l.elem).unwrap_or(id);
            Ok(NtDecomposition { prefix, tail })
        }
        _ => Ok(NtDecomposition {
            prefix: w.clone(),
            tail: id,
        }),
    }
}

/// Finite sets of letters used when enumerating infinite summands.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    declared: BTreeMap<Index, Vec<Elem>>,
    fallback: Option<Vec<Elem>>,
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet::default()
    }

    pub fn with(mut self, j: Index, elems: Vec<Elem>) -> Self {
        self.declared.insert(j, elems);
        self
    }

    /// Alphabet used for every summand without an explicit entry.
    pub fn with_fallback(mut self, elems: Vec<Elem>) -> Self {
        self.fallback = Some(elems);
        self
    }

    /// Non-identity letters available in summand `j`, sorted and deduplicated.
    pub fn letters_for(&self, j: Index, cfg: &WedgeConfig) -> Result<Vec<Elem>> {
        let g = cfg.summand(j)?;
        let raw = match self.declared.get(&j).or(self.fallback.as_ref()) {
            Some(v) => {
                for a in v {
                    cfg.check(j, a)?;
                }
                v.clone()
            }
            None => g.elements().ok_or(Error::NotEnumerable(j))?,
        };
        let set: BTreeSet<Elem> = raw.into_iter().filter(|a| !g.is_identity(a)).collect();
        Ok(set.into_iter().collect())
    }
}

/// Every reduced word of at most `maxlen` letters over summands `1..=k` that
/// does not end in a `G_j` letter, ordered by length then lexicographically.
pub fn enumerate_nt(
    k: Index,
    j: Index,
    maxlen: usize,
    cfg: &WedgeConfig,
    alphabet: &Alphabet,
) -> Result<Vec<FiniteWord>> {
    if j == 0 || j > k {
        return Err(Error::MalformedCopy(format!(
            "summand {j} is not in 1..={k}"
        )));
    }
    let mut all = enumerate_words(k, maxlen, cfg, alphabet)?;
    all.retain(|w| w.last().map_or(true, |l| l.summand != j));
    Ok(all)
}

/// Every reduced word of at most `maxlen` letters over summands `1..=k`.
pub fn enumerate_words(
    k: Index,
    maxlen: usize,
    cfg: &WedgeConfig,
    alphabet: &Alphabet,
) -> Result<Vec<FiniteWord>> {
    let mut letters = Vec::new();
    for i in 1..=k {
        for g in alphabet.letters_for(i, cfg)? {
            letters.push(Letter::new(i, g));
        }
    }
    let mut out = Vec::new();
    let mut layer = vec![FiniteWord::empty()];
    for len in 0..=maxlen {
        out.extend(layer.iter().cloned());
        if len == maxlen {
            break;
        }
        let mut next = Vec::new();
        for w in &layer {
            let last = w.last().map(|l| l.summand);
            for l in letters.iter().filter(|l| Some(l.summand) != last) {
                let mut v = w.letters.clone();
                v.push(l.clone());
                next.push(FiniteWord { letters: v });
            }
        }
        layer = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints() -> WedgeConfig {
        WedgeConfig::integers()
    }

    fn c2() -> WedgeConfig {
        WedgeConfig::parse("default cyclic 2").unwrap()
    }

    fn w(text: &str, cfg: &WedgeConfig) -> FiniteWord {
        FiniteWord::parse(text, cfg).unwrap()
    }

    fn raw(pairs: &[(Index, i64)]) -> Vec<Letter> {
        pairs.iter().map(|&(j, x)| Letter::int(j, x)).collect()
    }

    #[test]
    fn reduce_examples() {
        let c = ints();
        assert!(reduce(&raw(&[(2, 5), (2, -5)]), &c).unwrap().is_empty());
        assert!(reduce(&raw(&[(1, 1), (1, 1)]), &c2()).unwrap().is_empty());
        assert_eq!(
            reduce(&raw(&[(1, 1), (2, 1), (2, -1), (1, 2)]), &c).unwrap(),
            w("1:3", &c)
        );
        assert!(reduce(&raw(&[(3, 0)]), &c).unwrap().is_empty());
    }

    #[test]
    fn reduce_rejects_unknown_summand() {
        let c = WedgeConfig::parse("summand 1 integer").unwrap();
        assert!(matches!(
            reduce(&raw(&[(1, 1), (4, 1)]), &c),
            Err(Error::UnknownSummand(4))
        ));
    }

    #[test]
    fn multiply_and_invert_examples() {
        let c = ints();
        assert!(multiply(&w("1:1", &c), &w("1:-1", &c), &c).unwrap().is_empty());
        assert_eq!(
            multiply(&w("1:1 2:1", &c), &w("2:-1 3:1", &c), &c).unwrap(),
            w("1:1 3:1", &c)
        );
        assert_eq!(invert(&w("1:1 2:1", &c), &c).unwrap(), w("2:-1 1:-1", &c));
    }

    #[test]
    fn project_examples() {
        let c = ints();
        let only1: BTreeSet<Index> = [1].into();
        assert_eq!(project(&w("1:1 2:1 1:1", &c), &only1, &c).unwrap(), w("1:2", &c));
        assert!(project(&w("2:1", &c), &only1, &c).unwrap().is_empty());
        let all: BTreeSet<Index> = [1, 2, 3].into();
        let x = w("3:2 1:1 2:-4", &c);
        assert_eq!(project(&x, &all, &c).unwrap(), x);
    }

    #[test]
    fn bonding_examples() {
        let c = ints();
        assert_eq!(bonding(&w("1:1 3:1", &c), 3, &c).unwrap(), w("1:1", &c));
        assert!(bonding(&FiniteWord::empty(), 3, &c).unwrap().is_empty());
        assert_eq!(bonding(&w("3:1 1:1 3:-1", &c), 3, &c).unwrap(), w("1:1", &c));
        assert!(matches!(
            bonding(&w("4:1", &c), 3, &c),
            Err(Error::LevelExceeded { summand: 4, level: 3 })
        ));
    }

    #[test]
    fn decompose_examples() {
        let c = ints();
        let d = decompose_nt(&w("1:1 2:1", &c), 2, &c).unwrap();
        assert_eq!((d.prefix, d.tail), (w("1:1", &c), Elem::Int(1)));
        let d = decompose_nt(&w("1:1 2:1", &c), 1, &c).unwrap();
        assert_eq!((d.prefix, d.tail), (w("1:1 2:1", &c), Elem::Int(0)));
        let d = decompose_nt(&w("2:2", &c), 2, &c).unwrap();
        assert_eq!((d.prefix, d.tail), (FiniteWord::empty(), Elem::Int(2)));
    }

    #[test]
    fn enumerate_examples() {
        let c = c2();
        let a = Alphabet::new();
        for maxlen in 0..4 {
            assert_eq!(enumerate_nt(1, 1, maxlen, &c, &a).unwrap(), vec![FiniteWord::empty()]);
        }
        assert_eq!(
            enumerate_nt(2, 2, 1, &c, &a).unwrap(),
            vec![FiniteWord::empty(), w("1:1", &c)]
        );
        assert_eq!(
            enumerate_nt(2, 1, 2, &c, &a).unwrap(),
            vec![FiniteWord::empty(), w("2:1", &c), w("1:1 2:1", &c)]
        );
    }

    #[test]
    fn enumerate_needs_alphabet_for_infinite_groups() {
        let c = ints();
        assert!(matches!(
            enumerate_nt(2, 1, 2, &c, &Alphabet::new()),
            Err(Error::NotEnumerable(1))
        ));
        let a = Alphabet::new().with_fallback(vec![Elem::Int(1), Elem::Int(-1), Elem::Int(0)]);
        let out = enumerate_nt(2, 1, 1, &c, &a).unwrap();
        assert_eq!(out, vec![FiniteWord::empty(), w("2:-1", &c), w("2:1", &c)]);
    }

    #[test]
    fn literal_syntax_round_trips() {
        let c = ints();
        let x = w("1:1 2:-1 1:1", &c);
        assert_eq!(x.display(&c).to_string(), "1:1 2:-1 1:1");
        assert_eq!(FiniteWord::empty().display(&c).to_string(), "e");
        assert!(FiniteWord::parse("1:1 e", &c).is_err());
        assert!(FiniteWord::parse("0:1", &c).is_err());
    }
}
