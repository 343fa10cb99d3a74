//! Pregroup types, the word lexicon and a deterministic parser for the
//! subject-verb-object fragment used by both datasets.
//!
//! A sentence is grammatical when the concatenation of its word types
//! reduces to the sentence type `s` using only the contractions
//! `t · tʳ → 1` and `tˡ · t → 1`. The parser reduces with a single
//! left-to-right stack pass and, on success, also recovers the phrase
//! structure of the fragment
//!
//! ```text
//! S  → NP V NP? PP*
//! NP → Det? Mod* N
//! PP → P NP
//! ```
//!
//! which the tree-shaped diagram models need.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("type sequence of `{sentence}` reduces to {result}, not s")]
    NoReduction { sentence: String, result: PregroupType },
    #[error("`{0}` reduces to s but falls outside the supported phrase structure")]
    OutsideFragment(String),
    #[error("auxiliary `{0}` is not followed by a verb")]
    DanglingAuxiliary(String),
    #[error("empty sentence")]
    Empty,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("lexicon line {line}: `{word}` already listed as {previous:?}")]
    Conflict {
        line: usize,
        word: String,
        previous: Category,
    },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Atomic grammatical generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomicType {
    /// Noun.
    N,
    /// Sentence.
    S,
    /// Prepositional phrase.
    P,
    /// Image; only ever introduced when a picture is attached to a sentence.
    Img,
}

impl AtomicType {
    pub fn symbol(self) -> &'static str {
        match self {
            AtomicType::N => "n",
            AtomicType::S => "s",
            AtomicType::P => "p",
            AtomicType::Img => "img",
        }
    }
}

/// An atomic type together with its adjoint order: `-1` is the left
/// adjoint, `0` the base type and `+1` the right adjoint.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SimpleType {
    pub atom: AtomicType,
    pub adjoint: i8,
}

impl SimpleType {
    pub const fn base(atom: AtomicType) -> Self {
        SimpleType { atom, adjoint: 0 }
    }

    pub const fn left(atom: AtomicType) -> Self {
        SimpleType { atom, adjoint: -1 }
    }

    pub const fn right(atom: AtomicType) -> Self {
        SimpleType { atom, adjoint: 1 }
    }

    /// `self · next` contracts to the unit. Covers both `t · tʳ` and
    /// `tˡ · t`, which are the same rule one adjoint order apart.
    pub fn cancels_with(self, next: SimpleType) -> bool {
        self.atom == next.atom && next.adjoint == self.adjoint + 1
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.atom.symbol())?;
        let (mark, count) = if self.adjoint < 0 {
            ("ˡ", -self.adjoint)
        } else {
            ("ʳ", self.adjoint)
        };
        for _ in 0..count {
            f.write_str(mark)?;
        }
        Ok(())
    }
}

impl fmt::Debug for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<SimpleType> for String {
    fn from(t: SimpleType) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for SimpleType {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for SimpleType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let base_len = s
            .char_indices()
            .find(|(_, c)| *c == 'ˡ' || *c == 'ʳ')
            .map(|(i, _)| i)
            .unwrap_or(s.len());
        let atom = match &s[..base_len] {
            "n" => AtomicType::N,
            "s" => AtomicType::S,
            "p" => AtomicType::P,
            "img" => AtomicType::Img,
            other => return Err(format!("unknown atomic type `{other}`")),
        };
        let mut adjoint = 0i8;
        for c in s[base_len..].chars() {
            match c {
                'ˡ' if adjoint <= 0 => adjoint -= 1,
                'ʳ' if adjoint >= 0 => adjoint += 1,
                _ => return Err(format!("bad adjoint marks in `{s}`")),
            }
        }
        Ok(SimpleType { atom, adjoint })
    }
}

/// A tensor product of simple types; the empty product is the unit.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PregroupType(Vec<SimpleType>);

impl PregroupType {
    pub fn unit() -> Self {
        PregroupType(Vec::new())
    }

    pub fn new(factors: Vec<SimpleType>) -> Self {
        PregroupType(factors)
    }

    pub fn atom(atom: AtomicType) -> Self {
        PregroupType(vec![SimpleType::base(atom)])
    }

    pub fn sentence() -> Self {
        Self::atom(AtomicType::S)
    }

    pub fn factors(&self) -> &[SimpleType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tensor(&self, other: &PregroupType) -> PregroupType {
        let mut factors = self.0.clone();
        factors.extend_from_slice(&other.0);
        PregroupType(factors)
    }
}

impl From<SimpleType> for PregroupType {
    fn from(t: SimpleType) -> Self {
        PregroupType(vec![t])
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Word classes of the fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Noun,
    TransitiveVerb,
    IntransitiveVerb,
    Determiner,
    Adjective,
    Preposition,
    Auxiliary,
}

impl Category {
    /// The pregroup type a word of this class carries. Auxiliaries have
    /// none: they are fused into the verb that follows them.
    pub fn pregroup_type(self) -> Option<PregroupType> {
        use AtomicType::{N, S};
        let t = match self {
            Category::Noun => vec![SimpleType::base(N)],
            Category::TransitiveVerb => vec![
                SimpleType::right(N),
                SimpleType::base(S),
                SimpleType::left(N),
            ],
            Category::IntransitiveVerb => vec![SimpleType::right(N), SimpleType::base(S)],
            Category::Determiner | Category::Adjective => {
                vec![SimpleType::base(N), SimpleType::left(N)]
            }
            Category::Preposition => vec![
                SimpleType::right(S),
                SimpleType::base(S),
                SimpleType::left(N),
            ],
            Category::Auxiliary => return None,
        };
        Some(PregroupType(t))
    }

    pub fn is_verb(self) -> bool {
        matches!(self, Category::TransitiveVerb | Category::IntransitiveVerb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Noun => "NOUN",
            Category::TransitiveVerb => "TRANSITIVE_VERB",
            Category::IntransitiveVerb => "INTRANSITIVE_VERB",
            Category::Determiner => "DETERMINER",
            Category::Adjective => "ADJECTIVE",
            Category::Preposition => "PREPOSITION",
            Category::Auxiliary => "AUXILIARY",
        }
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NOUN" => Category::Noun,
            "TRANSITIVE_VERB" => Category::TransitiveVerb,
            "INTRANSITIVE_VERB" => Category::IntransitiveVerb,
            "DETERMINER" => Category::Determiner,
            "ADJECTIVE" => Category::Adjective,
            "PREPOSITION" => Category::Preposition,
            "AUXILIARY" => Category::Auxiliary,
            other => return Err(format!("unknown category `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub word: String,
    pub category: Category,
}

/// Closed word list. The file format is one `word<TAB>CATEGORY` pair per
/// line; blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, Category>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = trimmed.split('\t');
            let (word, cat) = match (cols.next(), cols.next(), cols.next()) {
                (Some(w), Some(c), None) => (w.trim(), c.trim()),
                _ => {
                    return Err(LexiconError::Malformed {
                        line,
                        reason: "expected `word<TAB>CATEGORY`".into(),
                    })
                }
            };
            if word.is_empty() || word.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
                return Err(LexiconError::Malformed {
                    line,
                    reason: format!("word `{word}` must be a lowercase token"),
                });
            }
            let category = cat
                .parse::<Category>()
                .map_err(|reason| LexiconError::Malformed { line, reason })?;
            if let Some(previous) = lexicon.entries.get(word) {
                if *previous != category {
                    return Err(LexiconError::Conflict {
                        line,
                        word: word.to_string(),
                        previous: *previous,
                    });
                }
            }
            lexicon.entries.insert(word.to_string(), category);
        }
        Ok(lexicon)
    }

    pub fn insert(&mut self, word: impl Into<String>, category: Category) {
        self.entries.insert(word.into(), category);
    }

    pub fn get(&self, word: &str) -> Option<Category> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = LexiconEntry> + '_ {
        self.entries.iter().map(|(w, c)| LexiconEntry {
            word: w.clone(),
            category: *c,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, c) in &self.entries {
            out.push_str(w);
            out.push('\t');
            out.push_str(c.name());
            out.push('\n');
        }
        out
    }
}

/// A typed word of a sentence after auxiliary fusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub word: String,
    pub category: Category,
    /// `mother's` style modifier: typed as an adjective, stem is a noun.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub possessive: bool,
}

impl Token {
    pub fn pregroup_type(&self) -> PregroupType {
        self.category
            .pregroup_type()
            .expect("auxiliaries never survive tokenization")
    }

    /// The word with any possessive marker removed.
    pub fn stem(&self) -> &str {
        if self.possessive {
            self.word.trim_end_matches("'s")
        } else {
            &self.word
        }
    }
}

/// Lowercases, splits on whitespace and strips surrounding punctuation.
/// Apostrophes inside a word survive so possessives stay attached.
pub fn normalize_words(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| {
            w.replace(['’', '`'], "'")
                .to_lowercase()
                .trim_matches(|c: char| !(c.is_alphanumeric() || c == '_'))
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Looks every word up in the lexicon, fusing each auxiliary with the
/// verb after it (`is sitting` becomes `is_sitting`).
pub fn tokenize(sentence: &str, lexicon: &Lexicon) -> Result<Vec<Token>, GrammarError> {
    let words = normalize_words(sentence);
    if words.is_empty() {
        return Err(GrammarError::Empty);
    }
    let mut tokens = Vec::with_capacity(words.len());
    let mut i = 0;
    while i < words.len() {
        let word = &words[i];
        let category = lookup(word, lexicon)?;
        if category.0 == Category::Auxiliary {
            let Some(next) = words.get(i + 1) else {
                return Err(GrammarError::DanglingAuxiliary(word.clone()));
            };
            let fused = format!("{word}_{next}");
            let verb = match lexicon.get(&fused) {
                Some(c) => c,
                None => lookup(next, lexicon)?.0,
            };
            if !verb.is_verb() {
                return Err(GrammarError::DanglingAuxiliary(word.clone()));
            }
            tokens.push(Token {
                word: fused,
                category: verb,
                possessive: false,
            });
            i += 2;
            continue;
        }
        tokens.push(Token {
            word: word.clone(),
            category: category.0,
            possessive: category.1,
        });
        i += 1;
    }
    Ok(tokens)
}

fn lookup(word: &str, lexicon: &Lexicon) -> Result<(Category, bool), GrammarError> {
    if let Some(c) = lexicon.get(word) {
        return Ok((c, false));
    }
    if let Some(stem) = word.strip_suffix("'s") {
        if lexicon.get(stem) == Some(Category::Noun) {
            return Ok((Category::Adjective, true));
        }
    }
    Err(GrammarError::UnknownToken(word.to_string()))
}

/// A contraction between two factor positions of the flattened type
/// sequence, `left < right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CupLink {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub result: PregroupType,
    pub links: Vec<CupLink>,
    /// Flattened positions of the factors left in `result`.
    pub survivors: Vec<usize>,
}

/// Leftmost stack reduction. Irreducible input comes back unchanged with
/// no links.
pub fn reduce(types: &[PregroupType]) -> Reduction {
    let mut stack: Vec<(usize, SimpleType)> = Vec::new();
    let mut links = Vec::new();
    let flat = types.iter().flat_map(|t| t.factors().iter().copied());
    for (pos, t) in flat.enumerate() {
        match stack.last() {
            Some(&(left, top)) if top.cancels_with(t) => {
                stack.pop();
                links.push(CupLink { left, right: pos });
            }
            _ => stack.push((pos, t)),
        }
    }
    links.sort();
    Reduction {
        result: PregroupType(stack.iter().map(|&(_, t)| t).collect()),
        survivors: stack.iter().map(|&(p, _)| p).collect(),
        links,
    }
}

/// `Det? Mod* N`, as token indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhrase {
    pub determiner: Option<usize>,
    pub modifiers: Vec<usize>,
    pub head: usize,
}

impl NounPhrase {
    pub fn span(&self) -> std::ops::Range<usize> {
        let start = self
            .determiner
            .or_else(|| self.modifiers.first().copied())
            .unwrap_or(self.head);
        start..self.head + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepPhrase {
    pub preposition: usize,
    pub object: NounPhrase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub subject: NounPhrase,
    pub verb: usize,
    pub object: Option<NounPhrase>,
    pub adjuncts: Vec<PrepPhrase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parse {
    pub tokens: Vec<Token>,
    pub types: Vec<PregroupType>,
    pub reductions: Vec<CupLink>,
    /// Flattened factor position of the surviving `s`.
    pub output: usize,
    pub result: PregroupType,
    pub clause: Clause,
}

impl Parse {
    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }

    /// Maps a flattened factor position back to `(token, factor within token)`.
    pub fn locate(&self, pos: usize) -> (usize, usize) {
        let mut offset = 0;
        for (i, t) in self.types.iter().enumerate() {
            if pos < offset + t.len() {
                return (i, pos - offset);
            }
            offset += t.len();
        }
        panic!("factor position {pos} out of range");
    }
}

pub fn parse_sentence(sentence: &str, lexicon: &Lexicon) -> Result<Parse, GrammarError> {
    let tokens = tokenize(sentence, lexicon)?;
    let types: Vec<PregroupType> = tokens.iter().map(Token::pregroup_type).collect();
    let reduction = reduce(&types);
    if reduction.result != PregroupType::sentence() {
        return Err(GrammarError::NoReduction {
            sentence: sentence.to_string(),
            result: reduction.result,
        });
    }
    let clause = phrase_structure(&tokens)
        .ok_or_else(|| GrammarError::OutsideFragment(sentence.to_string()))?;
    Ok(Parse {
        output: reduction.survivors[0],
        result: reduction.result,
        reductions: reduction.links,
        tokens,
        types,
        clause,
    })
}

fn phrase_structure(tokens: &[Token]) -> Option<Clause> {
    let mut pos = 0;
    let subject = noun_phrase(tokens, &mut pos)?;
    let verb = pos;
    let verb_cat = tokens.get(verb)?.category;
    if !verb_cat.is_verb() {
        return None;
    }
    pos += 1;
    let object = if verb_cat == Category::TransitiveVerb {
        Some(noun_phrase(tokens, &mut pos)?)
    } else {
        None
    };
    let mut adjuncts = Vec::new();
    while pos < tokens.len() {
        if tokens[pos].category != Category::Preposition {
            return None;
        }
        let preposition = pos;
        pos += 1;
        let object = noun_phrase(tokens, &mut pos)?;
        adjuncts.push(PrepPhrase {
            preposition,
            object,
        });
    }
    Some(Clause {
        subject,
        verb,
        object,
        adjuncts,
    })
}

fn noun_phrase(tokens: &[Token], pos: &mut usize) -> Option<NounPhrase> {
    let mut determiner = None;
    if tokens.get(*pos)?.category == Category::Determiner {
        determiner = Some(*pos);
        *pos += 1;
    }
    let mut modifiers = Vec::new();
    while tokens.get(*pos)?.category == Category::Adjective {
        modifiers.push(*pos);
        *pos += 1;
    }
    if tokens.get(*pos)?.category != Category::Noun {
        return None;
    }
    let head = *pos;
    *pos += 1;
    Some(NounPhrase {
        determiner,
        modifiers,
        head,
    })
}

/// True when no two links interleave (`a < c < b < d`).
pub fn is_planar(links: &[CupLink]) -> bool {
    links.iter().all(|x| {
        links
            .iter()
            .all(|y| !(x.left < y.left && y.left < x.right && x.right < y.right))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use AtomicType::{N, S};

    fn lexicon() -> Lexicon {
        Lexicon::parse(
            "# test lexicon\n\
             dogs\tNOUN\ncats\tNOUN\ndog\tNOUN\nroad\tNOUN\nchild\tNOUN\nmother\tNOUN\nhand\tNOUN\n\
             chase\tTRANSITIVE_VERB\nholds\tTRANSITIVE_VERB\nsitting\tINTRANSITIVE_VERB\n\
             a\tDETERMINER\nthe\tDETERMINER\nbig\tADJECTIVE\non\tPREPOSITION\nis\tAUXILIARY\n",
        )
        .unwrap()
    }

    #[test]
    fn cancellation_laws() {
        for atom in [N, S, AtomicType::P, AtomicType::Img] {
            let base = PregroupType::atom(atom);
            let r = reduce(&[base.clone(), SimpleType::right(atom).into()]);
            assert!(r.result.is_unit());
            assert_eq!(r.links.len(), 1);
            let l = reduce(&[SimpleType::left(atom).into(), base]);
            assert!(l.result.is_unit());
            assert_eq!(l.links.len(), 1);
        }
    }

    #[test]
    fn wrong_order_does_not_cancel() {
        let r = reduce(&[SimpleType::right(N).into(), PregroupType::atom(N)]);
        assert_eq!(r.result.len(), 2);
        assert!(r.links.is_empty());
    }

    #[test]
    fn transitive_sentence_reduces_to_s() {
        let tv = Category::TransitiveVerb.pregroup_type().unwrap();
        let n = PregroupType::atom(N);
        let r = reduce(&[n.clone(), tv, n]);
        assert_eq!(r.result, PregroupType::sentence());
        assert_eq!(
            r.links,
            vec![CupLink { left: 0, right: 1 }, CupLink { left: 3, right: 4 }]
        );
    }

    #[test]
    fn parse_dogs_chase_cats() {
        let p = parse_sentence("Dogs chase cats.", &lexicon()).unwrap();
        assert_eq!(p.words(), ["dogs", "chase", "cats"]);
        assert_eq!(p.types[1].to_string(), "nʳ·s·nˡ");
        assert_eq!(p.reductions.len(), 2);
        assert_eq!(p.output, 2);
        assert_eq!(p.locate(p.output), (1, 1));
    }

    #[test]
    fn bare_noun_is_not_a_sentence() {
        assert!(matches!(
            parse_sentence("dogs", &lexicon()),
            Err(GrammarError::NoReduction { .. })
        ));
    }

    #[test]
    fn unknown_token() {
        assert_eq!(
            parse_sentence("dogs chase zebras", &lexicon()),
            Err(GrammarError::UnknownToken("zebras".into()))
        );
    }

    #[test]
    fn auxiliary_fuses_with_verb() {
        let p = parse_sentence("A dog is sitting on the road", &lexicon()).unwrap();
        assert_eq!(p.words(), ["a", "dog", "is_sitting", "on", "the", "road"]);
        assert_eq!(p.clause.verb, 2);
        assert_eq!(p.clause.adjuncts.len(), 1);
        assert!(is_planar(&p.reductions));
        assert!(matches!(
            parse_sentence("a dog is", &lexicon()),
            Err(GrammarError::DanglingAuxiliary(_))
        ));
    }

    #[test]
    fn possessive_modifier() {
        let p = parse_sentence("A child holds the mother's hand", &lexicon()).unwrap();
        let poss = &p.tokens[4];
        assert_eq!(poss.word, "mother's");
        assert!(poss.possessive);
        assert_eq!(poss.stem(), "mother");
        let object = p.clause.object.as_ref().unwrap();
        assert_eq!(object.modifiers, vec![4]);
        assert_eq!(object.span(), 3..6);
    }

    #[test]
    fn simple_type_round_trip() {
        for s in ["n", "nˡ", "nʳ", "s", "img", "pʳ"] {
            assert_eq!(s.parse::<SimpleType>().unwrap().to_string(), s);
        }
        assert!("nˡʳ".parse::<SimpleType>().is_err());
    }

    #[test]
    fn lexicon_rejects_conflicts_and_junk() {
        assert!(matches!(
            Lexicon::parse("dog\tNOUN\ndog\tADJECTIVE\n"),
            Err(LexiconError::Conflict { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("dog NOUN\n"),
            Err(LexiconError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            Lexicon::parse("dog\tVERB\n"),
            Err(LexiconError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn crossing_links_detected() {
        assert!(!is_planar(&[
            CupLink { left: 0, right: 2 },
            CupLink { left: 1, right: 3 }
        ]));
        assert!(is_planar(&[
            CupLink { left: 0, right: 3 },
            CupLink { left: 1, right: 2 }
        ]));
    }
}
