//! Dataset files, feature tables and the subject/object swap.
//!
//! Datasets are JSON lines. The unstructured task pairs one sentence with
//! a positive and a negative image:
//!
//! ```json
//! {"sentence": "A dog is sitting on the road", "pos_image": "u000_pos", "neg_image": "u000_neg"}
//! ```
//!
//! The structured task pairs two sentences, the second being the first
//! with subject and object swapped, with one image:
//!
//! ```json
//! {"pos_sentence": "Dogs chase cats", "neg_sentence": "Cats chase dogs", "image": "s_chase_00"}
//! ```
//!
//! Feature files are CSV with header `image_id,f0,…,f{dim-1}`; lines
//! starting with `#` are comments.

pub mod generate;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ansatz::ImageEncoder;
use crate::grammar::{parse_sentence, GrammarError, Lexicon, NounPhrase, Parse};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: schema error: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: GrammarError },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line} duplicates line {first}")]
    DuplicateEntry { line: usize, first: usize },
    #[error("feature row {row}: expected {expected} values, found {got}")]
    DimMismatch { row: usize, expected: usize, got: usize },
    #[error("feature file: {0}")]
    Features(String),
    #[error(transparent)]
    Swap(#[from] SwapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwapError {
    #[error(transparent)]
    Parse(#[from] GrammarError),
    #[error("`{0}` has no object to swap with")]
    NoObject(String),
    #[error("subject and object of `{0}` are identical")]
    DegenerateSwap(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Unstructured,
    Structured,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unstructured" => Ok(Task::Unstructured),
            "structured" => Ok(Task::Structured),
            _ => Err(format!("unknown task `{s}` (expected unstructured|structured)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Unstructured => "unstructured",
            Task::Structured => "structured",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnstructuredEntry {
    pub sentence: String,
    pub pos_image: String,
    pub neg_image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredEntry {
    pub pos_sentence: String,
    pub neg_sentence: String,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetEntry {
    Unstructured(UnstructuredEntry),
    Structured(StructuredEntry),
}

/// One (sentence, image) pairing with its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing<'a> {
    pub sentence: &'a str,
    pub image: &'a str,
    pub label: u8,
}

impl DatasetEntry {
    pub fn task(&self) -> Task {
        match self {
            DatasetEntry::Unstructured(_) => Task::Unstructured,
            DatasetEntry::Structured(_) => Task::Structured,
        }
    }

    /// The positive pairing followed by the negative one.
    pub fn pairings(&self) -> [Pairing<'_>; 2] {
        match self {
            DatasetEntry::Unstructured(e) => [
                Pairing { sentence: &e.sentence, image: &e.pos_image, label: 1 },
                Pairing { sentence: &e.sentence, image: &e.neg_image, label: 0 },
            ],
            DatasetEntry::Structured(e) => [
                Pairing { sentence: &e.pos_sentence, image: &e.image, label: 1 },
                Pairing { sentence: &e.neg_sentence, image: &e.image, label: 0 },
            ],
        }
    }

    pub fn images(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.pairings().iter().map(|p| p.image).collect();
        ids.dedup();
        ids
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("entry serializes")
    }
}

pub fn load_dataset(path: impl AsRef<Path>, task: Task, lexicon: &Lexicon) -> Result<Vec<DatasetEntry>, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let entries = parse_dataset(&text, task, lexicon)?;
    log::info!("loaded {} {task} entries from {}", entries.len(), path.display());
    Ok(entries)
}

/// Parses and validates a JSON-lines dataset. Blank lines are skipped;
/// line numbers in errors are 1-based.
pub fn parse_dataset(text: &str, task: Task, lexicon: &Lexicon) -> Result<Vec<DatasetEntry>, DataError> {
    let mut entries = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let schema = |e: serde_json::Error| DataError::Schema { line, message: e.to_string() };
        let entry = match task {
            Task::Unstructured => {
                let e: UnstructuredEntry = serde_json::from_str(raw).map_err(schema)?;
                validate_unstructured(&e, lexicon, line)?;
                DatasetEntry::Unstructured(e)
            }
            Task::Structured => {
                let e: StructuredEntry = serde_json::from_str(raw).map_err(schema)?;
                validate_structured(&e, lexicon, line)?;
                DatasetEntry::Structured(e)
            }
        };
        if let Some(&first) = seen.get(&entry.to_json_line()) {
            return Err(DataError::DuplicateEntry { line, first });
        }
        seen.insert(entry.to_json_line(), line);
        entries.push(entry);
    }
    Ok(entries)
}

fn parse_at(sentence: &str, lexicon: &Lexicon, line: usize) -> Result<Parse, DataError> {
    parse_sentence(sentence, lexicon).map_err(|source| DataError::Parse { line, source })
}

fn validate_unstructured(e: &UnstructuredEntry, lexicon: &Lexicon, line: usize) -> Result<(), DataError> {
    if e.pos_image == e.neg_image {
        return Err(DataError::Invalid { line, message: format!("positive and negative image are both `{}`", e.pos_image) });
    }
    parse_at(&e.sentence, lexicon, line)?;
    Ok(())
}

fn validate_structured(e: &StructuredEntry, lexicon: &Lexicon, line: usize) -> Result<(), DataError> {
    let pos = parse_at(&e.pos_sentence, lexicon, line)?;
    let neg = parse_at(&e.neg_sentence, lexicon, line)?;
    if pos.tokens[pos.clause.verb] != neg.tokens[neg.clause.verb] {
        return Err(DataError::Invalid { line, message: "the two sentences use different verbs".into() });
    }
    let swapped = swap_subject_object(&e.pos_sentence, lexicon)?;
    if normalized(&swapped) != normalized(&e.neg_sentence) {
        return Err(DataError::Invalid {
            line,
            message: format!("negative sentence `{}` is not the swap `{swapped}`", e.neg_sentence),
        });
    }
    Ok(())
}

/// Lowercase word sequence, for comparisons that ignore case and
/// punctuation.
pub fn normalized(sentence: &str) -> Vec<String> {
    crate::grammar::normalize_words(sentence)
}

/// The part of a noun phrase that moves in a swap: determiner, modifiers
/// and the referring noun. For a possessive phrase (`the mother's hand`)
/// the referent is the possessor and the possessed noun stays put.
struct Referent {
    words: Vec<String>,
    noun: String,
}

enum Frame {
    Plain,
    Possessive { rest: Vec<String> },
}

fn split_phrase(parse: &Parse, np: &NounPhrase) -> (Referent, Frame) {
    let word = |i: usize| parse.tokens[i].word.clone();
    let mut words: Vec<String> = np.determiner.map(word).into_iter().collect();
    match np.modifiers.iter().position(|&m| parse.tokens[m].possessive) {
        Some(k) => {
            words.extend(np.modifiers[..k].iter().map(|&m| word(m)));
            let noun = parse.tokens[np.modifiers[k]].stem().to_string();
            let mut rest: Vec<String> = np.modifiers[k + 1..].iter().map(|&m| word(m)).collect();
            rest.push(word(np.head));
            (Referent { words, noun }, Frame::Possessive { rest })
        }
        None => {
            words.extend(np.modifiers.iter().map(|&m| word(m)));
            (Referent { words, noun: word(np.head) }, Frame::Plain)
        }
    }
}

fn render(referent: &Referent, frame: &Frame) -> Vec<String> {
    let mut out = referent.words.clone();
    match frame {
        Frame::Plain => out.push(referent.noun.clone()),
        Frame::Possessive { rest } => {
            out.push(format!("{}'s", referent.noun));
            out.extend(rest.iter().cloned());
        }
    }
    out
}

/// Exchanges the subject and object referents of an SVO sentence.
/// Determiners and modifiers travel with their noun; the verb, any
/// possessed noun and prepositional phrases stay in place. The result is
/// lowercase apart from its first letter.
pub fn swap_subject_object(sentence: &str, lexicon: &Lexicon) -> Result<String, SwapError> {
    let parse = parse_sentence(sentence, lexicon)?;
    let clause = &parse.clause;
    let object = clause
        .object
        .as_ref()
        .ok_or_else(|| SwapError::NoObject(sentence.to_string()))?;
    let (subj_ref, subj_frame) = split_phrase(&parse, &clause.subject);
    let (obj_ref, obj_frame) = split_phrase(&parse, object);
    if subj_ref.words == obj_ref.words && subj_ref.noun == obj_ref.noun {
        return Err(SwapError::DegenerateSwap(sentence.to_string()));
    }
    let mut words = render(&obj_ref, &subj_frame);
    words.extend(parse.tokens[clause.verb].word.split('_').map(str::to_string));
    words.extend(render(&subj_ref, &obj_frame));
    for t in &parse.tokens[object.span().end..] {
        words.push(t.word.clone());
    }
    let mut out = words.join(" ");
    if let Some(first) = out.get(0..1) {
        let upper = first.to_uppercase();
        out.replace_range(0..1, &upper);
    }
    Ok(out)
}

/// Per-image feature vectors with a per-dimension standardisation fitted
/// over every row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl FeatureTable {
    /// Dimensions whose spread is below this are dropped (angle 0).
    pub const MIN_STD: f64 = 1e-12;

    pub fn fit(dim: usize, vectors: BTreeMap<String, Vec<f64>>) -> Result<Self, DataError> {
        for (row, v) in vectors.values().enumerate() {
            if v.len() != dim {
                return Err(DataError::DimMismatch { row: row + 1, expected: dim, got: v.len() });
            }
        }
        let n = vectors.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors.values() {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for v in vectors.values() {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        let std = var.into_iter().map(f64::sqrt).collect();
        Ok(FeatureTable { dim, vectors, mean, std })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn raw(&self, image_id: &str) -> Option<&[f64]> {
        self.vectors.get(image_id).map(Vec::as_slice)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn standardization(&self) -> (&[f64], &[f64]) {
        (&self.mean, &self.std)
    }

    /// `π · tanh(z)` of the standardised features; dropped dimensions give 0.
    pub fn angles_for(&self, image_id: &str) -> Option<Vec<f64>> {
        let v = self.vectors.get(image_id)?;
        Some(
            v.iter()
                .zip(&self.mean)
                .zip(&self.std)
                .map(|((x, m), s)| if *s < Self::MIN_STD { 0.0 } else { PI * ((x - m) / s).tanh() })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W, comment: Option<&str>) -> Result<(), DataError> {
        let mut out = out;
        if let Some(c) = comment {
            for l in c.lines() {
                writeln!(out, "# {l}")?;
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["image_id".to_string()];
        header.extend((0..self.dim).map(|j| format!("f{j}")));
        w.write_record(&header)?;
        for (id, v) in &self.vectors {
            let mut rec = vec![id.clone()];
            rec.extend(v.iter().map(|x| format!("{x:?}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl ImageEncoder for FeatureTable {
    fn angles(&self, image_id: &str) -> Option<Vec<f64>> {
        self.angles_for(image_id)
    }
}

pub fn load_features(path: impl AsRef<Path>, expected_dim: usize) -> Result<FeatureTable, DataError> {
    let file = std::fs::File::open(path)?;
    parse_features(file, expected_dim)
}

pub fn parse_features<R: Read>(reader: R, expected_dim: usize) -> Result<FeatureTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected_header: Vec<String> =
        std::iter::once("image_id".to_string()).chain((0..expected_dim).map(|j| format!("f{j}"))).collect();
    if header.iter().ne(expected_header.iter().map(String::as_str)) {
        return Err(DataError::DimMismatch { row: 0, expected: expected_dim, got: header.len().saturating_sub(1) });
    }
    let mut vectors = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != expected_dim + 1 {
            return Err(DataError::DimMismatch { row, expected: expected_dim, got: rec.len().saturating_sub(1) });
        }
        let id = rec[0].to_string();
        let values = rec
            .iter()
            .skip(1)
            .map(|x| {
                x.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| DataError::Features(format!("row {row}: `{x}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if vectors.insert(id.clone(), values).is_some() {
            return Err(DataError::Features(format!("row {row}: image `{id}` listed twice")));
        }
    }
    FeatureTable::fit(expected_dim, vectors)
}

/// Uniform value in `[-1, 1)` for component `j` of image `id`:
/// the first eight bytes of
/// `SHA-256("multiq-synthetic-features" ‖ seed_le64 ‖ id ‖ 0x00 ‖ j_le32)`,
/// read little-endian, top 53 bits scaled to `[0, 1)`, then mapped to
/// `2u − 1`.
pub fn synthetic_component(seed: u64, id: &str, j: u32) -> f64 {
    let mut h = Sha256::new();
    h.update(b"multiq-synthetic-features");
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    h.update([0u8]);
    h.update(j.to_le_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    let u = (u64::from_le_bytes(word) >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * u - 1.0
}

/// Deterministic stand-in for extracted image features.
pub fn synthetic_features<'a>(ids: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> FeatureTable {
    let vectors: BTreeMap<String, Vec<f64>> = ids
        .into_iter()
        .map(|id| (id.to_string(), (0..dim as u32).map(|j| synthetic_component(seed, id, j)).collect()))
        .collect();
    FeatureTable::fit(dim, vectors).expect("synthetic rows have the requested dimension")
}

/// Every image id referenced by `entries`, in first-seen order.
pub fn image_ids(entries: &[DatasetEntry]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for e in entries {
        for id in e.images() {
            if seen.insert(id) {
                out.push(id.to_string());
            }
        }
    }
    out
}
