//! Deterministic generator for the bundled lexicon and datasets.
//!
//! The structured set uses 13 verbs with 10 entries each. The first five
//! entries of a verb are bare plurals (`Dogs chase cats`), the rest take
//! determiners (`The dog chases a cat`). No possessives and no repeated
//! nouns, so every negative is a genuine reordering of the same words.
//! The sample files hold 20 bare-plural entries each.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetEntry, StructuredEntry, UnstructuredEntry};
use crate::grammar::{Category, Lexicon};

/// (singular, plural)
const AGENTS: &[(&str, &str)] = &[
    ("man", "men"),
    ("woman", "women"),
    ("boy", "boys"),
    ("girl", "girls"),
    ("child", "children"),
    ("dog", "dogs"),
    ("cat", "cats"),
    ("horse", "horses"),
    ("player", "players"),
    ("person", "people"),
];

const THINGS: &[(&str, &str)] = &[
    ("ball", "balls"),
    ("bike", "bikes"),
    ("frisbee", "frisbees"),
    ("bag", "bags"),
    ("car", "cars"),
    ("cart", "carts"),
    ("boat", "boats"),
    ("kite", "kites"),
];

/// (third person singular, plural, progressive)
const TRANSITIVE: &[(&str, &str, &str)] = &[
    ("chases", "chase", "chasing"),
    ("holds", "hold", "holding"),
    ("feeds", "feed", "feeding"),
    ("carries", "carry", "carrying"),
    ("pushes", "push", "pushing"),
    ("pulls", "pull", "pulling"),
    ("watches", "watch", "watching"),
    ("kicks", "kick", "kicking"),
    ("follows", "follow", "following"),
    ("hugs", "hug", "hugging"),
    ("kisses", "kiss", "kissing"),
    ("lifts", "lift", "lifting"),
    ("bites", "bite", "biting"),
    ("rides", "ride", "riding"),
    ("throws", "throw", "throwing"),
];

/// Verbs whose swap is meaningful: both arguments are animate.
const STRUCTURED_VERBS: usize = 13;

const INTRANSITIVE: &[&str] = &["sitting", "running", "standing", "lying", "jumping", "swimming", "sleeping"];
const PREPOSITIONS: &[&str] = &["on", "in", "near", "at"];
const PLACES: &[&str] = &["road", "beach", "grass", "street", "water", "field", "park", "snow"];
const ADJECTIVES: &[&str] = &["young", "old", "small", "big", "brown", "white"];
const DETERMINERS: &[&str] = &["a", "the"];

pub const STRUCTURED_SIZE: usize = STRUCTURED_VERBS * 10;
pub const UNSTRUCTURED_SIZE: usize = 350;
pub const SAMPLE_SIZE: usize = 20;

pub fn lexicon() -> Lexicon {
    let mut lex = Lexicon::new();
    for &(s, p) in AGENTS.iter().chain(THINGS) {
        lex.insert(s, Category::Noun);
        lex.insert(p, Category::Noun);
    }
    for &p in PLACES {
        lex.insert(p, Category::Noun);
    }
    for &(s, p, g) in TRANSITIVE {
        lex.insert(s, Category::TransitiveVerb);
        lex.insert(p, Category::TransitiveVerb);
        lex.insert(g, Category::TransitiveVerb);
    }
    for &v in INTRANSITIVE {
        lex.insert(v, Category::IntransitiveVerb);
    }
    for &p in PREPOSITIONS {
        lex.insert(p, Category::Preposition);
    }
    for &a in ADJECTIVES {
        lex.insert(a, Category::Adjective);
    }
    for &d in DETERMINERS {
        lex.insert(d, Category::Determiner);
    }
    for a in ["is", "are"] {
        lex.insert(a, Category::Auxiliary);
    }
    lex
}

fn capitalise(words: &[&str]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(0..1) {
        let upper = first.to_uppercase();
        s.replace_range(0..1, &upper);
    }
    s
}

/// Distinct ordered pairs of distinct indices below `n`, shuffled.
fn ordered_pairs(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    pairs
}

pub fn structured(seed: u64) -> Vec<DatasetEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(STRUCTURED_SIZE);
    for &(third, plural, _) in &TRANSITIVE[..STRUCTURED_VERBS] {
        let pairs = ordered_pairs(AGENTS.len(), &mut rng);
        for (i, &(a, b)) in pairs.iter().take(10).enumerate() {
            let (pos, neg) = if i < 5 {
                let (sa, sb) = (AGENTS[a].1, AGENTS[b].1);
                (capitalise(&[sa, plural, sb]), capitalise(&[sb, plural, sa]))
            } else {
                let d1 = *DETERMINERS.choose(&mut rng).expect("non-empty");
                let d2 = *DETERMINERS.choose(&mut rng).expect("non-empty");
                let (sa, sb) = (AGENTS[a].0, AGENTS[b].0);
                (capitalise(&[d1, sa, third, d2, sb]), capitalise(&[d2, sb, third, d1, sa]))
            };
            out.push(DatasetEntry::Structured(StructuredEntry {
                pos_sentence: pos,
                neg_sentence: neg,
                image: format!("s_{plural}_{i:02}"),
            }));
        }
    }
    out
}

pub fn unstructured(seed: u64) -> Vec<DatasetEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::new();
    // "A man is riding a horse"
    for &(agent, _) in AGENTS {
        for &(_, _, prog) in TRANSITIVE {
            for &(thing, _) in THINGS.iter().chain(&AGENTS[..3]) {
                if thing != agent {
                    let d = *DETERMINERS.choose(&mut rng).expect("non-empty");
                    sentences.push(capitalise(&["a", agent, "is", prog, d, thing]));
                }
            }
        }
    }
    // "A young dog is sitting on the grass"
    for &(agent, _) in AGENTS {
        for &verb in INTRANSITIVE {
            for &place in PLACES {
                let prep = *PREPOSITIONS.choose(&mut rng).expect("non-empty");
                let adj = *ADJECTIVES.choose(&mut rng).expect("non-empty");
                sentences.push(capitalise(&["a", adj, agent, "is", verb, prep, "the", place]));
            }
        }
    }
    // "Dogs chase balls"
    for &(_, agents) in AGENTS {
        for &(_, plural, _) in TRANSITIVE {
            for &(_, things) in THINGS {
                sentences.push(capitalise(&[agents, plural, things]));
            }
        }
    }
    sentences.shuffle(&mut rng);
    sentences
        .into_iter()
        .take(UNSTRUCTURED_SIZE)
        .enumerate()
        .map(|(i, sentence)| {
            DatasetEntry::Unstructured(UnstructuredEntry {
                sentence,
                pos_image: format!("u{i:03}_pos"),
                neg_image: format!("u{i:03}_neg"),
            })
        })
        .collect()
}

pub fn structured_sample(seed: u64) -> Vec<DatasetEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bare: Vec<DatasetEntry> = structured(seed)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % 10 < 5)
        .map(|(_, e)| e)
        .collect();
    bare.shuffle(&mut rng);
    bare.truncate(SAMPLE_SIZE);
    bare
}

pub fn unstructured_sample(seed: u64) -> Vec<DatasetEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize, usize)> = (0..AGENTS.len())
        .flat_map(|a| (0..TRANSITIVE.len()).flat_map(move |v| (0..THINGS.len()).map(move |t| (a, v, t))))
        .collect();
    pairs.shuffle(&mut rng);
    pairs
        .into_iter()
        .take(SAMPLE_SIZE)
        .enumerate()
        .map(|(i, (a, v, t))| {
            DatasetEntry::Unstructured(UnstructuredEntry {
                sentence: capitalise(&[AGENTS[a].1, TRANSITIVE[v].1, THINGS[t].1]),
                pos_image: format!("d{i:02}_pos"),
                neg_image: format!("d{i:02}_neg"),
            })
        })
        .collect()
}

/// JSON lines, one entry per line, trailing newline.
pub fn to_jsonl(entries: &[DatasetEntry]) -> String {
    entries.iter().map(|e| e.to_json_line() + "\n").collect()
}

/// File name and contents of every bundled data file.
pub fn bundle(seed: u64) -> Vec<(&'static str, String)> {
    vec![
        ("lexicon.tsv", lexicon().to_tsv()),
        ("structured.jsonl", to_jsonl(&structured(seed))),
        ("unstructured.jsonl", to_jsonl(&unstructured(seed))),
        ("structured_sample.jsonl", to_jsonl(&structured_sample(seed))),
        ("unstructured_sample.jsonl", to_jsonl(&unstructured_sample(seed))),
    ]
}
