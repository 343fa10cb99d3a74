//! String-diagram IR shared by all five compositional models.
//!
//! Every diagram is a closed state: boxes without inputs (words, image
//! states) feed boxes that consume wires (cups, spiders, merges, the
//! comparison box). A wire carries exactly one simple type and joins an
//! output port of one box to an input port of another; the ports left
//! unconnected are listed in `outputs`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{AtomicType, NounPhrase, Parse, PregroupType, SimpleType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("ill-formed diagram: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoxKind {
    Word,
    Cup,
    Spider,
    /// Trainable binary combiner of two same-typed wires.
    Merge,
    ImageState,
    Comparison,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramBox {
    pub kind: BoxKind,
    pub label: String,
    pub dom: PregroupType,
    pub cod: PregroupType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub node: usize,
    pub index: usize,
}

/// `source` is an output port (indexes `cod`), `target` an input port
/// (indexes `dom`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Wire {
    pub source: Port,
    pub target: Port,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagram {
    pub boxes: Vec<DiagramBox>,
    pub wires: Vec<Wire>,
    pub outputs: Vec<Port>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cat,
    Bow,
    Seq,
    Ltree,
    Cfg,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Cat,
        ModelKind::Bow,
        ModelKind::Seq,
        ModelKind::Ltree,
        ModelKind::Cfg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cat => "cat",
            ModelKind::Bow => "bow",
            ModelKind::Seq => "seq",
            ModelKind::Ltree => "ltree",
            ModelKind::Cfg => "cfg",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model `{s}` (expected cat|bow|seq|ltree|cfg)"))
    }
}

pub const COMPARISON_LABEL: &str = "COMPARISON";
pub const LTREE_LABEL: &str = "LTREE";

impl Diagram {
    pub fn add_box(&mut self, kind: BoxKind, label: impl Into<String>, dom: PregroupType, cod: PregroupType) -> usize {
        self.boxes.push(DiagramBox {
            kind,
            label: label.into(),
            dom,
            cod,
        });
        self.boxes.len() - 1
    }

    pub fn connect(&mut self, source: Port, target: Port) {
        self.wires.push(Wire { source, target });
    }

    pub fn port_type(&self, port: Port, output: bool) -> Option<SimpleType> {
        let b = self.boxes.get(port.node)?;
        let ty = if output { &b.cod } else { &b.dom };
        ty.factors().get(port.index).copied()
    }

    pub fn output_type(&self) -> PregroupType {
        PregroupType::new(
            self.outputs
                .iter()
                .filter_map(|&p| self.port_type(p, true))
                .collect(),
        )
    }

    pub fn count(&self, kind: BoxKind) -> usize {
        self.boxes.iter().filter(|b| b.kind == kind).count()
    }

    /// Longest-path depth of every box from the sources. Fails on cycles.
    pub fn layers(&self) -> Result<Vec<usize>, DiagramError> {
        let n = self.boxes.len();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for w in &self.wires {
            if w.source.node >= n || w.target.node >= n {
                return Err(DiagramError::Invalid(format!("wire {w:?} leaves the diagram")));
            }
            indegree[w.target.node] += 1;
            succ[w.source.node].push(w.target.node);
        }
        let mut layer = vec![0usize; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &j in &succ[i] {
                layer[j] = layer[j].max(layer[i] + 1);
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if seen != n {
            return Err(DiagramError::Invalid("diagram contains a cycle".into()));
        }
        Ok(layer)
    }

    /// Structural type check: box signatures, wire types, single use of
    /// every port, acyclicity.
    pub fn validate(&self) -> Result<(), DiagramError> {
        let invalid = |msg: String| Err(DiagramError::Invalid(msg));
        let s = SimpleType::base(AtomicType::S);
        let img = SimpleType::base(AtomicType::Img);
        for (i, b) in self.boxes.iter().enumerate() {
            let dom = b.dom.factors();
            let cod = b.cod.factors();
            let ok = match b.kind {
                BoxKind::Word => dom.is_empty() && !cod.is_empty(),
                BoxKind::ImageState => dom.is_empty() && cod == [img],
                BoxKind::Cup => cod.is_empty() && dom.len() == 2 && dom[0].cancels_with(dom[1]),
                BoxKind::Spider => dom.len() >= 2 && cod.len() == 1 && dom.iter().all(|t| *t == cod[0]),
                BoxKind::Merge => dom.len() == 2 && cod.len() == 1 && dom.iter().all(|t| *t == cod[0]),
                BoxKind::Comparison => dom == [s, img] && cod == [s],
            };
            if !ok {
                return invalid(format!("box {i} ({:?} `{}`) has signature {} → {}", b.kind, b.label, b.dom, b.cod));
            }
        }
        let mut inputs_used: BTreeMap<Port, usize> = BTreeMap::new();
        let mut outputs_used: BTreeMap<Port, usize> = BTreeMap::new();
        for w in &self.wires {
            let (Some(src), Some(dst)) = (self.port_type(w.source, true), self.port_type(w.target, false)) else {
                return invalid(format!("wire {w:?} references a missing port"));
            };
            if src != dst {
                return invalid(format!("wire {w:?} joins {src} to {dst}"));
            }
            *outputs_used.entry(w.source).or_default() += 1;
            *inputs_used.entry(w.target).or_default() += 1;
        }
        for &p in &self.outputs {
            if self.port_type(p, true).is_none() {
                return invalid(format!("diagram output {p:?} does not exist"));
            }
            *outputs_used.entry(p).or_default() += 1;
        }
        for (i, b) in self.boxes.iter().enumerate() {
            for index in 0..b.dom.len() {
                if inputs_used.get(&Port { node: i, index }) != Some(&1) {
                    return invalid(format!("input port {index} of box {i} is not used exactly once"));
                }
            }
            for index in 0..b.cod.len() {
                if outputs_used.get(&Port { node: i, index }) != Some(&1) {
                    return invalid(format!("output port {index} of box {i} is not used exactly once"));
                }
            }
        }
        self.layers().map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serializes")
    }
}

fn word_box(d: &mut Diagram, word: &str, cod: PregroupType) -> Port {
    let node = d.add_box(BoxKind::Word, word, PregroupType::unit(), cod);
    Port { node, index: 0 }
}

fn spider(d: &mut Diagram, inputs: &[Port]) -> Port {
    let s = PregroupType::sentence();
    let dom = PregroupType::new(vec![SimpleType::base(AtomicType::S); inputs.len()]);
    let node = d.add_box(BoxKind::Spider, "", dom, s);
    for (index, &p) in inputs.iter().enumerate() {
        d.connect(p, Port { node, index });
    }
    Port { node, index: 0 }
}

fn merge(d: &mut Diagram, label: &str, left: Port, right: Port) -> Port {
    let s = SimpleType::base(AtomicType::S);
    let node = d.add_box(BoxKind::Merge, label, PregroupType::new(vec![s, s]), PregroupType::sentence());
    d.connect(left, Port { node, index: 0 });
    d.connect(right, Port { node, index: 1 });
    Port { node, index: 0 }
}

/// Builds the sentence diagram of `parse` under `model`.
pub fn build_diagram(model: ModelKind, parse: &Parse) -> Result<Diagram, DiagramError> {
    if parse.tokens.is_empty() {
        return Err(DiagramError::Shape("empty parse".into()));
    }
    let mut d = Diagram::default();
    let s = PregroupType::sentence();
    let out = match model {
        ModelKind::Cat => {
            if parse.result != s {
                return Err(DiagramError::Shape(format!("parse reduces to {}, not s", parse.result)));
            }
            for t in &parse.tokens {
                word_box(&mut d, &t.word, t.pregroup_type());
            }
            let port_of = |pos: usize| {
                let (node, index) = parse.locate(pos);
                Port { node, index }
            };
            for link in &parse.reductions {
                let (l, r) = (port_of(link.left), port_of(link.right));
                let dom = PregroupType::new(vec![
                    d.port_type(l, true).expect("word port"),
                    d.port_type(r, true).expect("word port"),
                ]);
                let node = d.add_box(BoxKind::Cup, "", dom, PregroupType::unit());
                d.connect(l, Port { node, index: 0 });
                d.connect(r, Port { node, index: 1 });
            }
            port_of(parse.output)
        }
        ModelKind::Bow => {
            let words: Vec<Port> = parse.tokens.iter().map(|t| word_box(&mut d, &t.word, s.clone())).collect();
            if words.len() == 1 {
                words[0]
            } else {
                spider(&mut d, &words)
            }
        }
        ModelKind::Seq | ModelKind::Ltree => {
            let words: Vec<Port> = parse.tokens.iter().map(|t| word_box(&mut d, &t.word, s.clone())).collect();
            let mut running = words[0];
            for &w in &words[1..] {
                running = if model == ModelKind::Seq {
                    spider(&mut d, &[running, w])
                } else {
                    merge(&mut d, LTREE_LABEL, running, w)
                };
            }
            running
        }
        ModelKind::Cfg => {
            let words: Vec<Port> = parse.tokens.iter().map(|t| word_box(&mut d, &t.word, s.clone())).collect();
            let clause = &parse.clause;
            let np = |d: &mut Diagram, np: &NounPhrase| {
                let mut nbar = words[np.head];
                for &m in np.modifiers.iter().rev() {
                    nbar = merge(d, "MOD", words[m], nbar);
                }
                match np.determiner {
                    Some(det) => merge(d, "NP", words[det], nbar),
                    None => nbar,
                }
            };
            let subject = np(&mut d, &clause.subject);
            let mut vp = words[clause.verb];
            if let Some(object) = &clause.object {
                let object = np(&mut d, object);
                vp = merge(&mut d, "VP", vp, object);
            }
            for pp in &clause.adjuncts {
                let object = np(&mut d, &pp.object);
                let pp = merge(&mut d, "PP", words[pp.preposition], object);
                vp = merge(&mut d, "VP_PP", vp, pp);
            }
            merge(&mut d, "S", subject, vp)
        }
    };
    d.outputs = vec![out];
    debug_assert!(d.validate().is_ok(), "{model} builder produced an ill-typed diagram");
    Ok(d)
}

/// Adds the image state and the comparison box joining it with the
/// sentence wire.
pub fn attach_comparison(sentence: &Diagram, image_id: &str) -> Result<Diagram, DiagramError> {
    if sentence.output_type() != PregroupType::sentence() || sentence.outputs.len() != 1 {
        return Err(DiagramError::Shape(format!(
            "comparison needs a single s output, diagram has {}",
            sentence.output_type()
        )));
    }
    if sentence.count(BoxKind::ImageState) > 0 {
        return Err(DiagramError::Shape("diagram already carries an image".into()));
    }
    let mut d = sentence.clone();
    let img = SimpleType::base(AtomicType::Img);
    let s = SimpleType::base(AtomicType::S);
    let image = d.add_box(BoxKind::ImageState, image_id, PregroupType::unit(), img.into());
    let node = d.add_box(
        BoxKind::Comparison,
        COMPARISON_LABEL,
        PregroupType::new(vec![s, img]),
        PregroupType::sentence(),
    );
    d.connect(d.outputs[0], Port { node, index: 0 });
    d.connect(Port { node: image, index: 0 }, Port { node, index: 1 });
    d.outputs = vec![Port { node, index: 0 }];
    Ok(d)
}

type Descriptor = (usize, usize, usize);
type Signature = (usize, Vec<Descriptor>, Vec<Descriptor>, Vec<usize>);

/// Relabels boxes into a canonical order so isomorphic diagrams compare
/// equal. Boxes are ordered by kind, label and layer, with remaining ties
/// broken by colour refinement over the wiring. Spider inputs are
/// commutative and get renumbered by source.
pub fn canonical_form(d: &Diagram) -> Diagram {
    let n = d.boxes.len();
    let Ok(layers) = d.layers() else {
        return d.clone();
    };
    let commutative = |i: usize| d.boxes[i].kind == BoxKind::Spider;
    let mut incoming: Vec<Vec<(usize, Port)>> = vec![Vec::new(); n];
    let mut outgoing: Vec<Vec<(usize, Port)>> = vec![Vec::new(); n];
    for w in &d.wires {
        incoming[w.target.node].push((w.target.index, w.source));
        outgoing[w.source.node].push((w.source.index, w.target));
    }
    let mut output_marks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, p) in d.outputs.iter().enumerate() {
        output_marks[p.node].push(k * 1000 + p.index);
    }

    let rank = |keys: Vec<Signature>| -> Vec<usize> {
        let mut sorted: Vec<&Signature> = keys.iter().collect();
        sorted.sort();
        sorted.dedup();
        let index: BTreeMap<&Signature, usize> = sorted.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        keys.iter().map(|k| index[k]).collect()
    };

    let mut initial: Vec<(BoxKind, &str, &PregroupType, &PregroupType, usize)> = (0..n)
        .map(|i| {
            let b = &d.boxes[i];
            (b.kind, b.label.as_str(), &b.dom, &b.cod, layers[i])
        })
        .collect();
    let base_keys = initial.clone();
    initial.sort();
    initial.dedup();
    let mut colour: Vec<usize> = base_keys
        .iter()
        .map(|k| initial.binary_search(k).expect("present"))
        .collect();
    let mut classes = colour.iter().collect::<std::collections::BTreeSet<_>>().len();
    loop {
        let keys: Vec<Signature> = (0..n)
            .map(|i| {
                let mut ins: Vec<Descriptor> = incoming[i]
                    .iter()
                    .map(|&(port, src)| {
                        let port = if commutative(i) { usize::MAX } else { port };
                        (port, colour[src.node], src.index)
                    })
                    .collect();
                ins.sort();
                let mut outs: Vec<Descriptor> = outgoing[i]
                    .iter()
                    .map(|&(port, dst)| {
                        let dst_port = if commutative(dst.node) { usize::MAX } else { dst.index };
                        (port, colour[dst.node], dst_port)
                    })
                    .collect();
                outs.sort();
                (colour[i], ins, outs, output_marks[i].clone())
            })
            .collect();
        let next = rank(keys);
        let next_classes = next.iter().collect::<std::collections::BTreeSet<_>>().len();
        colour = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ba, bb) = (&d.boxes[a], &d.boxes[b]);
        (ba.kind, &ba.label, layers[a], colour[a], a).cmp(&(bb.kind, &bb.label, layers[b], colour[b], b))
    });
    let mut new_index = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let remap = |p: Port| Port {
        node: new_index[p.node],
        index: p.index,
    };

    let boxes = order.iter().map(|&old| d.boxes[old].clone()).collect();
    let mut wires: Vec<Wire> = d
        .wires
        .iter()
        .map(|w| Wire {
            source: remap(w.source),
            target: remap(w.target),
        })
        .collect();
    wires.sort_by_key(|w| (w.target.node, w.source));
    let mut next_port: BTreeMap<usize, usize> = BTreeMap::new();
    for w in &mut wires {
        if d.boxes[order[w.target.node]].kind == BoxKind::Spider {
            let slot = next_port.entry(w.target.node).or_default();
            w.target.index = *slot;
            *slot += 1;
        }
    }
    wires.sort_by_key(|w| (w.target.node, w.target.index));
    Diagram {
        boxes,
        wires,
        outputs: d.outputs.iter().map(|&p| remap(p)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_sentence, Category, Lexicon};

    fn lexicon() -> Lexicon {
        let mut lex = Lexicon::new();
        for w in ["dogs", "cats", "dog", "cat", "road"] {
            lex.insert(w, Category::Noun);
        }
        lex.insert("chase", Category::TransitiveVerb);
        lex.insert("chases", Category::TransitiveVerb);
        lex.insert("a", Category::Determiner);
        lex.insert("the", Category::Determiner);
        lex.insert("big", Category::Adjective);
        lex.insert("on", Category::Preposition);
        lex
    }

    fn build(model: ModelKind, sentence: &str) -> Diagram {
        build_diagram(model, &parse_sentence(sentence, &lexicon()).unwrap()).unwrap()
    }

    #[test]
    fn cat_dogs_chase_cats() {
        let d = build(ModelKind::Cat, "Dogs chase cats");
        assert_eq!(d.count(BoxKind::Word), 3);
        assert_eq!(d.count(BoxKind::Cup), 2);
        assert_eq!(d.output_type(), PregroupType::sentence());
        d.validate().unwrap();
    }

    #[test]
    fn ltree_and_cfg_bracketings_differ() {
        let lt = build(ModelKind::Ltree, "dogs chase cats");
        assert_eq!(lt.count(BoxKind::Merge), 2);
        // ((dogs chase) cats): the first merge takes two words.
        let first = lt.boxes.iter().position(|b| b.kind == BoxKind::Merge).unwrap();
        let sources: Vec<&str> = lt
            .wires
            .iter()
            .filter(|w| w.target.node == first)
            .map(|w| lt.boxes[w.source.node].label.as_str())
            .collect();
        assert_eq!(sources, ["dogs", "chase"]);
        let cfg = build(ModelKind::Cfg, "dogs chase cats");
        let labels: Vec<&str> = cfg.boxes.iter().filter(|b| b.kind == BoxKind::Merge).map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["VP", "S"]);
    }

    #[test]
    fn cfg_handles_determiners_modifiers_and_adjuncts() {
        let d = build(ModelKind::Cfg, "A big dog chases the cat on the road");
        d.validate().unwrap();
        let mut labels: Vec<&str> = d.boxes.iter().filter(|b| b.kind == BoxKind::Merge).map(|b| b.label.as_str()).collect();
        labels.sort();
        assert_eq!(labels, ["MOD", "NP", "NP", "NP", "PP", "S", "VP", "VP_PP"]);
    }

    #[test]
    fn intransitive_bow_uses_one_binary_spider() {
        let mut lex = lexicon();
        lex.insert("run", Category::IntransitiveVerb);
        let p = parse_sentence("dogs run", &lex).unwrap();
        let d = build_diagram(ModelKind::Bow, &p).unwrap();
        assert_eq!(d.count(BoxKind::Spider), 1);
        assert_eq!(d.wires.len(), 2);
        d.validate().unwrap();
    }

    #[test]
    fn comparison_attaches_once() {
        for model in ModelKind::ALL {
            let d = attach_comparison(&build(model, "Dogs chase cats"), "img_000").unwrap();
            d.validate().unwrap();
            assert_eq!(d.output_type(), PregroupType::sentence());
            assert!(matches!(attach_comparison(&d, "img_001"), Err(DiagramError::Shape(_))));
        }
    }

    #[test]
    fn comparison_rejects_non_sentence() {
        let mut d = Diagram::default();
        let p = word_box(&mut d, "dogs", PregroupType::atom(AtomicType::N));
        d.outputs = vec![p];
        assert!(matches!(attach_comparison(&d, "x"), Err(DiagramError::Shape(_))));
    }

    #[test]
    fn canonical_form_is_idempotent() {
        for model in ModelKind::ALL {
            let d = attach_comparison(&build(model, "A big dog chases the cat on the road"), "i").unwrap();
            let c = canonical_form(&d);
            c.validate().unwrap();
            assert_eq!(c, canonical_form(&c), "{model}");
        }
    }

    #[test]
    fn bow_ignores_order_seq_does_not() {
        let bow = |s| canonical_form(&build(ModelKind::Bow, s));
        assert_eq!(bow("dogs chase cats"), bow("cats chase dogs"));
        let seq = |s| canonical_form(&build(ModelKind::Seq, s));
        assert_ne!(seq("dogs chase cats"), seq("cats chase dogs"));
    }

    #[test]
    fn validator_catches_type_mismatch() {
        let mut d = build(ModelKind::Cat, "dogs chase cats");
        d.boxes[0].cod = PregroupType::atom(AtomicType::S);
        assert!(d.validate().is_err());
        let mut d = build(ModelKind::Bow, "dogs chase cats");
        d.wires.pop();
        assert!(d.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = build(ModelKind::Cat, "dogs chase cats");
        let back: Diagram = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }
}
