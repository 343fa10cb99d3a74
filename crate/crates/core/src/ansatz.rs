//! Diagram → circuit compilation with the Sim14 ansatz.
//!
//! Qubit layout follows the order in which boxes are visited (by layer,
//! then by position in the diagram). Every wire owns
//! `QubitMap::qubits(atom)` qubits. Reductions never free qubits: they are
//! recorded as post-selections onto `|0⟩` and applied by the simulator at
//! the end of the circuit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{attach_comparison, build_diagram, BoxKind, Diagram, DiagramError, ModelKind, Port};
use crate::grammar::{parse_sentence, AtomicType, GrammarError, Lexicon, PregroupType};
use crate::training::params::{ParamStore, SymbolKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("expected {expected} angles, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("no feature vector bound for image `{0}`")]
    MissingFeatures(String),
    #[error("image `{id}` has {got} feature angles, the image register needs {expected}")]
    FeatureDim { id: String, expected: usize, got: usize },
    #[error("no parameters allocated for {0}")]
    MissingSymbol(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Qubits per atomic type, and the number of Sim14 layers per box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitMap {
    pub noun: usize,
    pub sentence: usize,
    pub prep: usize,
    pub image: usize,
    pub layers: usize,
}

impl Default for QubitMap {
    fn default() -> Self {
        QubitMap {
            noun: 1,
            sentence: 1,
            prep: 1,
            image: 5,
            layers: 1,
        }
    }
}

impl QubitMap {
    pub fn qubits(&self, atom: AtomicType) -> usize {
        match atom {
            AtomicType::N => self.noun,
            AtomicType::S => self.sentence,
            AtomicType::P => self.prep,
            AtomicType::Img => self.image,
        }
    }

    pub fn type_qubits(&self, ty: &PregroupType) -> usize {
        ty.factors().iter().map(|t| self.qubits(t.atom)).sum()
    }

    /// Length of the feature vector the image register consumes.
    pub fn image_dim(&self) -> usize {
        sim14_param_count(self.image, self.layers)
    }

    pub fn validate(&self) -> Result<(), AnsatzError> {
        if [self.noun, self.sentence, self.prep, self.image, self.layers].contains(&0) {
            return Err(AnsatzError::Shape(format!("qubit counts and layers must be ≥ 1: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Ry,
    Rx,
    Rz,
    Crx,
    Cnot,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    /// Radians, baked into the circuit.
    Fixed(f64),
    /// Index into the parameter vector.
    Slot(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn ry(target: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Ry, target, control: None, angle: Some(angle) }
    }

    pub fn rx(target: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Rx, target, control: None, angle: Some(angle) }
    }

    pub fn rz(target: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Rz, target, control: None, angle: Some(angle) }
    }

    pub fn crx(control: usize, target: usize, angle: Angle) -> Self {
        assert_ne!(control, target, "controlled gate on a single qubit");
        Gate { kind: GateKind::Crx, target, control: Some(control), angle: Some(angle) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "controlled gate on a single qubit");
        Gate { kind: GateKind::Cnot, target, control: Some(control), angle: None }
    }

    pub fn h(target: usize) -> Self {
        Gate { kind: GateKind::H, target, control: None, angle: None }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.target).chain(self.control)
    }
}

/// Gate list over `n_qubits`, little-endian (qubit 0 is the least
/// significant bit of a basis index). Every qubit except `measure` is
/// listed in `postselect` and must be found in `|0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub postselect: Vec<usize>,
    pub measure: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), postselect: Vec::new(), measure: 0 }
    }

    /// Distinct parameter slots referenced by the gates.
    pub fn slots(&self) -> BTreeSet<usize> {
        self.gates
            .iter()
            .filter_map(|g| match g.angle {
                Some(Angle::Slot(s)) => Some(s),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), AnsatzError> {
        let bad = |m: String| Err(AnsatzError::Shape(m));
        if self.measure >= self.n_qubits {
            return bad(format!("measured qubit {} out of range", self.measure));
        }
        for g in &self.gates {
            if g.qubits().any(|q| q >= self.n_qubits) || g.control == Some(g.target) {
                return bad(format!("gate {g:?} has invalid qubits"));
            }
        }
        let selected: BTreeSet<usize> = self.postselect.iter().copied().collect();
        if selected.len() != self.postselect.len() || selected.contains(&self.measure) {
            return bad("post-selection overlaps itself or the measured qubit".into());
        }
        if selected.len() + 1 != self.n_qubits {
            return bad(format!(
                "{} of {} qubits are neither post-selected nor measured",
                self.n_qubits - selected.len() - 1,
                self.n_qubits
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            layout: &'static str,
            #[serde(flatten)]
            circuit: &'a Circuit,
        }
        serde_json::to_string_pretty(&Dump {
            layout: "little-endian: qubit 0 is the least significant bit",
            circuit: self,
        })
        .expect("circuit serializes")
    }
}

/// `4 · qubits · layers`.
pub fn sim14_param_count(qubits: usize, layers: usize) -> usize {
    4 * qubits * layers
}

/// Emits `layers` Sim14 layers over `qubits`. Per layer: RY on every
/// qubit, a CRX ring with descending controls (`q[i]` controls
/// `q[i-1 mod k]`, `i = k-1..0`), RY on every qubit, and a CRX ring with
/// ascending controls (`q[i]` controls `q[i+1 mod k]`, `i = 0..k-1`).
/// On a single qubit each ring collapses to one RX. Angles are consumed in
/// emission order.
pub fn sim14_layer(qubits: &[usize], angles: &[Angle], layers: usize) -> Result<Vec<Gate>, AnsatzError> {
    let k = qubits.len();
    let expected = sim14_param_count(k, layers);
    if angles.len() != expected {
        return Err(AnsatzError::Arity { expected, got: angles.len() });
    }
    let mut next = angles.iter().copied();
    let mut take = || next.next().expect("arity checked");
    let ring = |gates: &mut Vec<Gate>, control: usize, target: usize, angle: Angle| {
        if k == 1 {
            gates.push(Gate::rx(qubits[0], angle));
        } else {
            gates.push(Gate::crx(qubits[control], qubits[target], angle));
        }
    };
    let mut gates = Vec::with_capacity(expected);
    for _ in 0..layers {
        for &q in qubits {
            gates.push(Gate::ry(q, take()));
        }
        for i in (0..k).rev() {
            ring(&mut gates, i, (i + k - 1) % k, take());
        }
        for &q in qubits {
            gates.push(Gate::ry(q, take()));
        }
        for i in 0..k {
            ring(&mut gates, i, (i + 1) % k, take());
        }
    }
    Ok(gates)
}

/// Source of the fixed rotation angles that load an image into its
/// register.
pub trait ImageEncoder {
    fn angles(&self, image_id: &str) -> Option<Vec<f64>>;
}

/// Loads every image as the all-zero angle vector. Useful when only the
/// circuit structure matters.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlankImages {
    pub dim: usize,
}

impl ImageEncoder for BlankImages {
    fn angles(&self, _image_id: &str) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
}

/// The symbol a trainable box reads its parameters from, with the slot
/// count it needs. Word boxes key on their output type, merges and the
/// comparison box on their input type.
pub fn box_symbol(d: &Diagram, node: usize, qmap: &QubitMap) -> Option<(SymbolKey, usize)> {
    let b = &d.boxes[node];
    let (ty, qubits) = match b.kind {
        BoxKind::Word => (b.cod.clone(), qmap.type_qubits(&b.cod)),
        BoxKind::Merge | BoxKind::Comparison => (b.dom.clone(), qmap.type_qubits(&b.dom)),
        _ => return None,
    };
    Some((SymbolKey::new(b.label.clone(), ty), sim14_param_count(qubits, qmap.layers)))
}

/// Makes sure `store` has slots for every trainable box of `d`.
pub fn allocate_symbols(d: &Diagram, qmap: &QubitMap, store: &mut ParamStore) {
    for node in 0..d.boxes.len() {
        if let Some((key, size)) = box_symbol(d, node, qmap) {
            store.allocate(key, size);
        }
    }
}

/// Compiles a type-checked diagram. `store` must already hold slots for
/// its symbols (see [`allocate_symbols`]).
pub fn compile(
    d: &Diagram,
    qmap: &QubitMap,
    store: &ParamStore,
    images: &dyn ImageEncoder,
) -> Result<Circuit, AnsatzError> {
    qmap.validate()?;
    d.validate()?;
    let layers = d.layers()?;
    let mut order: Vec<usize> = (0..d.boxes.len()).collect();
    order.sort_by_key(|&i| (layers[i], i));

    let mut inputs: BTreeMap<usize, Vec<(usize, Port)>> = BTreeMap::new();
    for w in &d.wires {
        inputs.entry(w.target.node).or_default().push((w.target.index, w.source));
    }
    for v in inputs.values_mut() {
        v.sort();
    }

    let mut wire_qubits: BTreeMap<Port, Vec<usize>> = BTreeMap::new();
    let mut n_qubits = 0usize;
    let mut gates = Vec::new();
    let mut postselect = Vec::new();

    let trainable = |node: usize| -> Result<Vec<Angle>, AnsatzError> {
        let (key, size) = box_symbol(d, node, qmap).expect("trainable box");
        let range = store
            .slots(&key)
            .ok_or_else(|| AnsatzError::MissingSymbol(format!("`{}` : {}", key.label, key.ty)))?;
        if range.len() != size {
            return Err(AnsatzError::Arity { expected: size, got: range.len() });
        }
        Ok(range.map(Angle::Slot).collect())
    };

    for node in order {
        let b = &d.boxes[node];
        let ins: Vec<Vec<usize>> = inputs
            .get(&node)
            .map(|v| v.iter().map(|(_, src)| wire_qubits[src].clone()).collect())
            .unwrap_or_default();
        match b.kind {
            BoxKind::Word | BoxKind::ImageState => {
                let mut all = Vec::new();
                for (index, t) in b.cod.factors().iter().enumerate() {
                    let q: Vec<usize> = (n_qubits..n_qubits + qmap.qubits(t.atom)).collect();
                    n_qubits += q.len();
                    all.extend_from_slice(&q);
                    wire_qubits.insert(Port { node, index }, q);
                }
                let angles = if b.kind == BoxKind::Word {
                    trainable(node)?
                } else {
                    let raw = images
                        .angles(&b.label)
                        .ok_or_else(|| AnsatzError::MissingFeatures(b.label.clone()))?;
                    let expected = sim14_param_count(all.len(), qmap.layers);
                    if raw.len() != expected {
                        return Err(AnsatzError::FeatureDim { id: b.label.clone(), expected, got: raw.len() });
                    }
                    raw.into_iter().map(Angle::Fixed).collect()
                };
                gates.extend(sim14_layer(&all, &angles, qmap.layers)?);
            }
            BoxKind::Cup => {
                let (a, bq) = (&ins[0], &ins[1]);
                if a.len() != bq.len() {
                    return Err(AnsatzError::Shape(format!("cup joins {} and {} qubits", a.len(), bq.len())));
                }
                // Nested pairing keeps multi-qubit cups planar.
                for (j, &qa) in a.iter().enumerate() {
                    let qb = bq[bq.len() - 1 - j];
                    gates.push(Gate::cnot(qa, qb));
                    gates.push(Gate::h(qa));
                    postselect.extend([qa, qb]);
                }
            }
            BoxKind::Spider => {
                let survivor = ins[0].clone();
                for other in &ins[1..] {
                    merge_into(&survivor, other, &mut gates, &mut postselect)?;
                }
                wire_qubits.insert(Port { node, index: 0 }, survivor);
            }
            BoxKind::Merge | BoxKind::Comparison => {
                let all: Vec<usize> = ins.iter().flatten().copied().collect();
                gates.extend(sim14_layer(&all, &trainable(node)?, qmap.layers)?);
                let survivor = ins[0].clone();
                if b.kind == BoxKind::Merge {
                    merge_into(&survivor, &ins[1], &mut gates, &mut postselect)?;
                } else {
                    postselect.extend_from_slice(&ins[1]);
                }
                wire_qubits.insert(Port { node, index: 0 }, survivor);
            }
        }
    }

    let [out] = d.outputs.as_slice() else {
        return Err(AnsatzError::Shape(format!("diagram has {} outputs, expected 1", d.outputs.len())));
    };
    let measured = &wire_qubits[out];
    if measured.len() != 1 {
        return Err(AnsatzError::Shape(format!("output wire spans {} qubits, expected 1", measured.len())));
    }
    let circuit = Circuit { n_qubits, gates, postselect, measure: measured[0] };
    circuit.validate()?;
    Ok(circuit)
}

/// Frobenius merge of `absorbed` into `survivor`: CNOT from each surviving
/// qubit onto its partner, partner post-selected to 0, leaving
/// `|x⟩|y⟩ ↦ δ_xy |x⟩`.
fn merge_into(
    survivor: &[usize],
    absorbed: &[usize],
    gates: &mut Vec<Gate>,
    postselect: &mut Vec<usize>,
) -> Result<(), AnsatzError> {
    if survivor.len() != absorbed.len() {
        return Err(AnsatzError::Shape(format!(
            "merging wires of {} and {} qubits",
            survivor.len(),
            absorbed.len()
        )));
    }
    for (&s, &a) in survivor.iter().zip(absorbed) {
        gates.push(Gate::cnot(s, a));
        postselect.push(a);
    }
    Ok(())
}

/// Number of distinct trainable slots the full sentence+image circuit of
/// `sentence` references under `model`.
pub fn parameter_count(
    model: ModelKind,
    sentence: &str,
    lexicon: &Lexicon,
    qmap: &QubitMap,
) -> Result<usize, AnsatzError> {
    let parse = parse_sentence(sentence, lexicon)?;
    let d = attach_comparison(&build_diagram(model, &parse)?, "image")?;
    let mut store = ParamStore::new(0);
    allocate_symbols(&d, qmap, &mut store);
    let c = compile(&d, qmap, &store, &BlankImages { dim: qmap.image_dim() })?;
    Ok(c.slots().len())
}
