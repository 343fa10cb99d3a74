use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grammar::PregroupType;

/// RNG stream used for parameter initialisation; the other streams of a
/// run are listed in `training::trainer`.
pub(crate) const INIT_STREAM: u64 = 0;

/// Identifies one trainable block: a word under its type, a merge rule,
/// or the comparison box.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolKey {
    pub label: String,
    pub ty: PregroupType,
}

impl SymbolKey {
    pub fn new(label: impl Into<String>, ty: PregroupType) -> Self {
        SymbolKey {
            label: label.into(),
            ty,
        }
    }
}

/// Flat parameter vector plus the symbol table pointing into it. Slots are
/// handed out in allocation order, so the layout only depends on the order
/// in which diagrams are registered.
///
/// Values are in turns: a slot holding `θ` binds the rotation angle
/// `2π·θ` radians (see [`to_radians`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    values: Vec<f64>,
    symbols: BTreeMap<SymbolKey, Range<usize>>,
    order: Vec<SymbolKey>,
    seed: u64,
}

impl ParamStore {
    pub fn new(seed: u64) -> Self {
        ParamStore {
            values: Vec::new(),
            symbols: BTreeMap::new(),
            order: Vec::new(),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Returns the slot range of `key`, allocating `size` fresh slots the
    /// first time it is seen.
    ///
    /// Panics if `key` was already allocated with a different size, which
    /// would mean two ansatz configurations share one store.
    pub fn allocate(&mut self, key: SymbolKey, size: usize) -> Range<usize> {
        if let Some(r) = self.symbols.get(&key) {
            assert_eq!(r.len(), size, "symbol {key:?} re-allocated with a different size");
            return r.clone();
        }
        let start = self.values.len();
        self.values.resize(start + size, 0.0);
        let range = start..start + size;
        self.symbols.insert(key.clone(), range.clone());
        self.order.push(key);
        range
    }

    pub fn slots(&self, key: &SymbolKey) -> Option<Range<usize>> {
        self.symbols.get(key).cloned()
    }

    pub fn comparison_slots(&self) -> Option<Range<usize>> {
        self.symbols
            .iter()
            .find(|(k, _)| k.label == crate::diagram::COMPARISON_LABEL)
            .map(|(_, r)| r.clone())
    }

    /// Symbols in allocation order.
    pub fn symbols(&self) -> impl Iterator<Item = (&SymbolKey, Range<usize>)> {
        self.order.iter().map(|k| (k, self.symbols[k].clone()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn set_values(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.values.len(), "parameter vector length changed");
        self.values = values;
    }

    /// Draws every slot uniformly from `[0, 1)` turns using the store's seed.
    pub fn initialize(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(INIT_STREAM);
        for v in &mut self.values {
            *v = rng.gen_range(0.0..1.0);
        }
    }

    /// The simulator bindings for the current values.
    pub fn radians(&self) -> Vec<f64> {
        to_radians(&self.values)
    }
}

/// Turns to radians.
pub fn to_radians(turns: &[f64]) -> Vec<f64> {
    turns.iter().map(|t| t * TAU).collect()
}
