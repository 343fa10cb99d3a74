//! Compiling dataset entries and running the SPSA loop.
//!
//! Random streams of a run, all `ChaCha8Rng::seed_from_u64(seed)`:
//! stream 0 draws the initial parameters, 1 the data split, 2 the batch
//! order, 3 the perturbation directions.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params::to_radians;
use super::{accuracy_from_pairs, mean_bce, spsa_step, ParamStore, SpsaConfig};
use crate::ansatz::{allocate_symbols, compile, AnsatzError, Circuit, ImageEncoder, QubitMap};
use crate::data::DatasetEntry;
use crate::diagram::{attach_comparison, build_diagram, canonical_form, Diagram, DiagramError, ModelKind};
use crate::grammar::{parse_sentence, GrammarError, Lexicon};
use crate::simulator::{evaluate, SimError};

pub const SPLIT_STREAM: u64 = 1;
pub const SHUFFLE_STREAM: u64 = 2;
pub const PERTURB_STREAM: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Simulator(#[from] SimError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no entries to {0}")]
    Empty(&'static str),
}

/// Everything needed to turn a (sentence, image) pairing into a circuit.
#[derive(Clone)]
pub struct Pipeline {
    pub lexicon: Arc<Lexicon>,
    pub model: ModelKind,
    pub qmap: QubitMap,
    pub images: Arc<dyn ImageEncoder + Send + Sync>,
}

/// The positive and negative circuit of one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryCircuits {
    pub positive: Circuit,
    pub negative: Circuit,
}

impl Pipeline {
    pub fn new(
        lexicon: Arc<Lexicon>,
        model: ModelKind,
        qmap: QubitMap,
        images: Arc<dyn ImageEncoder + Send + Sync>,
    ) -> Self {
        Pipeline { lexicon, model, qmap, images }
    }

    /// Canonical sentence+comparison diagram of one pairing.
    pub fn diagram(&self, sentence: &str, image: &str) -> Result<Diagram, TrainingError> {
        let parse = parse_sentence(sentence, &self.lexicon)?;
        let d = build_diagram(self.model, &parse)?;
        Ok(canonical_form(&attach_comparison(&d, image)?))
    }

    /// Allocates slots for every symbol the entries use, in entry order.
    pub fn register(&self, entries: &[DatasetEntry], store: &mut ParamStore) -> Result<(), TrainingError> {
        for e in entries {
            for p in e.pairings() {
                allocate_symbols(&self.diagram(p.sentence, p.image)?, &self.qmap, store);
            }
        }
        Ok(())
    }

    /// `[(positive circuit, 1), (negative circuit, 0)]`.
    pub fn entry_samples(&self, entry: &DatasetEntry, store: &ParamStore) -> Result<Vec<(Circuit, u8)>, TrainingError> {
        entry
            .pairings()
            .iter()
            .map(|p| {
                let d = self.diagram(p.sentence, p.image)?;
                Ok((compile(&d, &self.qmap, store, self.images.as_ref())?, p.label))
            })
            .collect()
    }

    pub fn compile_entries(&self, entries: &[DatasetEntry], store: &ParamStore) -> Result<Vec<EntryCircuits>, TrainingError> {
        entries
            .par_iter()
            .map(|e| {
                let mut s = self.entry_samples(e, store)?;
                let (negative, _) = s.pop().expect("two samples");
                let (positive, _) = s.pop().expect("two samples");
                Ok(EntryCircuits { positive, negative })
            })
            .collect()
    }

    /// Fraction of `entries` whose positive pairing outscores the negative.
    pub fn evaluate_accuracy(&self, store: &ParamStore, entries: &[DatasetEntry]) -> Result<f64, TrainingError> {
        if entries.is_empty() {
            return Err(TrainingError::Empty("evaluate"));
        }
        let compiled = self.compile_entries(entries, store)?;
        Ok(accuracy_from_pairs(&pair_probabilities(&compiled, store.values())?))
    }
}

/// `(p_pos, p_neg)` per entry at parameters `theta` (in turns),
/// evaluated in parallel.
pub fn pair_probabilities(entries: &[EntryCircuits], theta: &[f64]) -> Result<Vec<(f64, f64)>, SimError> {
    let theta = &to_radians(theta);
    entries
        .par_iter()
        .map(|e| Ok((evaluate(&e.positive, theta)?.p_match, evaluate(&e.negative, theta)?.p_match)))
        .collect()
}

/// Mean BCE over both samples of every entry, `theta` in turns.
pub fn entries_loss(entries: &[&EntryCircuits], theta: &[f64]) -> Result<f64, SimError> {
    let theta = &to_radians(theta);
    let pairs: Vec<(f64, f64)> = entries
        .par_iter()
        .map(|e| Ok((evaluate(&e.positive, theta)?.p_match, evaluate(&e.negative, theta)?.p_match)))
        .collect::<Result<_, SimError>>()?;
    let samples: Vec<(f64, u8)> = pairs.iter().flat_map(|&(p, n)| [(p, 1u8), (n, 0u8)]).collect();
    Ok(mean_bce(&samples))
}

fn loss_and_accuracy(entries: &[EntryCircuits], theta: &[f64]) -> Result<(f64, f64), SimError> {
    let pairs = pair_probabilities(entries, theta)?;
    let samples: Vec<(f64, u8)> = pairs.iter().flat_map(|&(p, n)| [(p, 1u8), (n, 0u8)]).collect();
    Ok((mean_bce(&samples), accuracy_from_pairs(&pairs)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    /// 0 is the initial parameter vector.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub epochs: Vec<EpochMetrics>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub test_accuracy: Option<f64>,
    pub n_params: usize,
    pub wall_time_s: f64,
}

impl RunMetrics {
    /// `epoch,train_loss,val_accuracy`, one row per epoch including 0.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_accuracy\n");
        for m in &self.epochs {
            let val = m.val_accuracy.map(|v| format!("{v:?}")).unwrap_or_default();
            out += &format!("{},{:?},{}\n", m.epoch, m.train_loss, val);
        }
        out
    }

    pub fn max_train_accuracy(&self) -> f64 {
        self.epochs.iter().map(|m| m.train_accuracy).fold(0.0, f64::max)
    }
}

/// Result of [`Trainer::fit`]: metrics plus the selected parameters.
pub struct FitOutcome {
    pub metrics: RunMetrics,
    pub store: ParamStore,
}

pub struct Trainer {
    pub pipeline: Pipeline,
    pub spsa: SpsaConfig,
}

impl Trainer {
    pub fn new(pipeline: Pipeline, spsa: SpsaConfig) -> Self {
        Trainer { pipeline, spsa }
    }

    /// Trains on `train`, keeps the parameters of the epoch with the best
    /// validation accuracy (earliest on ties; the last epoch when `val`
    /// is empty) and scores them on `test` if non-empty.
    ///
    /// The SPSA iteration index is the epoch index, so every batch of an
    /// epoch shares the same gains.
    pub fn fit(
        &self,
        train: &[DatasetEntry],
        val: &[DatasetEntry],
        test: &[DatasetEntry],
        seed: u64,
    ) -> Result<FitOutcome, TrainingError> {
        let start = Instant::now();
        self.spsa.validate().map_err(TrainingError::Config)?;
        if train.is_empty() {
            return Err(TrainingError::Empty("train on"));
        }
        let mut store = ParamStore::new(seed);
        for set in [train, val, test] {
            self.pipeline.register(set, &mut store)?;
        }
        store.initialize();

        let train_c = self.pipeline.compile_entries(train, &store)?;
        let val_c = self.pipeline.compile_entries(val, &store)?;
        let test_c = self.pipeline.compile_entries(test, &store)?;

        let mut theta = store.values().to_vec();
        let mut shuffle = stream_rng(seed, SHUFFLE_STREAM);
        let mut perturb = stream_rng(seed, PERTURB_STREAM);

        let record = |epoch: usize, theta: &[f64]| -> Result<EpochMetrics, TrainingError> {
            let (train_loss, train_accuracy) = loss_and_accuracy(&train_c, theta)?;
            let val_accuracy = if val_c.is_empty() {
                None
            } else {
                Some(accuracy_from_pairs(&pair_probabilities(&val_c, theta)?))
            };
            log::debug!("seed {seed} epoch {epoch}: loss {train_loss:.5} train acc {train_accuracy:.3} val {val_accuracy:?}");
            Ok(EpochMetrics { epoch, train_loss, train_accuracy, val_accuracy })
        };

        let mut epochs = vec![record(0, &theta)?];
        let mut best = (0usize, theta.clone());
        let mut order: Vec<usize> = (0..train_c.len()).collect();
        for epoch in 1..=self.spsa.epochs {
            order.shuffle(&mut shuffle);
            for chunk in order.chunks(self.spsa.batch_size) {
                let batch: Vec<&EntryCircuits> = chunk.iter().map(|&i| &train_c[i]).collect();
                spsa_step(&mut theta, epoch - 1, &self.spsa, &mut perturb, |t| entries_loss(&batch, t))?;
            }
            let m = record(epoch, &theta)?;
            let improved = match (m.val_accuracy, epochs[best.0].val_accuracy) {
                (Some(now), Some(prev)) => now > prev,
                _ => true,
            };
            if improved {
                best = (epoch, theta.clone());
            }
            epochs.push(m);
        }

        let (best_epoch, best_theta) = best;
        store.set_values(best_theta);
        let test_accuracy = if test_c.is_empty() {
            None
        } else {
            Some(accuracy_from_pairs(&pair_probabilities(&test_c, store.values())?))
        };
        let metrics = RunMetrics {
            seed,
            epochs,
            best_epoch,
            test_accuracy,
            n_params: store.len(),
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        Ok(FitOutcome { metrics, store })
    }
}

/// Shuffles `0..n` with the split stream of `seed` and cuts it 60/20/20.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let n_train = (n as f64 * 0.6).round() as usize;
    let n_val = (n as f64 * 0.2).round() as usize;
    let test = idx.split_off((n_train + n_val).min(n));
    let val = idx.split_off(n_train.min(idx.len()));
    (idx, val, test)
}
