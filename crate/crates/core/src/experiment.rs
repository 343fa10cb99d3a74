//! Experiment configuration and multi-seed runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ansatz::{ImageEncoder, QubitMap};
use crate::data::{image_ids, load_dataset, load_features, synthetic_features, DataError, DatasetEntry, Task};
use crate::diagram::ModelKind;
use crate::grammar::{Lexicon, LexiconError};
use crate::training::trainer::{split_indices, RunMetrics};
use crate::training::{Pipeline, SpsaConfig, Trainer};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub task: Task,
    pub data: PathBuf,
    /// Defaults to `lexicon.tsv` next to the data file.
    pub lexicon: Option<PathBuf>,
    /// Feature CSV; when absent, synthetic features are generated.
    pub features: Option<PathBuf>,
    pub synthetic_seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub a: f64,
    pub c: f64,
    /// `A = stability_per_epoch · epochs`.
    pub stability_per_epoch: f64,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub qubits: QubitMap,
}

/// Every field of [`ExperimentConfig`] as optional, for config files and
/// command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub model: Option<ModelKind>,
    pub task: Option<Task>,
    pub data: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub synthetic_seed: Option<u64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub stability_per_epoch: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub qubits: Option<QubitMap>,
}

impl ConfigOverrides {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            model: other.model.or(self.model),
            task: other.task.or(self.task),
            data: other.data.or(self.data),
            lexicon: other.lexicon.or(self.lexicon),
            features: other.features.or(self.features),
            synthetic_seed: other.synthetic_seed.or(self.synthetic_seed),
            epochs: other.epochs.or(self.epochs),
            batch_size: other.batch_size.or(self.batch_size),
            a: other.a.or(self.a),
            c: other.c.or(self.c),
            stability_per_epoch: other.stability_per_epoch.or(self.stability_per_epoch),
            seeds: other.seeds.or(self.seeds),
            out: other.out.or(self.out),
            qubits: other.qubits.or(self.qubits),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig, ExperimentError> {
        let missing = |f: &str| ExperimentError::Config(format!("`{f}` is required"));
        let task = self.task.ok_or_else(|| missing("task"))?;
        let (epochs, batch) = default_schedule(task);
        let cfg = ExperimentConfig {
            model: self.model.ok_or_else(|| missing("model"))?,
            task,
            data: self.data.ok_or_else(|| missing("data"))?,
            lexicon: self.lexicon,
            features: self.features,
            synthetic_seed: self.synthetic_seed.unwrap_or(0),
            epochs: self.epochs.unwrap_or(epochs),
            batch_size: self.batch_size.unwrap_or(batch),
            a: self.a.unwrap_or(SpsaConfig::DEFAULT_A),
            c: self.c.unwrap_or(SpsaConfig::DEFAULT_C),
            stability_per_epoch: self.stability_per_epoch.unwrap_or(SpsaConfig::STABILITY_PER_EPOCH),
            seeds: self.seeds.unwrap_or_else(|| vec![1, 2, 3, 4, 5]),
            out: self.out.unwrap_or_else(|| PathBuf::from("runs")),
            qubits: self.qubits.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `(epochs, batch size)` defaults per task.
pub fn default_schedule(task: Task) -> (usize, usize) {
    match task {
        Task::Unstructured => (200, 20),
        Task::Structured => (120, 7),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.spsa().validate().map_err(ExperimentError::Config)?;
        self.qubits.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if self.seeds.is_empty() {
            return Err(ExperimentError::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    pub fn spsa(&self) -> SpsaConfig {
        SpsaConfig {
            a: self.a,
            c: self.c,
            stability: self.stability_per_epoch * self.epochs as f64,
            ..SpsaConfig::new(self.epochs, self.batch_size)
        }
    }

    pub fn lexicon_path(&self) -> PathBuf {
        self.lexicon.clone().unwrap_or_else(|| {
            self.data.parent().unwrap_or(Path::new(".")).join("lexicon.tsv")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub test_accuracy: Option<f64>,
    pub best_epoch: Option<usize>,
    pub n_params: Option<usize>,
    pub error: Option<String>,
}

pub struct ExperimentReport {
    pub runs: Vec<RunMetrics>,
    pub outcomes: Vec<SeedOutcome>,
    pub mean_test_accuracy: Option<f64>,
    pub best_test_accuracy: Option<f64>,
    pub results_path: PathBuf,
}

fn load_images(
    cfg: &ExperimentConfig,
    entries: &[DatasetEntry],
) -> Result<Arc<dyn ImageEncoder + Send + Sync>, ExperimentError> {
    let dim = cfg.qubits.image_dim();
    Ok(match &cfg.features {
        Some(path) => Arc::new(load_features(path, dim)?),
        None => {
            let ids = image_ids(entries);
            Arc::new(synthetic_features(ids.iter().map(String::as_str), dim, cfg.synthetic_seed))
        }
    })
}

/// Short content hash of the config and the dataset bytes.
pub fn run_id(cfg: &ExperimentConfig, data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    h.update(data);
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Trains one run per seed and writes `seed-k/metrics.csv` and
/// `results.json` under `cfg.out`. A seed that fails is recorded and the
/// remaining seeds still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let started = Instant::now();
    let lexicon = Arc::new(Lexicon::from_file(cfg.lexicon_path())?);
    let entries = load_dataset(&cfg.data, cfg.task, &lexicon)?;
    let images = load_images(cfg, &entries)?;
    let pipeline = Pipeline::new(lexicon, cfg.model, cfg.qubits, images);
    let trainer = Trainer::new(pipeline, cfg.spsa());
    fs::create_dir_all(&cfg.out)?;

    let mut runs = Vec::new();
    let mut outcomes = Vec::new();
    let mut timings = BTreeMap::new();
    for &seed in &cfg.seeds {
        let (tr, va, te) = split_indices(entries.len(), seed);
        let pick = |idx: &[usize]| idx.iter().map(|&i| entries[i].clone()).collect::<Vec<_>>();
        match trainer.fit(&pick(&tr), &pick(&va), &pick(&te), seed) {
            Ok(out) => {
                let m = out.metrics;
                let dir = cfg.out.join(format!("seed-{seed}"));
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("metrics.csv"), m.metrics_csv())?;
                log::info!("seed {seed}: test accuracy {:?} (best epoch {})", m.test_accuracy, m.best_epoch);
                timings.insert(format!("seed-{seed}"), m.wall_time_s);
                outcomes.push(SeedOutcome {
                    seed,
                    test_accuracy: m.test_accuracy,
                    best_epoch: Some(m.best_epoch),
                    n_params: Some(m.n_params),
                    error: None,
                });
                runs.push(m);
            }
            Err(e) => {
                log::error!("seed {seed} failed: {e}");
                outcomes.push(SeedOutcome { seed, test_accuracy: None, best_epoch: None, n_params: None, error: Some(e.to_string()) });
            }
        }
    }

    let accs: Vec<f64> = outcomes.iter().filter_map(|o| o.test_accuracy).collect();
    let mean = (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64);
    let best = accs.iter().copied().reduce(f64::max);
    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let results = json!({
        "version": VERSION,
        "run_id": run_id(cfg, &fs::read(&cfg.data)?),
        "config": cfg,
        "simulation": "exact statevector probabilities, no shot sampling",
        "n_entries": entries.len(),
        "seeds": outcomes,
        "mean_test_accuracy": mean,
        "best_test_accuracy": best,
        "timing": {
            "finished_unix_s": started_at,
            "total_wall_time_s": started.elapsed().as_secs_f64(),
            "per_seed_wall_time_s": timings,
        },
    });
    let results_path = cfg.out.join("results.json");
    fs::write(&results_path, serde_json::to_string_pretty(&results)? + "\n")?;
    Ok(ExperimentReport { runs, outcomes, mean_test_accuracy: mean, best_test_accuracy: best, results_path })
}

/// Aggregates `seed-*/metrics.csv` under `dir` into per-epoch rows of
/// `epoch,mean_train_loss,mean_val_accuracy,min_val_accuracy,max_val_accuracy,seeds`.
pub fn convergence_report(dir: &Path) -> Result<String, ExperimentError> {
    let mut per_epoch: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut seed_dirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("metrics.csv").is_file())
        .collect();
    seed_dirs.sort();
    if seed_dirs.is_empty() {
        return Err(ExperimentError::Config(format!("no seed-*/metrics.csv under {}", dir.display())));
    }
    for d in &seed_dirs {
        let mut rdr = csv::Reader::from_path(d.join("metrics.csv")).map_err(DataError::from)?;
        for rec in rdr.records() {
            let rec = rec.map_err(DataError::from)?;
            let bad = || ExperimentError::Config(format!("malformed row in {}", d.display()));
            let epoch: usize = rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let loss: f64 = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let slot = per_epoch.entry(epoch).or_default();
            slot.0.push(loss);
            if let Some(v) = rec.get(2).and_then(|v| v.parse::<f64>().ok()) {
                slot.1.push(v);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut out = String::from("epoch,mean_train_loss,mean_val_accuracy,min_val_accuracy,max_val_accuracy,seeds\n");
    for (epoch, (losses, vals)) in per_epoch {
        let (m, lo, hi) = if vals.is_empty() {
            (String::new(), String::new(), String::new())
        } else {
            (
                format!("{:.6}", mean(&vals)),
                format!("{:.6}", vals.iter().copied().fold(f64::INFINITY, f64::min)),
                format!("{:.6}", vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            )
        };
        out += &format!("{epoch},{:.6},{m},{lo},{hi},{}\n", mean(&losses), losses.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_win_and_defaults_follow_task() {
        let file = ConfigOverrides {
            model: Some(ModelKind::Bow),
            task: Some(Task::Structured),
            data: Some("d.jsonl".into()),
            epochs: Some(3),
            ..Default::default()
        };
        let cli = ConfigOverrides { model: Some(ModelKind::Cat), ..Default::default() };
        let cfg = file.merge(cli).resolve().unwrap();
        assert_eq!(cfg.model, ModelKind::Cat);
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.batch_size, 7);
        assert_eq!(cfg.lexicon_path(), PathBuf::from("lexicon.tsv"));
        let u = ConfigOverrides { task: Some(Task::Unstructured), ..file_defaults() }.resolve().unwrap();
        assert_eq!((u.epochs, u.batch_size), (200, 20));
    }

    fn file_defaults() -> ConfigOverrides {
        ConfigOverrides { model: Some(ModelKind::Cat), data: Some("x/d.jsonl".into()), ..Default::default() }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(matches!(file_defaults().resolve(), Err(ExperimentError::Config(_))));
        let bad = ConfigOverrides { task: Some(Task::Structured), batch_size: Some(0), ..file_defaults() };
        assert!(bad.resolve().is_err());
        let json = r#"{"model": "cat", "task": "structured", "data": "d", "bogus": 1}"#;
        assert!(serde_json::from_str::<ConfigOverrides>(json).is_err());
    }
}
