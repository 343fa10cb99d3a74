//! Loss, SPSA and accuracy.

pub mod params;
pub mod trainer;

pub use params::{ParamStore, SymbolKey};
pub use trainer::{EntryCircuits, EpochMetrics, Pipeline, RunMetrics, Trainer, TrainingError};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]` before the
/// logarithm.
pub const PROB_CLAMP: f64 = 1e-7;

pub fn bce_loss(p: f64, label: u8) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean BCE over `(p, label)` pairs; 0 for an empty slice.
pub fn mean_bce(samples: &[(f64, u8)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|&(p, y)| bce_loss(p, y)).sum::<f64>() / samples.len() as f64
}

/// 1 if the positive pairing scores higher, 0 if lower, 0.5 on an exact tie.
pub fn pair_score(p_pos: f64, p_neg: f64) -> f64 {
    if p_pos > p_neg {
        1.0
    } else if p_pos < p_neg {
        0.0
    } else {
        0.5
    }
}

/// Mean [`pair_score`] over `(p_pos, p_neg)` pairs.
pub fn accuracy_from_pairs(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().map(|&(a, b)| pair_score(a, b)).sum::<f64>() / pairs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    /// Stability offset `A`.
    #[serde(rename = "A")]
    pub stability: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl SpsaConfig {
    pub const DEFAULT_A: f64 = 0.02;
    pub const DEFAULT_C: f64 = 0.06;
    pub const STABILITY_PER_EPOCH: f64 = 0.001;

    pub fn new(epochs: usize, batch_size: usize) -> Self {
        SpsaConfig {
            a: Self::DEFAULT_A,
            c: Self::DEFAULT_C,
            stability: Self::STABILITY_PER_EPOCH * epochs as f64,
            alpha: 0.602,
            gamma: 0.101,
            epochs,
            batch_size,
        }
    }

    /// `a / (A + k + 1)^α`
    pub fn a_k(&self, k: usize) -> f64 {
        self.a / (self.stability + k as f64 + 1.0).powf(self.alpha)
    }

    /// `c / (k + 1)^γ`
    pub fn c_k(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [self.a, self.c, self.stability, self.alpha, self.gamma].iter().all(|v| v.is_finite());
        if !finite || self.a <= 0.0 || self.c <= 0.0 || self.stability < 0.0 {
            return Err(format!("need a > 0, c > 0, A ≥ 0 (got a={}, c={}, A={})", self.a, self.c, self.stability));
        }
        if self.alpha <= 0.0 || self.gamma <= 0.0 {
            return Err("decay exponents must be positive".into());
        }
        if self.batch_size == 0 {
            return Err("batch size must be at least 1".into());
        }
        Ok(())
    }
}

/// The two losses of one SPSA step, at `θ + cₖΔ` and `θ − cₖΔ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaStep {
    pub loss_plus: f64,
    pub loss_minus: f64,
}

/// Draws a Rademacher vector of length `dim`.
pub fn rademacher<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// `ĝ = [L(θ+cₖΔ) − L(θ−cₖΔ)] / (2cₖ) · Δ` (Δ is its own elementwise
/// inverse).
pub fn spsa_gradient(loss_plus: f64, loss_minus: f64, c_k: f64, delta: &[f64]) -> Vec<f64> {
    let scale = (loss_plus - loss_minus) / (2.0 * c_k);
    delta.iter().map(|d| scale * d).collect()
}

/// One SPSA update of `theta` at iteration `k`. The two loss evaluations
/// run in parallel.
pub fn spsa_step<R, F, E>(theta: &mut [f64], k: usize, cfg: &SpsaConfig, rng: &mut R, loss: F) -> Result<SpsaStep, E>
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Send,
{
    let delta = rademacher(theta.len(), rng);
    let c_k = cfg.c_k(k);
    let shifted = |sign: f64| -> Vec<f64> { theta.iter().zip(&delta).map(|(t, d)| t + sign * c_k * d).collect() };
    let (plus, minus) = (shifted(1.0), shifted(-1.0));
    let (lp, lm) = rayon::join(|| loss(&plus), || loss(&minus));
    let (loss_plus, loss_minus) = (lp?, lm?);
    let a_k = cfg.a_k(k);
    for (t, g) in theta.iter_mut().zip(spsa_gradient(loss_plus, loss_minus, c_k, &delta)) {
        *t -= a_k * g;
    }
    Ok(SpsaStep { loss_plus, loss_minus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_values() {
        assert!((bce_loss(0.5, 1) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(0.5, 0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce_loss(1.0, 1) > 0.0);
        assert!((bce_loss(0.0, 1) + PROB_CLAMP.ln()).abs() < 1e-12);
    }

    #[test]
    fn scores() {
        assert_eq!(accuracy_from_pairs(&[(1.0, 0.0)]), 1.0);
        assert_eq!(accuracy_from_pairs(&[(0.4, 0.6)]), 0.0);
        assert_eq!(accuracy_from_pairs(&[(0.3, 0.3), (0.9, 0.1)]), 0.75);
    }

    #[test]
    fn gains_decrease() {
        let cfg = SpsaConfig::new(120, 7);
        assert!((cfg.stability - 0.12).abs() < 1e-15);
        for k in 0..50 {
            assert!(cfg.a_k(k + 1) < cfg.a_k(k));
            assert!(cfg.c_k(k + 1) < cfg.c_k(k));
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SpsaConfig::new(10, 2);
        assert!(cfg.validate().is_ok());
        cfg.c = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SpsaConfig::new(10, 0);
        assert!(cfg.validate().is_err());
        cfg.batch_size = 1;
        cfg.stability = -1.0;
        assert!(cfg.validate().is_err());
    }
}
