//! Linear soft-margin SVM trained by dual coordinate descent.
//!
//! The bias is folded into the weights by appending a constant `1` to every
//! example, which leaves the dual with box constraints only:
//!
//! ```text
//! max  sum(alpha) - 1/2 |sum_i alpha_i y_i x_i|^2   s.t.  0 <= alpha_i <= C
//! ```
//!
//! Each step solves the dual exactly in one coordinate and clips it to the
//! box; `w` is kept in sync incrementally.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-6,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Weights over the augmented features; the last entry is the bias.
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub converged: bool,
    #[serde(default, skip_serializing)]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing)]
    pub epochs: usize,
}

fn augmented_dot(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    let mut s = w[d];
    for (wi, xi) in w[..d].iter().zip(x) {
        s += wi * xi;
    }
    s
}

fn check_inputs<X: AsRef<[f64]>>(features: &[X], labels: &[f64]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch(features.len(), labels.len()));
    }
    let dim = features.first().map_or(0, |x| x.as_ref().len());
    for x in features {
        let x = x.as_ref();
        if x.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    for &y in labels {
        if y != 1.0 && y != -1.0 {
            return Err(Error::Config(format!("labels must be +1 or -1, got {y}")));
        }
    }
    Ok(dim)
}

/// Trains on `features` with labels `+1` (spam) / `-1` (legitimate).
pub fn train<X: AsRef<[f64]>>(features: &[X], labels: &[f64], config: &TrainConfig) -> Result<SvmModel> {
    config.validate()?;
    let dim = check_inputs(features, labels)?;
    if !(labels.contains(&1.0) && labels.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }

    let n = features.len();
    let c = config.c;
    let q_diag: Vec<f64> = features
        .iter()
        .map(|x| 1.0 + x.as_ref().iter().map(|v| v * v).sum::<f64>())
        .collect();
    let mut alphas = vec![0.0; n];
    let mut w = vec![0.0; dim + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut converged = false;
    let mut epochs = 0;

    while epochs < config.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let x = features[i].as_ref();
            let y = labels[i];
            let g = y * augmented_dot(&w, x) - 1.0;
            let a = alphas[i];
            let pg = if a <= 0.0 {
                g.min(0.0)
            } else if a >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let updated = (a - g / q_diag[i]).clamp(0.0, c);
                let step = (updated - a) * y;
                if step != 0.0 {
                    for (wj, xj) in w[..dim].iter_mut().zip(x) {
                        *wj += step * xj;
                    }
                    w[dim] += step;
                }
                alphas[i] = updated;
            }
        }
        if max_violation <= config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "svm did not reach tolerance {} in {} epochs",
            config.tolerance,
            config.max_epochs
        );
    }
    let b = w[dim];
    Ok(SvmModel {
        w,
        b,
        c,
        converged,
        alphas,
        epochs,
    })
}

impl SvmModel {
    /// Number of input features (excluding the bias coordinate).
    pub fn dim(&self) -> usize {
        self.w.len().saturating_sub(1)
    }

    pub fn weights(&self) -> &[f64] {
        &self.w[..self.dim()]
    }

    /// `w . x + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.weights().iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b)
    }

    /// Spam iff the decision value is strictly positive.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(label_for(self.decision_value(x)?))
    }

    /// Checks the stored JSON fields agree with each other.
    pub fn validate(&self) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::EmptyInput("model has no weights"));
        }
        if let Some(i) = self.w.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if self.b != self.w[self.w.len() - 1] {
            return Err(Error::Config("bias does not match the last weight".into()));
        }
        Ok(())
    }
}

pub fn label_for(decision: f64) -> Label {
    if decision > 0.0 {
        Label::Spam
    } else {
        Label::Legitimate
    }
}

/// `sum(alpha) - 1/2 |sum alpha_i y_i [x_i, 1]|^2`.
pub fn dual_objective<X: AsRef<[f64]>>(features: &[X], labels: &[f64], alphas: &[f64], c: f64) -> Result<f64> {
    let dim = check_inputs(features, labels)?;
    if alphas.len() != features.len() {
        return Err(Error::LengthMismatch(features.len(), alphas.len()));
    }
    for (index, &value) in alphas.iter().enumerate() {
        if !(0.0..=c).contains(&value) {
            return Err(Error::BoxViolation { index, value, c });
        }
    }
    let w = primal_weights(features, labels, alphas, dim);
    Ok(alphas.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>())
}

/// `sum_i alpha_i y_i [x_i, 1]`.
pub fn primal_weights<X: AsRef<[f64]>>(features: &[X], labels: &[f64], alphas: &[f64], dim: usize) -> Vec<f64> {
    let mut w = vec![0.0; dim + 1];
    for ((x, &y), &a) in features.iter().zip(labels).zip(alphas) {
        for (wj, xj) in w.iter_mut().zip(x.as_ref()) {
            *wj += a * y * xj;
        }
        w[dim] += a * y;
    }
    w
}
