use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Confusion counts with spam as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: f64,
    pub fpr: f64,
    pub accuracy: f64,
    /// Zero when nothing was predicted spam.
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    pub rates: Rates,
}

pub fn compute_metrics(predictions: &[Label], truth: &[Label]) -> Result<Metrics> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch(predictions.len(), truth.len()));
    }
    let mut c = Confusion::default();
    for (p, t) in predictions.iter().zip(truth) {
        match (p, t) {
            (Label::Spam, Label::Spam) => c.tp += 1,
            (Label::Legitimate, Label::Spam) => c.fn_ += 1,
            (Label::Spam, Label::Legitimate) => c.fp += 1,
            (Label::Legitimate, Label::Legitimate) => c.tn += 1,
            _ => return Err(Error::Config("predictions and truth must be spam or legitimate".into())),
        }
    }
    if c.tp + c.fn_ == 0 || c.fp + c.tn == 0 {
        return Err(Error::SingleClass);
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let tpr = ratio(c.tp, c.tp + c.fn_);
    let rates = Rates {
        tpr,
        fpr: ratio(c.fp, c.fp + c.tn),
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: tpr,
    };
    Ok(Metrics { confusion: c, rates })
}

/// Unweighted mean over folds.
pub fn mean_rates(folds: &[Rates]) -> Rates {
    let n = folds.len().max(1) as f64;
    let sum = |f: fn(&Rates) -> f64| folds.iter().map(f).sum::<f64>() / n;
    Rates {
        tpr: sum(|r| r.tpr),
        fpr: sum(|r| r.fpr),
        accuracy: sum(|r| r.accuracy),
        precision: sum(|r| r.precision),
        recall: sum(|r| r.recall),
    }
}
