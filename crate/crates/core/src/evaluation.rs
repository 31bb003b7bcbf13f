//! Confusion matrix and per-indicator precision, recall and F-measure.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::classifier::Prediction;
use crate::corpus::QuIndicator;
use crate::error::{LsaError, Result};

/// Rows are gold indicators, columns predicted indicators, both in
/// [`QuIndicator::ALL`] order. Unclassifiable reviews are counted per gold class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
    pub unclassifiable: [usize; 3],
    pub n_evaluated: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: QuIndicator, predicted: Option<QuIndicator>) {
        match predicted {
            Some(p) => self.counts[actual.index()][p.index()] += 1,
            None => self.unclassifiable[actual.index()] += 1,
        }
        self.n_evaluated += 1;
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|c| self.counts[c][c]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorScores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    /// Indexed like [`QuIndicator::ALL`].
    pub per_class: [IndicatorScores; 3],
    /// Unweighted mean of the three F-measures.
    pub macro_f: f64,
}

impl ClassMetrics {
    pub fn of(&self, q: QuIndicator) -> &IndicatorScores {
        &self.per_class[q.index()]
    }
}

/// Tallies predictions against gold labels.
pub fn confusion<T>(preds: &[Prediction<T>], gold: &BTreeMap<String, QuIndicator>) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    let mut seen = HashSet::new();
    for p in preds {
        if !seen.insert(p.review_id.as_str()) {
            return Err(LsaError::DuplicateId(p.review_id.clone()));
        }
        let actual = *gold
            .get(&p.review_id)
            .ok_or_else(|| LsaError::MissingGold(p.review_id.clone()))?;
        cm.record(actual, p.predicted.indicator());
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision `TP/(TP+FP)`, recall `TP/(TP+FN)` and `F = 2PR/(P+R)` per indicator, with
/// every 0/0 taken as 0. F is evaluated as `2TP/(2TP+FP+FN)`. Unclassifiable reviews are false negatives of their gold class.
pub fn metrics(cm: &ConfusionMatrix) -> Result<ClassMetrics> {
    if cm.n_evaluated == 0 {
        return Err(LsaError::EmptyEvaluation);
    }
    let per_class = [0, 1, 2].map(|c| {
        let tp = cm.counts[c][c];
        let fp = (0..3).filter(|&a| a != c).map(|a| cm.counts[a][c]).sum();
        let fn_ = (0..3).filter(|&p| p != c).map(|p| cm.counts[c][p]).sum::<usize>() + cm.unclassifiable[c];
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = ratio(2 * tp, 2 * tp + fp + fn_);
        IndicatorScores {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_measure,
        }
    });
    let macro_f = per_class.iter().map(|s| s.f_measure).sum::<f64>() / 3.0;
    Ok(ClassMetrics { per_class, macro_f })
}
