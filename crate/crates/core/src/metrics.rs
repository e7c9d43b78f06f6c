//! Binary classification metrics with fraud as the positive class.
//!
//! Any ratio whose denominator is zero is reported as 0.

use serde::{Deserialize, Serialize};

use crate::data::Class;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn report(&self) -> MetricReport {
        metric_report(self)
    }
}

pub fn confusion(predictions: &[Class], labels: &[Class]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Input("confusion matrix needs at least one prediction".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (Class::Fraud, Class::Fraud) => cm.tp += 1,
            (Class::Fraud, Class::Genuine) => cm.fp += 1,
            (Class::Genuine, Class::Genuine) => cm.tn += 1,
            (Class::Genuine, Class::Fraud) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Confusion matrix of `score > threshold` predictions.
pub fn confusion_at(scores: &[f64], labels: &[Class], threshold: f64) -> Result<ConfusionMatrix> {
    let preds: Vec<Class> = scores
        .iter()
        .map(|&s| if s > threshold { Class::Fraud } else { Class::Genuine })
        .collect();
    confusion(&preds, labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn metric_report(cm: &ConfusionMatrix) -> MetricReport {
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    MetricReport {
        accuracy: ratio(tp + tn, tp + fp + tn + fn_),
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
        mcc: ratio(tp * tn - fp * fn_, den),
    }
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "accuracy,precision,recall,f1,mcc";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.accuracy, self.precision, self.recall, self.f1, self.mcc
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores strictly above this value are flagged; `f64::MAX` at the origin.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.fpr, p.tpr));
        }
        out
    }
}

/// ROC curve over every distinct score, largest first; tied scores move
/// together, which gives the Mann-Whitney half credit for ties. AUC is the
/// trapezoidal area.
pub fn roc_auc(scores: &[f64], labels: &[Class]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Input(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Input("scores must be finite".into()));
    }
    let pos = labels.iter().filter(|l| l.is_fraud()).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::Input("ROC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::MAX,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (prev_tp, prev_fp) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_fraud() {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        auc += (fp - prev_fp) * (tp + prev_tp) / 2.0;
        // flagging everything at or above s means thresholding just below it
        let next_lower = order.get(i).map_or(f64::MIN, |&k| scores[k]);
        points.push(RocPoint {
            fpr: fp / neg,
            tpr: tp / pos,
            threshold: next_lower,
        });
    }
    Ok(RocCurve {
        points,
        auc: auc / (pos * neg),
    })
}
