//! Classification metrics with the false-information class positive, and
//! clustering agreement for community recovery.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Confusion counts and the ratios derived from them. Every empty
/// denominator yields 0, never NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn from_confusion(tp: usize, fp: usize, tn: usize, fn_count: usize) -> MetricsReport {
        let ratio = |num: usize, denom: usize| {
            if denom == 0 {
                0.0
            } else {
                num as f64 / denom as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_count);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        MetricsReport {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_count,
            precision,
            recall,
            f1,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_count),
        }
    }

    pub const CSV_HEADER: &'static str =
        "tp,fp,tn,fn,precision,recall,f1,accuracy";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.true_positives,
            self.false_positives,
            self.true_negatives,
            self.false_negatives,
            self.precision,
            self.recall,
            self.f1,
            self.accuracy
        )
    }
}

/// Scores thresholded falsehood probabilities against labels. A
/// prediction at or above `tau` asserts false information; every
/// prediction must resolve to a true/false label.
pub fn evaluate(
    predictions: &[(String, f64)],
    labels: &BTreeMap<String, Label>,
    tau: f64,
) -> Result<MetricsReport> {
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_count = 0;
    for (doc_id, prob) in predictions {
        let label = match labels.get(doc_id) {
            Some(l) if l.is_labeled() => *l,
            _ => return Err(Error::UnknownDocument(doc_id.clone())),
        };
        match (*prob >= tau, label) {
            (true, Label::False) => tp += 1,
            (true, _) => fp += 1,
            (false, Label::False) => fn_count += 1,
            (false, _) => tn += 1,
        }
    }
    Ok(MetricsReport::from_confusion(tp, fp, tn, fn_count))
}

/// Adjusted Rand Index between two cluster assignments over the same
/// items. 1 means identical partitions, 0 is chance level; both inputs
/// trivial (one big cluster, or all singletons) compares as 1 when equal.
pub fn adjusted_rand_index<T: Ord, U: Ord>(a: &[T], b: &[U]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions must cover the same items");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let choose2 = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let mut cells: BTreeMap<(&T, &U), usize> = BTreeMap::new();
    let mut rows: BTreeMap<&T, usize> = BTreeMap::new();
    let mut cols: BTreeMap<&U, usize> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let index: f64 = cells.values().map(|&c| choose2(c)).sum();
    let row_sum: f64 = rows.values().map(|&c| choose2(c)).sum();
    let col_sum: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = row_sum * col_sum / choose2(n);
    let max_index = 0.5 * (row_sum + col_sum);
    if max_index == expected {
        // Both partitions trivial; agreement is exact or undefined.
        return if (index - expected).abs() < 1e-12 { 1.0 } else { 0.0 };
    }
    (index - expected) / (max_index - expected)
}
