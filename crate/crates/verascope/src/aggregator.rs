//! Per-snapshot reliability weighting and ensemble combination.
//!
//! Each base model's trustworthiness depends on measurable properties of
//! the snapshot it judged (a two-sentence document tells a content model
//! little; three engagements tell a crowd model little). Calibration
//! measures that dependence on a validation split as binned F1 over a
//! factor, and aggregation turns the per-snapshot reliabilities into a
//! weighted ensemble probability.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::base_models::Detector;
use crate::corpus::{Corpus, Label, Snapshot};
use crate::error::{Error, Result};
use crate::features::{factor_readings, reading_for, FactorId, FactorReading};

const CURVES_FORMAT_VERSION: u32 = 1;

/// How reliabilities from several factors collapse into one r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    /// Weakest link; the default.
    #[default]
    Min,
    Product,
    Mean,
}

impl CombineRule {
    pub fn apply(self, values: &[f64]) -> f64 {
        assert!(!values.is_empty());
        match self {
            CombineRule::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            CombineRule::Product => values.iter().product(),
            CombineRule::Mean => values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSettings {
    pub bins: usize,
    pub min_support: usize,
    /// Decision threshold the per-bin F1 is measured at.
    pub tau: f64,
    /// Smooth each curve to be non-decreasing in the factor.
    pub smooth: bool,
    pub combine: CombineRule,
}

impl Default for CalibrationSettings {
    fn default() -> CalibrationSettings {
        CalibrationSettings {
            bins: 10,
            min_support: 20,
            tau: 0.5,
            smooth: true,
            combine: CombineRule::Min,
        }
    }
}

/// Binned reliability of one model as a function of one factor.
///
/// `bin_edges` is strictly ascending with one more entry than
/// `bin_reliability`; bin `i` covers `[edges[i], edges[i+1])` and the last
/// bin is closed on the right. Readings outside the range clamp to the
/// end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub factor_id: FactorId,
    pub bin_edges: Vec<f64>,
    pub bin_reliability: Vec<f64>,
    pub min_support: usize,
    pub smoothed: bool,
}

impl CalibrationCurve {
    /// Curve that answers `value` for every reading.
    pub fn constant(factor_id: FactorId, value: f64) -> CalibrationCurve {
        assert!((0.0..=1.0).contains(&value));
        CalibrationCurve {
            factor_id,
            bin_edges: vec![0.0, 0.0],
            bin_reliability: vec![value],
            min_support: 0,
            smoothed: false,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.bin_reliability.len()
    }

    /// Index of the bin a reading falls in, end bins absorbing
    /// out-of-range readings.
    pub fn bin_of(&self, reading: f64) -> usize {
        edge_bin(&self.bin_edges, reading)
    }

    pub fn reliability_at(&self, reading: f64) -> f64 {
        self.bin_reliability[self.bin_of(reading)]
    }
}

/// One labeled validation observation: the factor reading at the
/// snapshot, the model's probability there, and the document's label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    pub reading: f64,
    pub p: f64,
    pub label: Label,
}

fn edge_bin(edges: &[f64], reading: f64) -> usize {
    let last = edges.len() - 2;
    for i in 0..last {
        if reading < edges[i + 1] {
            return i;
        }
    }
    last
}

/// F1 with the false-information class positive; empty denominators give 0.
fn bin_f1(samples: &[&CalibrationSample], tau: f64) -> f64 {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fnn = 0.0;
    for s in samples {
        let predicted = s.p >= tau;
        match (predicted, s.label) {
            (true, Label::False) => tp += 1.0,
            (true, Label::True) => fp += 1.0,
            (false, Label::False) => fnn += 1.0,
            _ => {}
        }
    }
    let denom = 2.0 * tp + fp + fnn;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * tp / denom
    }
}

/// Weighted least-squares fit that is non-decreasing (pool adjacent
/// violators).
pub fn isotonic_non_decreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (mean, weight, count), merged while out of order.
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        assert!(w > 0.0, "isotonic weights must be positive");
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, c1 + c2));
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, c) in blocks {
        out.extend(std::iter::repeat(m).take(c));
    }
    out
}

/// Replaces every bin whose support is below `min_support` with the value
/// of the nearest populated bin, preferring the left one on ties. Fails
/// if no bin is populated.
pub fn fill_under_supported(
    values: &mut [f64],
    supports: &[usize],
    min_support: usize,
) -> Result<()> {
    assert_eq!(values.len(), supports.len());
    let populated: Vec<usize> = (0..supports.len())
        .filter(|&i| supports[i] >= min_support)
        .collect();
    if populated.is_empty() {
        return Err(Error::AllBinsUnderSupported {
            bins: supports.len(),
            min_support,
        });
    }
    let filled: Vec<f64> = (0..values.len())
        .map(|i| {
            let nearest = populated
                .iter()
                .copied()
                .min_by_key(|&j| (j.abs_diff(i), j))
                .expect("at least one populated bin");
            values[nearest]
        })
        .collect();
    values.copy_from_slice(&filled);
    Ok(())
}

/// Equal-frequency bin edges over the readings; duplicate quantiles
/// collapse, so heavy ties can yield fewer bins than asked for.
fn quantile_edges(readings: &mut [f64], bins: usize) -> Vec<f64> {
    assert!(bins > 0);
    readings.sort_by(|a, b| a.partial_cmp(b).expect("finite readings"));
    let n = readings.len();
    let mut edges = vec![readings[0]];
    for i in 1..=bins {
        // Nearest-rank quantile at i/bins.
        let rank = ((i * n).div_ceil(bins)).clamp(1, n);
        let edge = readings[rank - 1];
        if edge > *edges.last().expect("non-empty edges") {
            edges.push(edge);
        }
    }
    if edges.len() == 1 {
        // Every reading identical: one degenerate bin catches everything.
        edges.push(edges[0]);
    }
    edges
}

/// One bin of raw validation performance, before any smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedF1Row {
    pub lo: f64,
    pub hi: f64,
    pub support: usize,
    pub f1: f64,
    pub under_supported: bool,
}

/// Bins labeled samples by reading into equal-frequency bins and scores
/// each bin's F1 at `settings.tau`. This is the raw table a calibration
/// curve is built from, and what performance-by-factor reports print.
pub fn binned_f1_rows(
    samples: &[CalibrationSample],
    settings: &CalibrationSettings,
) -> Result<Vec<BinnedF1Row>> {
    let labeled: Vec<&CalibrationSample> = samples
        .iter()
        .filter(|s| s.label != Label::Unknown)
        .collect();
    if labeled.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut readings: Vec<f64> = labeled.iter().map(|s| s.reading).collect();
    let edges = quantile_edges(&mut readings, settings.bins);
    let n_bins = edges.len() - 1;
    let mut grouped: Vec<Vec<&CalibrationSample>> = vec![Vec::new(); n_bins];
    for s in &labeled {
        grouped[edge_bin(&edges, s.reading)].push(s);
    }
    Ok(grouped
        .iter()
        .enumerate()
        .map(|(i, group)| BinnedF1Row {
            lo: edges[i],
            hi: edges[i + 1],
            support: group.len(),
            f1: bin_f1(group, settings.tau),
            under_supported: group.len() < settings.min_support,
        })
        .collect())
}

/// Builds the reliability curve of one model over one factor from labeled
/// validation samples.
pub fn calibrate(
    samples: &[CalibrationSample],
    factor_id: FactorId,
    settings: &CalibrationSettings,
) -> Result<CalibrationCurve> {
    let rows = binned_f1_rows(samples, settings)?;
    let mut edges: Vec<f64> = rows.iter().map(|r| r.lo).collect();
    edges.push(rows.last().expect("at least one bin").hi);
    let mut curve = CalibrationCurve {
        factor_id,
        bin_reliability: rows.iter().map(|r| r.f1).collect(),
        bin_edges: edges,
        min_support: settings.min_support,
        smoothed: settings.smooth,
    };
    let supports: Vec<usize> = rows.iter().map(|r| r.support).collect();
    fill_under_supported(&mut curve.bin_reliability, &supports, settings.min_support)?;
    if settings.smooth {
        let weights: Vec<f64> = supports.iter().map(|&s| s.max(1) as f64).collect();
        curve.bin_reliability = isotonic_non_decreasing(&curve.bin_reliability, &weights);
    }
    for v in curve.bin_reliability.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(curve)
}

/// Calibration curves for every (model, factor) pair, persisted as one
/// JSON document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    format_version: u32,
    curves: BTreeMap<String, BTreeMap<FactorId, CalibrationCurve>>,
}

impl CurveSet {
    pub fn new() -> CurveSet {
        CurveSet {
            format_version: CURVES_FORMAT_VERSION,
            curves: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, model_id: &str, curve: CalibrationCurve) {
        self.curves
            .entry(model_id.to_string())
            .or_default()
            .insert(curve.factor_id, curve);
    }

    pub fn get(&self, model_id: &str, factor_id: FactorId) -> Option<&CalibrationCurve> {
        self.curves.get(model_id)?.get(&factor_id)
    }

    pub fn models(&self) -> impl Iterator<Item = (&str, &BTreeMap<FactorId, CalibrationCurve>)> {
        self.curves.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CurveSet> {
        let path_str = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path.as_ref())?;
        let set: CurveSet = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
            path: path_str.clone(),
            msg: e.to_string(),
        })?;
        if set.format_version != CURVES_FORMAT_VERSION {
            return Err(Error::ModelFormat {
                path: path_str,
                msg: format!(
                    "format version {} (supported: {CURVES_FORMAT_VERSION})",
                    set.format_version
                ),
            });
        }
        Ok(set)
    }
}

/// Looks up the model's reliability for this snapshot: one curve per
/// required factor, evaluated at the snapshot's reading, combined by
/// `rule`. A model with no required factors is fully trusted.
pub fn reliability(
    model: &dyn Detector,
    snapshot: &Snapshot,
    corpus: &Corpus,
    curves: &CurveSet,
    rule: CombineRule,
) -> Result<f64> {
    let required = model.required_factors();
    if required.is_empty() {
        return Ok(1.0);
    }
    let readings = factor_readings(snapshot, corpus);
    let mut values = Vec::with_capacity(required.len());
    for &factor in required {
        let curve = curves
            .get(model.model_id(), factor)
            .ok_or_else(|| Error::MissingCurve {
                model_id: model.model_id().to_string(),
                factor_id: factor.to_string(),
            })?;
        let reading = reading_for(&readings, factor).unwrap_or(0.0);
        values.push(curve.reliability_at(reading));
    }
    Ok(rule.apply(&values).clamp(0.0, 1.0))
}

/// One model's weighted opinion on a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedOutput {
    pub model_id: String,
    pub p: f64,
    pub r: f64,
    pub readings: Vec<FactorReading>,
}

/// The ensemble's answer for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedVerdict {
    pub doc_id: String,
    pub t: i64,
    pub prob: f64,
    /// Normalized model weights, summing to 1; empty when
    /// `insufficient_evidence`.
    pub contributions: BTreeMap<String, f64>,
    pub insufficient_evidence: bool,
}

/// Reliability-weighted mean of the model probabilities. With zero total
/// reliability the ensemble abstains at 0.5 rather than failing.
pub fn aggregate(doc_id: &str, t: i64, outputs: &[WeightedOutput]) -> Result<AggregatedVerdict> {
    if outputs.is_empty() {
        return Err(Error::NoOutputs);
    }
    for o in outputs {
        let check = |quantity: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::OutOfUnitRange {
                    model_id: o.model_id.clone(),
                    quantity,
                    value,
                })
            }
        };
        check("p", o.p)?;
        check("r", o.r)?;
    }
    let total_r: f64 = outputs.iter().map(|o| o.r).sum();
    if total_r == 0.0 {
        return Ok(AggregatedVerdict {
            doc_id: doc_id.to_string(),
            t,
            prob: 0.5,
            contributions: BTreeMap::new(),
            insufficient_evidence: true,
        });
    }
    let prob = outputs.iter().map(|o| o.r * o.p).sum::<f64>() / total_r;
    let contributions = outputs
        .iter()
        .map(|o| (o.model_id.clone(), o.r / total_r))
        .collect();
    Ok(AggregatedVerdict {
        doc_id: doc_id.to_string(),
        t,
        prob,
        contributions,
        insufficient_evidence: false,
    })
}

/// Final call on one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FalseNews,
    TrueNews,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::FalseNews => "false_news",
            Verdict::TrueNews => "true_news",
        })
    }
}

/// Threshold rule, ties go to the positive (false-information) side.
pub fn decide(prob: f64, tau: f64) -> Result<Verdict> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "decision threshold {tau} must lie strictly inside (0,1)"
        )));
    }
    Ok(if prob >= tau {
        Verdict::FalseNews
    } else {
        Verdict::TrueNews
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_models::UserCredibility;
    use crate::corpus::synth::{generate, SynthConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn out(model_id: &str, p: f64, r: f64) -> WeightedOutput {
        WeightedOutput {
            model_id: model_id.to_string(),
            p,
            r,
            readings: Vec::new(),
        }
    }

    #[test]
    fn weighted_mean_matches_hand_computation() {
        let outputs = [out("a", 0.7, 0.6), out("b", 0.4, 0.3), out("c", 0.9, 0.1)];
        let verdict = aggregate("d1", 100, &outputs).unwrap();
        assert_relative_eq!(verdict.prob, 0.63, max_relative = 1e-12);
        assert_relative_eq!(verdict.contributions["a"], 0.6);
        assert_relative_eq!(verdict.contributions["b"], 0.3);
        assert_relative_eq!(verdict.contributions["c"], 0.1);
        let sum: f64 = verdict.contributions.values().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        assert!(!verdict.insufficient_evidence);
    }

    #[test]
    fn zero_weight_models_do_not_vote() {
        let verdict =
            aggregate("d1", 0, &[out("a", 0.9, 1.0), out("b", 0.1, 0.0)]).unwrap();
        assert_relative_eq!(verdict.prob, 0.9);
        let verdict =
            aggregate("d1", 0, &[out("a", 0.8, 0.5), out("b", 0.2, 0.5)]).unwrap();
        assert_relative_eq!(verdict.prob, 0.5);
    }

    #[test]
    fn zero_total_reliability_abstains_at_half() {
        let verdict =
            aggregate("d1", 0, &[out("a", 0.9, 0.0), out("b", 0.1, 0.0)]).unwrap();
        assert_eq!(verdict.prob, 0.5);
        assert!(verdict.insufficient_evidence);
        assert!(verdict.contributions.is_empty());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(aggregate("d1", 0, &[]), Err(Error::NoOutputs)));
        assert!(matches!(
            aggregate("d1", 0, &[out("a", 1.2, 0.5)]),
            Err(Error::OutOfUnitRange { quantity: "p", .. })
        ));
        assert!(matches!(
            aggregate("d1", 0, &[out("a", 0.5, -0.1)]),
            Err(Error::OutOfUnitRange { quantity: "r", .. })
        ));
    }

    #[test]
    fn threshold_rule_sends_ties_to_false_news() {
        assert_eq!(decide(0.63, 0.5).unwrap(), Verdict::FalseNews);
        assert_eq!(decide(0.5, 0.5).unwrap(), Verdict::FalseNews);
        assert_eq!(decide(0.49, 0.5).unwrap(), Verdict::TrueNews);
        assert!(decide(0.5, 0.0).is_err());
        assert!(decide(0.5, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn prob_stays_in_the_convex_hull_and_scales_cancel(
            ps in proptest::collection::vec(0.0f64..=1.0, 1..6),
            rs_raw in proptest::collection::vec(0.0f64..=1.0, 1..6),
            scale in 0.01f64..=1.0,
        ) {
            let n = ps.len().min(rs_raw.len());
            let outputs: Vec<WeightedOutput> = (0..n)
                .map(|i| out(&format!("m{i}"), ps[i], rs_raw[i]))
                .collect();
            let verdict = aggregate("d", 0, &outputs).unwrap();
            if !verdict.insufficient_evidence {
                let voting: Vec<f64> = outputs
                    .iter()
                    .filter(|o| o.r > 0.0)
                    .map(|o| o.p)
                    .collect();
                let lo = voting.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = voting.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(verdict.prob >= lo - 1e-12 && verdict.prob <= hi + 1e-12);

                let scaled: Vec<WeightedOutput> = outputs
                    .iter()
                    .map(|o| out(&o.model_id, o.p, o.r * scale))
                    .collect();
                let rescaled = aggregate("d", 0, &scaled).unwrap();
                prop_assert!((rescaled.prob - verdict.prob).abs() <= 1e-9);
                for (k, v) in &verdict.contributions {
                    prop_assert!((rescaled.contributions[k] - v).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn raising_one_probability_never_lowers_prob(
            ps in proptest::collection::vec(0.0f64..=1.0, 2..6),
            rs in proptest::collection::vec(0.01f64..=1.0, 2..6),
            which in 0usize..6,
            bump in 0.0f64..=1.0,
        ) {
            let n = ps.len().min(rs.len());
            let which = which % n;
            let mut outputs: Vec<WeightedOutput> = (0..n)
                .map(|i| out(&format!("m{i}"), ps[i], rs[i]))
                .collect();
            let before = aggregate("d", 0, &outputs).unwrap().prob;
            outputs[which].p = (outputs[which].p + bump).min(1.0);
            let after = aggregate("d", 0, &outputs).unwrap().prob;
            prop_assert!(after >= before - 1e-12);
        }
    }

    fn sample(reading: f64, p: f64, label: Label) -> CalibrationSample {
        CalibrationSample { reading, p, label }
    }

    #[test]
    fn perfect_model_calibrates_to_all_ones() {
        let mut samples = Vec::new();
        for i in 0..200 {
            let reading = i as f64;
            if i % 2 == 0 {
                samples.push(sample(reading, 0.95, Label::False));
            } else {
                samples.push(sample(reading, 0.05, Label::True));
            }
        }
        let curve = calibrate(
            &samples,
            FactorId::WordCount,
            &CalibrationSettings::default(),
        )
        .unwrap();
        assert!(curve.n_bins() >= 5);
        assert!(curve.bin_reliability.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn identical_readings_collapse_to_one_constant_bin() {
        let mut samples = Vec::new();
        for i in 0..30 {
            let label = if i < 20 { Label::False } else { Label::True };
            let p = if i % 3 == 0 { 0.9 } else { 0.1 };
            samples.push(sample(7.0, p, label));
        }
        let curve = calibrate(
            &samples,
            FactorId::EngagementCount,
            &CalibrationSettings::default(),
        )
        .unwrap();
        assert_eq!(curve.n_bins(), 1);
        assert_eq!(curve.reliability_at(-100.0), curve.bin_reliability[0]);
        assert_eq!(curve.reliability_at(1e9), curve.bin_reliability[0]);
    }

    #[test]
    fn out_of_range_readings_clamp_to_end_bins() {
        let curve = CalibrationCurve {
            factor_id: FactorId::WordCount,
            bin_edges: vec![0.0, 1.0, 2.0],
            bin_reliability: vec![0.2, 0.8],
            min_support: 0,
            smoothed: false,
        };
        assert_eq!(curve.reliability_at(-5.0), 0.2);
        assert_eq!(curve.reliability_at(0.5), 0.2);
        assert_eq!(curve.reliability_at(1.0), 0.8);
        assert_eq!(curve.reliability_at(2.0), 0.8);
        assert_eq!(curve.reliability_at(99.0), 0.8);
    }

    #[test]
    fn sparse_bins_inherit_from_the_nearest_populated_one() {
        let mut values = vec![0.9, 0.1, 0.3];
        fill_under_supported(&mut values, &[30, 5, 30], 20).unwrap();
        // The middle bin ties between neighbors; the left one wins.
        assert_eq!(values, vec![0.9, 0.9, 0.3]);

        let mut values = vec![0.5, 0.9];
        fill_under_supported(&mut values, &[3, 25], 20).unwrap();
        assert_eq!(values, vec![0.9, 0.9]);

        let mut values = vec![0.5, 0.9];
        assert!(matches!(
            fill_under_supported(&mut values, &[3, 4], 20),
            Err(Error::AllBinsUnderSupported { .. })
        ));
    }

    #[test]
    fn isotonic_fit_pools_violators() {
        let w = [1.0, 1.0, 1.0];
        assert_eq!(isotonic_non_decreasing(&[3.0, 1.0, 2.0], &w), vec![2.0; 3]);
        assert_eq!(
            isotonic_non_decreasing(&[1.0, 2.0, 3.0], &w),
            vec![1.0, 2.0, 3.0]
        );
        let pooled = isotonic_non_decreasing(&[1.0, 0.0], &[1.0, 3.0]);
        assert_relative_eq!(pooled[0], 0.25);
        assert_relative_eq!(pooled[1], 0.25);
    }

    #[test]
    fn smoothing_makes_noisy_monotone_signal_non_decreasing() {
        let mut samples = Vec::new();
        // Accuracy grows with the reading; a little label noise keeps the
        // raw bins jagged.
        for i in 0..400usize {
            let reading = i as f64;
            let truth = i % 2 == 0;
            let strength = i as f64 / 400.0;
            let wrong = (i * 7) % 10 < (4 - (strength * 4.0) as usize);
            let p = match (truth, wrong) {
                (true, false) | (false, true) => 0.9,
                _ => 0.1,
            };
            let label = if truth { Label::False } else { Label::True };
            samples.push(sample(reading, p, label));
        }
        let curve = calibrate(
            &samples,
            FactorId::WordCount,
            &CalibrationSettings::default(),
        )
        .unwrap();
        for pair in curve.bin_reliability.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12);
        }
        assert!(curve.smoothed);
    }

    #[test]
    fn factor_reliabilities_combine_by_the_chosen_rule() {
        let values = [0.8, 0.3];
        assert_relative_eq!(CombineRule::Min.apply(&values), 0.3);
        assert_relative_eq!(CombineRule::Product.apply(&values), 0.24);
        assert_relative_eq!(CombineRule::Mean.apply(&values), 0.55);
    }

    #[test]
    fn snapshot_reliability_reads_curves_for_each_required_factor() {
        let cfg = SynthConfig {
            n_docs: 20,
            n_publishers: 4,
            n_background_actors: 20,
            engagement_range: (3, 8),
            clusters: vec![],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        let (corpus, _) = generate(&cfg, 41).unwrap();
        let model = UserCredibility::default();
        let doc_id = corpus.doc_ids().next().unwrap().to_string();
        let snapshot = corpus.snapshot_at(&doc_id, corpus.end_time()).unwrap();

        let mut curves = CurveSet::new();
        curves.insert(
            "user_credibility",
            CalibrationCurve::constant(FactorId::EngagementCount, 0.8),
        );
        // Only one of two required curves present.
        let err = reliability(&model, &snapshot, &corpus, &curves, CombineRule::Min);
        assert!(matches!(err, Err(Error::MissingCurve { .. })));

        curves.insert(
            "user_credibility",
            CalibrationCurve::constant(FactorId::UserHistoryDepth, 0.3),
        );
        let r = reliability(&model, &snapshot, &corpus, &curves, CombineRule::Min).unwrap();
        assert_relative_eq!(r, 0.3);
        let r = reliability(&model, &snapshot, &corpus, &curves, CombineRule::Mean).unwrap();
        assert_relative_eq!(r, 0.55);
    }

    #[test]
    fn curve_sets_survive_a_save_and_load() {
        let mut curves = CurveSet::new();
        curves.insert(
            "affect_flow",
            CalibrationCurve {
                factor_id: FactorId::WordCount,
                bin_edges: vec![10.0, 40.0, 160.0],
                bin_reliability: vec![0.41, 0.87],
                min_support: 20,
                smoothed: true,
            },
        );
        curves.insert(
            "publisher_credibility",
            CalibrationCurve::constant(FactorId::PublisherHistoryDepth, 1.0),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.json");
        curves.save(&path).unwrap();
        let loaded = CurveSet::load(&path).unwrap();
        assert_eq!(loaded, curves);

        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replace("\"format_version\": 1", "\"format_version\": 9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            CurveSet::load(&path),
            Err(Error::ModelFormat { .. })
        ));
    }
}
