//! The trained ensemble as one unit: base models plus their calibration
//! curves, with detection, temporal replay, cross-validation, and the
//! binned performance table behind the calibration curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::aggregator::{
    aggregate, binned_f1_rows, calibrate, reliability, AggregatedVerdict, BinnedF1Row,
    CalibrationSample, CalibrationSettings, CurveSet, WeightedOutput,
};
use crate::base_models::{AffectFlow, AffectFlowHyper, Detector, PublisherCredibility, UserCredibility};
use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::explainer::{explain, Explanation};
use crate::features::{factor_readings, FactorId};
use crate::harness::folds::{split_folds, FoldPlan};
use crate::harness::metrics::{evaluate, MetricsReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub calibration: CalibrationSettings,
    /// Decision threshold on the aggregated probability.
    pub tau: f64,
    /// Fractions of each document's observed lifetime at which validation
    /// snapshots are taken, so curves see both sparse and saturated
    /// engagement factors.
    pub snapshot_fractions: Vec<f64>,
}

impl Default for PipelineSettings {
    fn default() -> PipelineSettings {
        PipelineSettings {
            calibration: CalibrationSettings::default(),
            tau: 0.5,
            snapshot_fractions: vec![0.02, 0.1, 0.3, 1.0],
        }
    }
}

/// One replayed observation of a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayPoint {
    pub t: i64,
    pub verdict: AggregatedVerdict,
    pub explanation: Explanation,
}

pub struct Pipeline {
    models: Vec<Box<dyn Detector>>,
    curves: CurveSet,
    settings: PipelineSettings,
}

impl Pipeline {
    pub fn new(models: Vec<Box<dyn Detector>>, settings: PipelineSettings) -> Pipeline {
        Pipeline {
            models,
            curves: CurveSet::new(),
            settings,
        }
    }

    /// The stock ensemble: affect-flow content model plus publisher and
    /// user credibility.
    pub fn standard(seed: u64, settings: PipelineSettings) -> Pipeline {
        let models: Vec<Box<dyn Detector>> = vec![
            Box::new(AffectFlow::new(AffectFlowHyper {
                seed,
                ..AffectFlowHyper::default()
            })),
            Box::new(PublisherCredibility::default()),
            Box::new(UserCredibility::default()),
        ];
        Pipeline::new(models, settings)
    }

    pub fn models(&self) -> &[Box<dyn Detector>] {
        &self.models
    }

    pub fn curves(&self) -> &CurveSet {
        &self.curves
    }

    pub fn curves_mut(&mut self) -> &mut CurveSet {
        &mut self.curves
    }

    pub fn settings(&self) -> &PipelineSettings {
        &self.settings
    }

    pub fn train(&mut self, corpus: &Corpus, train_ids: &[String]) -> Result<()> {
        for model in self.models.iter_mut() {
            model.train(corpus, train_ids)?;
        }
        Ok(())
    }

    /// Observation times for one document: its lifetime up to the corpus
    /// end, sampled at the configured fractions.
    fn snapshot_times(&self, corpus: &Corpus, publish_time: i64) -> BTreeSet<i64> {
        let end = corpus.end_time().max(publish_time);
        let span = (end - publish_time) as f64;
        self.settings
            .snapshot_fractions
            .iter()
            .map(|f| publish_time + (f * span).round() as i64)
            .collect()
    }

    /// Fits one reliability curve per (model, required factor) from the
    /// validation documents, observed at several points in their lifetime.
    pub fn calibrate(&mut self, corpus: &Corpus, validation_ids: &[String]) -> Result<()> {
        if validation_ids.is_empty() {
            return Err(Error::EmptySplit);
        }
        let mut curves = CurveSet::new();
        for model in &self.models {
            let factors = model.required_factors();
            if factors.is_empty() {
                continue;
            }
            let mut samples: BTreeMap<FactorId, Vec<CalibrationSample>> = BTreeMap::new();
            for doc_id in validation_ids {
                let doc = corpus
                    .document(doc_id)
                    .ok_or_else(|| Error::UnknownDocument(doc_id.clone()))?;
                for t in self.snapshot_times(corpus, doc.publish_time) {
                    let snapshot = corpus.snapshot_at(doc_id, t)?;
                    let p = model.predict(&snapshot, corpus)?.p;
                    let readings = factor_readings(&snapshot, corpus);
                    for factor_id in factors {
                        let reading = readings
                            .iter()
                            .find(|r| r.factor_id == *factor_id)
                            .map(|r| r.value)
                            .unwrap_or(0.0);
                        samples.entry(*factor_id).or_default().push(CalibrationSample {
                            reading,
                            p,
                            label: doc.label,
                        });
                    }
                }
            }
            for (factor_id, factor_samples) in samples {
                let curve = calibrate(&factor_samples, factor_id, &self.settings.calibration)?;
                curves.insert(model.model_id(), curve);
            }
        }
        self.curves = curves;
        Ok(())
    }

    /// Scores one document at observation time `t` and explains the
    /// verdict.
    pub fn detect(&self, corpus: &Corpus, doc_id: &str, t: i64) -> Result<(AggregatedVerdict, Explanation)> {
        let snapshot = corpus.snapshot_at(doc_id, t)?;
        let readings = factor_readings(&snapshot, corpus);
        let mut outputs = Vec::with_capacity(self.models.len());
        for model in &self.models {
            let p = model.predict(&snapshot, corpus)?.p;
            let r = reliability(
                model.as_ref(),
                &snapshot,
                corpus,
                &self.curves,
                self.settings.calibration.combine,
            )?;
            outputs.push(WeightedOutput {
                model_id: model.model_id().to_string(),
                p,
                r,
                readings: readings.clone(),
            });
        }
        let verdict = aggregate(doc_id, t, &outputs)?;
        let explanation = explain(
            &verdict,
            &outputs,
            &self.curves,
            &self.models,
            &snapshot,
            corpus,
            self.settings.tau,
        )?;
        Ok((verdict, explanation))
    }

    /// Scores one document at each time in an ascending sequence. Later
    /// verdicts see strictly more engagement context, never less.
    pub fn replay(&self, corpus: &Corpus, doc_id: &str, times: &[i64]) -> Result<Vec<ReplayPoint>> {
        if times.windows(2).any(|pair| pair[1] < pair[0]) {
            return Err(Error::UnorderedTimes);
        }
        times
            .iter()
            .map(|&t| {
                let (verdict, explanation) = self.detect(corpus, doc_id, t)?;
                Ok(ReplayPoint {
                    t,
                    verdict,
                    explanation,
                })
            })
            .collect()
    }
}

/// Raw binned F1 of one model over one factor on a labeled split,
/// observed at the corpus end time. The table behind reliability curves,
/// fit for CSV plotting.
pub fn binned_f1_report(
    model: &dyn Detector,
    corpus: &Corpus,
    doc_ids: &[String],
    factor_id: FactorId,
    settings: &CalibrationSettings,
) -> Result<Vec<BinnedF1Row>> {
    let samples = factor_samples(model, corpus, doc_ids, factor_id)?;
    binned_f1_rows(&samples, settings)
}

/// (reading, p, label) triples for one model and factor at the corpus end
/// time, one per labeled document.
pub fn factor_samples(
    model: &dyn Detector,
    corpus: &Corpus,
    doc_ids: &[String],
    factor_id: FactorId,
) -> Result<Vec<CalibrationSample>> {
    if doc_ids.is_empty() {
        return Err(Error::EmptySplit);
    }
    let end = corpus.end_time();
    let mut samples = Vec::with_capacity(doc_ids.len());
    for doc_id in doc_ids {
        let doc = corpus
            .document(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.clone()))?;
        let snapshot = corpus.snapshot_at(doc_id, end.max(doc.publish_time))?;
        let p = model.predict(&snapshot, corpus)?.p;
        let reading = factor_readings(&snapshot, corpus)
            .into_iter()
            .find(|r| r.factor_id == factor_id)
            .map(|r| r.value)
            .unwrap_or(0.0);
        samples.push(CalibrationSample {
            reading,
            p,
            label: doc.label,
        });
    }
    Ok(samples)
}

pub fn binned_rows_to_csv(rows: &[BinnedF1Row]) -> String {
    let mut out = String::from("bin_lo,bin_hi,support,f1,under_supported\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.lo, row.hi, row.support, row.f1, row.under_supported
        ));
    }
    out
}

/// Per-fold test metrics for the standard ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub mean_f1: f64,
    pub mean_accuracy: f64,
}

impl CvReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("fold,{}\n", MetricsReport::CSV_HEADER);
        for (i, fold) in self.folds.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fold.csv_row()));
        }
        out
    }
}

/// Runs the full protocol: stratified folds, per-fold training and
/// calibration, test-split scoring at the corpus end time. Train and test
/// ids are checked disjoint before any fold runs.
pub fn cross_validate(
    corpus: &Corpus,
    k: usize,
    seed: u64,
    settings: &PipelineSettings,
) -> Result<CvReport> {
    let plan = split_folds(corpus, k, seed)?;
    cross_validate_plan(corpus, &plan, seed, settings)
}

pub fn cross_validate_plan(
    corpus: &Corpus,
    plan: &FoldPlan,
    seed: u64,
    settings: &PipelineSettings,
) -> Result<CvReport> {
    let make = |fold_idx: usize| {
        Pipeline::standard(seed.wrapping_add(fold_idx as u64), settings.clone())
    };
    cross_validate_with(corpus, plan, make)
}

/// Cross-validation over any per-fold pipeline; each fold gets a fresh
/// one so no state leaks between folds.
pub fn cross_validate_with<F>(
    corpus: &Corpus,
    plan: &FoldPlan,
    mut make_pipeline: F,
) -> Result<CvReport>
where
    F: FnMut(usize) -> Pipeline,
{
    let labels: BTreeMap<String, Label> = corpus
        .documents()
        .map(|d| (d.doc_id.clone(), d.label))
        .collect();
    let mut reports = Vec::with_capacity(plan.k());
    for (fold_idx, fold) in plan.folds.iter().enumerate() {
        let train: BTreeSet<&String> = fold.train.iter().collect();
        let test: BTreeSet<&String> = fold.test.iter().collect();
        assert!(
            train.is_disjoint(&test),
            "fold {fold_idx} would train on test documents"
        );
        let mut pipeline = make_pipeline(fold_idx);
        pipeline.train(corpus, &fold.train)?;
        pipeline.calibrate(corpus, &fold.validation)?;
        let end = corpus.end_time();
        let mut predictions = Vec::with_capacity(fold.test.len());
        for doc_id in &fold.test {
            let (verdict, _) = pipeline.detect(corpus, doc_id, end)?;
            predictions.push((doc_id.clone(), verdict.prob));
        }
        reports.push(evaluate(&predictions, &labels, pipeline.settings().tau)?);
    }
    let n = reports.len() as f64;
    let mean_f1 = reports.iter().map(|r| r.f1).sum::<f64>() / n;
    let mean_accuracy = reports.iter().map(|r| r.accuracy).sum::<f64>() / n;
    Ok(CvReport {
        folds: reports,
        mean_f1,
        mean_accuracy,
    })
}

/// Pools per-fold test samples of a freshly trained model and bins them:
/// the cross-validated performance profile of one factor.
pub fn pooled_binned_f1<F>(
    corpus: &Corpus,
    plan: &FoldPlan,
    factor_id: FactorId,
    settings: &CalibrationSettings,
    mut make_model: F,
) -> Result<Vec<BinnedF1Row>>
where
    F: FnMut(usize) -> Box<dyn Detector>,
{
    let mut pooled = Vec::new();
    for (fold_idx, fold) in plan.folds.iter().enumerate() {
        let mut model = make_model(fold_idx);
        model.train(corpus, &fold.train)?;
        pooled.extend(factor_samples(model.as_ref(), corpus, &fold.test, factor_id)?);
    }
    binned_f1_rows(&pooled, settings)
}
