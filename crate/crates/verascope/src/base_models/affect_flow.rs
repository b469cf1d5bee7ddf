//! Content-based detector: logistic regression over a document's
//! segment-affect flow vector.
//!
//! Documents of different lengths yield flow vectors of different
//! dimension, so vectors are zero-padded into fixed blocks (one per
//! segment, one per consecutive delta) before training.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BaseModelOutput, Detector};
use crate::corpus::{Corpus, Label, Snapshot};
use crate::error::{Error, Result};
use crate::features::{flow_vector, AffectLexicon, FactorId, FlowVector};

const FORMAT_VERSION: u32 = 1;
const MODEL_ID: &str = "affect_flow";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AffectFlowHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Reserved for stochastic variants; full-batch descent from a zero
    /// start never draws from it.
    pub seed: u64,
    /// Target segment count per document.
    pub segments: usize,
}

impl Default for AffectFlowHyper {
    fn default() -> AffectFlowHyper {
        AffectFlowHyper {
            // Flow features are densities well below 1, so the loss
            // curvature is small and a large rate is still stable.
            learning_rate: 5.0,
            epochs: 400,
            l2: 1e-4,
            seed: 0,
            segments: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AffectFlow {
    hyper: AffectFlowHyper,
    lexicon: AffectLexicon,
    pub weights: Vec<f64>,
    pub bias: f64,
    fitted: bool,
    /// Training loss before each epoch plus the final loss.
    loss_trace: Vec<f64>,
}

/// Numerically stable, defined for all finite z.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy of a logistic model plus an L2 penalty on the
/// weights (never the bias), with its analytic gradient.
pub fn logistic_loss_grad(
    xs: &[Vec<f64>],
    ys: &[f64],
    w: &[f64],
    b: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = dot(w, x) + b;
        loss += softplus(z) - y * z;
        let err = sigmoid(z) - y;
        for (g, &xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        gb += err;
    }
    loss /= n;
    gb /= n;
    for g in gw.iter_mut() {
        *g /= n;
    }
    for (g, &wi) in gw.iter_mut().zip(w) {
        *g += l2 * wi;
        loss += 0.5 * l2 * wi * wi;
    }
    (loss, gw, gb)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Copies a variable-length flow vector into the fixed block layout for
/// `k` segments: segment blocks first, delta blocks after, unused blocks
/// left at zero.
pub fn pad_flow(flow: &FlowVector, k: usize) -> Vec<f64> {
    let c = flow.n_categories;
    let k_used = flow.segments_used;
    let mut out = vec![0.0; k * c + (k - 1) * c];
    out[..k_used * c].copy_from_slice(&flow.values[..k_used * c]);
    let deltas = (k_used - 1) * c;
    out[k * c..k * c + deltas].copy_from_slice(&flow.values[k_used * c..]);
    out
}

impl AffectFlow {
    pub fn new(hyper: AffectFlowHyper) -> AffectFlow {
        Self::with_lexicon(hyper, AffectLexicon::bundled())
    }

    pub fn with_lexicon(hyper: AffectFlowHyper, lexicon: AffectLexicon) -> AffectFlow {
        assert!(hyper.segments > 0, "segment count must be positive");
        let dim = Self::dim(hyper.segments, lexicon.n_categories());
        AffectFlow {
            hyper,
            lexicon,
            weights: vec![0.0; dim],
            bias: 0.0,
            fitted: false,
            loss_trace: Vec::new(),
        }
    }

    fn dim(k: usize, c: usize) -> usize {
        k * c + (k - 1) * c
    }

    pub fn hyper(&self) -> &AffectFlowHyper {
        &self.hyper
    }

    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    /// One name per weight, in weight order.
    pub fn feature_names(&self) -> Vec<String> {
        let k = self.hyper.segments;
        let cats = self.lexicon.categories();
        let mut names = Vec::with_capacity(self.weights.len());
        for i in 0..k {
            for cat in cats {
                names.push(format!("seg{i}[{cat}]"));
            }
        }
        for i in 0..k - 1 {
            for cat in cats {
                names.push(format!("delta{i}[{cat}]"));
            }
        }
        names
    }

    pub fn features_of(&self, corpus: &Corpus, doc_id: &str) -> Result<Vec<f64>> {
        let doc = corpus
            .document(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        let flow = flow_vector(doc, &self.lexicon, self.hyper.segments)?;
        Ok(pad_flow(&flow, self.hyper.segments))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = AffectFlowFile {
            format_version: FORMAT_VERSION,
            model_id: MODEL_ID.to_string(),
            hyper: self.hyper.clone(),
            lexicon_sha256: self.lexicon.sha256(),
            feature_names: self.feature_names(),
            weights: self.weights.clone(),
            bias: self.bias,
        };
        let json = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Loads a saved model and checks it against the lexicon it will run
    /// with; a weight vector fit to other features would silently
    /// misscore otherwise.
    pub fn load(path: impl AsRef<Path>, lexicon: AffectLexicon) -> Result<AffectFlow> {
        let path_str = path.as_ref().display().to_string();
        let bad = |msg: String| Error::ModelFormat {
            path: path_str.clone(),
            msg,
        };
        let text = std::fs::read_to_string(path.as_ref())?;
        let file: AffectFlowFile =
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(bad(format!(
                "format version {} (supported: {FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.model_id != MODEL_ID {
            return Err(bad(format!("model id `{}`", file.model_id)));
        }
        if file.lexicon_sha256 != lexicon.sha256() {
            return Err(bad("lexicon hash mismatch".to_string()));
        }
        let dim = Self::dim(file.hyper.segments, lexicon.n_categories());
        if file.weights.len() != dim {
            return Err(bad(format!("{} weights, expected {dim}", file.weights.len())));
        }
        let mut model = AffectFlow::with_lexicon(file.hyper, lexicon);
        model.weights = file.weights;
        model.bias = file.bias;
        model.fitted = true;
        Ok(model)
    }

    fn score(&self, corpus: &Corpus, doc_id: &str) -> Result<f64> {
        let x = self.features_of(corpus, doc_id)?;
        Ok(dot(&self.weights, &x) + self.bias)
    }
}

#[derive(Serialize, Deserialize)]
struct AffectFlowFile {
    format_version: u32,
    model_id: String,
    hyper: AffectFlowHyper,
    lexicon_sha256: String,
    feature_names: Vec<String>,
    weights: Vec<f64>,
    bias: f64,
}

impl Detector for AffectFlow {
    fn model_id(&self) -> &str {
        MODEL_ID
    }

    fn required_factors(&self) -> &[FactorId] {
        &[FactorId::WordCount]
    }

    fn train(&mut self, corpus: &Corpus, doc_ids: &[String]) -> Result<()> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for doc_id in doc_ids {
            let doc = corpus
                .document(doc_id)
                .ok_or_else(|| Error::UnknownDocument(doc_id.clone()))?;
            let y = match doc.label {
                Label::False => 1.0,
                Label::True => 0.0,
                Label::Unknown => continue,
            };
            xs.push(self.features_of(corpus, doc_id)?);
            ys.push(y);
        }
        if xs.is_empty() {
            return Err(Error::EmptySplit);
        }
        if ys.iter().all(|&y| y == 1.0) || ys.iter().all(|&y| y == 0.0) {
            return Err(Error::SingleClassSplit);
        }
        let mut w = vec![0.0; self.weights.len()];
        let mut b = 0.0;
        let mut trace = Vec::with_capacity(self.hyper.epochs + 1);
        for epoch in 0..=self.hyper.epochs {
            let (loss, gw, gb) = logistic_loss_grad(&xs, &ys, &w, b, self.hyper.l2);
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss",
                    iteration: epoch,
                });
            }
            trace.push(loss);
            if epoch == self.hyper.epochs {
                break;
            }
            for (wi, gi) in w.iter_mut().zip(&gw) {
                *wi -= self.hyper.learning_rate * gi;
            }
            b -= self.hyper.learning_rate * gb;
        }
        self.weights = w;
        self.bias = b;
        self.loss_trace = trace;
        self.fitted = true;
        Ok(())
    }

    fn predict(&self, snapshot: &Snapshot, corpus: &Corpus) -> Result<BaseModelOutput> {
        if !self.fitted {
            return Err(Error::NotFitted {
                model_id: MODEL_ID.to_string(),
            });
        }
        let p = sigmoid(self.score(corpus, &snapshot.doc_id)?);
        Ok(BaseModelOutput {
            model_id: MODEL_ID.to_string(),
            p,
            factor_ids_used: vec![FactorId::WordCount],
        })
    }

    fn attributions(
        &self,
        snapshot: &Snapshot,
        corpus: &Corpus,
    ) -> Result<Option<Vec<(String, f64)>>> {
        if !self.fitted {
            return Err(Error::NotFitted {
                model_id: MODEL_ID.to_string(),
            });
        }
        let x = self.features_of(corpus, &snapshot.doc_id)?;
        let names = self.feature_names();
        let mut scored: Vec<(String, f64)> = names
            .into_iter()
            .zip(self.weights.iter().zip(&x).map(|(w, xi)| w * xi))
            .collect();
        scored.sort_by(|a, b| {
            b.1.abs()
                .partial_cmp(&a.1.abs())
                .expect("finite attributions")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(5);
        Ok(Some(scored))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth::{generate, SynthConfig};
    use crate::corpus::{DocumentRecord, Record};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn signal_corpus(seed: u64) -> Corpus {
        let cfg = SynthConfig {
            n_docs: 120,
            n_publishers: 8,
            n_background_actors: 30,
            token_count_range: (80, 240),
            engagement_range: (0, 0),
            label_noise_max: 0.0,
            clusters: vec![],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        generate(&cfg, seed).unwrap().0
    }

    #[test]
    fn zero_epochs_leave_weights_at_zero_and_predictions_at_half() {
        let corpus = signal_corpus(3);
        let mut model = AffectFlow::new(AffectFlowHyper {
            epochs: 0,
            ..AffectFlowHyper::default()
        });
        model.train(&corpus, &corpus.labeled_doc_ids()).unwrap();
        assert!(model.weights.iter().all(|w| *w == 0.0));
        assert_eq!(model.bias, 0.0);
        let doc_id = corpus.doc_ids().next().unwrap().to_string();
        let snap = corpus.snapshot_at(&doc_id, corpus.end_time()).unwrap();
        assert_eq!(model.predict(&snap, &corpus).unwrap().p, 0.5);
    }

    #[test]
    fn planted_signal_is_learnable() {
        let corpus = signal_corpus(5);
        let mut model = AffectFlow::new(AffectFlowHyper::default());
        let ids = corpus.labeled_doc_ids();
        model.train(&corpus, &ids).unwrap();
        let end = corpus.end_time();
        let mut correct = 0;
        for id in &ids {
            let snap = corpus.snapshot_at(id, end).unwrap();
            let p = model.predict(&snap, &corpus).unwrap().p;
            let hit = (p >= 0.5) == (corpus.document(id).unwrap().label == Label::False);
            correct += usize::from(hit);
        }
        let accuracy = correct as f64 / ids.len() as f64;
        assert!(accuracy >= 0.95, "training accuracy {accuracy}");
    }

    #[test]
    fn loss_never_increases_epoch_over_epoch() {
        let corpus = signal_corpus(7);
        let mut model = AffectFlow::new(AffectFlowHyper::default());
        model.train(&corpus, &corpus.labeled_doc_ids()).unwrap();
        let trace = model.loss_trace();
        assert_eq!(trace.len(), model.hyper().epochs + 1);
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss rose: {pair:?}");
        }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 6;
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<f64> = (0..12).map(|_| f64::from(rng.gen_range(0..2))).collect();
        let l2 = 0.05;
        let eps = 1e-5;
        for _ in 0..5 {
            let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: f64 = rng.gen_range(-2.0..2.0);
            let (_, gw, gb) = logistic_loss_grad(&xs, &ys, &w, b, l2);
            let mut max_rel = 0.0f64;
            for j in 0..dim {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += eps;
                wm[j] -= eps;
                let fd = (logistic_loss_grad(&xs, &ys, &wp, b, l2).0
                    - logistic_loss_grad(&xs, &ys, &wm, b, l2).0)
                    / (2.0 * eps);
                let rel = (gw[j] - fd).abs() / gw[j].abs().max(fd.abs()).max(1e-8);
                max_rel = max_rel.max(rel);
            }
            let fd_b = (logistic_loss_grad(&xs, &ys, &w, b + eps, l2).0
                - logistic_loss_grad(&xs, &ys, &w, b - eps, l2).0)
                / (2.0 * eps);
            max_rel = max_rel.max((gb - fd_b).abs() / gb.abs().max(fd_b.abs()).max(1e-8));
            assert!(max_rel <= 1e-4, "gradient mismatch {max_rel}");
        }
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        let corpus = signal_corpus(9);
        let mut model = AffectFlow::new(AffectFlowHyper::default());
        assert!(matches!(model.train(&corpus, &[]), Err(Error::EmptySplit)));
        let one_class: Vec<String> = corpus
            .documents()
            .filter(|d| d.label == Label::False)
            .map(|d| d.doc_id.clone())
            .collect();
        assert!(matches!(
            model.train(&corpus, &one_class),
            Err(Error::SingleClassSplit)
        ));
    }

    #[test]
    fn prediction_matches_hand_computed_sigmoid() {
        let corpus = signal_corpus(13);
        let mut model = AffectFlow::new(AffectFlowHyper::default());
        model.train(&corpus, &corpus.labeled_doc_ids()).unwrap();
        let doc_id = corpus.doc_ids().next().unwrap().to_string();
        model.weights = vec![0.0; model.weights.len()];
        model.weights[2] = 1.5;
        model.weights[7] = -0.75;
        model.bias = 0.25;
        let x = model.features_of(&corpus, &doc_id).unwrap();
        let z = 1.5 * x[2] - 0.75 * x[7] + 0.25;
        let expected = 1.0 / (1.0 + (-z).exp());
        let snap = corpus.snapshot_at(&doc_id, corpus.end_time()).unwrap();
        assert_relative_eq!(model.predict(&snap, &corpus).unwrap().p, expected);
    }

    #[test]
    fn predict_before_train_is_an_error() {
        let corpus = signal_corpus(15);
        let model = AffectFlow::new(AffectFlowHyper::default());
        let doc_id = corpus.doc_ids().next().unwrap().to_string();
        let snap = corpus.snapshot_at(&doc_id, corpus.end_time()).unwrap();
        assert!(matches!(
            model.predict(&snap, &corpus),
            Err(Error::NotFitted { .. })
        ));
    }

    #[test]
    fn padding_keeps_blocks_aligned() {
        let corpus = signal_corpus(17);
        // 9 tokens, 4 segments requested: all 4 used, since bodies here are
        // long; instead pad a short handmade doc.
        let mut records = corpus.to_records();
        records.push(Record::Document(DocumentRecord {
            doc_id: "tiny".to_string(),
            platform_of_origin: "alpha".to_string(),
            publisher_id: "p000".to_string(),
            title: String::new(),
            body: "fear fear".to_string(),
            publish_time: crate::corpus::synth::BASE_TIME,
            label: Label::Unknown,
        }));
        let corpus = Corpus::from_records(records).unwrap();
        let model = AffectFlow::new(AffectFlowHyper::default());
        let x = model.features_of(&corpus, "tiny").unwrap();
        let c = AffectLexicon::bundled().n_categories();
        // 2 tokens -> 2 segments; blocks 2,3 and delta block 1 stay zero.
        assert_eq!(x.len(), 4 * c + 3 * c);
        assert!(x[2 * c..4 * c].iter().all(|v| *v == 0.0));
        assert!(x[4 * c + c..].iter().all(|v| *v == 0.0));
        let fear = AffectLexicon::bundled()
            .categories()
            .iter()
            .position(|s| s == "fear")
            .unwrap();
        assert_eq!(x[fear], 1.0);
        assert_eq!(x[c + fear], 1.0);
    }

    #[test]
    fn model_files_roundtrip_and_reject_mismatches() {
        let corpus = signal_corpus(19);
        let mut model = AffectFlow::new(AffectFlowHyper::default());
        model.train(&corpus, &corpus.labeled_doc_ids()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("affect_flow.json");
        model.save(&path).unwrap();
        let loaded = AffectFlow::load(&path, AffectLexicon::bundled()).unwrap();
        assert_eq!(loaded.weights, model.weights);
        assert_eq!(loaded.bias, model.bias);
        let doc_id = corpus.doc_ids().next().unwrap().to_string();
        let snap = corpus.snapshot_at(&doc_id, corpus.end_time()).unwrap();
        assert_eq!(
            loaded.predict(&snap, &corpus).unwrap(),
            model.predict(&snap, &corpus).unwrap()
        );

        let other = AffectLexicon::parse("calm\tserene\n").unwrap();
        assert!(matches!(
            AffectFlow::load(&path, other),
            Err(Error::ModelFormat { .. })
        ));

        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replace("\"format_version\": 1", "\"format_version\": 99");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            AffectFlow::load(&path, AffectLexicon::bundled()),
            Err(Error::ModelFormat { .. })
        ));
    }
}
