//! Pluggable falsehood detectors. Each detector turns a document snapshot
//! into a probability of falsehood plus the list of factors its
//! reliability should be judged by.

mod affect_flow;
mod credibility;
pub mod soft_logic;

pub use affect_flow::{logistic_loss_grad, AffectFlow, AffectFlowHyper};
pub use credibility::{credibility, p_false, PublisherCredibility, UserCredibility};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Snapshot};
use crate::error::Result;
use crate::features::FactorId;

/// A detector's answer for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModelOutput {
    pub model_id: String,
    /// Falsehood probability.
    pub p: f64,
    pub factor_ids_used: Vec<FactorId>,
}

/// Contract every base model satisfies.
///
/// `predict` must be deterministic once trained and must never look at the
/// scored document's own label. Fitted models are immutable, so batch
/// prediction can fan out across threads.
pub trait Detector: Send + Sync {
    fn model_id(&self) -> &str;

    /// Factors whose calibration curves gate this model's reliability.
    /// Empty means the model's reliability is a constant 1.0.
    fn required_factors(&self) -> &[FactorId];

    /// Fits mutable state on the given labeled documents. Models without
    /// trainable state accept any split, including an empty one.
    fn train(&mut self, corpus: &Corpus, doc_ids: &[String]) -> Result<()>;

    fn predict(&self, snapshot: &Snapshot, corpus: &Corpus) -> Result<BaseModelOutput>;

    /// Per-feature contributions to the score, largest magnitude first.
    /// `None` for models without feature-level structure.
    fn attributions(
        &self,
        _snapshot: &Snapshot,
        _corpus: &Corpus,
    ) -> Result<Option<Vec<(String, f64)>>> {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth::{generate, SynthConfig};
    use crate::corpus::Record;

    fn clean_corpus(seed: u64) -> (Corpus, crate::corpus::synth::GroundTruth) {
        let cfg = SynthConfig {
            n_docs: 80,
            n_publishers: 8,
            n_background_actors: 40,
            token_count_range: (60, 240),
            engagement_range: (4, 25),
            label_noise_max: 0.0,
            clusters: vec![],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        generate(&cfg, seed).expect("valid config")
    }

    #[test]
    fn every_model_stays_in_unit_range_and_ignores_document_labels() {
        let (corpus, _) = clean_corpus(41);
        let mut models: Vec<Box<dyn Detector>> = vec![
            Box::new(AffectFlow::new(AffectFlowHyper::default())),
            Box::new(PublisherCredibility::default()),
            Box::new(UserCredibility::default()),
        ];
        let labeled = corpus.labeled_doc_ids();
        for model in &mut models {
            model.train(&corpus, &labeled).unwrap();
        }
        let end = corpus.end_time();

        // Publisher and actor history entries are frozen observations, so
        // flipping every document label must leave every prediction alone:
        // no predict path may read document labels at all.
        let mut records = corpus.to_records();
        for r in &mut records {
            if let Record::Document(d) = r {
                d.label = d.label.flipped();
            }
        }
        let flipped = Corpus::from_records(records).unwrap();

        for doc_id in corpus.doc_ids().take(25) {
            let snap = corpus.snapshot_at(doc_id, end).unwrap();
            let snap_flipped = flipped.snapshot_at(doc_id, end).unwrap();
            for model in &models {
                let out = model.predict(&snap, &corpus).unwrap();
                assert!((0.0..=1.0).contains(&out.p), "{} p={}", out.model_id, out.p);
                let out_flipped = model.predict(&snap_flipped, &flipped).unwrap();
                assert_eq!(out.p, out_flipped.p, "{} read a label", out.model_id);
            }
        }
    }
}
