//! History-based detectors: Laplace-smoothed falsehood rates for the
//! publisher behind a document and for the users engaging with it.

use super::{BaseModelOutput, Detector};
use crate::corpus::{Corpus, Label, Snapshot};
use crate::error::{Error, Result};
use crate::features::FactorId;

/// Smoothed probability that the next item from this track record is
/// false: `(n_false + a) / (n_false + n_true + a + b)`. Unknown labels are
/// ignored; an empty history returns the prior mean.
pub fn p_false(history: &[Label], prior: (f64, f64)) -> f64 {
    let (a, b) = prior;
    assert!(a > 0.0 && b > 0.0, "prior pseudo-counts must be positive");
    let n_false = history.iter().filter(|l| **l == Label::False).count() as f64;
    let n_true = history.iter().filter(|l| **l == Label::True).count() as f64;
    (n_false + a) / (n_false + n_true + a + b)
}

/// Complement of [`p_false`]: how much this track record can be trusted.
pub fn credibility(history: &[Label], prior: (f64, f64)) -> f64 {
    1.0 - p_false(history, prior)
}

/// Scores a document by its publisher's labeled track record, excluding
/// the document itself so its own label can never leak in. An unseen
/// publisher scores 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct PublisherCredibility {
    pub prior: (f64, f64),
}

impl Default for PublisherCredibility {
    fn default() -> Self {
        PublisherCredibility { prior: (1.0, 1.0) }
    }
}

impl Detector for PublisherCredibility {
    fn model_id(&self) -> &str {
        "publisher_credibility"
    }

    /// No per-snapshot factor governs this model yet; its reliability is
    /// the constant 1.0. Publisher-history depth is the natural candidate
    /// once a curve for it is worth fitting.
    fn required_factors(&self) -> &[FactorId] {
        &[]
    }

    fn train(&mut self, _corpus: &Corpus, _doc_ids: &[String]) -> Result<()> {
        Ok(())
    }

    fn predict(&self, snapshot: &Snapshot, corpus: &Corpus) -> Result<BaseModelOutput> {
        let doc = corpus
            .document(&snapshot.doc_id)
            .ok_or_else(|| Error::UnknownDocument(snapshot.doc_id.clone()))?;
        let p = match corpus.publisher(&doc.publisher_id) {
            None => 0.5,
            Some(publisher) => {
                let labels: Vec<Label> = publisher
                    .history
                    .iter()
                    .filter(|e| e.doc_id != snapshot.doc_id)
                    .map(|e| e.label)
                    .collect();
                p_false(&labels, self.prior)
            }
        };
        Ok(BaseModelOutput {
            model_id: self.model_id().to_string(),
            p,
            factor_ids_used: vec![],
        })
    }
}

/// Scores a document by the track records of the actors engaging with it,
/// each actor weighted by how much labeled history backs their score.
/// Nobody engaging, or nobody with labeled history, scores 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCredibility {
    pub prior: (f64, f64),
}

impl Default for UserCredibility {
    fn default() -> Self {
        UserCredibility { prior: (1.0, 1.0) }
    }
}

impl Detector for UserCredibility {
    fn model_id(&self) -> &str {
        "user_credibility"
    }

    fn required_factors(&self) -> &[FactorId] {
        &[FactorId::EngagementCount, FactorId::UserHistoryDepth]
    }

    fn train(&mut self, _corpus: &Corpus, _doc_ids: &[String]) -> Result<()> {
        Ok(())
    }

    fn predict(&self, snapshot: &Snapshot, corpus: &Corpus) -> Result<BaseModelOutput> {
        let mut weighted = 0.0;
        let mut total_weight = 0.0;
        for actor_ref in snapshot.engaging_actors() {
            let Some(actor) = corpus.actor(&actor_ref) else {
                continue;
            };
            let labels: Vec<Label> = actor
                .engagement_history
                .iter()
                .map(|e| e.label)
                .collect();
            let weight = actor.labeled_history_len() as f64;
            weighted += weight * p_false(&labels, self.prior);
            total_weight += weight;
        }
        let p = if total_weight > 0.0 {
            weighted / total_weight
        } else {
            0.5
        };
        Ok(BaseModelOutput {
            model_id: self.model_id().to_string(),
            p,
            factor_ids_used: vec![FactorId::EngagementCount, FactorId::UserHistoryDepth],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        Actor, DocumentRecord, EngagementItem, EngagementKind, HistoryEntry, Publisher, Record,
    };
    use approx::assert_relative_eq;

    #[test]
    fn smoothing_examples() {
        assert_eq!(p_false(&[], (1.0, 1.0)), 0.5);
        let four_false = vec![Label::False; 4];
        assert_relative_eq!(p_false(&four_false, (1.0, 1.0)), 5.0 / 6.0);
        let mostly_true = vec![Label::True; 98];
        assert_relative_eq!(p_false(&mostly_true, (1.0, 1.0)), 0.01);
        assert_relative_eq!(credibility(&mostly_true, (1.0, 1.0)), 0.99);
    }

    #[test]
    fn unknown_labels_do_not_count() {
        let history = vec![Label::False, Label::Unknown, Label::Unknown, Label::True];
        assert_eq!(p_false(&history, (1.0, 1.0)), 0.5);
    }

    fn doc(doc_id: &str, publisher_id: &str) -> Record {
        Record::Document(DocumentRecord {
            doc_id: doc_id.to_string(),
            platform_of_origin: "alpha".to_string(),
            publisher_id: publisher_id.to_string(),
            title: "note".to_string(),
            body: "the report".to_string(),
            publish_time: 0,
            label: Label::False,
        })
    }

    fn entry(doc_id: &str, label: Label) -> HistoryEntry {
        HistoryEntry {
            doc_id: doc_id.to_string(),
            label,
        }
    }

    fn engagement(item_id: &str, doc_id: &str, actor_id: &str, ts: i64) -> Record {
        Record::Item(EngagementItem {
            item_id: item_id.to_string(),
            doc_id: doc_id.to_string(),
            actor_id: actor_id.to_string(),
            platform: "alpha".to_string(),
            timestamp: ts,
            kind: EngagementKind::Share,
            text: None,
            urls: vec![],
            hashtags: vec![],
            mentions: vec![],
        })
    }

    fn actor(actor_id: &str, history: Vec<HistoryEntry>) -> Record {
        Record::Actor(Actor {
            actor_id: actor_id.to_string(),
            platform: "alpha".to_string(),
            handle: actor_id.to_string(),
            display_name: actor_id.to_string(),
            created_at: 0,
            engagement_history: history,
        })
    }

    #[test]
    fn unseen_publisher_scores_half() {
        let corpus = Corpus::from_records(vec![doc("d1", "ghost")]).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = PublisherCredibility::default().predict(&snap, &corpus).unwrap();
        assert_eq!(out.p, 0.5);
        assert!(out.factor_ids_used.is_empty());
    }

    #[test]
    fn publisher_track_record_drives_the_score() {
        let records = vec![
            doc("d0", "pub"),
            doc("d1", "pub"),
            doc("d2", "pub"),
            doc("d3", "pub"),
            doc("d9", "pub"),
            Record::Publisher(Publisher {
                publisher_id: "pub".to_string(),
                history: vec![
                    entry("d0", Label::False),
                    entry("d1", Label::False),
                    entry("d2", Label::False),
                    entry("d3", Label::False),
                    entry("d9", Label::Unknown),
                ],
            }),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d9", 10).unwrap();
        let out = PublisherCredibility::default().predict(&snap, &corpus).unwrap();
        assert_relative_eq!(out.p, 5.0 / 6.0);
    }

    #[test]
    fn scored_document_is_excluded_from_its_own_history() {
        let records = vec![
            doc("d1", "pub"),
            Record::Publisher(Publisher {
                publisher_id: "pub".to_string(),
                history: vec![entry("d1", Label::False)],
            }),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = PublisherCredibility::default().predict(&snap, &corpus).unwrap();
        assert_eq!(out.p, 0.5);
        // Naive inclusion would have scored (1+1)/(1+2) instead.
        assert_relative_eq!(p_false(&[Label::False], (1.0, 1.0)), 2.0 / 3.0);
    }

    #[test]
    fn no_engagements_scores_half() {
        let corpus = Corpus::from_records(vec![doc("d1", "pub")]).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = UserCredibility::default().predict(&snap, &corpus).unwrap();
        assert_eq!(out.p, 0.5);
        assert_eq!(
            out.factor_ids_used,
            vec![FactorId::EngagementCount, FactorId::UserHistoryDepth]
        );
    }

    #[test]
    fn opposite_engagers_with_equal_depth_cancel_out() {
        let records = vec![
            doc("d1", "pub"),
            doc("h1", "pub"),
            actor("gull", vec![entry("h1", Label::False); 4]),
            actor("skep", vec![entry("h1", Label::True); 4]),
            engagement("i1", "d1", "gull", 5),
            engagement("i2", "d1", "skep", 6),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = UserCredibility::default().predict(&snap, &corpus).unwrap();
        assert_relative_eq!(out.p, 0.5);
    }

    #[test]
    fn single_deep_false_engager() {
        let records = vec![
            doc("d1", "pub"),
            doc("h1", "pub"),
            actor("gull", vec![entry("h1", Label::False); 8]),
            engagement("i1", "d1", "gull", 5),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = UserCredibility::default().predict(&snap, &corpus).unwrap();
        assert_relative_eq!(out.p, 0.9);
    }

    #[test]
    fn engagers_without_labeled_history_carry_no_weight() {
        let records = vec![
            doc("d1", "pub"),
            doc("h1", "pub"),
            actor("blank", vec![]),
            actor("mystery", vec![entry("h1", Label::Unknown); 3]),
            engagement("i1", "d1", "blank", 5),
            engagement("i2", "d1", "mystery", 6),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = UserCredibility::default().predict(&snap, &corpus).unwrap();
        assert_eq!(out.p, 0.5);
    }

    #[test]
    fn repeat_engagement_by_one_actor_counts_once() {
        let records = vec![
            doc("d1", "pub"),
            doc("h1", "pub"),
            actor("gull", vec![entry("h1", Label::False); 8]),
            actor("skep", vec![entry("h1", Label::True); 8]),
            engagement("i1", "d1", "gull", 5),
            engagement("i2", "d1", "gull", 6),
            engagement("i3", "d1", "gull", 7),
            engagement("i4", "d1", "skep", 8),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let snap = corpus.snapshot_at("d1", 10).unwrap();
        let out = UserCredibility::default().predict(&snap, &corpus).unwrap();
        // (9/10 + 1/10) / 2, not weighted by the three repeat shares.
        assert_relative_eq!(out.p, 0.5);
    }

    #[test]
    fn later_snapshots_use_only_their_own_engagements() {
        let records = vec![
            doc("d1", "pub"),
            doc("h1", "pub"),
            actor("gull", vec![entry("h1", Label::False); 8]),
            actor("skep", vec![entry("h1", Label::True); 8]),
            engagement("i1", "d1", "gull", 5),
            engagement("i2", "d1", "skep", 50),
        ];
        let corpus = Corpus::from_records(records).unwrap();
        let model = UserCredibility::default();
        let early = corpus.snapshot_at("d1", 10).unwrap();
        let late = corpus.snapshot_at("d1", 100).unwrap();
        assert!(early
            .engagements
            .iter()
            .all(|e| late.engagements.contains(e)));
        assert_relative_eq!(model.predict(&early, &corpus).unwrap().p, 0.9);
        assert_relative_eq!(model.predict(&late, &corpus).unwrap().p, 0.5);
    }
}
