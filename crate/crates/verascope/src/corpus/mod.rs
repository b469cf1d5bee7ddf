//! Data model for documents, engagements, actors, and publishers, plus
//! temporal snapshotting.
//!
//! A corpus is immutable after construction and safe to share across
//! threads. All collections are ordered so that iteration, serialization,
//! and everything derived from them is deterministic.

mod load;
pub mod synth;

pub use load::{load_corpus, load_ground_truth, save_corpus, save_ground_truth, Record};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Veracity label attached to documents and history entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    True,
    False,
    Unknown,
}

impl Label {
    pub fn is_labeled(self) -> bool {
        self != Label::Unknown
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::True => Label::False,
            Label::False => Label::True,
            Label::Unknown => Label::Unknown,
        }
    }
}

/// How an actor engaged with a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngagementKind {
    Post,
    Share,
    Reply,
    Like,
}

/// A news article or claim whose veracity is assessed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub platform_of_origin: String,
    pub publisher_id: String,
    pub title: String,
    pub body: String,
    /// Unix seconds.
    pub publish_time: i64,
    pub label: Label,
}

/// One platform post engaging with a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementItem {
    pub item_id: String,
    pub doc_id: String,
    pub actor_id: String,
    pub platform: String,
    /// Unix seconds; never precedes the referenced document's publish time.
    pub timestamp: i64,
    pub kind: EngagementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hashtags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentions: Vec<String>,
}

/// A `(doc_id, label)` pair frozen at the time it was observed, so later
/// fact-checks cannot leak into historical features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub doc_id: String,
    pub label: Label,
}

/// Identifies an actor within one platform.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActorRef {
    pub platform: String,
    pub actor_id: String,
}

impl ActorRef {
    pub fn new(platform: impl Into<String>, actor_id: impl Into<String>) -> Self {
        Self {
            platform: platform.into(),
            actor_id: actor_id.into(),
        }
    }
}

impl std::fmt::Display for ActorRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.platform, self.actor_id)
    }
}

/// A platform account. `actor_id` is unique per platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub actor_id: String,
    pub platform: String,
    pub handle: String,
    pub display_name: String,
    /// Unix seconds.
    pub created_at: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub engagement_history: Vec<HistoryEntry>,
}

impl Actor {
    pub fn actor_ref(&self) -> ActorRef {
        ActorRef::new(self.platform.clone(), self.actor_id.clone())
    }

    /// Number of history entries carrying a true/false label.
    pub fn labeled_history_len(&self) -> usize {
        self.engagement_history
            .iter()
            .filter(|e| e.label.is_labeled())
            .count()
    }
}

/// A document source with its labeled track record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publisher {
    pub publisher_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HistoryEntry>,
}

/// A document's state at observation time `t`: all engagements with
/// timestamp at or before `t`, sorted by `(timestamp, item_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub doc_id: String,
    pub t: i64,
    pub engagements: Vec<EngagementItem>,
}

impl Snapshot {
    pub fn engagement_count(&self) -> usize {
        self.engagements.len()
    }

    /// Distinct engaging actors, in deterministic order.
    pub fn engaging_actors(&self) -> BTreeSet<ActorRef> {
        self.engagements
            .iter()
            .map(|e| ActorRef::new(e.platform.clone(), e.actor_id.clone()))
            .collect()
    }
}

/// Immutable collection of cross-referenced records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: BTreeMap<String, DocumentRecord>,
    items: BTreeMap<String, EngagementItem>,
    actors: BTreeMap<ActorRef, Actor>,
    publishers: BTreeMap<String, Publisher>,
    /// Item ids per document, sorted by `(timestamp, item_id)`.
    items_by_doc: BTreeMap<String, Vec<String>>,
}

impl Corpus {
    /// Builds a corpus from loose records, resolving and validating all
    /// cross-references.
    pub fn from_records(records: Vec<Record>) -> Result<Corpus> {
        let mut corpus = Corpus::default();
        let mut items = Vec::new();
        for record in records {
            match record {
                Record::Document(doc) => {
                    validate_document(&doc)?;
                    if corpus.documents.contains_key(&doc.doc_id) {
                        return Err(Error::DuplicateId {
                            kind: "document",
                            id: doc.doc_id,
                        });
                    }
                    corpus.documents.insert(doc.doc_id.clone(), doc);
                }
                Record::Item(item) => items.push(item),
                Record::Actor(actor) => {
                    let key = actor.actor_ref();
                    if corpus.actors.contains_key(&key) {
                        return Err(Error::DuplicateId {
                            kind: "actor",
                            id: key.to_string(),
                        });
                    }
                    corpus.actors.insert(key, actor);
                }
                Record::Publisher(publisher) => {
                    if corpus.publishers.contains_key(&publisher.publisher_id) {
                        return Err(Error::DuplicateId {
                            kind: "publisher",
                            id: publisher.publisher_id,
                        });
                    }
                    corpus
                        .publishers
                        .insert(publisher.publisher_id.clone(), publisher);
                }
            }
        }
        for item in items {
            let doc = corpus
                .documents
                .get(&item.doc_id)
                .ok_or_else(|| Error::DanglingReference {
                    kind: "item",
                    id: item.item_id.clone(),
                    doc_id: item.doc_id.clone(),
                })?;
            if item.timestamp < doc.publish_time {
                return Err(Error::ItemBeforePublish {
                    item_id: item.item_id,
                    doc_id: item.doc_id,
                    timestamp: item.timestamp,
                    publish_time: doc.publish_time,
                });
            }
            if corpus.items.contains_key(&item.item_id) {
                return Err(Error::DuplicateId {
                    kind: "item",
                    id: item.item_id,
                });
            }
            corpus.items.insert(item.item_id.clone(), item);
        }
        for actor in corpus.actors.values() {
            for entry in &actor.engagement_history {
                if !corpus.documents.contains_key(&entry.doc_id) {
                    return Err(Error::DanglingReference {
                        kind: "actor",
                        id: actor.actor_ref().to_string(),
                        doc_id: entry.doc_id.clone(),
                    });
                }
            }
        }
        let mut items_by_doc: BTreeMap<String, Vec<(i64, String)>> = BTreeMap::new();
        for item in corpus.items.values() {
            items_by_doc
                .entry(item.doc_id.clone())
                .or_default()
                .push((item.timestamp, item.item_id.clone()));
        }
        for (doc_id, mut keyed) in items_by_doc {
            keyed.sort();
            corpus
                .items_by_doc
                .insert(doc_id, keyed.into_iter().map(|(_, id)| id).collect());
        }
        Ok(corpus)
    }

    pub fn n_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_actors(&self) -> usize {
        self.actors.len()
    }

    pub fn n_publishers(&self) -> usize {
        self.publishers.len()
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.documents.get(doc_id)
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocumentRecord> {
        self.documents.values()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.documents.keys().map(String::as_str)
    }

    /// Ids of documents carrying a true/false label.
    pub fn labeled_doc_ids(&self) -> Vec<String> {
        self.documents
            .values()
            .filter(|d| d.label.is_labeled())
            .map(|d| d.doc_id.clone())
            .collect()
    }

    pub fn item(&self, item_id: &str) -> Option<&EngagementItem> {
        self.items.get(item_id)
    }

    pub fn items(&self) -> impl Iterator<Item = &EngagementItem> {
        self.items.values()
    }

    /// Items engaging `doc_id`, sorted by `(timestamp, item_id)`.
    pub fn items_of(&self, doc_id: &str) -> impl Iterator<Item = &EngagementItem> {
        self.items_by_doc
            .get(doc_id)
            .into_iter()
            .flatten()
            .map(|id| &self.items[id])
    }

    pub fn actor(&self, actor: &ActorRef) -> Option<&Actor> {
        self.actors.get(actor)
    }

    pub fn actors(&self) -> impl Iterator<Item = &Actor> {
        self.actors.values()
    }

    pub fn publisher(&self, publisher_id: &str) -> Option<&Publisher> {
        self.publishers.get(publisher_id)
    }

    pub fn publishers(&self) -> impl Iterator<Item = &Publisher> {
        self.publishers.values()
    }

    /// Latest timestamp anywhere in the corpus (publish times included).
    pub fn end_time(&self) -> i64 {
        let docs = self.documents.values().map(|d| d.publish_time);
        let items = self.items.values().map(|i| i.timestamp);
        docs.chain(items).max().unwrap_or(0)
    }

    /// Earliest timestamp anywhere in the corpus.
    pub fn start_time(&self) -> i64 {
        let docs = self.documents.values().map(|d| d.publish_time);
        let items = self.items.values().map(|i| i.timestamp);
        docs.chain(items).min().unwrap_or(0)
    }

    /// The document's engagement view at observation time `t`.
    ///
    /// Contains exactly the engagements timestamped at or before `t`,
    /// sorted, so snapshots of the same document at increasing times nest.
    pub fn snapshot_at(&self, doc_id: &str, t: i64) -> Result<Snapshot> {
        let doc = self
            .documents
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        if t < doc.publish_time {
            return Err(Error::TimeBeforePublish {
                doc_id: doc_id.to_string(),
                t,
                publish_time: doc.publish_time,
            });
        }
        let engagements = self
            .items_of(doc_id)
            .take_while(|item| item.timestamp <= t)
            .cloned()
            .collect();
        Ok(Snapshot {
            doc_id: doc_id.to_string(),
            t,
            engagements,
        })
    }

    /// All records in canonical order: documents, items, actors, publishers,
    /// each sorted by id.
    pub fn to_records(&self) -> Vec<Record> {
        let mut records = Vec::new();
        records.extend(self.documents.values().cloned().map(Record::Document));
        records.extend(self.items.values().cloned().map(Record::Item));
        records.extend(self.actors.values().cloned().map(Record::Actor));
        records.extend(self.publishers.values().cloned().map(Record::Publisher));
        records
    }
}

fn validate_document(doc: &DocumentRecord) -> Result<()> {
    if doc.publish_time < 0 {
        return Err(Error::InvalidRecord {
            doc_id: doc.doc_id.clone(),
            msg: format!("negative publish_time {}", doc.publish_time),
        });
    }
    if doc.body.is_empty() && doc.title.is_empty() {
        return Err(Error::InvalidRecord {
            doc_id: doc.doc_id.clone(),
            msg: "body and title are both empty".to_string(),
        });
    }
    Ok(())
}
