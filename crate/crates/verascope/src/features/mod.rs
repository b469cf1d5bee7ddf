//! Deterministic feature extraction: tokenization, segmentation,
//! affect-density vectors, flow vectors, and reliability-factor readings.
//!
//! Every operation here is a pure function of its inputs, so batch
//! extraction can run in parallel without coordination.

mod lexicon;

pub use lexicon::AffectLexicon;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DocumentRecord, Label, Snapshot};
use crate::error::{Error, Result};

/// A measurable per-snapshot quantity that governs how much a base model's
/// prediction can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorId {
    WordCount,
    EngagementCount,
    UserHistoryDepth,
    PublisherHistoryDepth,
}

impl FactorId {
    pub const ALL: [FactorId; 4] = [
        FactorId::WordCount,
        FactorId::EngagementCount,
        FactorId::UserHistoryDepth,
        FactorId::PublisherHistoryDepth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactorId::WordCount => "word_count",
            FactorId::EngagementCount => "engagement_count",
            FactorId::UserHistoryDepth => "user_history_depth",
            FactorId::PublisherHistoryDepth => "publisher_history_depth",
        }
    }
}

impl std::fmt::Display for FactorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FactorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<FactorId> {
        match s {
            "word_count" => Ok(FactorId::WordCount),
            "engagement_count" => Ok(FactorId::EngagementCount),
            "user_history_depth" => Ok(FactorId::UserHistoryDepth),
            "publisher_history_depth" => Ok(FactorId::PublisherHistoryDepth),
            other => Err(Error::InvalidConfig(format!("unknown factor `{other}`"))),
        }
    }
}

/// One raw factor observation for a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReading {
    pub factor_id: FactorId,
    pub value: f64,
}

/// Per-segment affect densities followed by consecutive-segment deltas.
///
/// `values` has dimension `K*C + (K-1)*C` where `K` is the segment count
/// actually used and `C` the lexicon's category count.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVector {
    pub values: Vec<f64>,
    pub segments_used: usize,
    pub n_categories: usize,
}

impl FlowVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// Lowercases and strips leading/trailing punctuation. Returns an empty
/// string for tokens that are all punctuation.
pub fn normalize_token(raw: &str) -> String {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Whitespace tokens of `text`, normalized, with empty tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Title and body tokens concatenated, title first.
pub fn tokenize_document(doc: &DocumentRecord) -> Vec<String> {
    let mut tokens = tokenize(&doc.title);
    tokens.extend(tokenize(&doc.body));
    tokens
}

/// Whitespace-token count of title+body after normalization.
pub fn word_count(doc: &DocumentRecord) -> usize {
    tokenize_document(doc).len()
}

/// Splits `tokens` into `min(k, len)` contiguous, order-preserving segments
/// whose sizes differ by at most one.
pub fn segment_tokens(tokens: &[String], k: usize) -> Result<Vec<&[String]>> {
    assert!(k > 0, "segment count must be positive");
    if tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let k_used = k.min(tokens.len());
    let base = tokens.len() / k_used;
    let remainder = tokens.len() % k_used;
    let mut segments = Vec::with_capacity(k_used);
    let mut start = 0;
    for idx in 0..k_used {
        let size = base + usize::from(idx < remainder);
        segments.push(&tokens[start..start + size]);
        start += size;
    }
    Ok(segments)
}

/// Tokenizes `body` and segments it; the text-level entry point.
pub fn segment_text(body: &str, k: usize) -> Result<Vec<Vec<String>>> {
    let tokens = tokenize(body);
    let segments = segment_tokens(&tokens, k)?;
    Ok(segments.iter().map(|s| s.to_vec()).collect())
}

/// Per-category affect density of a segment: hits in category `c` divided
/// by segment length. Each component lies in [0,1].
pub fn affect_vector(segment: &[String], lex: &AffectLexicon) -> Vec<f64> {
    let mut counts = vec![0usize; lex.n_categories()];
    for token in segment {
        for &cat in lex.categories_of(token) {
            counts[cat] += 1;
        }
    }
    let len = segment.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / len).collect()
}

/// Concatenation of the document's per-segment affect vectors and the
/// deltas between consecutive segments.
pub fn flow_vector(doc: &DocumentRecord, lex: &AffectLexicon, k: usize) -> Result<FlowVector> {
    let tokens = tokenize_document(doc);
    let segments = segment_tokens(&tokens, k)?;
    let c = lex.n_categories();
    let k_used = segments.len();
    let mut values = Vec::with_capacity(k_used * c + k_used.saturating_sub(1) * c);
    let affect: Vec<Vec<f64>> = segments.iter().map(|s| affect_vector(s, lex)).collect();
    for vec in &affect {
        values.extend_from_slice(vec);
    }
    for pair in affect.windows(2) {
        for cat in 0..c {
            values.push(pair[1][cat] - pair[0][cat]);
        }
    }
    Ok(FlowVector {
        values,
        segments_used: k_used,
        n_categories: c,
    })
}

/// Exactly one reading per factor: the document's word count, the
/// snapshot's engagement count, the mean labeled-history length over
/// distinct engaging actors (0 when nobody engaged), and the publisher's
/// labeled track-record depth excluding the snapshot's own document.
pub fn factor_readings(snapshot: &Snapshot, corpus: &Corpus) -> Vec<FactorReading> {
    let doc = corpus.document(&snapshot.doc_id);
    let wc = doc.map(word_count).unwrap_or(0);
    let engagers = snapshot.engaging_actors();
    let history_depth = if engagers.is_empty() {
        0.0
    } else {
        let total: usize = engagers
            .iter()
            .map(|a| corpus.actor(a).map(|r| r.labeled_history_len()).unwrap_or(0))
            .sum();
        total as f64 / engagers.len() as f64
    };
    let publisher_depth = doc
        .and_then(|d| corpus.publisher(&d.publisher_id))
        .map(|p| {
            p.history
                .iter()
                .filter(|e| e.doc_id != snapshot.doc_id && e.label != Label::Unknown)
                .count()
        })
        .unwrap_or(0);
    vec![
        FactorReading {
            factor_id: FactorId::WordCount,
            value: wc as f64,
        },
        FactorReading {
            factor_id: FactorId::EngagementCount,
            value: snapshot.engagement_count() as f64,
        },
        FactorReading {
            factor_id: FactorId::UserHistoryDepth,
            value: history_depth,
        },
        FactorReading {
            factor_id: FactorId::PublisherHistoryDepth,
            value: publisher_depth as f64,
        },
    ]
}

/// Looks up one factor in a reading list.
pub fn reading_for(readings: &[FactorReading], factor: FactorId) -> Option<f64> {
    readings
        .iter()
        .find(|r| r.factor_id == factor)
        .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        Actor, Corpus, EngagementItem, EngagementKind, HistoryEntry, Label, Publisher, Record,
    };
    use proptest::prelude::*;

    fn doc(title: &str, body: &str) -> DocumentRecord {
        DocumentRecord {
            doc_id: "d1".to_string(),
            platform_of_origin: "alpha".to_string(),
            publisher_id: "p1".to_string(),
            title: title.to_string(),
            body: body.to_string(),
            publish_time: 0,
            label: Label::Unknown,
        }
    }

    #[test]
    fn word_count_examples() {
        assert_eq!(word_count(&doc("x", "")), 1);
        assert_eq!(word_count(&doc("", "the cat sat")), 3);
        let empty = DocumentRecord {
            title: String::new(),
            body: String::new(),
            ..doc("", "x")
        };
        assert_eq!(word_count(&empty), 0);
    }

    #[test]
    fn tokenization_strips_punctuation_and_lowercases() {
        assert_eq!(tokenize("The CAT, sat!! ... down."), ["the", "cat", "sat", "down"]);
        assert_eq!(tokenize("--- ***"), Vec::<String>::new());
    }

    #[test]
    fn segments_balance_sizes() {
        let tokens: Vec<String> = (0..100).map(|i| format!("t{i}")).collect();
        let segs = segment_tokens(&tokens, 10).unwrap();
        assert_eq!(segs.len(), 10);
        assert!(segs.iter().all(|s| s.len() == 10));

        let five: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
        let segs = segment_tokens(&five, 10).unwrap();
        assert_eq!(segs.len(), 5);
        assert!(segs.iter().all(|s| s.len() == 1));

        let seven: Vec<String> = (0..7).map(|i| format!("t{i}")).collect();
        let segs = segment_tokens(&seven, 3).unwrap();
        let sizes: Vec<usize> = segs.iter().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
    }

    #[test]
    fn segmenting_empty_body_is_an_error() {
        assert!(segment_text("  ... ", 4).is_err());
    }

    proptest! {
        #[test]
        fn segments_cover_tokens_and_differ_by_at_most_one(
            n in 1usize..200,
            k in 1usize..20,
        ) {
            let tokens: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
            let segs = segment_tokens(&tokens, k).unwrap();
            let flattened: Vec<String> =
                segs.iter().flat_map(|s| s.iter().cloned()).collect();
            prop_assert_eq!(&flattened, &tokens);
            let min = segs.iter().map(|s| s.len()).min().unwrap();
            let max = segs.iter().map(|s| s.len()).max().unwrap();
            prop_assert!(max - min <= 1);
            prop_assert_eq!(segs.len(), k.min(n));
        }
    }

    fn tiny_lexicon() -> AffectLexicon {
        AffectLexicon::parse("cat0\talpha\ncat1\tbeta\ncat1\tgamma\ncat2\tdelta\n").unwrap()
    }

    #[test]
    fn affect_vector_counts_category_hits() {
        let lex = tiny_lexicon();
        let none = tokenize("nothing matches here");
        assert_eq!(affect_vector(&none, &lex), vec![0.0, 0.0, 0.0]);

        let all_cat0 = tokenize("alpha alpha alpha");
        assert_eq!(affect_vector(&all_cat0, &lex), vec![1.0, 0.0, 0.0]);

        let mixed = tokenize("alpha beta gamma filler");
        assert_eq!(affect_vector(&mixed, &lex), vec![0.25, 0.5, 0.0]);
    }

    #[test]
    fn flow_vector_deltas_vanish_for_identical_segments() {
        let lex = tiny_lexicon();
        let d = doc("", "alpha filler alpha filler alpha filler alpha filler");
        let flow = flow_vector(&d, &lex, 4).unwrap();
        assert_eq!(flow.segments_used, 4);
        let c = lex.n_categories();
        assert!(flow.values[4 * c..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn flow_vector_dimension_formula() {
        let lex = tiny_lexicon();
        let single = doc("", "alpha");
        let flow = flow_vector(&single, &lex, 10).unwrap();
        assert_eq!(flow.segments_used, 1);
        assert_eq!(flow.dimension(), 3);

        let d = doc("", "alpha beta gamma delta filler more words here");
        let flow = flow_vector(&d, &lex, 4).unwrap();
        assert_eq!(flow.segments_used, 4);
        assert_eq!(flow.dimension(), 4 * 3 + 3 * 3);
        assert!(flow.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    fn history(n: usize) -> Vec<HistoryEntry> {
        (0..n)
            .map(|_| HistoryEntry {
                doc_id: "d1".to_string(),
                label: Label::False,
            })
            .collect()
    }

    fn reading_corpus() -> Corpus {
        let mut records = vec![Record::Document(DocumentRecord {
            doc_id: "d1".to_string(),
            platform_of_origin: "alpha".to_string(),
            publisher_id: "p1".to_string(),
            title: String::new(),
            body: "one two three four".to_string(),
            publish_time: 0,
            label: Label::Unknown,
        })];
        for (actor, depth) in [("a1", 4usize), ("a2", 6)] {
            records.push(Record::Actor(Actor {
                actor_id: actor.to_string(),
                platform: "alpha".to_string(),
                handle: actor.to_string(),
                display_name: actor.to_string(),
                created_at: 0,
                engagement_history: history(depth),
            }));
        }
        records.push(Record::Publisher(Publisher {
            publisher_id: "p1".to_string(),
            history: vec![
                HistoryEntry {
                    doc_id: "d1".to_string(),
                    label: Label::False,
                },
                HistoryEntry {
                    doc_id: "other1".to_string(),
                    label: Label::False,
                },
                HistoryEntry {
                    doc_id: "other2".to_string(),
                    label: Label::True,
                },
                HistoryEntry {
                    doc_id: "other3".to_string(),
                    label: Label::False,
                },
                HistoryEntry {
                    doc_id: "other4".to_string(),
                    label: Label::Unknown,
                },
            ],
        }));
        for (i, actor) in ["a1", "a2", "a2"].iter().enumerate() {
            records.push(Record::Item(EngagementItem {
                item_id: format!("i{i}"),
                doc_id: "d1".to_string(),
                actor_id: actor.to_string(),
                platform: "alpha".to_string(),
                timestamp: 10 + i as i64,
                kind: EngagementKind::Share,
                text: None,
                urls: vec![],
                hashtags: vec![],
                mentions: vec![],
            }));
        }
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn factor_readings_cover_all_factors() {
        let corpus = reading_corpus();
        let snap = corpus.snapshot_at("d1", 100).unwrap();
        let readings = factor_readings(&snap, &corpus);
        assert_eq!(readings.len(), FactorId::ALL.len());
        assert_eq!(reading_for(&readings, FactorId::WordCount), Some(4.0));
        assert_eq!(reading_for(&readings, FactorId::EngagementCount), Some(3.0));
        // distinct engagers a1 (depth 4) and a2 (depth 6)
        assert_eq!(
            reading_for(&readings, FactorId::UserHistoryDepth),
            Some(5.0)
        );
        // 3 labeled entries besides d1 itself; the unknown one is skipped
        assert_eq!(
            reading_for(&readings, FactorId::PublisherHistoryDepth),
            Some(3.0)
        );
    }

    #[test]
    fn history_depth_is_zero_without_engagers() {
        let corpus = reading_corpus();
        let snap = corpus.snapshot_at("d1", 0).unwrap();
        let readings = factor_readings(&snap, &corpus);
        assert_eq!(reading_for(&readings, FactorId::EngagementCount), Some(0.0));
        assert_eq!(
            reading_for(&readings, FactorId::UserHistoryDepth),
            Some(0.0)
        );
    }

    #[test]
    fn factor_readings_are_repeatable() {
        let corpus = reading_corpus();
        let snap = corpus.snapshot_at("d1", 50).unwrap();
        assert_eq!(
            factor_readings(&snap, &corpus),
            factor_readings(&snap, &corpus)
        );
    }
}
