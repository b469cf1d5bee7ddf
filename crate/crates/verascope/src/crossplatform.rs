//! Merges a document's context from several platforms into one package and
//! links actor identities that belong to the same person across platforms.
//!
//! Live fact-checker and platform clients are out of scope; everything
//! external sits behind [`Fetcher`], with a deterministic file-backed mock
//! for tests and pipelines.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coordination::UnionFind;
use crate::corpus::{Actor, ActorRef, Corpus, DocumentRecord, EngagementItem, Label};
use crate::error::{Error, Result};

/// Lowercases and strips every non-alphanumeric character, so
/// "J_Smith" and "jsmith" compare equal.
pub fn normalize_handle(handle: &str) -> String {
    handle
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Jaro similarity over unicode scalar values, in [0, 1].
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_taken = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(a.len());
    let mut b_matched_at = Vec::with_capacity(b.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_taken[j] && b[j] == *ca {
                b_taken[j] = true;
                a_matched.push(*ca);
                b_matched_at.push(j);
                break;
            }
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    // Transpositions: matched characters read in a-order vs b-order,
    // two mismatched positions per transposition.
    b_matched_at.sort_unstable();
    let half_transposed = a_matched
        .iter()
        .zip(b_matched_at.iter().map(|&j| b[j]))
        .filter(|(ca, cb)| **ca != *cb)
        .count();
    let t = half_transposed as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro-Winkler: Jaro plus a boost for a shared prefix of up to four
/// characters at scale 0.1.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let j = jaro(a, b);
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(4)
        .take_while(|(x, y)| x == y)
        .count() as f64;
    j + prefix * 0.1 * (1.0 - j)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkThresholds {
    /// Minimum display-name Jaro-Winkler for the name+URL rule.
    pub name_similarity: f64,
    /// Minimum count of shared rare URLs for the name+URL rule.
    pub min_shared_urls: usize,
    /// URLs with idf at or below this are too common to count as evidence.
    pub min_url_idf: f64,
}

impl Default for LinkThresholds {
    fn default() -> LinkThresholds {
        LinkThresholds {
            name_similarity: 0.9,
            min_shared_urls: 2,
            min_url_idf: std::f64::consts::LN_2,
        }
    }
}

/// One linked identity: the set of platform accounts judged to be the same
/// person, with the signals that justified each link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCluster {
    pub cluster_id: String,
    pub members: Vec<ActorRef>,
    pub evidence: Vec<String>,
}

/// Collects the distinct URLs each actor has attached to any engagement.
pub fn actor_urls(corpus: &Corpus) -> BTreeMap<ActorRef, BTreeSet<String>> {
    let mut map: BTreeMap<ActorRef, BTreeSet<String>> = BTreeMap::new();
    for item in corpus.items() {
        if item.urls.is_empty() {
            continue;
        }
        let actor = ActorRef::new(item.platform.clone(), item.actor_id.clone());
        map.entry(actor).or_default().extend(item.urls.iter().cloned());
    }
    map
}

/// Links all corpus actors; see [`link_actor_set`].
pub fn link_entities(corpus: &Corpus, thresholds: &LinkThresholds) -> Vec<IdentityCluster> {
    let actors: Vec<&Actor> = corpus.actors().collect();
    link_actor_set(&actors, &actor_urls(corpus), thresholds)
}

/// Clusters actors into identities: two actors link when their normalized
/// handles are equal, or their display names reach the Jaro-Winkler
/// threshold while they share enough rare URLs. Clusters are the connected
/// components of those links, so output is independent of input order.
pub fn link_actor_set(
    actors: &[&Actor],
    urls: &BTreeMap<ActorRef, BTreeSet<String>>,
    thresholds: &LinkThresholds,
) -> Vec<IdentityCluster> {
    // Canonical order decouples the result from caller ordering.
    let mut order: Vec<usize> = (0..actors.len()).collect();
    order.sort_by_key(|&i| actors[i].actor_ref());
    order.dedup_by_key(|i| actors[*i].actor_ref());
    let refs: Vec<ActorRef> = order.iter().map(|&i| actors[i].actor_ref()).collect();

    let mut uf = UnionFind::new(order.len());
    let mut evidence: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();

    let mut by_handle: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (pos, &i) in order.iter().enumerate() {
        let key = normalize_handle(&actors[i].handle);
        if !key.is_empty() {
            by_handle.entry(key).or_default().push(pos);
        }
    }
    for (key, group) in &by_handle {
        for pair in group.windows(2) {
            uf.union(pair[0], pair[1]);
            evidence
                .entry((pair[0], pair[1]))
                .or_default()
                .push(format!("shared normalized handle `{key}`"));
        }
    }

    // Rare-URL co-use proposes candidate pairs; the name check confirms.
    let n_actors = order.len() as f64;
    let mut url_users: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (pos, r) in refs.iter().enumerate() {
        if let Some(set) = urls.get(r) {
            for url in set {
                url_users.entry(url).or_default().push(pos);
            }
        }
    }
    let mut shared_rare: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for users in url_users.values() {
        if users.len() < 2 {
            continue;
        }
        let idf = (n_actors / users.len() as f64).ln();
        if idf <= thresholds.min_url_idf {
            continue;
        }
        for (a, &u) in users.iter().enumerate() {
            for &v in &users[a + 1..] {
                *shared_rare.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
    }
    for (&(u, v), &count) in &shared_rare {
        if count < thresholds.min_shared_urls {
            continue;
        }
        let name_u = actors[order[u]].display_name.to_lowercase();
        let name_v = actors[order[v]].display_name.to_lowercase();
        let jw = jaro_winkler(&name_u, &name_v);
        if jw >= thresholds.name_similarity {
            uf.union(u, v);
            evidence.entry((u, v)).or_default().push(format!(
                "display names match at jaro-winkler {jw:.3} with {count} shared rare urls"
            ));
        }
    }

    let mut components: BTreeMap<usize, (Vec<ActorRef>, Vec<String>)> = BTreeMap::new();
    for pos in 0..order.len() {
        let root = uf.find(pos);
        components.entry(root).or_default().0.push(refs[pos].clone());
    }
    for ((u, v), mut why) in evidence {
        let root = uf.find(u);
        debug_assert_eq!(root, uf.find(v));
        components.get_mut(&root).expect("evidence joins members").1.append(&mut why);
    }
    components
        .into_values()
        .enumerate()
        .map(|(idx, (members, mut evidence))| {
            evidence.sort();
            evidence.dedup();
            IdentityCluster {
                cluster_id: format!("identity{idx:04}"),
                members,
                evidence,
            }
        })
        .collect()
}

/// Source of labels and engagement context for a document. Implementations
/// wrap one external service; failures surface as warnings on the merged
/// package rather than failing the merge.
pub trait Fetcher: Send + Sync {
    fn source_id(&self) -> &str;
    /// Platforms this fetcher can provide context for.
    fn platforms(&self) -> Vec<String>;
    fn fetch_label(&self, doc: &DocumentRecord) -> Result<Vec<(String, Label)>>;
    fn fetch_context(&self, doc: &DocumentRecord, platform: &str) -> Result<Vec<EngagementItem>>;
}

/// One document's merged cross-platform view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentPackage {
    pub document: DocumentRecord,
    pub per_platform_engagements: BTreeMap<String, Vec<EngagementItem>>,
    pub merged_label: Label,
    pub label_sources: Vec<(String, Label)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DocumentPackage {
    pub fn total_engagements(&self) -> usize {
        self.per_platform_engagements.values().map(Vec::len).sum()
    }
}

/// Label that a strict majority of sources agree on; ties and no sources
/// both give `Unknown`.
pub fn majority_label(sources: &[(String, Label)]) -> Label {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for (_, label) in sources {
        *counts.entry(*label).or_insert(0) += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    let mut leaders = counts.iter().filter(|(_, &c)| c == best);
    match (leaders.next(), leaders.next()) {
        (Some((&label, _)), None) => label,
        _ => Label::Unknown,
    }
}

/// Gathers labels and per-platform engagements for `doc` from every
/// fetcher. Engagements are concatenated per platform, never deduplicated,
/// so counts are preserved across the merge.
pub fn merge_document_package(doc: &DocumentRecord, fetchers: &[&dyn Fetcher]) -> DocumentPackage {
    let mut label_sources = Vec::new();
    let mut per_platform: BTreeMap<String, Vec<EngagementItem>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for fetcher in fetchers {
        match fetcher.fetch_label(doc) {
            Ok(mut labels) => label_sources.append(&mut labels),
            Err(e) => warnings.push(format!(
                "label lookup via `{}` failed for `{}`: {e}",
                fetcher.source_id(),
                doc.doc_id
            )),
        }
        for platform in fetcher.platforms() {
            match fetcher.fetch_context(doc, &platform) {
                Ok(mut items) => {
                    if !items.is_empty() {
                        per_platform.entry(platform).or_default().append(&mut items);
                    }
                }
                Err(e) => warnings.push(format!(
                    "context from `{}` on `{platform}` failed for `{}`: {e}",
                    fetcher.source_id(),
                    doc.doc_id
                )),
            }
        }
    }
    let merged_label = majority_label(&label_sources);
    DocumentPackage {
        document: doc.clone(),
        per_platform_engagements: per_platform,
        merged_label,
        label_sources,
        warnings,
    }
}

/// One fixture line: everything a mock service knows about one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub doc_id: String,
    #[serde(default)]
    pub labels: Vec<(String, Label)>,
    #[serde(default)]
    pub context: BTreeMap<String, Vec<EngagementItem>>,
}

/// File-backed mock fetcher: a JSONL file keyed by doc_id, loaded once.
/// Unlisted documents yield empty results, not errors.
pub struct FileFetcher {
    source_id: String,
    records: BTreeMap<String, FixtureRecord>,
}

impl FileFetcher {
    pub fn from_path(source_id: impl Into<String>, path: &Path) -> Result<FileFetcher> {
        let file = std::fs::File::open(path)?;
        let mut records = BTreeMap::new();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord =
                serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
            records.insert(record.doc_id.clone(), record);
        }
        Ok(FileFetcher {
            source_id: source_id.into(),
            records,
        })
    }
}

impl Fetcher for FileFetcher {
    fn source_id(&self) -> &str {
        &self.source_id
    }

    fn platforms(&self) -> Vec<String> {
        let mut all: BTreeSet<String> = BTreeSet::new();
        for record in self.records.values() {
            all.extend(record.context.keys().cloned());
        }
        all.into_iter().collect()
    }

    fn fetch_label(&self, doc: &DocumentRecord) -> Result<Vec<(String, Label)>> {
        Ok(self
            .records
            .get(&doc.doc_id)
            .map(|r| r.labels.clone())
            .unwrap_or_default())
    }

    fn fetch_context(&self, doc: &DocumentRecord, platform: &str) -> Result<Vec<EngagementItem>> {
        Ok(self
            .records
            .get(&doc.doc_id)
            .and_then(|r| r.context.get(platform))
            .cloned()
            .unwrap_or_default())
    }
}
