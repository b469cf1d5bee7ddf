//! Coordinated-behavior detection from isolated actor characteristics.
//!
//! No follow or repost graph is ever consumed. Actors are tied together
//! only by what they did: posting the same url, hashtag, mention, or
//! near-duplicate text close together in time. Rare shared values weigh
//! more (idf squared); values everyone uses weigh nothing. Communities
//! come from label propagation run at a ladder of edge-weight
//! percentiles, and how far up the ladder a community survives is its
//! coordination extent.

pub mod intent;
pub mod sync;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::tokenize;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Url,
    Hashtag,
    Mention,
    TextShingleHash,
}

impl std::fmt::Display for TraceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TraceKind::Url => "url",
            TraceKind::Hashtag => "hashtag",
            TraceKind::Mention => "mention",
            TraceKind::TextShingleHash => "text_shingle_hash",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceEvent {
    pub timestamp: i64,
    pub kind: TraceKind,
    pub value: String,
}

/// Everything one actor did, as (kind, value, time) events sorted by
/// time. The actor id is the platform-qualified reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorTrace {
    pub actor_id: String,
    pub events: Vec<TraceEvent>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashes of all 3-token shingles of `text`; empty when the text has
/// fewer than 3 tokens.
pub fn shingle_set(text: &str) -> BTreeSet<u64> {
    let tokens = tokenize(text);
    tokens
        .windows(3)
        .map(|w| fnv1a64(w.join("\u{1f}").as_bytes()))
        .collect()
}

pub fn jaccard(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, keeping representatives stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Groups texts whose shingle sets overlap at Jaccard >= `threshold`
/// into one class; returns one class id per input text, position for
/// position. Texts too short to shingle get no class (None).
pub fn near_duplicate_classes(texts: &[&str], threshold: f64) -> Vec<Option<String>> {
    // Distinct texts only; identical strings trivially share a class.
    let mut distinct: Vec<&str> = Vec::new();
    let mut index_of: BTreeMap<&str, usize> = BTreeMap::new();
    for &t in texts {
        index_of.entry(t).or_insert_with(|| {
            distinct.push(t);
            distinct.len() - 1
        });
    }
    let sets: Vec<BTreeSet<u64>> = distinct.iter().map(|t| shingle_set(t)).collect();

    // Candidate pairs share at least one shingle; near-duplicates always
    // do, so blocking on the inverted index loses nothing.
    let mut by_shingle: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &s in set {
            by_shingle.entry(s).or_default().push(i);
        }
    }
    let mut uf = UnionFind::new(distinct.len());
    let mut checked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for ids in by_shingle.values() {
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                if !checked.insert((i, j)) {
                    continue;
                }
                if jaccard(&sets[i], &sets[j]) >= threshold {
                    uf.union(i, j);
                }
            }
        }
    }

    // Class id: smallest member text hash, so ids are insertion-order
    // independent.
    let roots: Vec<usize> = (0..distinct.len()).map(|i| uf.find(i)).collect();
    let mut class_hash: BTreeMap<usize, u64> = BTreeMap::new();
    for (i, &t) in distinct.iter().enumerate() {
        if sets[i].is_empty() {
            continue;
        }
        let h = fnv1a64(t.as_bytes());
        class_hash
            .entry(roots[i])
            .and_modify(|cur| *cur = (*cur).min(h))
            .or_insert(h);
    }
    texts
        .iter()
        .map(|&t| {
            let i = index_of[t];
            if sets[i].is_empty() {
                return None;
            }
            Some(format!("c{:016x}", class_hash[&roots[i]]))
        })
        .collect()
}

/// Jaccard floor for calling two texts the same characteristic value.
pub const NEAR_DUP_THRESHOLD: f64 = 0.8;

/// One trace per actor appearing in the corpus, with near-duplicate text
/// resolved corpus-wide so matching texts share a characteristic value.
pub fn extract_traces(corpus: &Corpus) -> Vec<ActorTrace> {
    let mut events: BTreeMap<String, Vec<TraceEvent>> = BTreeMap::new();
    for actor in corpus.actors() {
        events.entry(actor.actor_ref().to_string()).or_default();
    }

    let items: Vec<_> = corpus.items().collect();
    let texts: Vec<&str> = items
        .iter()
        .filter_map(|i| i.text.as_deref())
        .collect();
    let classes = near_duplicate_classes(&texts, NEAR_DUP_THRESHOLD);
    let mut class_iter = classes.into_iter();

    for item in &items {
        let actor = format!("{}:{}", item.platform, item.actor_id);
        let bucket = events.entry(actor).or_default();
        for url in &item.urls {
            bucket.push(TraceEvent {
                timestamp: item.timestamp,
                kind: TraceKind::Url,
                value: url.clone(),
            });
        }
        for tag in &item.hashtags {
            bucket.push(TraceEvent {
                timestamp: item.timestamp,
                kind: TraceKind::Hashtag,
                value: tag.clone(),
            });
        }
        for mention in &item.mentions {
            bucket.push(TraceEvent {
                timestamp: item.timestamp,
                kind: TraceKind::Mention,
                value: mention.clone(),
            });
        }
        if item.text.is_some() {
            let class = class_iter.next().expect("one class per text");
            if let Some(value) = class {
                bucket.push(TraceEvent {
                    timestamp: item.timestamp,
                    kind: TraceKind::TextShingleHash,
                    value,
                });
            }
        }
    }

    events
        .into_iter()
        .map(|(actor_id, mut evs)| {
            evs.sort();
            ActorTrace {
                actor_id,
                events: evs,
            }
        })
        .collect()
}

/// Undirected actor-similarity graph; edges keyed `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeMap<(usize, usize), f64>,
}

impl SimilarityGraph {
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        self.edges.get(&key).copied().unwrap_or(0.0)
    }

    /// Edge list as `actor_u,actor_v,weight` CSV with a header row.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("actor_u,actor_v,weight\n");
        for (&(i, j), w) in &self.edges {
            let _ = writeln!(s, "{},{},{}", self.nodes[i], self.nodes[j], w);
        }
        s
    }
}

/// Connects actors sharing a (kind, value) with events within
/// `dt_window` of each other; each such shared value adds
/// `ln(n_actors / n_users)^2` to the edge.
pub fn build_similarity_graph(traces: &[ActorTrace], dt_window: i64) -> Result<SimilarityGraph> {
    if dt_window <= 0 {
        return Err(Error::InvalidConfig(format!(
            "coordination window {dt_window} must be positive"
        )));
    }
    let nodes: Vec<String> = traces.iter().map(|t| t.actor_id.clone()).collect();
    let n = nodes.len();
    let mut graph = SimilarityGraph {
        nodes,
        edges: BTreeMap::new(),
    };
    if n < 2 {
        return Ok(graph);
    }

    // (kind, value) -> per-actor sorted timestamps.
    let mut usage: BTreeMap<(TraceKind, &str), BTreeMap<usize, Vec<i64>>> = BTreeMap::new();
    for (idx, trace) in traces.iter().enumerate() {
        for e in &trace.events {
            usage
                .entry((e.kind, e.value.as_str()))
                .or_default()
                .entry(idx)
                .or_default()
                .push(e.timestamp);
        }
    }

    for users in usage.values() {
        let n_users = users.len();
        if n_users < 2 || n_users == n {
            // Unique values link nothing; ubiquitous ones carry idf 0.
            continue;
        }
        let idf = (n as f64 / n_users as f64).ln();
        let contribution = idf * idf;
        let actors: Vec<(&usize, &Vec<i64>)> = users.iter().collect();
        for (a, (&u, times_u)) in actors.iter().enumerate() {
            for (&v, times_v) in &actors[a + 1..] {
                if co_occur(times_u, times_v, dt_window) {
                    *graph.edges.entry((u, v)).or_insert(0.0) += contribution;
                }
            }
        }
    }
    Ok(graph)
}

/// True when any pair of timestamps from the two sorted lists lies
/// within `dt`.
fn co_occur(a: &[i64], b: &[i64], dt: i64) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let gap = a[i] - b[j];
        if gap.abs() <= dt {
            return true;
        }
        if gap > 0 {
            j += 1;
        } else {
            i += 1;
        }
    }
    false
}

/// A group of actors that keeps re-forming as weak edges are stripped
/// away. `extent` is the highest percentile (as a fraction) at which a
/// community still holding `persistence` of the members exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedCommunity {
    pub members: Vec<String>,
    pub extent: f64,
}

/// Weighted label propagation: nodes adopt the label with the largest
/// incident weight, visiting order reshuffled each round, ties to the
/// smallest label. Stable under 100 rounds or convergence.
fn label_propagation(
    n: usize,
    adjacency: &[Vec<(usize, f64)>],
    rng: &mut ChaCha8Rng,
    max_iter: usize,
) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..max_iter {
        order.shuffle(rng);
        let mut changed = false;
        for &v in &order {
            if adjacency[v].is_empty() {
                continue;
            }
            let mut tally: BTreeMap<usize, f64> = BTreeMap::new();
            for &(u, w) in &adjacency[v] {
                *tally.entry(labels[u]).or_insert(0.0) += w;
            }
            // Ascending key iteration plus strict comparison keeps the
            // smallest label on ties.
            let mut best = (labels[v], f64::NEG_INFINITY);
            for (&label, &w) in &tally {
                if w > best.1 {
                    best = (label, w);
                }
            }
            if best.0 != labels[v] {
                labels[v] = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

fn partition_at(
    graph: &SimilarityGraph,
    threshold: f64,
    seed: u64,
    max_iter: usize,
) -> Vec<BTreeSet<usize>> {
    let n = graph.nodes.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &w) in &graph.edges {
        if w >= threshold {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = label_propagation(n, &adjacency, &mut rng, max_iter);
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (v, &label) in labels.iter().enumerate() {
        groups.entry(label).or_default().insert(v);
    }
    groups.into_values().collect()
}

/// Nearest-rank percentile of the sorted weights.
fn percentile_threshold(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Sweeps the percentile ladder. Communities are read off the lowest
/// percentile; their extent is how far up the ladder a community keeping
/// `persistence` of their members survives. Singletons are never
/// reported.
pub fn detect_communities(
    graph: &SimilarityGraph,
    percentiles: &[f64],
    persistence: f64,
    seed: u64,
) -> Result<Vec<DetectedCommunity>> {
    if percentiles.is_empty() {
        return Err(Error::InvalidConfig(
            "percentile ladder must be non-empty".to_string(),
        ));
    }
    for pair in percentiles.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::InvalidConfig(
                "percentile ladder must ascend".to_string(),
            ));
        }
    }
    if percentiles
        .iter()
        .any(|q| !(0.0..=100.0).contains(q) || !q.is_finite())
    {
        return Err(Error::InvalidConfig(
            "percentiles must lie in [0, 100]".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&persistence) {
        return Err(Error::InvalidConfig(format!(
            "persistence {persistence} must lie in [0, 1]"
        )));
    }
    if graph.edges.is_empty() {
        return Ok(Vec::new());
    }

    let mut weights: Vec<f64> = graph.edges.values().copied().collect();
    weights.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let partitions: Vec<Vec<BTreeSet<usize>>> = percentiles
        .iter()
        .map(|&q| partition_at(graph, percentile_threshold(&weights, q), seed, 100))
        .collect();

    let mut out = Vec::new();
    for community in &partitions[0] {
        if community.len() < 2 {
            continue;
        }
        let needed = (persistence * community.len() as f64).ceil() as usize;
        let mut extent = percentiles[0];
        for (q, partition) in percentiles.iter().zip(&partitions).skip(1) {
            let survives = partition
                .iter()
                .any(|group| group.intersection(community).count() >= needed.max(1));
            if survives {
                extent = *q;
            } else {
                break;
            }
        }
        out.push(DetectedCommunity {
            members: community
                .iter()
                .map(|&v| graph.nodes[v].clone())
                .collect(),
            extent: extent / 100.0,
        });
    }
    Ok(out)
}

/// Final coordination output for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationReport {
    pub communities: Vec<CommunityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityReport {
    pub actor_ids: Vec<String>,
    pub extent: f64,
    pub sync_z: f64,
    pub intent: intent::IntentLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanSettings {
    /// Co-occurrence window in seconds, for both similarity and sync.
    pub dt: i64,
    pub percentiles: Vec<f64>,
    pub persistence: f64,
    pub n_shuffles: usize,
    pub seed: u64,
}

impl Default for ScanSettings {
    fn default() -> ScanSettings {
        ScanSettings {
            dt: 3600,
            percentiles: vec![50.0, 75.0, 90.0, 95.0],
            persistence: 0.9,
            n_shuffles: 200,
            seed: 0,
        }
    }
}

/// Full coordination pass: build the actor similarity graph, detect
/// communities, score each for temporal synchronization, and classify
/// intent when a fitted model is supplied. Each member is classified
/// separately and the community takes the majority label, ties falling
/// back to unknown.
pub fn scan(
    corpus: &Corpus,
    intent_model: Option<&intent::IntentModel>,
    settings: &ScanSettings,
) -> Result<CoordinationReport> {
    let traces = extract_traces(corpus);
    let graph = build_similarity_graph(&traces, settings.dt)?;
    let communities = detect_communities(
        &graph,
        &settings.percentiles,
        settings.persistence,
        settings.seed,
    )?;
    let time_range = (corpus.start_time(), corpus.end_time());
    let features = intent_model.map(|_| intent::actor_features(&traces, corpus, settings.dt));

    let mut reports = Vec::with_capacity(communities.len());
    for (idx, community) in communities.iter().enumerate() {
        let sync_z = sync::synchronization_score(
            &community.members,
            &traces,
            settings.dt,
            settings.n_shuffles,
            settings.seed.wrapping_add(idx as u64),
            time_range,
        )?;
        let label = match (&intent_model, &features) {
            (Some(model), Some(features)) => {
                let mut votes: BTreeMap<intent::IntentLabel, usize> = BTreeMap::new();
                for member in &community.members {
                    let x = features.get(member).ok_or_else(|| {
                        Error::InvalidConfig(format!("no behavior features for `{member}`"))
                    })?;
                    *votes.entry(model.classify(x)?).or_insert(0) += 1;
                }
                let best = votes.values().copied().max().unwrap_or(0);
                let mut leaders = votes.iter().filter(|(_, &c)| c == best);
                match (leaders.next(), leaders.next()) {
                    (Some((&label, _)), None) => label,
                    _ => intent::IntentLabel::Unknown,
                }
            }
            _ => intent::IntentLabel::Unknown,
        };
        reports.push(CommunityReport {
            actor_ids: community.members.clone(),
            extent: community.extent,
            sync_z,
            intent: label,
        });
    }
    Ok(CoordinationReport {
        communities: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth::{generate, ClusterSpec, SynthConfig};

    const TEMPLATE: &str = "city council budget meeting report for the committee \
        review of local park repair project plan update summary notes final draft";

    #[test]
    fn edge_token_swap_stays_in_one_class_and_middle_swap_leaves() {
        let variant = TEMPLATE.replace("draft", "memo");
        let a = shingle_set(TEMPLATE);
        let b = shingle_set(&variant);
        assert_eq!(a.len(), 18);
        // One window touches the last token: 17 shared of 19 distinct.
        assert!((jaccard(&a, &b) - 17.0 / 19.0).abs() < 1e-12);

        let middle = TEMPLATE.replace("repair", "painting");
        let c = shingle_set(&middle);
        assert!((jaccard(&a, &c) - 15.0 / 21.0).abs() < 1e-12);

        let classes = near_duplicate_classes(&[TEMPLATE, &variant, &middle], 0.8);
        assert_eq!(classes[0], classes[1]);
        assert_ne!(classes[0], classes[2]);
        assert!(classes.iter().all(Option::is_some));
    }

    #[test]
    fn short_texts_carry_no_shingle_signal() {
        assert!(shingle_set("two words").is_empty());
        let classes = near_duplicate_classes(&["two words", TEMPLATE], 0.8);
        assert_eq!(classes[0], None);
        assert!(classes[1].is_some());
    }

    #[test]
    fn traces_carry_one_event_per_characteristic() {
        let cfg = SynthConfig {
            n_docs: 6,
            n_publishers: 2,
            n_background_actors: 8,
            engagement_range: (2, 5),
            clusters: vec![],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        let (corpus, _) = generate(&cfg, 51).unwrap();
        let traces = extract_traces(&corpus);
        assert_eq!(traces.len(), corpus.n_actors());
        for trace in &traces {
            for pair in trace.events.windows(2) {
                assert!(pair[0].timestamp <= pair[1].timestamp);
            }
        }
        let total_events: usize = traces.iter().map(|t| t.events.len()).sum();
        let expected: usize = corpus
            .items()
            .map(|i| {
                i.urls.len()
                    + i.hashtags.len()
                    + i.mentions.len()
                    + usize::from(i.text.as_deref().map_or(false, |t| {
                        !shingle_set(t).is_empty()
                    }))
            })
            .sum();
        assert_eq!(total_events, expected);
    }

    fn trace(actor: &str, events: &[(TraceKind, &str, i64)]) -> ActorTrace {
        ActorTrace {
            actor_id: actor.to_string(),
            events: events
                .iter()
                .map(|&(kind, value, timestamp)| TraceEvent {
                    timestamp,
                    kind,
                    value: value.to_string(),
                })
                .collect(),
        }
    }

    fn ten_traces() -> Vec<ActorTrace> {
        let mut traces: Vec<ActorTrace> = (0..8)
            .map(|i| trace(&format!("bg{i}"), &[]))
            .collect();
        traces.push(trace("u", &[(TraceKind::Url, "https://x/1", 100)]));
        traces.push(trace("v", &[(TraceKind::Url, "https://x/1", 150)]));
        traces
    }

    #[test]
    fn one_rare_shared_url_weighs_squared_idf() {
        let graph = build_similarity_graph(&ten_traces(), 3600).unwrap();
        assert_eq!(graph.nodes.len(), 10);
        assert_eq!(graph.edges.len(), 1);
        let u = graph.nodes.iter().position(|n| n == "u").unwrap();
        let v = graph.nodes.iter().position(|n| n == "v").unwrap();
        let expected = 5.0f64.ln().powi(2);
        assert!((graph.weight(u, v) - expected).abs() < 1e-12);
        assert_eq!(graph.weight(u, v), graph.weight(v, u));
    }

    #[test]
    fn far_apart_or_ubiquitous_values_link_nothing() {
        let mut traces = ten_traces();
        traces[9].events[0].timestamp = 100_000;
        let graph = build_similarity_graph(&traces, 3600).unwrap();
        assert!(graph.edges.is_empty());

        let traces: Vec<ActorTrace> = (0..4)
            .map(|i| {
                trace(
                    &format!("a{i}"),
                    &[(TraceKind::Hashtag, "everyone", 100 + i)],
                )
            })
            .collect();
        let graph = build_similarity_graph(&traces, 3600).unwrap();
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn extra_events_never_weaken_existing_ties() {
        let mut traces = ten_traces();
        let graph_before = build_similarity_graph(&traces, 3600).unwrap();
        traces[9].events.push(TraceEvent {
            timestamp: 130,
            kind: TraceKind::Hashtag,
            value: "drive".to_string(),
        });
        traces[8].events.push(TraceEvent {
            timestamp: 135,
            kind: TraceKind::Hashtag,
            value: "drive".to_string(),
        });
        let graph_after = build_similarity_graph(&traces, 3600).unwrap();
        for (&(i, j), &w) in &graph_before.edges {
            assert!(graph_after.weight(i, j) >= w);
        }
    }

    fn clique_graph() -> SimilarityGraph {
        // Two 5-cliques of weight 10 joined by a single 0.1 edge.
        let nodes: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let mut edges = BTreeMap::new();
        for base in [0, 5] {
            for i in base..base + 5 {
                for j in i + 1..base + 5 {
                    edges.insert((i, j), 10.0);
                }
            }
        }
        edges.insert((4, 5), 0.1);
        SimilarityGraph { nodes, edges }
    }

    #[test]
    fn weak_bridges_do_not_merge_strong_cliques() {
        let graph = clique_graph();
        let communities = detect_communities(&graph, &[0.0, 50.0, 90.0], 0.9, 7).unwrap();
        assert_eq!(communities.len(), 2);
        for c in &communities {
            assert_eq!(c.members.len(), 5);
        }
        let mut all: Vec<&String> = communities
            .iter()
            .flat_map(|c| c.members.iter())
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10, "communities must be disjoint");

        // Brute force: drop the bridge (below the 50th percentile) and
        // take connected components.
        let survivors: Vec<(usize, usize)> = graph
            .edges
            .iter()
            .filter(|(_, &w)| w >= 10.0)
            .map(|(&k, _)| k)
            .collect();
        let mut uf = UnionFind::new(10);
        for (i, j) in survivors {
            uf.union(i, j);
        }
        let mut components: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for v in 0..10 {
            components.entry(uf.find(v)).or_default().insert(v);
        }
        let mut expected: Vec<Vec<String>> = components
            .into_values()
            .map(|c| c.into_iter().map(|v| graph.nodes[v].clone()).collect())
            .collect();
        expected.sort();
        let mut got: Vec<Vec<String>> =
            communities.iter().map(|c| c.members.clone()).collect();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn uniform_cliques_persist_to_the_top_of_the_ladder() {
        let nodes: Vec<String> = (0..5).map(|i| format!("n{i}")).collect();
        let mut edges = BTreeMap::new();
        for i in 0..5 {
            for j in i + 1..5 {
                edges.insert((i, j), 3.0);
            }
        }
        let graph = SimilarityGraph { nodes, edges };
        let communities =
            detect_communities(&graph, &[0.0, 25.0, 50.0, 75.0, 100.0], 0.9, 3).unwrap();
        assert_eq!(communities.len(), 1);
        assert_eq!(communities[0].members.len(), 5);
        assert_eq!(communities[0].extent, 1.0);
    }

    #[test]
    fn edgeless_graphs_report_nothing() {
        let graph = SimilarityGraph {
            nodes: vec!["a".to_string(), "b".to_string()],
            edges: BTreeMap::new(),
        };
        assert!(detect_communities(&graph, &[0.0, 50.0], 0.9, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ladder_misuse_is_rejected() {
        let graph = clique_graph();
        assert!(detect_communities(&graph, &[], 0.9, 1).is_err());
        assert!(detect_communities(&graph, &[50.0, 25.0], 0.9, 1).is_err());
        assert!(detect_communities(&graph, &[0.0, 120.0], 0.9, 1).is_err());
        assert!(detect_communities(&graph, &[0.0, 50.0], 1.5, 1).is_err());
        assert!(build_similarity_graph(&ten_traces(), 0).is_err());
    }

    #[test]
    fn tighter_persistence_never_raises_extent() {
        let graph = clique_graph();
        let loose = detect_communities(&graph, &[0.0, 50.0, 90.0], 0.6, 7).unwrap();
        let tight = detect_communities(&graph, &[0.0, 50.0, 90.0], 0.95, 7).unwrap();
        for (l, t) in loose.iter().zip(&tight) {
            assert_eq!(l.members, t.members);
            assert!(t.extent <= l.extent + 1e-12);
        }
    }

    #[test]
    fn same_seed_reproduces_the_same_report() {
        let cfg = SynthConfig {
            n_docs: 30,
            n_publishers: 4,
            n_background_actors: 30,
            engagement_range: (3, 10),
            clusters: vec![ClusterSpec::malicious(8)],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        let (corpus, _) = generate(&cfg, 61).unwrap();
        let traces = extract_traces(&corpus);
        let graph = build_similarity_graph(&traces, 3600).unwrap();
        let a = detect_communities(&graph, &[50.0, 75.0, 90.0], 0.9, 13).unwrap();
        let b = detect_communities(&graph, &[50.0, 75.0, 90.0], 0.9, 13).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }
}
