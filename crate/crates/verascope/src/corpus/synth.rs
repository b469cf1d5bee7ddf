//! Seeded synthetic corpus generator.
//!
//! Plants the structure the rest of the system is built to find: publishers
//! with stable falsehood propensities, document text whose negative-affect
//! density escalates in false stories, engagement waves from coordinated
//! actor groups, and cross-platform alias pairs. Everything planted is
//! recorded in a [`GroundTruth`] sidecar so experiments can score against it.
//!
//! Observed document labels are the clean labels with noise applied: short
//! documents are flipped with probability up to `label_noise_max`, long ones
//! not at all. Prediction quality therefore genuinely varies with word
//! count, which is what reliability calibration measures downstream.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Actor, ActorRef, Corpus, DocumentRecord, EngagementItem, EngagementKind, HistoryEntry, Label,
    Publisher, Record,
};
use crate::error::{Error, Result};
use crate::features::AffectLexicon;

/// Intent tag for planted clusters pushing an agenda.
pub const INTENT_MALICIOUS: &str = "malicious";
/// Intent tag for planted clusters with organic shared enthusiasm.
pub const INTENT_BENIGN: &str = "benign";

/// Publish time of the first synthetic document, in unix seconds. Actor
/// accounts are created before this instant.
pub const BASE_TIME: i64 = 10_000_000;

/// Documents are generated in this many escalation stages.
const GEN_SEGMENTS: usize = 4;

const FILLER_WORDS: &[&str] = &[
    "the", "a", "an", "of", "and", "or", "to", "in", "on", "at", "for", "with", "from", "by",
    "about", "into", "after", "before", "during", "between", "under", "over", "again", "further",
    "then", "once", "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
    "few", "more", "most", "other", "some", "such",
];

const CONTENT_WORDS: &[&str] = &[
    "market", "council", "report", "update", "budget", "region", "project", "meeting", "review",
    "system", "travel", "garden", "recipe", "study", "launch", "season", "weather", "traffic",
    "museum", "library", "concert", "economy", "election", "science", "health", "sports",
    "cinema", "gadget", "startup", "village", "harbor", "bridge", "railway", "airport", "bakery",
    "gallery", "podcast", "tutorial", "webinar", "roadmap", "survey", "census", "archive",
    "bulletin",
];

const FIRST_NAMES: &[&str] = &[
    "alex", "sam", "jordan", "casey", "riley", "morgan", "avery", "quinn", "rowan", "skyler",
    "devon", "reese", "parker", "hayden", "emerson", "finley", "dana", "jules", "kai", "noor",
    "tariq", "mina", "lena", "omar",
];

const LAST_NAMES: &[&str] = &[
    "mercer", "holt", "vance", "rios", "calder", "ostrow", "finch", "marlow", "draper", "keane",
    "sutter", "bellamy", "hargrove", "linden", "pryor", "whitaker", "monroe", "tilden", "acosta",
    "brennan", "colvin", "duarte", "eastman", "farrow",
];

const NEGATIVE_CATEGORIES: &[&str] = &["anger", "disgust", "fear"];
const CALM_CATEGORIES: &[&str] = &["anticipation", "joy", "trust"];

/// One planted coordination cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub size: usize,
    pub intent: String,
    pub n_waves: usize,
    /// Width of each wave: member posts land within this many seconds of
    /// the wave start.
    pub wave_spread_secs: i64,
}

impl ClusterSpec {
    pub fn malicious(size: usize) -> ClusterSpec {
        ClusterSpec {
            size,
            intent: INTENT_MALICIOUS.to_string(),
            n_waves: 6,
            wave_spread_secs: 300,
        }
    }

    pub fn benign(size: usize) -> ClusterSpec {
        ClusterSpec {
            size,
            intent: INTENT_BENIGN.to_string(),
            n_waves: 8,
            wave_spread_secs: 5400,
        }
    }
}

/// Knobs for the generator. All probabilities are in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub n_publishers: usize,
    pub n_background_actors: usize,
    pub platforms: Vec<String>,
    /// Gap between consecutive document publish times.
    pub doc_spacing_secs: i64,
    /// Engagements with a document land within this window after publish.
    pub engagement_window_secs: i64,
    /// Inclusive bounds on total tokens per document (title plus body),
    /// sampled log-uniformly.
    pub token_count_range: (usize, usize),
    /// Inclusive bounds on background engagements per document, sampled
    /// log-uniformly. `(0, 0)` disables background engagement.
    pub engagement_range: (usize, usize),
    /// Flip probability for the shortest documents.
    pub label_noise_max: f64,
    /// Documents at or below this many tokens get the full flip rate.
    pub full_noise_below: usize,
    /// Documents at or above this many tokens are never flipped.
    pub zero_noise_above: usize,
    /// Fraction of documents whose observed label is withheld.
    pub unlabeled_frac: f64,
    pub disreputable_frac: f64,
    /// P(false story) for disreputable and reputable publishers.
    pub disreputable_propensity: f64,
    pub reputable_propensity: f64,
    /// Fraction of background actors drawn to false stories.
    pub gullible_frac: f64,
    /// P(an engagement or history entry matches the actor's leaning).
    pub alignment: f64,
    pub shallow_history_frac: f64,
    pub history_len_range: (usize, usize),
    /// Negative-affect token probability in a false story's first stage.
    pub affect_base: f64,
    /// Added to `affect_base` by the final stage.
    pub affect_ramp: f64,
    /// Calm token probability throughout a true story.
    pub calm_level: f64,
    /// Off-leaning affect token probability.
    pub contamination: f64,
    pub clusters: Vec<ClusterSpec>,
    pub n_alias_pairs: usize,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            // A 10% validation slice of 600 docs, observed at a handful
            // of snapshot times, is just enough to populate 10
            // calibration bins at min_support 20.
            n_docs: 600,
            n_publishers: 16,
            n_background_actors: 120,
            platforms: vec!["alpha".to_string(), "beta".to_string()],
            doc_spacing_secs: 3_600,
            engagement_window_secs: 604_800,
            token_count_range: (20, 360),
            engagement_range: (5, 60),
            label_noise_max: 0.35,
            full_noise_below: 30,
            zero_noise_above: 150,
            unlabeled_frac: 0.0,
            // Half the outlets lean false so observed labels stay near
            // balance and a 0.5 decision threshold is meaningful.
            disreputable_frac: 0.5,
            disreputable_propensity: 0.85,
            reputable_propensity: 0.10,
            gullible_frac: 0.4,
            alignment: 0.8,
            shallow_history_frac: 0.3,
            history_len_range: (5, 40),
            affect_base: 0.10,
            affect_ramp: 0.30,
            calm_level: 0.18,
            contamination: 0.02,
            clusters: vec![ClusterSpec::malicious(10), ClusterSpec::benign(10)],
            n_alias_pairs: 8,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSynthConfig(msg));
        let prob_ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if self.n_docs == 0 || self.n_publishers == 0 {
            return bad("need at least one document and one publisher".into());
        }
        if self.platforms.is_empty() {
            return bad("need at least one platform".into());
        }
        if self.n_alias_pairs > 0 && self.platforms.len() < 2 {
            return bad("alias pairs require at least two platforms".into());
        }
        if self.doc_spacing_secs < 0 || self.engagement_window_secs < 1 {
            return bad("document spacing must be >= 0 and the window >= 1".into());
        }
        let (tok_lo, tok_hi) = self.token_count_range;
        if tok_lo < 8 || tok_hi < tok_lo {
            return bad(format!("bad token range ({tok_lo}, {tok_hi}); need 8 <= lo <= hi"));
        }
        let (eng_lo, eng_hi) = self.engagement_range;
        if eng_hi < eng_lo {
            return bad(format!("bad engagement range ({eng_lo}, {eng_hi})"));
        }
        let (h_lo, h_hi) = self.history_len_range;
        if h_hi < h_lo {
            return bad(format!("bad history length range ({h_lo}, {h_hi})"));
        }
        if self.full_noise_below >= self.zero_noise_above {
            return bad("full_noise_below must be < zero_noise_above".into());
        }
        for (name, p) in [
            ("label_noise_max", self.label_noise_max),
            ("unlabeled_frac", self.unlabeled_frac),
            ("disreputable_frac", self.disreputable_frac),
            ("disreputable_propensity", self.disreputable_propensity),
            ("reputable_propensity", self.reputable_propensity),
            ("gullible_frac", self.gullible_frac),
            ("alignment", self.alignment),
            ("shallow_history_frac", self.shallow_history_frac),
            ("affect_base", self.affect_base),
            ("calm_level", self.calm_level),
            ("contamination", self.contamination),
        ] {
            if !prob_ok(p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if !self.affect_ramp.is_finite()
            || self.affect_ramp < 0.0
            || self.affect_base + self.affect_ramp > 1.0
        {
            return bad("affect_base + affect_ramp must stay within [0, 1]".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.size < 2 || c.n_waves == 0 || c.wave_spread_secs < 1 || c.intent.is_empty() {
                return bad(format!("cluster {i} needs size >= 2, waves >= 1, spread >= 1"));
            }
        }
        let n_actors = self.n_background_actors
            + self.clusters.iter().map(|c| c.size).sum::<usize>()
            + 2 * self.n_alias_pairs;
        let pool = FIRST_NAMES.len() * LAST_NAMES.len();
        if n_actors + self.n_alias_pairs > pool {
            return bad(format!("{n_actors} actors exceed the {pool}-name pool"));
        }
        Ok(())
    }

    /// Flip probability applied to a document's observed label: the full
    /// rate at or below `full_noise_below` tokens, zero at or above
    /// `zero_noise_above`, linear in between.
    pub fn label_noise_at(&self, token_count: usize) -> f64 {
        let hi = self.zero_noise_above as f64;
        let lo = self.full_noise_below as f64;
        let frac = ((hi - token_count as f64) / (hi - lo)).clamp(0.0, 1.0);
        self.label_noise_max * frac
    }
}

/// Per-document provenance: the label before noise and what was emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTruth {
    pub doc_id: String,
    pub clean_label: Label,
    pub label: Label,
    pub flipped: bool,
    pub token_count: usize,
}

/// Membership roster of one planted cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTruth {
    pub cluster_id: String,
    pub intent: String,
    pub actor_ids: Vec<String>,
}

/// Two platform accounts operated by the same person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasTruth {
    pub a: ActorRef,
    pub b: ActorRef,
}

/// One line of the ground-truth sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum TruthRecord {
    Doc(DocTruth),
    Cluster(ClusterTruth),
    Alias(AliasTruth),
}

/// Everything the generator planted, keyed for lookup during scoring.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub docs: BTreeMap<String, DocTruth>,
    pub clusters: Vec<ClusterTruth>,
    pub aliases: Vec<AliasTruth>,
}

impl GroundTruth {
    pub fn from_records(records: Vec<TruthRecord>) -> GroundTruth {
        let mut truth = GroundTruth::default();
        for record in records {
            match record {
                TruthRecord::Doc(d) => {
                    truth.docs.insert(d.doc_id.clone(), d);
                }
                TruthRecord::Cluster(c) => truth.clusters.push(c),
                TruthRecord::Alias(a) => truth.aliases.push(a),
            }
        }
        truth.clusters.sort_by(|x, y| x.cluster_id.cmp(&y.cluster_id));
        truth.aliases.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        truth
    }

    /// Canonical record order, so equal truths serialize identically.
    pub fn to_records(&self) -> Vec<TruthRecord> {
        let mut out: Vec<TruthRecord> =
            self.docs.values().cloned().map(TruthRecord::Doc).collect();
        let mut clusters = self.clusters.clone();
        clusters.sort_by(|x, y| x.cluster_id.cmp(&y.cluster_id));
        out.extend(clusters.into_iter().map(TruthRecord::Cluster));
        let mut aliases = self.aliases.clone();
        aliases.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        out.extend(aliases.into_iter().map(TruthRecord::Alias));
        out
    }

    /// Cluster membership as `actor_id -> cluster_id`.
    pub fn cluster_assignments(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for cluster in &self.clusters {
            for actor in &cluster.actor_ids {
                out.insert(actor.clone(), cluster.cluster_id.clone());
            }
        }
        out
    }

    pub fn intent_of(&self, actor_id: &str) -> Option<&str> {
        self.clusters
            .iter()
            .find(|c| c.actor_ids.iter().any(|a| a == actor_id))
            .map(|c| c.intent.as_str())
    }
}

/// Builds a corpus and its ground truth. The same `(config, seed)` pair
/// always yields byte-identical serialized output.
pub fn generate(cfg: &SynthConfig, seed: u64) -> Result<(Corpus, GroundTruth)> {
    cfg.validate()?;
    let mut g = Generator::new(cfg, seed);
    g.build_publishers();
    g.build_documents();
    g.build_actors();
    g.build_histories();
    g.build_engagements();
    g.build_cluster_waves();
    g.build_alias_activity();
    g.finish()
}

struct ActorMeta {
    gullible: bool,
    /// Index into `SynthConfig::clusters`, for planted members.
    cluster: Option<usize>,
    alias_pair: Option<usize>,
}

struct Generator<'c> {
    cfg: &'c SynthConfig,
    rng: ChaCha8Rng,
    negative_words: Vec<String>,
    calm_words: Vec<String>,
    publishers: Vec<Publisher>,
    publisher_propensity: Vec<f64>,
    docs: Vec<DocumentRecord>,
    doc_truth: Vec<DocTruth>,
    false_docs: Vec<usize>,
    true_docs: Vec<usize>,
    actors: Vec<Actor>,
    meta: Vec<ActorMeta>,
    background: Vec<usize>,
    gullible: Vec<usize>,
    skeptic: Vec<usize>,
    name_pool: Vec<(&'static str, &'static str)>,
    items: Vec<EngagementItem>,
    item_ids: std::collections::BTreeSet<String>,
    url_seq: usize,
    truth_clusters: Vec<ClusterTruth>,
    truth_aliases: Vec<AliasTruth>,
}

impl<'c> Generator<'c> {
    fn new(cfg: &'c SynthConfig, seed: u64) -> Generator<'c> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = AffectLexicon::bundled();
        let words_of = |names: &[&str]| -> Vec<String> {
            let mut out = Vec::new();
            for name in names {
                let idx = lex
                    .categories()
                    .iter()
                    .position(|c| c == name)
                    .expect("bundled lexicon category");
                out.extend(lex.words_in(idx).into_iter().map(str::to_string));
            }
            out
        };
        let negative_words = words_of(NEGATIVE_CATEGORIES);
        let calm_words = words_of(CALM_CATEGORIES);
        let mut name_pool: Vec<(&'static str, &'static str)> = FIRST_NAMES
            .iter()
            .flat_map(|f| LAST_NAMES.iter().map(move |l| (*f, *l)))
            .collect();
        name_pool.shuffle(&mut rng);
        Generator {
            cfg,
            rng,
            negative_words,
            calm_words,
            publishers: Vec::new(),
            publisher_propensity: Vec::new(),
            docs: Vec::new(),
            doc_truth: Vec::new(),
            false_docs: Vec::new(),
            true_docs: Vec::new(),
            actors: Vec::new(),
            meta: Vec::new(),
            background: Vec::new(),
            gullible: Vec::new(),
            skeptic: Vec::new(),
            name_pool,
            items: Vec::new(),
            item_ids: std::collections::BTreeSet::new(),
            url_seq: 0,
            truth_clusters: Vec::new(),
            truth_aliases: Vec::new(),
        }
    }

    fn log_uniform(&mut self, lo: usize, hi: usize) -> usize {
        if hi <= lo {
            return lo;
        }
        let (a, b) = ((lo as f64).ln(), ((hi + 1) as f64).ln());
        let x = (a + self.rng.gen::<f64>() * (b - a)).exp().floor() as usize;
        x.clamp(lo, hi)
    }

    fn fresh_item_id(&mut self) -> String {
        loop {
            let id = format!("i{:016x}", self.rng.gen::<u64>());
            if self.item_ids.insert(id.clone()) {
                return id;
            }
        }
    }

    fn fresh_url(&mut self, owner: usize) -> String {
        self.url_seq += 1;
        format!("https://feed-{owner}.example/p{}", self.url_seq)
    }

    fn neutral_word(&mut self) -> &'static str {
        if self.rng.gen_bool(0.5) {
            CONTENT_WORDS[self.rng.gen_range(0..CONTENT_WORDS.len())]
        } else {
            FILLER_WORDS[self.rng.gen_range(0..FILLER_WORDS.len())]
        }
    }

    /// Short varied engagement text; distinct calls essentially never
    /// collide into one near-duplicate class.
    fn chatter(&mut self) -> String {
        let n = self.rng.gen_range(10..=18);
        (0..n).map(|_| self.neutral_word()).collect::<Vec<_>>().join(" ")
    }

    fn build_publishers(&mut self) {
        for i in 0..self.cfg.n_publishers {
            let disreputable = self.rng.gen_bool(self.cfg.disreputable_frac);
            self.publisher_propensity.push(if disreputable {
                self.cfg.disreputable_propensity
            } else {
                self.cfg.reputable_propensity
            });
            self.publishers.push(Publisher {
                publisher_id: format!("p{i:03}"),
                history: Vec::new(),
            });
        }
    }

    fn negative_word(&mut self) -> String {
        self.negative_words[self.rng.gen_range(0..self.negative_words.len())].clone()
    }

    fn calm_word(&mut self) -> String {
        self.calm_words[self.rng.gen_range(0..self.calm_words.len())].clone()
    }

    fn body_text(&mut self, clean: Label, body_len: usize) -> String {
        let mut tokens = Vec::with_capacity(body_len);
        for i in 0..body_len {
            let stage = i * GEN_SEGMENTS / body_len;
            let token: String = match clean {
                Label::False => {
                    let p = self.cfg.affect_base
                        + self.cfg.affect_ramp * stage as f64 / (GEN_SEGMENTS - 1) as f64;
                    if self.rng.gen_bool(p) {
                        self.negative_word()
                    } else if self.rng.gen_bool(self.cfg.contamination) {
                        self.calm_word()
                    } else {
                        self.neutral_word().to_string()
                    }
                }
                _ => {
                    if self.rng.gen_bool(self.cfg.calm_level) {
                        self.calm_word()
                    } else if self.rng.gen_bool(self.cfg.contamination) {
                        self.negative_word()
                    } else {
                        self.neutral_word().to_string()
                    }
                }
            };
            tokens.push(token);
        }
        tokens.join(" ")
    }

    fn build_documents(&mut self) {
        let (tok_lo, tok_hi) = self.cfg.token_count_range;
        for i in 0..self.cfg.n_docs {
            let publisher_idx = self.rng.gen_range(0..self.cfg.n_publishers);
            let clean = if self.rng.gen_bool(self.publisher_propensity[publisher_idx]) {
                Label::False
            } else {
                Label::True
            };
            let total = self.log_uniform(tok_lo, tok_hi);
            let title_len = self.rng.gen_range(3..=6).min(total - 1);
            let body_len = total - title_len;
            let title = (0..title_len)
                .map(|_| self.neutral_word())
                .collect::<Vec<_>>()
                .join(" ");
            let body = self.body_text(clean, body_len);
            let flipped = self.rng.gen_bool(self.cfg.label_noise_at(total));
            let noisy = if flipped { clean.flipped() } else { clean };
            let label = if self.cfg.unlabeled_frac > 0.0 && self.rng.gen_bool(self.cfg.unlabeled_frac)
            {
                Label::Unknown
            } else {
                noisy
            };
            let doc_id = format!("d{i:04}");
            let idx = self.docs.len();
            match label {
                Label::False => self.false_docs.push(idx),
                Label::True => self.true_docs.push(idx),
                Label::Unknown => {}
            }
            self.doc_truth.push(DocTruth {
                doc_id: doc_id.clone(),
                clean_label: clean,
                label,
                flipped,
                token_count: total,
            });
            self.docs.push(DocumentRecord {
                doc_id,
                platform_of_origin: self.cfg.platforms
                    [self.rng.gen_range(0..self.cfg.platforms.len())]
                .clone(),
                publisher_id: self.publishers[publisher_idx].publisher_id.clone(),
                title,
                body,
                publish_time: BASE_TIME + i as i64 * self.cfg.doc_spacing_secs,
                label,
            });
        }
    }

    fn next_name(&mut self) -> (&'static str, &'static str) {
        self.name_pool.pop().expect("name pool sized by validate()")
    }

    fn push_actor(
        &mut self,
        platform: String,
        handle: String,
        display_name: String,
        created_at: i64,
        meta: ActorMeta,
    ) -> usize {
        let idx = self.actors.len();
        self.actors.push(Actor {
            actor_id: format!("a{idx:04}"),
            platform,
            handle,
            display_name,
            created_at,
            engagement_history: Vec::new(),
        });
        self.meta.push(meta);
        idx
    }

    fn old_account_time(&mut self) -> i64 {
        self.rng.gen_range(0..BASE_TIME - 1_000_000)
    }

    fn build_actors(&mut self) {
        for _ in 0..self.cfg.n_background_actors {
            let platform =
                self.cfg.platforms[self.rng.gen_range(0..self.cfg.platforms.len())].clone();
            let (first, last) = self.next_name();
            let gullible = self.rng.gen_bool(self.cfg.gullible_frac);
            let created_at = self.old_account_time();
            let idx = self.push_actor(
                platform,
                format!("{first}.{last}_{}", self.actors.len()),
                format!("{first} {last}"),
                created_at,
                ActorMeta { gullible, cluster: None, alias_pair: None },
            );
            self.background.push(idx);
            if gullible {
                self.gullible.push(idx);
            } else {
                self.skeptic.push(idx);
            }
        }
        let clusters = self.cfg.clusters.clone();
        for (c_idx, spec) in clusters.iter().enumerate() {
            let platform = self.cfg.platforms[c_idx % self.cfg.platforms.len()].clone();
            let mut member_ids = Vec::with_capacity(spec.size);
            for _ in 0..spec.size {
                let (first, last) = self.next_name();
                let gullible = self.rng.gen_bool(self.cfg.gullible_frac);
                let created_at = if spec.intent == INTENT_MALICIOUS {
                    BASE_TIME - self.rng.gen_range(10_000..400_000)
                } else {
                    self.old_account_time()
                };
                let idx = self.push_actor(
                    platform.clone(),
                    format!("{first}.{last}_{}", self.actors.len()),
                    format!("{first} {last}"),
                    created_at,
                    ActorMeta { gullible, cluster: Some(c_idx), alias_pair: None },
                );
                member_ids.push(self.actors[idx].actor_id.clone());
            }
            self.truth_clusters.push(ClusterTruth {
                cluster_id: format!("c{c_idx}"),
                intent: spec.intent.clone(),
                actor_ids: member_ids,
            });
        }
        for pair in 0..self.cfg.n_alias_pairs {
            let platform_a = self.cfg.platforms[0].clone();
            let platform_b = self.cfg.platforms[1].clone();
            let created = self.old_account_time();
            let jitter = self.rng.gen_range(0..200_000);
            let (idx_a, idx_b) = if pair % 2 == 0 {
                // Same person recognizable by handle alone.
                let (fa, la) = self.next_name();
                let (fb, lb) = self.next_name();
                let a = self.push_actor(
                    platform_a,
                    format!("{fa}_{la}.{pair}"),
                    format!("{fa} {la}"),
                    created,
                    ActorMeta { gullible: false, cluster: None, alias_pair: Some(pair) },
                );
                let b = self.push_actor(
                    platform_b,
                    format!("{fa}.{la}_{pair}"),
                    format!("{fb} {lb}"),
                    created + jitter,
                    ActorMeta { gullible: false, cluster: None, alias_pair: Some(pair) },
                );
                (a, b)
            } else {
                // Same person recognizable by near-identical display name
                // plus shared rare links; handles do not match.
                let (first, last) = self.next_name();
                let a = self.push_actor(
                    platform_a,
                    format!("{first}.{last}_{}", self.actors.len()),
                    format!("{first} {last}"),
                    created,
                    ActorMeta { gullible: false, cluster: None, alias_pair: Some(pair) },
                );
                let b = self.push_actor(
                    platform_b,
                    format!("{last}.{first}_{}", self.actors.len()),
                    format!("{first} {last}s"),
                    created + jitter,
                    ActorMeta { gullible: false, cluster: None, alias_pair: Some(pair) },
                );
                (a, b)
            };
            self.truth_aliases.push(AliasTruth {
                a: self.actors[idx_a].actor_ref(),
                b: self.actors[idx_b].actor_ref(),
            });
        }
    }

    fn sample_history(&mut self, len: usize, p_false: f64) -> Vec<HistoryEntry> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let want_false = self.rng.gen_bool(p_false);
            let pool = match (want_false, self.false_docs.is_empty(), self.true_docs.is_empty()) {
                (true, false, _) | (false, false, true) => &self.false_docs,
                (false, _, false) | (true, true, false) => &self.true_docs,
                _ => return out,
            };
            let doc_idx = pool[self.rng.gen_range(0..pool.len())];
            out.push(HistoryEntry {
                doc_id: self.docs[doc_idx].doc_id.clone(),
                label: self.docs[doc_idx].label,
            });
        }
        out
    }

    fn build_histories(&mut self) {
        let (h_lo, h_hi) = self.cfg.history_len_range;
        for idx in 0..self.actors.len() {
            let meta_cluster = self.meta[idx].cluster;
            let malicious = meta_cluster
                .map(|c| self.cfg.clusters[c].intent == INTENT_MALICIOUS)
                .unwrap_or(false);
            let len = if malicious || self.rng.gen_bool(self.cfg.shallow_history_frac) {
                self.rng.gen_range(0..=2)
            } else {
                self.log_uniform(h_lo.max(1), h_hi.max(1))
            };
            let p_false = if self.meta[idx].gullible {
                self.cfg.alignment
            } else {
                1.0 - self.cfg.alignment
            };
            let history = self.sample_history(len, p_false);
            self.actors[idx].engagement_history = history;
        }
    }

    fn push_item(
        &mut self,
        doc_idx: usize,
        actor_idx: usize,
        timestamp: i64,
        kind: EngagementKind,
        text: Option<String>,
        urls: Vec<String>,
        hashtags: Vec<String>,
        mentions: Vec<String>,
    ) {
        let item_id = self.fresh_item_id();
        self.items.push(EngagementItem {
            item_id,
            doc_id: self.docs[doc_idx].doc_id.clone(),
            actor_id: self.actors[actor_idx].actor_id.clone(),
            platform: self.actors[actor_idx].platform.clone(),
            timestamp,
            kind,
            text,
            urls,
            hashtags,
            mentions,
        });
    }

    fn pick_engager(&mut self, clean: Label) -> usize {
        let aligned = self.rng.gen_bool(self.cfg.alignment);
        let pool = match (clean, aligned) {
            (Label::False, true) | (Label::True, false) => &self.gullible,
            (Label::True, true) | (Label::False, false) => &self.skeptic,
            (Label::Unknown, _) => &self.background,
        };
        let pool = if pool.is_empty() { &self.background } else { pool };
        pool[self.rng.gen_range(0..pool.len())]
    }

    fn engagement_kind(&mut self) -> EngagementKind {
        match self.rng.gen_range(0..100) {
            0..=39 => EngagementKind::Share,
            40..=64 => EngagementKind::Reply,
            65..=89 => EngagementKind::Like,
            _ => EngagementKind::Post,
        }
    }

    /// One organic engagement: aligned actor, uniform time in the window,
    /// occasional personal link, ambient hashtag, or mention.
    fn background_item(&mut self, doc_idx: usize, actor_idx: usize) {
        let timestamp = self.docs[doc_idx].publish_time
            + self.rng.gen_range(0..self.cfg.engagement_window_secs);
        let kind = self.engagement_kind();
        let text = if kind != EngagementKind::Like && self.rng.gen_bool(0.6) {
            Some(self.chatter())
        } else {
            None
        };
        let urls = if self.rng.gen_bool(0.12) {
            vec![self.fresh_url(actor_idx)]
        } else {
            vec![]
        };
        let hashtags = if self.rng.gen_bool(0.10) {
            vec![format!("topic{}", self.rng.gen_range(0..30))]
        } else {
            vec![]
        };
        let mentions = if self.rng.gen_bool(0.08) {
            let other = self.rng.gen_range(0..self.actors.len());
            vec![self.actors[other].handle.clone()]
        } else {
            vec![]
        };
        self.push_item(doc_idx, actor_idx, timestamp, kind, text, urls, hashtags, mentions);
    }

    fn build_engagements(&mut self) {
        if self.background.is_empty() || self.cfg.engagement_range.1 == 0 {
            return;
        }
        let (lo, hi) = self.cfg.engagement_range;
        for doc_idx in 0..self.docs.len() {
            let count = self.log_uniform(lo.max(1), hi);
            let clean = self.doc_truth[doc_idx].clean_label;
            for _ in 0..count {
                let actor_idx = self.pick_engager(clean);
                self.background_item(doc_idx, actor_idx);
            }
        }
    }

    /// Latest instant any engagement can land.
    fn activity_end(&self) -> i64 {
        BASE_TIME
            + (self.cfg.n_docs - 1) as i64 * self.cfg.doc_spacing_secs
            + self.cfg.engagement_window_secs
    }

    /// A document already published at `t`, chosen uniformly.
    fn doc_published_by(&mut self, t: i64) -> usize {
        let max_idx = if self.cfg.doc_spacing_secs == 0 {
            self.docs.len() - 1
        } else {
            (((t - BASE_TIME) / self.cfg.doc_spacing_secs).max(0) as usize)
                .min(self.docs.len() - 1)
        };
        self.rng.gen_range(0..=max_idx)
    }

    fn build_cluster_waves(&mut self) {
        let span = (self.activity_end() - BASE_TIME) as f64;
        let clusters = self.cfg.clusters.clone();
        for (c_idx, spec) in clusters.iter().enumerate() {
            let members: Vec<usize> = (0..self.actors.len())
                .filter(|&i| self.meta[i].cluster == Some(c_idx))
                .collect();
            let malicious = spec.intent == INTENT_MALICIOUS;
            // One near-duplicate template per cluster; members vary only the
            // final token, which keeps every variant in one duplicate class.
            let template: Vec<String> =
                (0..20).map(|_| self.neutral_word().to_string()).collect();
            let slot = 0.9 * span / spec.n_waves as f64;
            for wave in 0..spec.n_waves {
                let wave_start = BASE_TIME + (0.05 * span + wave as f64 * slot) as i64;
                let url = format!("https://wave-{c_idx}-{wave}.example/s");
                let tag = format!("drive{c_idx}w{wave}");
                for &member in &members {
                    let posts = if malicious { self.rng.gen_range(2..=4) } else { 1 };
                    for _ in 0..posts {
                        let ts = wave_start + self.rng.gen_range(0..=spec.wave_spread_secs);
                        let doc_idx = self.doc_published_by(ts);
                        let text = if malicious {
                            let mut words = template.clone();
                            *words.last_mut().expect("template is non-empty") =
                                format!("v{member}");
                            Some(words.join(" "))
                        } else {
                            Some(self.chatter())
                        };
                        self.push_item(
                            doc_idx,
                            member,
                            ts,
                            EngagementKind::Post,
                            text,
                            vec![url.clone()],
                            vec![tag.clone()],
                            vec![],
                        );
                    }
                }
                if !malicious {
                    // Organic groups also chat off-wave, which spreads their
                    // timing and varies their text.
                    for &member in &members {
                        if self.rng.gen_bool(0.4) {
                            let doc_idx = self.rng.gen_range(0..self.docs.len());
                            self.background_item(doc_idx, member);
                        }
                    }
                }
            }
        }
    }

    fn build_alias_activity(&mut self) {
        for pair in 0..self.cfg.n_alias_pairs {
            let members: Vec<usize> = (0..self.actors.len())
                .filter(|&i| self.meta[i].alias_pair == Some(pair))
                .collect();
            for &actor_idx in &members {
                let posts = self.rng.gen_range(3..=6);
                for _ in 0..posts {
                    let doc_idx = self.rng.gen_range(0..self.docs.len());
                    self.background_item(doc_idx, actor_idx);
                }
            }
            if pair % 2 == 1 {
                // Shared rare links carry the evidence for this pair.
                for link in 0..2 {
                    let url = format!("https://pair-{pair}.example/r{link}");
                    for &actor_idx in &members {
                        let doc_idx = self.rng.gen_range(0..self.docs.len());
                        let ts = self.docs[doc_idx].publish_time
                            + self.rng.gen_range(0..self.cfg.engagement_window_secs);
                        self.push_item(
                            doc_idx,
                            actor_idx,
                            ts,
                            EngagementKind::Share,
                            None,
                            vec![url.clone()],
                            vec![],
                            vec![],
                        );
                    }
                }
            }
        }
    }

    fn finish(mut self) -> Result<(Corpus, GroundTruth)> {
        for (doc_idx, doc) in self.docs.iter().enumerate() {
            let pub_idx = self
                .publishers
                .iter()
                .position(|p| p.publisher_id == doc.publisher_id)
                .expect("documents reference generated publishers");
            self.publishers[pub_idx].history.push(HistoryEntry {
                doc_id: self.docs[doc_idx].doc_id.clone(),
                label: doc.label,
            });
        }
        let mut records: Vec<Record> = Vec::new();
        records.extend(self.docs.into_iter().map(Record::Document));
        records.extend(self.items.into_iter().map(Record::Item));
        records.extend(self.actors.into_iter().map(Record::Actor));
        records.extend(self.publishers.into_iter().map(Record::Publisher));
        let corpus = Corpus::from_records(records)?;
        let truth = GroundTruth {
            docs: self
                .doc_truth
                .into_iter()
                .map(|d| (d.doc_id.clone(), d))
                .collect(),
            clusters: self.truth_clusters,
            aliases: self.truth_aliases,
        };
        Ok((corpus, truth))
    }
}
