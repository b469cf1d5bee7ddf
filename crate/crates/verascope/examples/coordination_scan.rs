//! Scans a corpus for coordinated actor communities: similarity graph
//! over behavior traces, label-propagation communities with a
//! persistence-derived coordination extent, a synchronization z-score
//! against a shuffled-timestamp null, and intent labels from a
//! contrastive embedding trained on the planted clusters.
//!
//! ```text
//! cargo run --example coordination_scan
//! ```

use std::collections::BTreeMap;

use verascope::coordination::intent::{self, IntentHyper, IntentLabel, IntentModel};
use verascope::coordination::{
    build_similarity_graph, detect_communities, extract_traces, scan, ScanSettings,
};
use verascope::corpus::synth::{generate, ClusterSpec, SynthConfig, INTENT_MALICIOUS};
use verascope::corpus::Corpus;

fn main() -> verascope::Result<()> {
    let config = SynthConfig {
        n_docs: 120,
        n_background_actors: 120,
        clusters: vec![
            ClusterSpec::malicious(12),
            ClusterSpec::benign(14),
            ClusterSpec::malicious(9),
        ],
        n_alias_pairs: 0,
        ..SynthConfig::default()
    };
    let (corpus, truth) = generate(&config, 7)?;
    let settings = ScanSettings::default();

    // The pieces scan() composes, shown separately first.
    let traces = extract_traces(&corpus);
    let graph = build_similarity_graph(&traces, settings.dt)?;
    println!(
        "{} traces -> similarity graph with {} edges",
        traces.len(),
        graph.edges.len()
    );
    let communities = detect_communities(
        &graph,
        &settings.percentiles,
        settings.persistence,
        settings.seed,
    )?;
    println!("{} communities above the persistence bar\n", communities.len());

    let model = train_intent_model(&corpus, &truth, &settings)?;
    let report = scan(&corpus, Some(&model), &settings)?;

    println!("{:>8} {:>7} {:>9}  intent", "actors", "extent", "sync_z");
    for community in &report.communities {
        println!(
            "{:>8} {:>7.2} {:>9.1}  {}",
            community.actor_ids.len(),
            community.extent,
            community.sync_z,
            community.intent
        );
    }

    let planted: usize = truth.clusters.iter().map(|c| c.actor_ids.len()).sum();
    let flagged_malicious: usize = report
        .communities
        .iter()
        .filter(|c| c.intent == IntentLabel::Malicious)
        .map(|c| c.actor_ids.len())
        .sum();
    let planted_malicious: usize = truth
        .clusters
        .iter()
        .filter(|c| c.intent == INTENT_MALICIOUS)
        .map(|c| c.actor_ids.len())
        .sum();
    println!(
        "\nplanted {planted} coordinated actors ({planted_malicious} malicious); \
         flagged {flagged_malicious} as malicious"
    );
    Ok(())
}

/// Contrastive intent model from the ground-truth cluster roster.
fn train_intent_model(
    corpus: &Corpus,
    truth: &verascope::corpus::synth::GroundTruth,
    settings: &ScanSettings,
) -> verascope::Result<IntentModel> {
    let traces = extract_traces(corpus);
    let features = intent::actor_features(&traces, corpus, settings.dt);

    let mut refs_by_bare: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for actor in corpus.actors() {
        refs_by_bare
            .entry(actor.actor_id.as_str())
            .or_default()
            .push(actor.actor_ref().to_string());
    }
    let mut labels = BTreeMap::new();
    for cluster in &truth.clusters {
        let label = if cluster.intent == INTENT_MALICIOUS {
            IntentLabel::Malicious
        } else {
            IntentLabel::Benign
        };
        for bare in &cluster.actor_ids {
            for key in refs_by_bare.get(bare.as_str()).into_iter().flatten() {
                labels.insert(key.clone(), label);
            }
        }
    }
    let xs: BTreeMap<String, Vec<f64>> = labels
        .keys()
        .filter_map(|k| features.get(k).map(|v| (k.clone(), v.clone())))
        .collect();
    let (same, diff) = intent::pairs_from_labels(&labels);
    let mut model = IntentModel::new(IntentHyper::default());
    model.fit(&xs, &same, &diff)?;
    model.fit_centroids(&xs, &labels)?;
    Ok(model)
}
