//! Links actor identities across platforms: handle normalization catches
//! renamed accounts, and a display-name similarity plus shared rare URLs
//! catches the rest. Scores the result against the planted alias pairs.
//!
//! ```text
//! cargo run --example entity_linking
//! ```

use std::collections::BTreeSet;

use verascope::corpus::synth::{generate, SynthConfig};
use verascope::corpus::ActorRef;
use verascope::crossplatform::{link_entities, normalize_handle, LinkThresholds};

fn main() -> verascope::Result<()> {
    let config = SynthConfig {
        n_alias_pairs: 12,
        clusters: vec![],
        ..SynthConfig::default()
    };
    let (corpus, truth) = generate(&config, 3)?;

    println!("handle normalization examples:");
    for alias in truth.aliases.iter().take(2) {
        for r in [&alias.a, &alias.b] {
            let actor = corpus.actor(r).expect("alias actor exists");
            println!(
                "  {:>22} -> `{}`  (display `{}`)",
                format!("{}@{}", actor.handle, r.platform),
                normalize_handle(&actor.handle),
                actor.display_name
            );
        }
    }

    let clusters = link_entities(&corpus, &LinkThresholds::default());
    let merged: Vec<_> = clusters.iter().filter(|c| c.members.len() > 1).collect();
    println!(
        "\n{} identity clusters, {} with more than one account:",
        clusters.len(),
        merged.len()
    );
    for cluster in merged.iter().take(4) {
        let members: Vec<String> = cluster.members.iter().map(ToString::to_string).collect();
        println!("  {}: {}", cluster.cluster_id, members.join(" + "));
        for line in &cluster.evidence {
            println!("      {line}");
        }
    }

    // Pair-level precision and recall against the planted aliases.
    let planted: BTreeSet<(ActorRef, ActorRef)> = truth
        .aliases
        .iter()
        .map(|a| (a.a.clone(), a.b.clone()))
        .collect();
    let mut found = BTreeSet::new();
    for cluster in &merged {
        for (i, a) in cluster.members.iter().enumerate() {
            for b in &cluster.members[i + 1..] {
                let pair = if a <= b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                found.insert(pair);
            }
        }
    }
    let hits = found.intersection(&planted).count();
    println!(
        "\nprecision {:.3} ({hits}/{}), recall {:.3} ({hits}/{})",
        hits as f64 / found.len().max(1) as f64,
        found.len(),
        hits as f64 / planted.len().max(1) as f64,
        planted.len()
    );
    Ok(())
}
