//! Refines publisher, document, and actor credibility jointly over the
//! engagement graph. Labeled documents anchor the system; hinge
//! constraints propagate their truth values to everything connected, so
//! unlabeled documents inherit a score from the company they keep.
//!
//! ```text
//! cargo run --example credibility_refinement
//! ```

use std::collections::BTreeMap;

use verascope::base_models::soft_logic::{refine, SoftLogicGraph, SoftLogicHyper};
use verascope::corpus::synth::{generate, SynthConfig};
use verascope::corpus::Label;

fn main() -> verascope::Result<()> {
    // Sparse engagement keeps vertex degrees small, which both speeds
    // convergence (the safe step is inverse in the degree bound) and
    // keeps anchors from being outvoted by consensus springs.
    let config = SynthConfig {
        n_docs: 80,
        n_publishers: 8,
        n_background_actors: 60,
        engagement_range: (3, 10),
        clusters: vec![],
        n_alias_pairs: 0,
        ..SynthConfig::default()
    };
    let (corpus, _) = generate(&config, 19)?;

    // Anchor 60% of the documents with their observed labels and let the
    // graph argue about the rest. Truth value 1 means "true news".
    let doc_ids: Vec<String> = corpus.doc_ids().map(str::to_string).collect();
    let mut anchors = BTreeMap::new();
    for doc_id in doc_ids.iter().take(doc_ids.len() * 6 / 10) {
        let label = corpus.document(doc_id).expect("doc exists").label;
        let value = match label {
            Label::True => 1.0,
            Label::False => 0.0,
            Label::Unknown => continue,
        };
        anchors.insert(doc_id.clone(), value);
    }

    let graph = SoftLogicGraph::from_corpus(&corpus, &anchors)?;
    println!(
        "graph: {} publishers, {} docs ({} anchored), {} actors, {} edges",
        graph.publishers.len(),
        graph.docs.len(),
        graph.anchors.len(),
        graph.actors.len(),
        graph.publisher_doc_edges.len() + graph.actor_doc_edges.len()
    );

    let hyper = SoftLogicHyper {
        step: None,
        iters: 50_000,
    };
    let result = refine(&graph, &hyper)?;
    let trace = &result.objective_trace;
    println!(
        "objective {:.2} -> {:.6} over {} iterations (monotone: {})",
        trace[0],
        trace[trace.len() - 1],
        trace.len() - 1,
        trace.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    );

    println!("\npublisher credibility vs labeled record (worst first):");
    let mut rows: Vec<(String, f64, f64)> = result
        .publisher_credibility
        .iter()
        .map(|(publisher_id, &credibility)| {
            let publisher = corpus.publisher(publisher_id).expect("publisher exists");
            let false_share = publisher
                .history
                .iter()
                .filter(|e| e.label == Label::False)
                .count() as f64
                / publisher.history.len().max(1) as f64;
            (publisher_id.clone(), credibility, false_share)
        })
        .collect();
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    for (publisher_id, credibility, false_share) in &rows {
        println!(
            "  {publisher_id}: historical false share {false_share:.2} -> refined {credibility:.3}"
        );
    }

    // Held-out docs: does the propagated truth value track the label?
    let mut by_label: BTreeMap<Label, (f64, usize)> = BTreeMap::new();
    for doc_id in doc_ids.iter().skip(doc_ids.len() * 6 / 10) {
        let label = corpus.document(doc_id).expect("doc exists").label;
        let entry = by_label.entry(label).or_insert((0.0, 0));
        entry.0 += result.doc_truth[doc_id];
        entry.1 += 1;
    }
    println!("\nmean refined truth of unanchored docs:");
    for (label, (sum, n)) in &by_label {
        println!("  observed {label:?}: {:.3} over {n} docs", sum / *n as f64);
    }
    Ok(())
}
