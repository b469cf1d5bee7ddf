//! Generates a synthetic corpus and prints what was planted in it:
//! label balance, length-dependent noise, coordinated clusters, and
//! cross-platform alias pairs.
//!
//! ```text
//! cargo run --example generate_corpus
//! ```

use verascope::corpus::synth::{generate, SynthConfig};
use verascope::corpus::Label;

fn main() -> verascope::Result<()> {
    let config = SynthConfig::default();
    let (corpus, truth) = generate(&config, 42)?;

    let docs: Vec<_> = corpus.documents().collect();
    let false_docs = docs.iter().filter(|d| d.label == Label::False).count();
    println!(
        "{} documents from {} publishers, {} actors on {:?}",
        docs.len(),
        corpus.publishers().count(),
        corpus.n_actors(),
        config.platforms
    );
    println!(
        "observed labels: {} false / {} true",
        false_docs,
        docs.len() - false_docs
    );

    // Short documents carry flipped labels at a rate that decays to zero
    // past `zero_noise_above` tokens; the bands make the planted
    // difficulty gradient visible.
    println!("\nlabel noise by document length:");
    for (lo, hi) in [(20, 60), (60, 150), (150, 360)] {
        let in_band: Vec<_> = truth
            .docs
            .values()
            .filter(|d| d.token_count >= lo && d.token_count < hi)
            .collect();
        let flipped = in_band.iter().filter(|d| d.flipped).count();
        println!(
            "  {lo:>3}..{hi:<3} tokens: {:>3} docs, {:>2} flipped ({:.0}%)",
            in_band.len(),
            flipped,
            100.0 * flipped as f64 / in_band.len().max(1) as f64
        );
    }

    println!("\nplanted coordination:");
    for cluster in &truth.clusters {
        println!(
            "  {} ({}): {} actors",
            cluster.cluster_id,
            cluster.intent,
            cluster.actor_ids.len()
        );
    }

    println!("\nplanted cross-platform aliases:");
    for alias in truth.aliases.iter().take(3) {
        println!("  {} <-> {}", alias.a, alias.b);
    }
    println!("  ... {} pairs total", truth.aliases.len());

    let item_count = corpus.items().count();
    println!("\n{item_count} engagement items");
    Ok(())
}
