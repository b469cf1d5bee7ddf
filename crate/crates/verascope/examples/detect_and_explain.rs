//! Trains the standard ensemble, calibrates reliability curves, scores
//! one document, and renders the three-tier explanation.
//!
//! ```text
//! cargo run --example detect_and_explain
//! ```

use verascope::corpus::synth::{generate, SynthConfig};
use verascope::explainer::{render, RenderFormat};
use verascope::harness::{split_folds, Pipeline, PipelineSettings};

fn main() -> verascope::Result<()> {
    let (corpus, _) = generate(&SynthConfig::default(), 42)?;
    let split = split_folds(&corpus, 1, 0)?.folds.remove(0);

    let mut pipeline = Pipeline::standard(0, PipelineSettings::default());
    pipeline.train(&corpus, &split.train)?;
    pipeline.calibrate(&corpus, &split.validation)?;

    // The doc with the most engagement gives the credibility models the
    // most context to work with.
    let busiest = split
        .test
        .iter()
        .max_by_key(|id| {
            let n = corpus.items().filter(|i| &i.doc_id == *id).count();
            (n, id.to_string())
        })
        .expect("test split is non-empty")
        .clone();

    let (verdict, explanation) = pipeline.detect(&corpus, &busiest, corpus.end_time())?;
    let label = corpus.document(&busiest).expect("doc exists").label;

    println!("document `{busiest}` (observed label: {label:?})");
    println!(
        "prob {:.4} -> {}\n",
        verdict.prob,
        if verdict.prob >= pipeline.settings().tau {
            "false_news"
        } else {
            "true_news"
        }
    );
    println!("{}", render(&explanation, RenderFormat::Text)?);
    Ok(())
}
