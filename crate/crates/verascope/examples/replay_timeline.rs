//! Replays one document at a ladder of observation times. Early on, the
//! engagement-driven model has little to go on and its calibrated
//! reliability keeps its weight down; as engagements accumulate its
//! contribution grows and the verdict can flip.
//!
//! ```text
//! cargo run --example replay_timeline
//! ```

use verascope::corpus::synth::{generate, SynthConfig};
use verascope::harness::{split_folds, Pipeline, PipelineSettings};

fn main() -> verascope::Result<()> {
    let (corpus, _) = generate(&SynthConfig::default(), 42)?;
    let split = split_folds(&corpus, 1, 0)?.folds.remove(0);

    let mut pipeline = Pipeline::standard(0, PipelineSettings::default());
    pipeline.train(&corpus, &split.train)?;
    pipeline.calibrate(&corpus, &split.validation)?;

    let doc_id = split
        .test
        .iter()
        .max_by_key(|id| {
            let n = corpus.items().filter(|i| &i.doc_id == *id).count();
            (n, id.to_string())
        })
        .expect("test split is non-empty")
        .clone();
    let publish = corpus.document(&doc_id).expect("doc exists").publish_time;

    let offsets: [i64; 6] = [600, 3_600, 21_600, 86_400, 259_200, 604_800];
    let times: Vec<i64> = offsets.iter().map(|o| publish + o).collect();
    let points = pipeline.replay(&corpus, &doc_id, &times)?;

    println!("document `{doc_id}`, published at t={publish}");
    println!("{:>9}  {:>6}  {:>7}  {:>12}  contributions", "t-publish", "items", "prob", "verdict");
    for (offset, point) in offsets.iter().zip(&points) {
        let n_items = corpus
            .items()
            .filter(|i| i.doc_id == doc_id && i.timestamp <= publish + offset)
            .count();
        let shares: Vec<String> = point
            .verdict
            .contributions
            .iter()
            .map(|(m, c)| format!("{m}={c:.3}"))
            .collect();
        println!(
            "{:>8}s  {:>6}  {:>7.4}  {:>12}  {}",
            offset,
            n_items,
            point.verdict.prob,
            point.explanation.tier1.verdict.to_string(),
            shares.join(" ")
        );
    }
    Ok(())
}
