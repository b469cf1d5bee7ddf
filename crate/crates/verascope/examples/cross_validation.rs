//! Runs the stratified 70/10/20 cross-validation protocol on the
//! standard ensemble and prints per-fold metrics, then pools per-fold
//! test samples into the word-count performance profile.
//!
//! ```text
//! cargo run --example cross_validation
//! ```

use verascope::aggregator::CalibrationSettings;
use verascope::base_models::{AffectFlow, AffectFlowHyper};
use verascope::corpus::synth::{generate, SynthConfig};
use verascope::features::FactorId;
use verascope::harness::{
    cross_validate, pooled_binned_f1, split_folds, PipelineSettings,
};

fn main() -> verascope::Result<()> {
    let (corpus, _) = generate(&SynthConfig::default(), 42)?;

    let k = 5;
    let report = cross_validate(&corpus, k, 0, &PipelineSettings::default())?;
    println!("fold  tp  fp  tn  fn  precision  recall      f1  accuracy");
    for (i, fold) in report.folds.iter().enumerate() {
        println!(
            "{i:>4} {:>3} {:>3} {:>3} {:>3}  {:>9.3} {:>7.3} {:>7.3} {:>9.3}",
            fold.true_positives,
            fold.false_positives,
            fold.true_negatives,
            fold.false_negatives,
            fold.precision,
            fold.recall,
            fold.f1,
            fold.accuracy
        );
    }
    println!(
        "mean f1 {:.4}, mean accuracy {:.4}\n",
        report.mean_f1, report.mean_accuracy
    );

    // The same folds, reused to pool one model's test samples into a
    // binned profile: F1 climbs with document length because label noise
    // and thin affect signal fade together.
    let plan = split_folds(&corpus, k, 0)?;
    let rows = pooled_binned_f1(
        &corpus,
        &plan,
        FactorId::WordCount,
        &CalibrationSettings::default(),
        |fold_idx| {
            Box::new(AffectFlow::new(AffectFlowHyper {
                seed: fold_idx as u64,
                ..AffectFlowHyper::default()
            }))
        },
    )?;
    println!("pooled affect_flow F1 by word count ({k} folds):");
    for row in &rows {
        let bar = "#".repeat((row.f1 * 40.0).round() as usize);
        println!("{:>5.0}..{:<5.0} {:>5.3} {bar}", row.lo, row.hi, row.f1);
    }
    Ok(())
}
