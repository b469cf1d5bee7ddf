//! Fits a reliability calibration curve for one model and factor, then
//! shows the raw binned-F1 table next to the smoothed curve the
//! aggregator actually consults.
//!
//! ```text
//! cargo run --example calibration_curves
//! ```

use verascope::aggregator::{binned_f1_rows, calibrate, CalibrationSettings};
use verascope::base_models::{AffectFlow, AffectFlowHyper, Detector};
use verascope::corpus::synth::{generate, SynthConfig};
use verascope::features::FactorId;
use verascope::harness::{factor_samples, split_folds};

fn main() -> verascope::Result<()> {
    // One sample per validation doc at the corpus end time, so the 10%
    // validation slice must cover 10 bins at min_support 20 on its own.
    let config = SynthConfig {
        n_docs: 2400,
        ..SynthConfig::default()
    };
    let (corpus, _) = generate(&config, 42)?;
    let split = split_folds(&corpus, 1, 0)?.folds.remove(0);

    let mut model = AffectFlow::new(AffectFlowHyper::default());
    model.train(&corpus, &split.train)?;

    // Validation docs provide (factor reading, prediction, label)
    // triples; short documents should drag F1 down because their labels
    // are noisy and their affect signal is thin.
    let samples = factor_samples(&model, &corpus, &split.validation, FactorId::WordCount)?;
    let settings = CalibrationSettings::default();

    println!("raw binned F1 over word_count ({} samples):", samples.len());
    println!("{:>10} {:>10} {:>8} {:>8}  flagged", "bin_lo", "bin_hi", "support", "f1");
    for row in binned_f1_rows(&samples, &settings)? {
        println!(
            "{:>10.1} {:>10.1} {:>8} {:>8.3}  {}",
            row.lo,
            row.hi,
            row.support,
            row.f1,
            if row.under_supported { "under-supported" } else { "" }
        );
    }

    let curve = calibrate(&samples, FactorId::WordCount, &settings)?;
    println!("\nsmoothed reliability curve (isotonic, clamped to [0,1]):");
    for (edge, rel) in curve.bin_edges.iter().zip(&curve.bin_reliability) {
        println!("  reading >= {edge:>6.1} -> r = {rel:.3}");
    }

    println!("\nlookups:");
    for reading in [25.0, 80.0, 200.0, 350.0] {
        println!("  word_count {reading:>5.0} -> r = {:.3}", curve.reliability_at(reading));
    }
    Ok(())
}
