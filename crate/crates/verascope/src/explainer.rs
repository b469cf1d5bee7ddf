//! Tiered account of how an ensemble verdict was formed.
//!
//! Tier 1 is the headline (verdict, probability, loudest voice), tier 2
//! the per-model breakdown, tier 3 the per-model evidence: factor
//! readings, which calibration bin each reading hit, and top feature
//! attributions where a model can produce them. Generation is a pure
//! read; it recomputes the probability from the outputs it was handed and
//! refuses to explain a verdict that does not match them.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregator::{decide, AggregatedVerdict, CurveSet, Verdict, WeightedOutput};
use crate::base_models::Detector;
use crate::corpus::{Corpus, Snapshot};
use crate::error::{Error, Result};
use crate::features::{reading_for, FactorId, FactorReading};

/// Bumped whenever the text rendering changes shape.
pub const TEXT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier1 {
    pub verdict: Verdict,
    pub prob: f64,
    /// Largest contributor; absent when no model carried weight.
    pub top_model_id: Option<String>,
    pub insufficient_evidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier2Entry {
    pub model_id: String,
    pub p: f64,
    pub r: f64,
    /// Normalized weight in the final probability; absent when the
    /// ensemble abstained.
    pub contribution: Option<f64>,
}

/// Where one factor reading landed on its calibration curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveHit {
    pub factor_id: FactorId,
    pub reading: f64,
    pub bin_index: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub bin_reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub feature: String,
    /// Signed weight-times-feature product.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier3Entry {
    pub model_id: String,
    pub readings: Vec<FactorReading>,
    pub curve_hits: Vec<CurveHit>,
    /// Top-5 by absolute value; absent for models without feature
    /// attributions.
    pub attributions: Option<Vec<Attribution>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub doc_id: String,
    pub t: i64,
    pub tier1: Tier1,
    pub tier2: Vec<Tier2Entry>,
    pub tier3: Vec<Tier3Entry>,
}

/// Builds the three tiers for one verdict. `models` supplies feature
/// attributions where available; models absent from it simply get none.
pub fn explain(
    verdict: &AggregatedVerdict,
    outputs: &[WeightedOutput],
    curves: &CurveSet,
    models: &[Box<dyn Detector>],
    snapshot: &Snapshot,
    corpus: &Corpus,
    tau: f64,
) -> Result<Explanation> {
    let total_r: f64 = outputs.iter().map(|o| o.r).sum();
    let recomputed = if total_r == 0.0 {
        0.5
    } else {
        outputs.iter().map(|o| o.r * o.p).sum::<f64>() / total_r
    };
    if (recomputed - verdict.prob).abs() > 1e-9 {
        return Err(Error::VerdictMismatch {
            recomputed,
            stated: verdict.prob,
        });
    }

    let mut sorted: Vec<&WeightedOutput> = outputs.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));

    // Ascending key order plus a strict comparison keeps the
    // lexicographically smallest model on ties.
    let mut top_model_id: Option<(&String, f64)> = None;
    for (k, &v) in &verdict.contributions {
        if top_model_id.map_or(true, |(_, best)| v > best) {
            top_model_id = Some((k, v));
        }
    }
    let top_model_id = top_model_id.map(|(k, _)| k.clone());

    let tier1 = Tier1 {
        verdict: decide(verdict.prob, tau)?,
        prob: verdict.prob,
        top_model_id,
        insufficient_evidence: verdict.insufficient_evidence,
    };

    let tier2 = sorted
        .iter()
        .map(|o| Tier2Entry {
            model_id: o.model_id.clone(),
            p: o.p,
            r: o.r,
            contribution: verdict.contributions.get(&o.model_id).copied(),
        })
        .collect();

    let mut tier3 = Vec::with_capacity(sorted.len());
    for o in &sorted {
        let model = models.iter().find(|m| m.model_id() == o.model_id);
        let mut curve_hits = Vec::new();
        if let Some(model) = model {
            for &factor in model.required_factors() {
                let Some(curve) = curves.get(&o.model_id, factor) else {
                    continue;
                };
                let reading = reading_for(&o.readings, factor).unwrap_or(0.0);
                let bin = curve.bin_of(reading);
                curve_hits.push(CurveHit {
                    factor_id: factor,
                    reading,
                    bin_index: bin,
                    bin_lo: curve.bin_edges[bin],
                    bin_hi: curve.bin_edges[bin + 1],
                    bin_reliability: curve.bin_reliability[bin],
                });
            }
        }
        let attributions = match model {
            Some(model) => model.attributions(snapshot, corpus)?.map(|pairs| {
                pairs
                    .into_iter()
                    .map(|(feature, value)| Attribution { feature, value })
                    .collect()
            }),
            None => None,
        };
        tier3.push(Tier3Entry {
            model_id: o.model_id.clone(),
            readings: o.readings.clone(),
            curve_hits,
            attributions,
        });
    }

    Ok(Explanation {
        doc_id: verdict.doc_id.clone(),
        t: verdict.t,
        tier1,
        tier2,
        tier3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderFormat {
    Json,
    Text,
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<RenderFormat> {
        match s {
            "json" => Ok(RenderFormat::Json),
            "text" => Ok(RenderFormat::Text),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Serializes an explanation. The json form parses back to an equal
/// `Explanation`; the text form is line-oriented, tiers in order, and
/// byte-identical for equal inputs.
pub fn render(explanation: &Explanation, format: RenderFormat) -> Result<String> {
    match format {
        RenderFormat::Json => Ok(serde_json::to_string_pretty(explanation)?),
        RenderFormat::Text => Ok(render_text(explanation)),
    }
}

fn render_text(e: &Explanation) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "explanation v{TEXT_FORMAT_VERSION}");
    let _ = writeln!(s, "doc={} t={}", e.doc_id, e.t);
    let _ = write!(
        s,
        "tier1: verdict={} prob={:.6}",
        e.tier1.verdict, e.tier1.prob
    );
    match (&e.tier1.top_model_id, e.tier1.insufficient_evidence) {
        (Some(top), _) => {
            let _ = writeln!(s, " top_model={top}");
        }
        (None, true) => {
            let _ = writeln!(s, " insufficient_evidence");
        }
        (None, false) => {
            let _ = writeln!(s);
        }
    }
    for entry in &e.tier2 {
        let _ = write!(
            s,
            "tier2: model={} p={:.6} r={:.6}",
            entry.model_id, entry.p, entry.r
        );
        match entry.contribution {
            Some(c) => {
                let _ = writeln!(s, " contribution={c:.6}");
            }
            None => {
                let _ = writeln!(s, " contribution=none");
            }
        }
    }
    for entry in &e.tier3 {
        let _ = writeln!(s, "tier3: model={}", entry.model_id);
        for r in &entry.readings {
            let _ = writeln!(s, "  reading {}={:.6}", r.factor_id, r.value);
        }
        for hit in &entry.curve_hits {
            let _ = writeln!(
                s,
                "  curve {} bin={} range=[{:.6},{:.6}) reliability={:.6}",
                hit.factor_id, hit.bin_index, hit.bin_lo, hit.bin_hi, hit.bin_reliability
            );
        }
        if let Some(attrs) = &entry.attributions {
            for a in attrs {
                let _ = writeln!(s, "  attribution {}={:.6}", a.feature, a.value);
            }
        }
    }
    s
}
