//! Intent classification of coordinated actors.
//!
//! A linear map W is learned contrastively: same-intent actors are pulled
//! together in the embedded space, different-intent actors pushed beyond
//! a margin. Classification is nearest centroid there. Behavior features
//! are fixed: account age, inter-event regularity, content diversity,
//! burstiness, and how often the actor posts in lockstep with others.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ActorTrace, TraceKind};
use crate::corpus::{ActorRef, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentLabel {
    Malicious,
    Benign,
    Unknown,
}

impl std::fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntentLabel::Malicious => "malicious",
            IntentLabel::Benign => "benign",
            IntentLabel::Unknown => "unknown",
        })
    }
}

pub const FEATURE_NAMES: [&str; 5] = [
    "account_age",
    "gap_cv",
    "distinct_shingle_ratio",
    "burstiness",
    "sync_fraction",
];

fn gaps(times: &[i64]) -> Vec<f64> {
    times.windows(2).map(|w| (w[1] - w[0]) as f64).collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// The five behavior features for one actor. `now` anchors account age;
/// `others` holds every other actor's event times, sorted, for the
/// sync-fraction feature.
pub fn behavior_features(
    trace: &ActorTrace,
    created_at: i64,
    now: i64,
    others: &[i64],
    dt: i64,
) -> Vec<f64> {
    let age = (now - created_at).max(0) as f64;

    let mut times: Vec<i64> = trace.events.iter().map(|e| e.timestamp).collect();
    times.sort_unstable();
    times.dedup();
    let gaps = gaps(&times);
    let (gap_cv, burstiness) = if gaps.is_empty() {
        (0.0, 0.0)
    } else {
        let (mu, sigma) = mean_std(&gaps);
        let cv = if mu == 0.0 { 0.0 } else { sigma / mu };
        let b = if sigma + mu == 0.0 {
            0.0
        } else {
            (sigma - mu) / (sigma + mu)
        };
        (cv, b)
    };

    let text_values: Vec<&str> = trace
        .events
        .iter()
        .filter(|e| e.kind == TraceKind::TextShingleHash)
        .map(|e| e.value.as_str())
        .collect();
    let diversity = if text_values.is_empty() {
        1.0
    } else {
        let distinct: BTreeSet<&str> = text_values.iter().copied().collect();
        distinct.len() as f64 / text_values.len() as f64
    };

    let sync_fraction = if trace.events.is_empty() {
        0.0
    } else {
        let close = trace
            .events
            .iter()
            .filter(|e| {
                let i = others.partition_point(|&t| t < e.timestamp - dt);
                others.get(i).map_or(false, |&t| t <= e.timestamp + dt)
            })
            .count();
        close as f64 / trace.events.len() as f64
    };

    vec![age, gap_cv, diversity, burstiness, sync_fraction]
}

/// Features for every traced actor with a corpus record, keyed by the
/// platform-qualified actor id.
pub fn actor_features(
    traces: &[ActorTrace],
    corpus: &Corpus,
    dt: i64,
) -> BTreeMap<String, Vec<f64>> {
    let now = corpus.end_time();
    let mut all_events: Vec<(i64, usize)> = Vec::new();
    for (idx, trace) in traces.iter().enumerate() {
        all_events.extend(trace.events.iter().map(|e| (e.timestamp, idx)));
    }
    all_events.sort_unstable();

    let mut out = BTreeMap::new();
    for (idx, trace) in traces.iter().enumerate() {
        let Some((platform, actor_id)) = trace.actor_id.split_once(':') else {
            continue;
        };
        let Some(actor) = corpus.actor(&ActorRef::new(platform, actor_id)) else {
            continue;
        };
        let others: Vec<i64> = all_events
            .iter()
            .filter(|&&(_, a)| a != idx)
            .map(|&(t, _)| t)
            .collect();
        out.insert(
            trace.actor_id.clone(),
            behavior_features(trace, actor.created_at, now, &others, dt),
        );
    }
    out
}

/// Every unordered pair of labeled actors, split into same-intent and
/// different-intent; unknowns contribute nothing.
pub fn pairs_from_labels(
    labels: &BTreeMap<String, IntentLabel>,
) -> (Vec<(String, String)>, Vec<(String, String)>) {
    let ids: Vec<(&String, IntentLabel)> = labels
        .iter()
        .filter(|(_, &l)| l != IntentLabel::Unknown)
        .map(|(k, &l)| (k, l))
        .collect();
    let mut same = Vec::new();
    let mut diff = Vec::new();
    for (a, (id_a, l_a)) in ids.iter().enumerate() {
        for (id_b, l_b) in &ids[a + 1..] {
            let pair = ((*id_a).clone(), (*id_b).clone());
            if l_a == l_b {
                same.push(pair);
            } else {
                diff.push(pair);
            }
        }
    }
    (same, diff)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntentHyper {
    pub margin: f64,
    pub rate: f64,
    pub epochs: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for IntentHyper {
    fn default() -> IntentHyper {
        IntentHyper {
            margin: 1.0,
            rate: 0.002,
            epochs: 600,
            dim: 3,
            seed: 0,
        }
    }
}

/// Contrastive objective over standardized feature rows:
/// sum of d^2 over same pairs plus max(0, margin - d)^2 over different
/// pairs, with d the Euclidean length of W(x_u - x_v). Returns the loss
/// and dL/dW.
pub fn contrastive_loss_grad(
    w: &[Vec<f64>],
    xs: &BTreeMap<String, Vec<f64>>,
    same: &[(String, String)],
    diff: &[(String, String)],
    margin: f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let dim = w.len();
    let n_features = w.first().map(Vec::len).unwrap_or(0);
    if dim == 0 || n_features == 0 {
        return Err(Error::BadFeatureVectors);
    }
    let mut loss = 0.0;
    let mut grad = vec![vec![0.0; n_features]; dim];
    let with_delta = |ids: &(String, String)| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let get = |id: &String| {
            xs.get(id).ok_or_else(|| {
                Error::InvalidConfig(format!("pair references unfeaturized actor `{id}`"))
            })
        };
        let (xu, xv) = (get(&ids.0)?, get(&ids.1)?);
        if xu.len() != n_features || xv.len() != n_features {
            return Err(Error::BadFeatureVectors);
        }
        let delta: Vec<f64> = xu.iter().zip(xv).map(|(a, b)| a - b).collect();
        let embedded: Vec<f64> = w
            .iter()
            .map(|row| row.iter().zip(&delta).map(|(wi, di)| wi * di).sum())
            .collect();
        let d = embedded.iter().map(|e| e * e).sum::<f64>().sqrt();
        Ok((delta, embedded, d))
    };
    for pair in same {
        let (delta, embedded, d) = with_delta(pair)?;
        loss += d * d;
        for (g_row, &e) in grad.iter_mut().zip(&embedded) {
            for (g, &dl) in g_row.iter_mut().zip(&delta) {
                *g += 2.0 * e * dl;
            }
        }
    }
    for pair in diff {
        let (delta, embedded, d) = with_delta(pair)?;
        if d >= margin {
            continue;
        }
        loss += (margin - d) * (margin - d);
        if d == 0.0 {
            // Direction undefined at the origin; stay put.
            continue;
        }
        let scale = -2.0 * (margin - d) / d;
        for (g_row, &e) in grad.iter_mut().zip(&embedded) {
            for (g, &dl) in g_row.iter_mut().zip(&delta) {
                *g += scale * e * dl;
            }
        }
    }
    Ok((loss, grad))
}

/// Linear contrastive embedding plus nearest-centroid intent classifier.
///
/// A second `fit` call continues descending from the current W with the
/// original feature scaler, so pre-training on synthetic pairs and
/// fine-tuning on a small labeled subset compose naturally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentModel {
    hyper: IntentHyper,
    w: Vec<Vec<f64>>,
    means: Vec<f64>,
    stds: Vec<f64>,
    centroids: Option<(Vec<f64>, Vec<f64>)>,
    fitted: bool,
    loss_trace: Vec<f64>,
}

impl IntentModel {
    pub fn new(hyper: IntentHyper) -> IntentModel {
        assert!(hyper.dim > 0, "embedding dimension must be positive");
        assert!(hyper.margin > 0.0, "margin must be positive");
        IntentModel {
            hyper,
            w: Vec::new(),
            means: Vec::new(),
            stds: Vec::new(),
            centroids: None,
            fitted: false,
            loss_trace: Vec::new(),
        }
    }

    pub fn hyper(&self) -> &IntentHyper {
        &self.hyper
    }

    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.w
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn standardized_set(&self, xs: &BTreeMap<String, Vec<f64>>) -> BTreeMap<String, Vec<f64>> {
        xs.iter()
            .map(|(k, v)| (k.clone(), self.standardize(v)))
            .collect()
    }

    /// Trains W on contrastive pairs by full-batch gradient descent.
    pub fn fit(
        &mut self,
        xs: &BTreeMap<String, Vec<f64>>,
        same: &[(String, String)],
        diff: &[(String, String)],
    ) -> Result<()> {
        if same.is_empty() {
            return Err(Error::MissingPairKind("same-intent"));
        }
        if diff.is_empty() {
            return Err(Error::MissingPairKind("different-intent"));
        }
        let n_features = xs.values().next().map(Vec::len).unwrap_or(0);
        if n_features == 0 || xs.values().any(|v| v.len() != n_features) {
            return Err(Error::BadFeatureVectors);
        }
        if !self.fitted {
            let n = xs.len() as f64;
            self.means = vec![0.0; n_features];
            self.stds = vec![0.0; n_features];
            for x in xs.values() {
                for (m, v) in self.means.iter_mut().zip(x) {
                    *m += v / n;
                }
            }
            for x in xs.values() {
                for ((s, m), v) in self.stds.iter_mut().zip(&self.means).zip(x) {
                    *s += (v - m) * (v - m) / n;
                }
            }
            for s in self.stds.iter_mut() {
                *s = s.sqrt();
                if *s == 0.0 {
                    *s = 1.0;
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.hyper.seed);
            let scale = 1.0 / (n_features as f64).sqrt();
            self.w = (0..self.hyper.dim)
                .map(|_| {
                    (0..n_features)
                        .map(|_| rng.gen_range(-scale..=scale))
                        .collect()
                })
                .collect();
        } else if self.w.first().map(Vec::len) != Some(n_features) {
            return Err(Error::BadFeatureVectors);
        }

        let standardized = self.standardized_set(xs);
        let mut trace = Vec::with_capacity(self.hyper.epochs + 1);
        for epoch in 0..=self.hyper.epochs {
            let (loss, grad) =
                contrastive_loss_grad(&self.w, &standardized, same, diff, self.hyper.margin)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "contrastive loss",
                    iteration: epoch,
                });
            }
            trace.push(loss);
            if epoch == self.hyper.epochs {
                break;
            }
            for (w_row, g_row) in self.w.iter_mut().zip(&grad) {
                for (w, g) in w_row.iter_mut().zip(g_row) {
                    *w -= self.hyper.rate * g;
                }
            }
        }
        self.loss_trace = trace;
        self.fitted = true;
        Ok(())
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.fitted {
            return Err(Error::NotFitted {
                model_id: "intent_embedding".to_string(),
            });
        }
        let z = self.standardize(x);
        Ok(self
            .w
            .iter()
            .map(|row| row.iter().zip(&z).map(|(wi, zi)| wi * zi).sum())
            .collect())
    }

    /// Class centroids in the embedded space, from labeled actors.
    pub fn fit_centroids(
        &mut self,
        xs: &BTreeMap<String, Vec<f64>>,
        labels: &BTreeMap<String, IntentLabel>,
    ) -> Result<()> {
        let mut sums = BTreeMap::from([
            (IntentLabel::Malicious, (Vec::new(), 0usize)),
            (IntentLabel::Benign, (Vec::new(), 0usize)),
        ]);
        for (id, &label) in labels {
            if label == IntentLabel::Unknown {
                continue;
            }
            let Some(x) = xs.get(id) else {
                return Err(Error::InvalidConfig(format!(
                    "labeled actor `{id}` has no features"
                )));
            };
            let e = self.embed(x)?;
            let slot = sums.get_mut(&label).expect("both classes present");
            if slot.0.is_empty() {
                slot.0 = vec![0.0; e.len()];
            }
            for (acc, v) in slot.0.iter_mut().zip(&e) {
                *acc += v;
            }
            slot.1 += 1;
        }
        let centroid = |label: IntentLabel| -> Result<Vec<f64>> {
            let (sum, count) = &sums[&label];
            if *count == 0 {
                return Err(Error::InvalidConfig(format!(
                    "no labeled {label} actors to fit a centroid"
                )));
            }
            Ok(sum.iter().map(|v| v / *count as f64).collect())
        };
        self.centroids = Some((
            centroid(IntentLabel::Malicious)?,
            centroid(IntentLabel::Benign)?,
        ));
        Ok(())
    }

    /// Nearest centroid in the embedded space; an exact tie is an honest
    /// "unknown".
    pub fn classify(&self, x: &[f64]) -> Result<IntentLabel> {
        let Some((mal, ben)) = &self.centroids else {
            return Err(Error::UnfittedCentroids);
        };
        let e = self.embed(x)?;
        let dist = |c: &[f64]| -> f64 {
            e.iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let (dm, db) = (dist(mal), dist(ben));
        Ok(if dm < db {
            IntentLabel::Malicious
        } else if db < dm {
            IntentLabel::Benign
        } else {
            IntentLabel::Unknown
        })
    }
}
