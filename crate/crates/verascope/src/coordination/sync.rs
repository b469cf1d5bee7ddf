//! Temporal synchronization of a community, scored against a permutation
//! null.
//!
//! The statistic is the number of cross-actor event pairs landing within
//! a window of each other. The null redraws every event time uniformly
//! over the corpus range, so a high z means the community's timing is far
//! tighter than chance allows.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::ActorTrace;
use crate::error::{Error, Result};

/// Pairs `(i, j)`, `i < j`, with `|ts[i] - ts[j]| <= dt`, over one sorted
/// list.
fn pairs_within(sorted: &[i64], dt: i64) -> u64 {
    let mut count = 0u64;
    let mut lo = 0usize;
    for (hi, &t) in sorted.iter().enumerate() {
        while t - sorted[lo] > dt {
            lo += 1;
        }
        count += (hi - lo) as u64;
    }
    count
}

/// Cross-actor close pairs: all close pairs minus within-actor close
/// pairs.
fn cross_actor_pairs(events: &[(i64, usize)], dt: i64) -> u64 {
    let mut all: Vec<i64> = events.iter().map(|&(t, _)| t).collect();
    all.sort_unstable();
    let total = pairs_within(&all, dt);

    let mut by_actor: std::collections::BTreeMap<usize, Vec<i64>> = Default::default();
    for &(t, a) in events {
        by_actor.entry(a).or_default().push(t);
    }
    let mut same = 0u64;
    for ts in by_actor.values_mut() {
        ts.sort_unstable();
        same += pairs_within(ts, dt);
    }
    total - same
}

/// Permutation z-score of the community's temporal synchronization.
/// Degenerate cases (fewer than 2 events, or a null with zero spread)
/// yield 0 rather than infinity.
pub fn synchronization_score(
    community: &[String],
    traces: &[ActorTrace],
    dt: i64,
    n_shuffles: usize,
    seed: u64,
    time_range: (i64, i64),
) -> Result<f64> {
    if community.len() < 2 {
        return Err(Error::CommunityTooSmall {
            min: 2,
            got: community.len(),
        });
    }
    if n_shuffles < 100 {
        return Err(Error::TooFewShuffles {
            min: 100,
            got: n_shuffles,
        });
    }
    if dt <= 0 {
        return Err(Error::InvalidConfig(format!(
            "synchronization window {dt} must be positive"
        )));
    }
    let (lo, hi) = time_range;
    if hi < lo {
        return Err(Error::InvalidConfig(format!(
            "time range [{lo}, {hi}] is inverted"
        )));
    }

    let mut events: Vec<(i64, usize)> = Vec::new();
    for (idx, member) in community.iter().enumerate() {
        if let Some(trace) = traces.iter().find(|t| &t.actor_id == member) {
            events.extend(trace.events.iter().map(|e| (e.timestamp, idx)));
        }
    }
    if events.len() < 2 {
        return Ok(0.0);
    }

    let observed = cross_actor_pairs(&events, dt) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = Vec::with_capacity(n_shuffles);
    let mut redrawn = events.clone();
    for _ in 0..n_shuffles {
        for slot in redrawn.iter_mut() {
            slot.0 = rng.gen_range(lo..=hi);
        }
        shuffled.push(cross_actor_pairs(&redrawn, dt) as f64);
    }
    let mean = shuffled.iter().sum::<f64>() / n_shuffles as f64;
    let var = shuffled.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / n_shuffles as f64;
    let std = var.sqrt();
    if std == 0.0 {
        return Ok(0.0);
    }
    Ok((observed - mean) / std)
}
