//! Stratified 70-10-20 splits, resampled independently per fold.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};

pub const TRAIN_SHARE: f64 = 0.7;
pub const VALIDATION_SHARE: f64 = 0.1;
pub const TEST_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl FoldSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<FoldSplit>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

/// Largest-remainder apportionment of `total` across `weights`; never
/// assigns more than the weight itself, so short classes cannot overdraw.
fn apportion(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 || total == 0 {
        return vec![0; weights.len()];
    }
    let total = total.min(sum);
    let mut shares: Vec<usize> = Vec::with_capacity(weights.len());
    let mut fractions: Vec<(f64, usize)> = Vec::with_capacity(weights.len());
    let mut assigned = 0;
    for (i, &w) in weights.iter().enumerate() {
        let quota = total as f64 * w as f64 / sum as f64;
        let floor = (quota.floor() as usize).min(w);
        shares.push(floor);
        assigned += floor;
        fractions.push((quota - floor as f64, i));
    }
    // Largest fraction first; ties go to the earlier class.
    fractions.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut remaining = total - assigned;
    let mut cursor = 0;
    while remaining > 0 {
        let (_, i) = fractions[cursor % fractions.len()];
        if shares[i] < weights[i] {
            shares[i] += 1;
            remaining -= 1;
        }
        cursor += 1;
    }
    shares
}

/// Draws `k` independent stratified train/validation/test splits over the
/// labeled documents. Global split sizes are exact largest-remainder
/// shares of 70/10/20, and each label class is spread proportionally.
pub fn split_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 {
        return Err(Error::InvalidConfig("fold count must be positive".to_string()));
    }
    let mut by_label: BTreeMap<Label, Vec<String>> = BTreeMap::new();
    for doc in corpus.documents() {
        if doc.label.is_labeled() {
            by_label.entry(doc.label).or_default().push(doc.doc_id.clone());
        }
    }
    let n: usize = by_label.values().map(Vec::len).sum();
    if n < k {
        return Err(Error::TooFewLabeledDocs { need: k, got: n });
    }

    let n_validation = (VALIDATION_SHARE * n as f64).round() as usize;
    let n_test = (TEST_SHARE * n as f64).round() as usize;
    let class_sizes: Vec<usize> = by_label.values().map(Vec::len).collect();
    let test_per_class = apportion(n_test, &class_sizes);
    let capacity: Vec<usize> = class_sizes
        .iter()
        .zip(&test_per_class)
        .map(|(size, t)| size - t)
        .collect();
    let validation_per_class = apportion(n_validation, &capacity);

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = Vec::with_capacity(k);
    for _ in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let mut split = FoldSplit {
            train: Vec::new(),
            validation: Vec::new(),
            test: Vec::new(),
        };
        for (class_idx, ids) in by_label.values().enumerate() {
            let mut ids: Vec<&String> = ids.iter().collect();
            ids.shuffle(&mut rng);
            let n_t = test_per_class[class_idx];
            let n_v = validation_per_class[class_idx];
            split.test.extend(ids[..n_t].iter().map(|s| s.to_string()));
            split
                .validation
                .extend(ids[n_t..n_t + n_v].iter().map(|s| s.to_string()));
            split
                .train
                .extend(ids[n_t + n_v..].iter().map(|s| s.to_string()));
        }
        split.train.sort();
        split.validation.sort();
        split.test.sort();
        folds.push(split);
    }
    Ok(FoldPlan { folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth::{generate, SynthConfig};
    use std::collections::BTreeSet;

    fn hundred_doc_corpus(seed: u64) -> Corpus {
        let (corpus, _) = generate(
            &SynthConfig {
                n_docs: 100,
                n_background_actors: 20,
                n_alias_pairs: 0,
                ..SynthConfig::default()
            },
            seed,
        )
        .unwrap();
        assert_eq!(corpus.labeled_doc_ids().len(), 100);
        corpus
    }

    #[test]
    fn hundred_docs_split_seventy_ten_twenty() {
        let corpus = hundred_doc_corpus(4);
        let plan = split_folds(&corpus, 10, 9).unwrap();
        assert_eq!(plan.k(), 10);
        for fold in &plan.folds {
            assert_eq!(fold.train.len(), 70);
            assert_eq!(fold.validation.len(), 10);
            assert_eq!(fold.test.len(), 20);
        }
    }

    #[test]
    fn splits_are_disjoint_and_cover_the_labeled_corpus() {
        let corpus = hundred_doc_corpus(4);
        let all: BTreeSet<String> = corpus.labeled_doc_ids().into_iter().collect();
        let plan = split_folds(&corpus, 10, 1).unwrap();
        for fold in &plan.folds {
            let train: BTreeSet<&String> = fold.train.iter().collect();
            let val: BTreeSet<&String> = fold.validation.iter().collect();
            let test: BTreeSet<&String> = fold.test.iter().collect();
            assert_eq!(train.len(), fold.train.len());
            assert!(train.is_disjoint(&val));
            assert!(train.is_disjoint(&test));
            assert!(val.is_disjoint(&test));
            let union: BTreeSet<String> = train
                .iter()
                .chain(&val)
                .chain(&test)
                .map(|s| s.to_string())
                .collect();
            assert_eq!(union, all);
        }
    }

    #[test]
    fn folds_are_stratified_by_label() {
        let corpus = hundred_doc_corpus(2);
        let false_ids: BTreeSet<String> = corpus
            .documents()
            .filter(|d| d.label == Label::False)
            .map(|d| d.doc_id.clone())
            .collect();
        let share = false_ids.len() as f64 / 100.0;
        let plan = split_folds(&corpus, 10, 3).unwrap();
        for fold in &plan.folds {
            for (ids, want) in [
                (&fold.train, share * 70.0),
                (&fold.validation, share * 10.0),
                (&fold.test, share * 20.0),
            ] {
                let got = ids.iter().filter(|id| false_ids.contains(*id)).count() as f64;
                assert!(
                    (got - want).abs() <= 1.0,
                    "false-label count {got} strays from {want}"
                );
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_plan_and_folds_differ() {
        let corpus = hundred_doc_corpus(7);
        let a = split_folds(&corpus, 10, 42).unwrap();
        let b = split_folds(&corpus, 10, 42).unwrap();
        assert_eq!(a, b);
        let c = split_folds(&corpus, 10, 43).unwrap();
        assert_ne!(a, c);
        assert_ne!(a.folds[0], a.folds[1]);
    }

    #[test]
    fn too_few_labeled_docs_is_an_error() {
        let (corpus, _) = generate(
            &SynthConfig {
                n_docs: 5,
                n_background_actors: 5,
                n_alias_pairs: 0,
                ..SynthConfig::default()
            },
            1,
        )
        .unwrap();
        match split_folds(&corpus, 10, 0) {
            Err(Error::TooFewLabeledDocs { need: 10, got: 5 }) => {}
            other => panic!("expected TooFewLabeledDocs, got {other:?}"),
        }
    }

    #[test]
    fn ragged_sizes_stay_within_one_of_the_shares() {
        let (corpus, _) = generate(
            &SynthConfig {
                n_docs: 103,
                n_background_actors: 20,
                n_alias_pairs: 0,
                ..SynthConfig::default()
            },
            8,
        )
        .unwrap();
        let n = corpus.labeled_doc_ids().len() as f64;
        let plan = split_folds(&corpus, 3, 5).unwrap();
        for fold in &plan.folds {
            assert!((fold.train.len() as f64 - 0.7 * n).abs() <= 1.0);
            assert!((fold.validation.len() as f64 - 0.1 * n).abs() <= 1.0);
            assert!((fold.test.len() as f64 - 0.2 * n).abs() <= 1.0);
        }
    }

    #[test]
    fn apportion_matches_hand_cases() {
        assert_eq!(apportion(20, &[50, 50]), vec![10, 10]);
        // Quotas 9.9 and 0.1: the larger remainder takes the leftover seat.
        assert_eq!(apportion(10, &[99, 1]), vec![10, 0]);
        assert_eq!(apportion(3, &[1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(apportion(5, &[0, 10]), vec![0, 5]);
        assert_eq!(apportion(0, &[3, 4]), vec![0, 0]);
        let shares = apportion(7, &[2, 2, 9]);
        assert_eq!(shares.iter().sum::<usize>(), 7);
        assert!(shares.iter().zip(&[2usize, 2, 9]).all(|(s, w)| s <= w));
    }
}
