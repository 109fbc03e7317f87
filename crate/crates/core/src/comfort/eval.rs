use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::model::{train_matrix, Hyperparameters, ModelKind};
use super::Scheme;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    StratifiedRecord,
    #[default]
    BlockedByVote,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::StratifiedRecord => "stratified_record",
            Split::BlockedByVote => "blocked_by_vote",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "stratified_record" => Some(Split::StratifiedRecord),
            "blocked_by_vote" => Some(Split::BlockedByVote),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub kind: ModelKind,
    pub scheme: Scheme,
    pub hyper: Hyperparameters,
    pub split: Split,
    pub n_folds: usize,
    pub seed: u64,
    /// Rows are true classes, columns predictions, both in
    /// `scheme.labels()` order.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    /// Column-wise: TP / predicted count, 0 for an empty column.
    pub precision: Vec<f64>,
    /// Fold index of each dataset record.
    pub folds: Vec<usize>,
}

/// Accuracy and column-wise precision from a square confusion matrix.
pub fn confusion_metrics(confusion: &[Vec<u64>]) -> (f64, Vec<f64>) {
    let k = confusion.len();
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = if total == 0 { 0.0 } else { trace as f64 / total as f64 };
    let precision = (0..k)
        .map(|j| {
            let col: u64 = confusion.iter().map(|row| row[j]).sum();
            if col == 0 {
                0.0
            } else {
                confusion[j][j] as f64 / col as f64
            }
        })
        .collect();
    (accuracy, precision)
}

impl EvalReport {
    pub fn supports(&self) -> Vec<u64> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

/// Accuracy of always predicting the most frequent class.
pub fn majority_baseline(dataset: &Dataset) -> f64 {
    let counts = dataset.class_counts();
    let top = counts.values().copied().max().unwrap_or(0);
    if dataset.is_empty() {
        0.0
    } else {
        top as f64 / dataset.len() as f64
    }
}

const MAX_FOLD_ATTEMPTS: u64 = 10;

fn deal(groups_by_class: &BTreeMap<usize, Vec<Vec<usize>>>, k: usize, rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut folds = alloc::vec![0; n];
    let mut next = 0;
    for groups in groups_by_class.values() {
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.shuffle(rng);
        for g in order {
            for &i in &groups[g] {
                folds[i] = next % k;
            }
            next += 1;
        }
    }
    folds
}

fn assign_folds(dataset: &Dataset, labels: &[usize], k: usize, split: Split, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut groups: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    match split {
        Split::StratifiedRecord => {
            for (i, &c) in labels.iter().enumerate() {
                groups.entry(c).or_default().push(alloc::vec![i]);
            }
        }
        Split::BlockedByVote => {
            let mut windows: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for i in 0..dataset.len() {
                windows.entry(dataset.vote_window(i)).or_default().push(i);
            }
            for members in windows.into_values() {
                groups.entry(labels[members[0]]).or_default().push(members);
            }
        }
    }
    deal(&groups, k, rng, dataset.len())
}

fn every_training_fold_has_all_classes(labels: &[usize], folds: &[usize], k: usize, n_classes: usize) -> bool {
    let mut total = alloc::vec![0usize; n_classes];
    let mut per_fold = alloc::vec![alloc::vec![0usize; n_classes]; k];
    for (&c, &f) in labels.iter().zip(folds) {
        total[c] += 1;
        per_fold[f][c] += 1;
    }
    per_fold.iter().all(|fold| (0..n_classes).all(|c| total[c] == 0 || total[c] > fold[c]))
}

/// K-fold cross-validation aggregating out-of-fold predictions into one
/// confusion matrix. Fold assignment is retried with a new seed, up to 10
/// times, until every training fold contains every class.
pub fn cross_validate(dataset: &Dataset, kind: ModelKind, k: usize, split: Split, hyper: &Hyperparameters, seed: u64) -> Result<EvalReport> {
    if k < 2 {
        return Err(Error::InvalidParameter("at least two folds are required"));
    }
    if dataset.len() < k {
        return Err(Error::TooFewSamples { needed: k, got: dataset.len() });
    }
    let labels = dataset.label_indices();
    let n_classes = dataset.scheme.n_classes();
    let folds = (0..MAX_FOLD_ATTEMPTS)
        .map(|attempt| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            assign_folds(dataset, &labels, k, split, &mut rng)
        })
        .find(|f| every_training_fold_has_all_classes(&labels, f, k, n_classes))
        .ok_or(Error::ClassAbsentFromTraining)?;

    let x = dataset.feature_matrix();
    let mut confusion = alloc::vec![alloc::vec![0u64; n_classes]; n_classes];
    for fold in 0..k {
        let (mut tx, mut ty) = (Vec::new(), Vec::new());
        for i in 0..x.len() {
            if folds[i] != fold {
                tx.push(x[i].clone());
                ty.push(labels[i]);
            }
        }
        let model = train_matrix(kind, dataset.scheme, &tx, &ty, hyper, seed.wrapping_add(fold as u64))?;
        for i in (0..x.len()).filter(|&i| folds[i] == fold) {
            confusion[labels[i]][model.predict_index(&x[i])?] += 1;
        }
    }
    let (accuracy, precision) = confusion_metrics(&confusion);
    let report = EvalReport { kind, scheme: dataset.scheme, hyper: *hyper, split, n_folds: k, seed, confusion, accuracy, precision, folds };
    debug_assert_eq!(report.total(), dataset.len() as u64);
    Ok(report)
}
