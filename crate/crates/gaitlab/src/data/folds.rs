//! Stratified cross-validation splits over whole videos.
//!
//! Splitting happens at video granularity — windows from one video never
//! appear on both sides of a split — and preserves class balance: each
//! class is shuffled separately with the given seed and dealt into k
//! contiguous chunks, the first `n mod k` folds receiving one extra video.
//! Validation videos are then carved out of each training set with
//! per-class largest-remainder rounding.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// One fold's video indices (into the caller's video list). Disjoint,
/// sorted ascending, and together covering every video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold: usize,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Distinct labels in ascending order.
fn classes(labels: &[u8]) -> Vec<u8> {
    let mut cs: Vec<u8> = labels.to_vec();
    cs.sort_unstable();
    cs.dedup();
    cs
}

/// Splits `labels.len()` videos into `k` stratified folds. The same seed
/// always produces the same folds. `validation` comes back empty; use
/// [`split_validation`] on each fold's training set.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Protocol(format!(
            "cross-validation needs at least 2 folds, got {k}"
        )));
    }
    if labels.is_empty() {
        return Err(Error::Protocol("no videos to split".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut fold_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in classes(labels) {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::Protocol(format!(
                "class {class} has {} videos, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let base = members.len() / k;
        let extra = members.len() % k;
        let mut cursor = 0;
        for (f, slot) in fold_members.iter_mut().enumerate() {
            let take = base + usize::from(f < extra);
            slot.extend_from_slice(&members[cursor..cursor + take]);
            cursor += take;
        }
    }
    Ok((0..k)
        .map(|f| {
            let mut test = fold_members[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = (0..labels.len()).filter(|i| !test.contains(i)).collect();
            train.sort_unstable();
            FoldSplit {
                fold: f,
                train,
                validation: Vec::new(),
                test,
            }
        })
        .collect())
}

/// Rounds to nearest, halves away from zero.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Carves a validation subset out of `train`. The total size is
/// `round(fraction · |train|)`; per-class counts use largest-remainder
/// rounding (ties to the lower class label). Returns
/// `(reduced_train, validation)`, both sorted.
pub fn split_validation(
    train: &[usize],
    labels: &[u8],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "validation fraction must be in (0, 1), got {fraction}"
        )));
    }
    if train.is_empty() {
        return Err(Error::Protocol("empty training set".into()));
    }
    let total = round_half_up(fraction * train.len() as f64);

    let class_list = classes(&train.iter().map(|&i| labels[i]).collect::<Vec<_>>());
    let per_class: Vec<Vec<usize>> = class_list
        .iter()
        .map(|&c| {
            train
                .iter()
                .copied()
                .filter(|&i| labels[i] == c)
                .collect()
        })
        .collect();

    // Largest-remainder apportionment of `total` across classes.
    let mut counts: Vec<usize> = Vec::with_capacity(per_class.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(per_class.len());
    let mut assigned = 0;
    for (idx, members) in per_class.iter().enumerate() {
        let exact = total as f64 * members.len() as f64 / train.len() as f64;
        let base = exact.floor() as usize;
        counts.push(base);
        assigned += base;
        remainders.push((idx, exact - base as f64));
    }
    // Stable tie-break: larger remainder first, then lower class index.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (idx, _) in remainders.iter().take(total - assigned) {
        counts[*idx] += 1;
    }

    let mut rng = rng_from_seed(seed);
    let mut validation = Vec::with_capacity(total);
    for (members, &take) in per_class.iter().zip(&counts) {
        if take >= members.len() {
            return Err(Error::Protocol(format!(
                "validation split would leave class without training videos \
                 ({take} of {} requested)",
                members.len()
            )));
        }
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        validation.extend_from_slice(&shuffled[..take]);
    }
    validation.sort_unstable();
    let reduced: Vec<usize> = train
        .iter()
        .copied()
        .filter(|i| !validation.contains(i))
        .collect();
    Ok((reduced, validation))
}
