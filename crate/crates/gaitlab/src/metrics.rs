//! Ranking metrics and cross-fold aggregation.

use crate::error::{Error, Result};

/// Area under the ROC curve via the rank-sum (Mann–Whitney) statistic.
/// Tied scores contribute half credit, exactly as average ranks dictate:
///
/// `AUROC = (Σ ranks of positives − n⁺(n⁺+1)/2) / (n⁺ · n⁻)`
///
/// with average ranks over tie groups. Scores must be finite and both
/// classes must be present.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Metric(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Metric("no predictions to rank".into()));
    }
    for &s in scores {
        if !s.is_finite() {
            return Err(Error::Metric("non-finite score".into()));
        }
    }
    for &l in labels {
        if l > 1 {
            return Err(Error::Metric(format!("labels must be 0/1, got {l}")));
        }
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Metric(
            "AUROC needs both classes in the evaluation set".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average 1-based ranks over tie groups, accumulated for positives.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average rank
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let n_pos = positives as f64;
    let n_neg = negatives as f64;
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// Mean and population standard deviation of a set of fold results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

/// Aggregates per-fold values: mean ± population standard deviation
/// (divide by n, not n−1).
pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::Metric("nothing to aggregate".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Aggregate {
        mean,
        std: var.sqrt(),
    })
}
