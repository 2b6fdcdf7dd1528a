//! Area under the ROC curve, computed the Mann–Whitney way.

use crate::error::{Error, Result};

/// AUC of a scorer that assigned `positives` and `negatives` their scores:
/// the probability that a uniformly drawn positive outscores a uniformly
/// drawn negative, counting ties as half.
///
/// Computed from average ranks in the pooled ordering, so it runs in
/// O(n log n) while agreeing exactly with pairwise enumeration.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::SingleClass);
    }
    for &s in positives.iter().chain(negatives) {
        if !s.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "scores must be finite, got {s}"
            )));
        }
    }
    let np = positives.len();
    let nn = negatives.len();
    let mut pooled: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sum of positive ranks, with tied scores sharing their average rank
    // (1-based).
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_tie = pooled[i..j].iter().filter(|&&(_, p)| p).count();
        rank_sum += avg_rank * pos_in_tie as f64;
        i = j;
    }
    let u = rank_sum - (np * (np + 1)) as f64 / 2.0;
    Ok(u / (np as f64 * nn as f64))
}
