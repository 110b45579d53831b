//! Evaluation metrics. `roc_auc` is the single implementation used by
//! training (model selection) and evaluation alike, as is `rmse`.

use alloc::vec::Vec;

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum MetricError {
    #[error("metric over an empty batch")]
    EmptyBatch,
    #[error("ROC-AUC needs both classes present")]
    SingleClass,
    #[error("scores and labels differ in length")]
    LengthMismatch,
}

/// Area under the ROC curve by the rank statistic: with average ranks over
/// score ties, this equals the fraction of (positive, negative) pairs scored
/// concordantly, counting ties as half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch);
    }
    if scores.is_empty() {
        return Err(MetricError::EmptyBatch);
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average rank within each tie group; ranks are 1-based.
    let mut positive_rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let average_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                positive_rank_sum += average_rank;
            }
        }
        i = j + 1;
    }

    let p = positives as f64;
    let n = negatives as f64;
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Root mean squared error.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64, MetricError> {
    if predictions.len() != targets.len() {
        return Err(MetricError::LengthMismatch);
    }
    if predictions.is_empty() {
        return Err(MetricError::EmptyBatch);
    }
    let mut sum = 0.0;
    for (p, t) in predictions.iter().zip(targets) {
        let e = p - t;
        sum += e * e;
    }
    Ok(crate::fmath::sqrt(sum / predictions.len() as f64))
}
