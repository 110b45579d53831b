//! Batch losses and their gradients with respect to the pre-head values.
//! Missing labels (`None`) contribute nothing — neither to the mean nor to
//! the gradient — which is how sparsely labeled multitask data trains.

use alloc::vec::Vec;

/// Probabilities are clamped into `[CLAMP, 1 - CLAMP]` before the log;
/// a clamped output also stops carrying gradient.
pub const CLASSIFICATION_CLAMP: f64 = 1e-7;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum LossError {
    #[error("loss over an empty batch is undefined")]
    EmptyBatch,
    #[error("no labeled outputs in batch")]
    NoLabeledOutputs,
    #[error("example {example} has {got} outputs, labels have {labels}")]
    LengthMismatch {
        example: usize,
        got: usize,
        labels: usize,
    },
}

fn check(outputs: &[Vec<f64>], labels: &[Vec<Option<f64>>]) -> Result<usize, LossError> {
    if outputs.is_empty() || outputs.len() != labels.len() {
        return Err(LossError::EmptyBatch);
    }
    let mut labeled = 0usize;
    for (i, (o, l)) in outputs.iter().zip(labels).enumerate() {
        if o.len() != l.len() {
            return Err(LossError::LengthMismatch {
                example: i,
                got: o.len(),
                labels: l.len(),
            });
        }
        labeled += l.iter().filter(|v| v.is_some()).count();
    }
    if labeled == 0 {
        return Err(LossError::NoLabeledOutputs);
    }
    Ok(labeled)
}

/// Mean negative log likelihood over every labeled output.
///
/// `probs` are post-sigmoid probabilities. Returns the loss and, per
/// example and output, the gradient with respect to the pre-sigmoid logit:
/// `(p - y) / n` inside the clamp window, `0` outside it.
pub fn loss_classification(
    probs: &[Vec<f64>],
    labels: &[Vec<Option<f64>>],
) -> Result<(f64, Vec<Vec<f64>>), LossError> {
    let n = check(probs, labels)? as f64;
    let mut total = 0.0;
    let mut d_pre: Vec<Vec<f64>> = Vec::with_capacity(probs.len());
    for (p_row, l_row) in probs.iter().zip(labels) {
        let mut d_row = alloc::vec![0.0; p_row.len()];
        for ((&p, label), d) in p_row.iter().zip(l_row).zip(&mut d_row) {
            let Some(y) = *label else { continue };
            let clamped = crate::fmath::min(
                crate::fmath::max(p, CLASSIFICATION_CLAMP),
                1.0 - CLASSIFICATION_CLAMP,
            );
            total += -(y * crate::fmath::ln(clamped) + (1.0 - y) * crate::fmath::ln(1.0 - clamped));
            if p > CLASSIFICATION_CLAMP && p < 1.0 - CLASSIFICATION_CLAMP {
                *d = (p - y) / n;
            }
        }
        d_pre.push(d_row);
    }
    Ok((total / n, d_pre))
}

/// Root mean squared error over every labeled output.
///
/// `preds` are raw head outputs. The gradient with respect to each
/// prediction is `e_i / (n * loss)`, or `0` when the loss is exactly zero.
pub fn loss_regression(
    preds: &[Vec<f64>],
    labels: &[Vec<Option<f64>>],
) -> Result<(f64, Vec<Vec<f64>>), LossError> {
    let n = check(preds, labels)? as f64;
    let mut sum_sq = 0.0;
    for (p_row, l_row) in preds.iter().zip(labels) {
        for (&p, label) in p_row.iter().zip(l_row) {
            if let Some(y) = *label {
                let e = p - y;
                sum_sq += e * e;
            }
        }
    }
    let loss = crate::fmath::sqrt(sum_sq / n);
    let mut d_pre: Vec<Vec<f64>> = Vec::with_capacity(preds.len());
    for (p_row, l_row) in preds.iter().zip(labels) {
        let mut d_row = alloc::vec![0.0; p_row.len()];
        if loss > 0.0 {
            for ((&p, label), d) in p_row.iter().zip(l_row).zip(&mut d_row) {
                if let Some(y) = *label {
                    *d = (p - y) / (n * loss);
                }
            }
        }
        d_pre.push(d_row);
    }
    Ok((loss, d_pre))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn some(vals: &[f64]) -> Vec<Option<f64>> {
        vals.iter().map(|&v| Some(v)).collect()
    }

    #[test]
    fn classification_matches_hand_computation() {
        let probs = alloc::vec![alloc::vec![0.9], alloc::vec![0.2]];
        let labels = alloc::vec![some(&[1.0]), some(&[0.0])];
        let (loss, d) = loss_classification(&probs, &labels).unwrap();
        let expected = -(libm::log(0.9) + libm::log(0.8)) / 2.0;
        assert!((loss - expected).abs() < 1e-15);
        assert!((d[0][0] - (0.9 - 1.0) / 2.0).abs() < 1e-15);
        assert!((d[1][0] - (0.2 - 0.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn clamped_probabilities_stay_finite_and_carry_no_gradient() {
        let probs = alloc::vec![alloc::vec![0.0], alloc::vec![1.0]];
        let labels = alloc::vec![some(&[1.0]), some(&[0.0])];
        let (loss, d) = loss_classification(&probs, &labels).unwrap();
        assert!(loss.is_finite());
        let expected = -libm::log(CLASSIFICATION_CLAMP);
        assert!((loss - expected).abs() < 1e-9);
        assert_eq!(d[0][0], 0.0);
        assert_eq!(d[1][0], 0.0);
    }

    #[test]
    fn masked_outputs_are_excluded_from_the_mean() {
        let probs = alloc::vec![alloc::vec![0.9, 0.5], alloc::vec![0.2, 0.6]];
        let labels = alloc::vec![
            alloc::vec![Some(1.0), None],
            alloc::vec![Some(0.0), Some(1.0)],
        ];
        let (loss, d) = loss_classification(&probs, &labels).unwrap();
        let expected = -(libm::log(0.9) + libm::log(0.8) + libm::log(0.6)) / 3.0;
        assert!((loss - expected).abs() < 1e-15);
        assert_eq!(d[0][1], 0.0, "masked output has zero gradient");
        assert!((d[1][1] - (0.6 - 1.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn regression_matches_hand_computation() {
        let preds = alloc::vec![alloc::vec![3.0], alloc::vec![-1.0]];
        let labels = alloc::vec![some(&[1.0]), some(&[-1.0])];
        // errors 2 and 0 -> rmse sqrt(4/2) = sqrt(2)
        let (loss, d) = loss_regression(&preds, &labels).unwrap();
        assert!((loss - libm::sqrt(2.0)).abs() < 1e-15);
        assert!((d[0][0] - 2.0 / (2.0 * libm::sqrt(2.0))).abs() < 1e-15);
        assert_eq!(d[1][0], 0.0);
    }

    #[test]
    fn zero_regression_loss_has_zero_gradient() {
        let preds = alloc::vec![alloc::vec![1.5]];
        let labels = alloc::vec![some(&[1.5])];
        let (loss, d) = loss_regression(&preds, &labels).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(d[0][0], 0.0);
    }

    #[test]
    fn guards_fire() {
        assert_eq!(loss_classification(&[], &[]), Err(LossError::EmptyBatch));
        let probs = alloc::vec![alloc::vec![0.5]];
        assert_eq!(
            loss_classification(&probs, &alloc::vec![alloc::vec![None]]),
            Err(LossError::NoLabeledOutputs)
        );
        assert_eq!(
            loss_classification(&probs, &alloc::vec![some(&[1.0, 0.0])]),
            Err(LossError::LengthMismatch {
                example: 0,
                got: 1,
                labels: 2
            })
        );
    }
}
