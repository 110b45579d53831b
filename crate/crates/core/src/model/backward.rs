//! Reverse-mode gradients, written out by hand. The chain runs from the
//! loss's pre-head gradient back through the trunk, the attention-weighted
//! fusion, the softmax gate, and the per-view projections.

use super::forward::{forward_trace, ForwardError, ForwardTrace};
use super::loss::{loss_classification, loss_regression, LossError};
use super::shape::{FusionModel, OutputHead};
use super::train::FeaturizedExample;
use alloc::vec::Vec;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GradientError {
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Loss(#[from] LossError),
}

/// out += W^T d, with `w` row-major `rows x cols`.
fn matvec_t_acc(w: &[f64], rows: usize, cols: usize, d: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(d.len(), rows);
    debug_assert_eq!(out.len(), cols);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let dr = d[r];
        for (o, wv) in out.iter_mut().zip(row) {
            *o += wv * dr;
        }
    }
}

/// grad += d (outer) x, row-major `d.len() x x.len()`.
fn outer_acc(grad: &mut [f64], d: &[f64], x: &[f64]) {
    debug_assert_eq!(grad.len(), d.len() * x.len());
    for (r, &dr) in d.iter().enumerate() {
        let row = &mut grad[r * x.len()..(r + 1) * x.len()];
        for (g, xv) in row.iter_mut().zip(x) {
            *g += dr * xv;
        }
    }
}

fn add_into(acc: &mut [f64], src: &[f64]) {
    for (a, s) in acc.iter_mut().zip(src) {
        *a += s;
    }
}

/// Accumulate one example's parameter gradient given the loss gradient with
/// respect to the pre-head values.
pub(crate) fn accumulate_example(
    model: &FusionModel,
    views: &[Vec<f64>],
    trace: &ForwardTrace,
    d_pre_head: &[f64],
    grad: &mut [f64],
) {
    let shape = &model.shape;
    let layout = shape.layout();
    let d = shape.hidden_dim;
    let a = shape.view_count();

    // Trunk, last layer first. `delta` is dL/d(pre-activation of layer l).
    let mut delta = d_pre_head.to_vec();
    let mut d_fused = alloc::vec![0.0; d];
    for l in (0..layout.mlp_weights.len()).rev() {
        let wseg = &layout.mlp_weights[l];
        let bseg = &layout.mlp_biases[l];
        outer_acc(
            &mut grad[wseg.offset..wseg.offset + wseg.len()],
            &delta,
            &trace.trunk_inputs[l],
        );
        add_into(&mut grad[bseg.offset..bseg.offset + bseg.len()], &delta);
        let mut d_input = alloc::vec![0.0; wseg.cols];
        matvec_t_acc(
            model.segment(wseg),
            wseg.rows,
            wseg.cols,
            &delta,
            &mut d_input,
        );
        if l == 0 {
            d_fused = d_input;
        } else {
            delta = d_input
                .iter()
                .zip(&trace.trunk_pre[l - 1])
                .map(|(&di, &pre)| if pre > 0.0 { di } else { 0.0 })
                .collect();
        }
    }

    // Fusion: z_f = sum_v alpha_v p_v.
    let mut d_alpha = alloc::vec![0.0; a];
    for (v, da) in d_alpha.iter_mut().enumerate() {
        let p = &trace.concat[v * d..(v + 1) * d];
        *da = d_fused.iter().zip(p).map(|(df, pv)| df * pv).sum();
    }

    // Softmax gate: d_logit_v = alpha_v * (d_alpha_v - sum_u alpha_u d_alpha_u).
    let dot: f64 = trace
        .alpha
        .iter()
        .zip(&d_alpha)
        .map(|(&al, &da)| al * da)
        .sum();
    let d_logits: Vec<f64> = trace
        .alpha
        .iter()
        .zip(&d_alpha)
        .map(|(&al, &da)| al * (da - dot))
        .collect();

    let gw = &layout.gate_weight;
    outer_acc(
        &mut grad[gw.offset..gw.offset + gw.len()],
        &d_logits,
        &trace.concat,
    );
    let gb = &layout.gate_bias;
    add_into(&mut grad[gb.offset..gb.offset + gb.len()], &d_logits);

    // Projections feed both the fusion (weighted by alpha) and the gate.
    let mut d_concat = alloc::vec![0.0; a * d];
    matvec_t_acc(model.segment(gw), a, a * d, &d_logits, &mut d_concat);
    for v in 0..a {
        let slice = &mut d_concat[v * d..(v + 1) * d];
        for (dc, df) in slice.iter_mut().zip(&d_fused) {
            *dc += trace.alpha[v] * df;
        }
    }

    for v in 0..a {
        let d_p = &d_concat[v * d..(v + 1) * d];
        let wseg = &layout.view_weights[v];
        let bseg = &layout.view_biases[v];
        outer_acc(
            &mut grad[wseg.offset..wseg.offset + wseg.len()],
            d_p,
            &views[v],
        );
        add_into(&mut grad[bseg.offset..bseg.offset + bseg.len()], d_p);
    }
}

pub(crate) fn gradient_refs(
    model: &FusionModel,
    examples: &[&FeaturizedExample],
) -> Result<(f64, Vec<f64>), GradientError> {
    if examples.is_empty() {
        return Err(LossError::EmptyBatch.into());
    }
    let mut traces = Vec::with_capacity(examples.len());
    for ex in examples {
        traces.push(forward_trace(model, &ex.views)?);
    }
    let outputs: Vec<Vec<f64>> = traces.iter().map(|t| t.y_hat.clone()).collect();
    let labels: Vec<Vec<Option<f64>>> = examples.iter().map(|e| e.labels.clone()).collect();
    let (loss, d_pre) = match model.shape.head {
        OutputHead::LinearScalar => loss_regression(&outputs, &labels)?,
        OutputHead::SigmoidScalar | OutputHead::SigmoidMultitask(_) => {
            loss_classification(&outputs, &labels)?
        }
    };
    let mut grad = alloc::vec![0.0; model.params.len()];
    for ((ex, trace), d) in examples.iter().zip(&traces).zip(&d_pre) {
        accumulate_example(model, &ex.views, trace, d, &mut grad);
    }
    Ok((loss, grad))
}

/// Batch loss and the gradient of that loss with respect to every
/// parameter, in the flat layout order. The loss kind follows the head:
/// sigmoid heads use the clamped mean negative log likelihood, the linear
/// head uses root mean squared error.
pub fn gradient(
    model: &FusionModel,
    examples: &[FeaturizedExample],
) -> Result<(f64, Vec<f64>), GradientError> {
    let refs: Vec<&FeaturizedExample> = examples.iter().collect();
    gradient_refs(model, &refs)
}

pub(crate) fn batch_loss_refs(
    model: &FusionModel,
    examples: &[&FeaturizedExample],
) -> Result<f64, GradientError> {
    if examples.is_empty() {
        return Err(LossError::EmptyBatch.into());
    }
    let mut outputs = Vec::with_capacity(examples.len());
    for ex in examples {
        outputs.push(forward_trace(model, &ex.views)?.y_hat);
    }
    let labels: Vec<Vec<Option<f64>>> = examples.iter().map(|e| e.labels.clone()).collect();
    let (loss, _) = match model.shape.head {
        OutputHead::LinearScalar => loss_regression(&outputs, &labels)?,
        OutputHead::SigmoidScalar | OutputHead::SigmoidMultitask(_) => {
            loss_classification(&outputs, &labels)?
        }
    };
    Ok(loss)
}

/// The batch loss alone, computed exactly as `gradient` computes it.
pub fn batch_loss(
    model: &FusionModel,
    examples: &[FeaturizedExample],
) -> Result<f64, GradientError> {
    let refs: Vec<&FeaturizedExample> = examples.iter().collect();
    batch_loss_refs(model, &refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shape::{InitConfig, ModelShape, OutputHead};
    use crate::views::ViewKind;

    fn example(views: &[&[f64]], labels: &[Option<f64>]) -> FeaturizedExample {
        FeaturizedExample {
            views: views.iter().map(|v| v.to_vec()).collect(),
            labels: labels.to_vec(),
        }
    }

    fn fd_check(model: &FusionModel, examples: &[FeaturizedExample]) {
        let (_, grad) = gradient(model, examples).unwrap();
        let h = 1e-5;
        for (i, &analytic) in grad.iter().enumerate() {
            let mut plus = model.clone();
            plus.params[i] += h;
            let mut minus = model.clone();
            minus.params[i] -= h;
            let numeric = (batch_loss(&plus, examples).unwrap()
                - batch_loss(&minus, examples).unwrap())
                / (2.0 * h);
            let denom = libm::fmax(libm::fmax(libm::fabs(analytic), libm::fabs(numeric)), 1e-5);
            let rel = libm::fabs(analytic - numeric) / denom;
            assert!(
                rel < 1e-4,
                "param {i}: analytic {analytic} vs numeric {numeric} (rel {rel})"
            );
        }
    }

    #[test]
    fn finite_differences_agree_for_classification() {
        let model = FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Structure, 3), (ViewKind::Rule, 2)],
                hidden_dim: 4,
                mlp_hidden: alloc::vec![3],
                head: OutputHead::SigmoidScalar,
            },
            &InitConfig {
                seed: 11,
                scale: 1.0,
            },
        )
        .unwrap();
        let examples = alloc::vec![
            example(&[&[0.3, -0.7, 1.1], &[0.9, 0.2]], &[Some(1.0)]),
            example(&[&[-0.5, 0.4, 0.0], &[-1.2, 0.8]], &[Some(0.0)]),
            example(&[&[1.5, 0.1, -0.3], &[0.0, -0.4]], &[Some(1.0)]),
        ];
        fd_check(&model, &examples);
    }

    #[test]
    fn finite_differences_agree_for_regression_and_masking() {
        let model = FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Task, 2), (ViewKind::Rule, 3)],
                hidden_dim: 3,
                mlp_hidden: alloc::vec![4],
                head: OutputHead::LinearScalar,
            },
            &InitConfig {
                seed: 5,
                scale: 1.0,
            },
        )
        .unwrap();
        let examples = alloc::vec![
            example(&[&[0.3, -0.7], &[1.1, 0.9, 0.2]], &[Some(2.0)]),
            example(&[&[-0.5, 0.4], &[0.0, -1.2, 0.8]], &[Some(-1.0)]),
        ];
        fd_check(&model, &examples);
    }

    #[test]
    fn multitask_gradient_ignores_missing_labels() {
        let model = FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Structure, 2)],
                hidden_dim: 3,
                mlp_hidden: alloc::vec![],
                head: OutputHead::SigmoidMultitask(2),
            },
            &InitConfig {
                seed: 2,
                scale: 1.0,
            },
        )
        .unwrap();
        let examples = alloc::vec![example(&[&[0.4, -0.9]], &[Some(1.0), None])];
        fd_check(&model, &examples);
    }

    #[test]
    fn single_view_gate_carries_no_gradient() {
        // With one view the softmax is constant, so the gate cannot matter.
        let model = FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Rule, 3)],
                hidden_dim: 2,
                mlp_hidden: alloc::vec![2],
                head: OutputHead::SigmoidScalar,
            },
            &InitConfig {
                seed: 9,
                scale: 1.0,
            },
        )
        .unwrap();
        let examples = alloc::vec![example(&[&[0.5, -0.5, 1.0]], &[Some(1.0)])];
        let (_, grad) = gradient(&model, &examples).unwrap();
        let layout = model.layout();
        let gw = &layout.gate_weight;
        assert!(grad[gw.offset..gw.offset + gw.len()]
            .iter()
            .all(|&g| g == 0.0));
        let gb = &layout.gate_bias;
        assert!(grad[gb.offset..gb.offset + gb.len()]
            .iter()
            .all(|&g| g == 0.0));
    }

    #[test]
    fn empty_batch_is_rejected() {
        let model = FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Rule, 1)],
                hidden_dim: 1,
                mlp_hidden: alloc::vec![],
                head: OutputHead::SigmoidScalar,
            },
            &InitConfig::default(),
        )
        .unwrap();
        assert_eq!(
            gradient(&model, &[]),
            Err(GradientError::Loss(LossError::EmptyBatch))
        );
    }
}
