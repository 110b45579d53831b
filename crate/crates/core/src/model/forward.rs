//! Forward pass. `predict` yields the head output and attention weights;
//! `forward_trace` additionally captures every intermediate the backward
//! pass needs.

use super::shape::{FusionModel, OutputHead};
use crate::views::ViewKind;
use alloc::vec::Vec;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ForwardError {
    #[error("model expects {expected} views, example provides {got}")]
    ViewCountMismatch { expected: usize, got: usize },
    #[error("view {view:?} expects width {expected}, example provides {got}")]
    ViewDimMismatch {
        view: ViewKind,
        expected: usize,
        got: usize,
    },
    #[error("parameter vector has length {got}, layout requires {expected}")]
    ParamLenMismatch { expected: usize, got: usize },
}

/// y = W x, with `w` row-major `rows x cols`.
pub(crate) fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (wv, xv) in row.iter().zip(x) {
            acc += wv * xv;
        }
        *o = acc;
    }
}

pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + crate::fmath::exp(-x))
    } else {
        let e = crate::fmath::exp(x);
        e / (1.0 + e)
    }
}

/// Softmax with the usual max-shift for stability.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    for &l in logits {
        m = crate::fmath::max(m, l);
    }
    let mut out: Vec<f64> = logits.iter().map(|&l| crate::fmath::exp(l - m)).collect();
    let sum: f64 = out.iter().sum();
    for o in &mut out {
        *o /= sum;
    }
    out
}

/// Everything computed on the way to the head, kept for the backward pass.
#[derive(Clone, PartialEq, Debug)]
pub struct ForwardTrace {
    /// Per-view projections, concatenated in view order (`a * d` values).
    pub concat: Vec<f64>,
    /// Gate pre-softmax scores, one per active view.
    pub gate_logits: Vec<f64>,
    /// Attention over active views; non-negative, sums to 1.
    pub alpha: Vec<f64>,
    /// Attention-weighted sum of projections (`d` values).
    pub fused: Vec<f64>,
    /// Input to each trunk layer (layer 0 sees `fused`).
    pub trunk_inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each trunk layer.
    pub trunk_pre: Vec<Vec<f64>>,
    /// Head output: probabilities for sigmoid heads, raw value otherwise.
    pub y_hat: Vec<f64>,
}

impl ForwardTrace {
    pub fn pre_head(&self) -> &[f64] {
        self.trunk_pre.last().expect("trunk has at least one layer")
    }
}

/// Head output plus attention expanded to all three view slots
/// (inactive views read 0).
#[derive(Clone, PartialEq, Debug, serde::Serialize, serde::Deserialize)]
pub struct Prediction {
    pub y_hat: Vec<f64>,
    pub alpha: [f64; 3],
}

pub(crate) fn check_views(model: &FusionModel, views: &[Vec<f64>]) -> Result<(), ForwardError> {
    let layout_len = model.shape.layout().total_len;
    if model.params.len() != layout_len {
        return Err(ForwardError::ParamLenMismatch {
            expected: layout_len,
            got: model.params.len(),
        });
    }
    if views.len() != model.shape.views.len() {
        return Err(ForwardError::ViewCountMismatch {
            expected: model.shape.views.len(),
            got: views.len(),
        });
    }
    for (&(kind, dim), x) in model.shape.views.iter().zip(views) {
        if x.len() != dim {
            return Err(ForwardError::ViewDimMismatch {
                view: kind,
                expected: dim,
                got: x.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn forward_trace(
    model: &FusionModel,
    views: &[Vec<f64>],
) -> Result<ForwardTrace, ForwardError> {
    check_views(model, views)?;
    let shape = &model.shape;
    let layout = shape.layout();
    let d = shape.hidden_dim;
    let a = shape.view_count();

    let mut concat = alloc::vec![0.0; a * d];
    for v in 0..a {
        let w = model.segment(&layout.view_weights[v]);
        let b = model.segment(&layout.view_biases[v]);
        let out = &mut concat[v * d..(v + 1) * d];
        matvec(w, d, shape.views[v].1, &views[v], out);
        for (o, bias) in out.iter_mut().zip(b) {
            *o += bias;
        }
    }

    let mut gate_logits = alloc::vec![0.0; a];
    matvec(
        model.segment(&layout.gate_weight),
        a,
        a * d,
        &concat,
        &mut gate_logits,
    );
    for (l, bias) in gate_logits.iter_mut().zip(model.segment(&layout.gate_bias)) {
        *l += bias;
    }
    let alpha = softmax(&gate_logits);

    let mut fused = alloc::vec![0.0; d];
    for v in 0..a {
        let p = &concat[v * d..(v + 1) * d];
        for (f, pv) in fused.iter_mut().zip(p) {
            *f += alpha[v] * pv;
        }
    }

    let layer_count = layout.mlp_weights.len();
    let mut trunk_inputs = Vec::with_capacity(layer_count);
    let mut trunk_pre = Vec::with_capacity(layer_count);
    let mut current = fused.clone();
    for l in 0..layer_count {
        let wseg = &layout.mlp_weights[l];
        let mut pre = alloc::vec![0.0; wseg.rows];
        matvec(
            model.segment(wseg),
            wseg.rows,
            wseg.cols,
            &current,
            &mut pre,
        );
        for (p, bias) in pre.iter_mut().zip(model.segment(&layout.mlp_biases[l])) {
            *p += bias;
        }
        trunk_inputs.push(current);
        let last = l + 1 == layer_count;
        current = if last {
            pre.clone()
        } else {
            pre.iter().map(|&z| crate::fmath::max(z, 0.0)).collect()
        };
        trunk_pre.push(pre);
    }

    let y_hat = match shape.head {
        OutputHead::LinearScalar => current,
        OutputHead::SigmoidScalar | OutputHead::SigmoidMultitask(_) => {
            current.iter().map(|&z| stable_sigmoid(z)).collect()
        }
    };

    Ok(ForwardTrace {
        concat,
        gate_logits,
        alpha,
        fused,
        trunk_inputs,
        trunk_pre,
        y_hat,
    })
}

/// Run the model on one example's view vectors (in view order).
pub fn predict(model: &FusionModel, views: &[Vec<f64>]) -> Result<Prediction, ForwardError> {
    let trace = forward_trace(model, views)?;
    Ok(Prediction {
        y_hat: trace.y_hat,
        alpha: expand_alpha(&model.shape.views, &trace.alpha),
    })
}

/// Scatter active-view attention into the fixed three-slot array.
pub(crate) fn expand_alpha(views: &[(ViewKind, usize)], alpha: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (&(kind, _), &a) in views.iter().zip(alpha) {
        out[kind.slot()] = a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shape::{InitConfig, ModelShape};

    fn tiny_model() -> FusionModel {
        FusionModel::new(
            ModelShape {
                views: alloc::vec![(ViewKind::Structure, 3), (ViewKind::Rule, 2)],
                hidden_dim: 4,
                mlp_hidden: alloc::vec![5],
                head: OutputHead::SigmoidScalar,
            },
            &InitConfig {
                seed: 3,
                scale: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn fresh_model_attends_uniformly() {
        let model = tiny_model();
        let p = predict(
            &model,
            &[alloc::vec![0.5, -1.0, 2.0], alloc::vec![1.0, 0.0]],
        )
        .unwrap();
        assert!((p.alpha[0] - 0.5).abs() < 1e-15);
        assert_eq!(p.alpha[1], 0.0, "task view inactive");
        assert!((p.alpha[2] - 0.5).abs() < 1e-15);
        assert_eq!(p.y_hat.len(), 1);
        assert!(p.y_hat[0] > 0.0 && p.y_hat[0] < 1.0);
    }

    #[test]
    fn attention_is_a_probability_vector() {
        let mut model = tiny_model();
        // Give the gate arbitrary nonzero weights.
        let layout = model.layout();
        for (i, p) in model.params
            [layout.gate_weight.offset..layout.gate_weight.offset + layout.gate_weight.len()]
            .iter_mut()
            .enumerate()
        {
            *p = ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5;
        }
        let trace = forward_trace(
            &model,
            &[alloc::vec![0.5, -1.0, 2.0], alloc::vec![1.0, 0.0]],
        )
        .unwrap();
        let sum: f64 = trace.alpha.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(trace.alpha.iter().all(|&a| a > 0.0));
    }

    #[test]
    fn hand_computed_linear_model() {
        // One view of width 1, hidden 1, no hidden layers, linear head:
        // y = w_t * (alpha * (w_p x + b_p)) + b_t with a 1-view softmax, so
        // alpha == 1 regardless of the gate.
        let shape = ModelShape {
            views: alloc::vec![(ViewKind::Task, 1)],
            hidden_dim: 1,
            mlp_hidden: alloc::vec![],
            head: OutputHead::LinearScalar,
        };
        let layout = shape.layout();
        let mut params = alloc::vec![0.0; layout.total_len];
        params[layout.view_weights[0].offset] = 2.0;
        params[layout.view_biases[0].offset] = -1.0;
        params[layout.gate_weight.offset] = 123.0; // irrelevant with one view
        params[layout.mlp_weights[0].offset] = 3.0;
        params[layout.mlp_biases[0].offset] = 0.5;
        let model = FusionModel { shape, params };
        let p = predict(&model, &[alloc::vec![4.0]]).unwrap();
        // proj = 2*4 - 1 = 7; fused = 7; y = 3*7 + 0.5 = 21.5
        assert_eq!(p.y_hat, alloc::vec![21.5]);
        assert_eq!(p.alpha[1], 1.0);
    }

    #[test]
    fn dimension_errors_are_reported() {
        let model = tiny_model();
        assert_eq!(
            predict(&model, &[alloc::vec![0.0; 3]]),
            Err(ForwardError::ViewCountMismatch {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            predict(&model, &[alloc::vec![0.0; 3], alloc::vec![0.0; 7]]),
            Err(ForwardError::ViewDimMismatch {
                view: ViewKind::Rule,
                expected: 2,
                got: 7
            })
        );
        let mut truncated = model.clone();
        truncated.params.pop();
        assert!(matches!(
            predict(&truncated, &[alloc::vec![0.0; 3], alloc::vec![0.0; 2]]),
            Err(ForwardError::ParamLenMismatch { .. })
        ));
    }

    #[test]
    fn relu_trunk_gates_negative_preactivations() {
        let shape = ModelShape {
            views: alloc::vec![(ViewKind::Task, 1)],
            hidden_dim: 1,
            mlp_hidden: alloc::vec![2],
            head: OutputHead::LinearScalar,
        };
        let layout = shape.layout();
        let mut params = alloc::vec![0.0; layout.total_len];
        params[layout.view_weights[0].offset] = 1.0;
        // hidden layer: rows 2 x cols 1 -> [1, -1]; output row: [1, 1]
        params[layout.mlp_weights[0].offset] = 1.0;
        params[layout.mlp_weights[0].offset + 1] = -1.0;
        params[layout.mlp_weights[1].offset] = 1.0;
        params[layout.mlp_weights[1].offset + 1] = 1.0;
        let model = FusionModel { shape, params };
        // x=5: hidden pre [5,-5] -> relu [5,0] -> y 5. x=-3: [-3,3]->[0,3]->3.
        assert_eq!(predict(&model, &[alloc::vec![5.0]]).unwrap().y_hat[0], 5.0);
        assert_eq!(predict(&model, &[alloc::vec![-3.0]]).unwrap().y_hat[0], 3.0);
    }
}
