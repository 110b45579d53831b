//! Model architecture and the flat parameter vector. All weights live in one
//! `Vec<f64>` addressed through a computed layout, which keeps the optimizer,
//! finite-difference checks, and checkpointing trivially uniform.

use crate::views::ViewKind;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Final transform and task arity.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    /// One probability through a sigmoid.
    SigmoidScalar,
    /// One unbounded value.
    LinearScalar,
    /// A probability per task, each through its own sigmoid.
    SigmoidMultitask(usize),
}

impl OutputHead {
    pub fn output_width(self) -> usize {
        match self {
            OutputHead::SigmoidScalar | OutputHead::LinearScalar => 1,
            OutputHead::SigmoidMultitask(t) => t,
        }
    }

    pub fn is_classification(self) -> bool {
        !matches!(self, OutputHead::LinearScalar)
    }
}

/// Architecture description. Views are the active subset, in slot order,
/// each with its input width.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ModelShape {
    pub views: Vec<(ViewKind, usize)>,
    /// Shared width every view is projected to, and the fused width.
    pub hidden_dim: usize,
    /// Hidden layer widths of the trunk after the fused input.
    pub mlp_hidden: Vec<usize>,
    pub head: OutputHead,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ShapeError {
    #[error("a model needs at least one active view")]
    NoViews,
    #[error("view {0:?} appears more than once or out of slot order")]
    ViewOrder(ViewKind),
    #[error("all widths must be at least 1")]
    ZeroWidth,
}

/// Offset and extent of one parameter matrix or bias within the flat vector.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Resolved addresses of every segment.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Layout {
    pub view_weights: Vec<Segment>,
    pub view_biases: Vec<Segment>,
    pub gate_weight: Segment,
    pub gate_bias: Segment,
    pub mlp_weights: Vec<Segment>,
    pub mlp_biases: Vec<Segment>,
    pub total_len: usize,
}

impl ModelShape {
    pub fn validate(&self) -> Result<(), ShapeError> {
        if self.views.is_empty() {
            return Err(ShapeError::NoViews);
        }
        for pair in self.views.windows(2) {
            if pair[0].0.slot() >= pair[1].0.slot() {
                return Err(ShapeError::ViewOrder(pair[1].0));
            }
        }
        let widths_ok = self.hidden_dim >= 1
            && self.views.iter().all(|&(_, d)| d >= 1)
            && self.mlp_hidden.iter().all(|&w| w >= 1)
            && self.head.output_width() >= 1;
        if !widths_ok {
            return Err(ShapeError::ZeroWidth);
        }
        Ok(())
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    /// Widths of the trunk's affine layers: fused input through head input.
    fn trunk_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.mlp_hidden.len() + 2);
        dims.push(self.hidden_dim);
        dims.extend_from_slice(&self.mlp_hidden);
        dims.push(self.head.output_width());
        dims
    }

    pub fn layout(&self) -> Layout {
        let d = self.hidden_dim;
        let a = self.view_count();
        let mut offset = 0;
        let mut seg = |name: String, rows: usize, cols: usize| {
            let s = Segment {
                name,
                offset,
                rows,
                cols,
            };
            offset += s.len();
            s
        };

        let mut view_weights = Vec::with_capacity(a);
        let mut view_biases = Vec::with_capacity(a);
        for &(view, input_dim) in &self.views {
            view_weights.push(seg(alloc::format!("proj_{}_w", view.name()), d, input_dim));
            view_biases.push(seg(alloc::format!("proj_{}_b", view.name()), d, 1));
        }
        let gate_weight = seg(String::from("gate_w"), a, a * d);
        let gate_bias = seg(String::from("gate_b"), a, 1);

        let dims = self.trunk_dims();
        let mut mlp_weights = Vec::new();
        let mut mlp_biases = Vec::new();
        for (l, pair) in dims.windows(2).enumerate() {
            mlp_weights.push(seg(alloc::format!("trunk_{l}_w"), pair[1], pair[0]));
            mlp_biases.push(seg(alloc::format!("trunk_{l}_b"), pair[1], 1));
        }

        Layout {
            view_weights,
            view_biases,
            gate_weight,
            gate_bias,
            mlp_weights,
            mlp_biases,
            total_len: offset,
        }
    }
}

impl Layout {
    /// Every segment in parameter order.
    pub fn segments(&self) -> Vec<&Segment> {
        let mut all: Vec<&Segment> = Vec::new();
        for (w, b) in self.view_weights.iter().zip(&self.view_biases) {
            all.push(w);
            all.push(b);
        }
        all.push(&self.gate_weight);
        all.push(&self.gate_bias);
        for (w, b) in self.mlp_weights.iter().zip(&self.mlp_biases) {
            all.push(w);
            all.push(b);
        }
        all
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct InitConfig {
    pub seed: u64,
    /// Multiplier on the Xavier limit; 1.0 is standard.
    pub scale: f64,
}

impl Default for InitConfig {
    fn default() -> InitConfig {
        InitConfig {
            seed: 0,
            scale: 1.0,
        }
    }
}

/// The model: an architecture plus its flat parameter vector.
#[derive(Clone, PartialEq, Debug)]
pub struct FusionModel {
    pub shape: ModelShape,
    pub params: Vec<f64>,
}

impl FusionModel {
    /// Initialize weights Xavier-uniform and biases zero, except the gate,
    /// whose weights and bias start at zero so attention begins exactly
    /// uniform over the active views.
    pub fn new(shape: ModelShape, init: &InitConfig) -> Result<FusionModel, ShapeError> {
        shape.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
        Ok(FusionModel::init_with(shape, init.scale, &mut rng))
    }

    /// Initialization drawing from a caller-owned random stream. The shape
    /// must already be validated.
    pub(crate) fn init_with(shape: ModelShape, scale: f64, rng: &mut ChaCha8Rng) -> FusionModel {
        let layout = shape.layout();
        let mut params = alloc::vec![0.0; layout.total_len];

        let mut xavier = |seg: &Segment, params: &mut [f64]| {
            let fan = (seg.cols + seg.rows) as f64;
            let limit = scale * crate::fmath::sqrt(6.0 / fan);
            for p in params[seg.offset..seg.offset + seg.len()].iter_mut() {
                *p = rng.random_range(-limit..limit);
            }
        };
        for seg in &layout.view_weights {
            xavier(seg, &mut params);
        }
        for seg in &layout.mlp_weights {
            xavier(seg, &mut params);
        }
        // Gate weights, gate bias, and all other biases stay zero.

        FusionModel { shape, params }
    }

    pub fn layout(&self) -> Layout {
        self.shape.layout()
    }

    pub fn param_len(&self) -> usize {
        self.params.len()
    }

    pub fn segment<'a>(&'a self, seg: &Segment) -> &'a [f64] {
        &self.params[seg.offset..seg.offset + seg.len()]
    }
}
