//! Attention read-out: how much each view contributes to predictions,
//! per molecule and on average.

use super::forward::{expand_alpha, forward_trace, ForwardError};
use super::shape::FusionModel;
use super::train::FeaturizedExample;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Attention weights expanded to the fixed three view slots
/// (structure, task, rule); inactive views read 0.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ContributionReport {
    pub mean_alpha: [f64; 3],
    pub per_molecule: Vec<[f64; 3]>,
}

/// Attention weights for every example under the current parameters.
/// An empty input yields an empty report with a zero mean.
pub fn component_contributions(
    model: &FusionModel,
    examples: &[FeaturizedExample],
) -> Result<ContributionReport, ForwardError> {
    let mut per_molecule = Vec::with_capacity(examples.len());
    let mut mean_alpha = [0.0; 3];
    for ex in examples {
        let trace = forward_trace(model, &ex.views)?;
        let alpha = expand_alpha(&model.shape.views, &trace.alpha);
        for (m, a) in mean_alpha.iter_mut().zip(&alpha) {
            *m += a;
        }
        per_molecule.push(alpha);
    }
    if !per_molecule.is_empty() {
        let n = per_molecule.len() as f64;
        for m in &mut mean_alpha {
            *m /= n;
        }
    }
    Ok(ContributionReport {
        mean_alpha,
        per_molecule,
    })
}
