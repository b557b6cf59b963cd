//! Serializable summary of one evaluated design.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::system::SystemConfig;

/// Outcome of one method on one channel realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub seed: u64,
    pub se_bits_per_hz: f64,
    pub per_user_se: Vec<f64>,
    /// Analog-network power; absent for the fully digital transceiver.
    pub power_total_w: Option<f64>,
    /// Precoder iterations (maximum over groups).
    pub iterations: usize,
    pub converged: bool,
    /// Size of the surviving gain-candidate set per switch update -> count.
    pub candidate_set_sizes: BTreeMap<usize, usize>,
    /// Switch updates that fell back to endpoint evaluation.
    pub fallbacks: usize,
    /// Random-switch draws that were all zero and redrawn.
    pub resamples: usize,
    pub kappa: Option<f64>,
    pub max_leakage: Option<f64>,
    /// `|sum ||T||^2 - K Ns F|`.
    pub power_error: f64,
    pub config: SystemConfig,
}

pub fn candidate_histogram(counts: impl IntoIterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for c in counts {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}
