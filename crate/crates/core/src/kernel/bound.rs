//! Segment-length schedule, the round bound it balances, and wire counts.

use serde::Serialize;

use crate::bus::word_width;
use crate::mmpb::{BusModel, ConfigError};

/// Segment lengths `ℓ_j = 2^{e_j}` with `e_j = max(1, ⌈2(L − j + 1)·log₂ n / (2L + 1)⌉)`,
/// which balances the terms of [`eval_bound`].
pub fn choose_segment_lengths(n: usize, levels: usize) -> Result<Vec<usize>, ConfigError> {
    if !n.is_power_of_two() {
        return Err(ConfigError::NotPowerOfTwo(n));
    }
    let e = n.trailing_zeros() as usize;
    if levels == 0 {
        return Err(ConfigError::NoLevels);
    }
    if levels > e {
        return Err(ConfigError::TooManyLevels { levels, max: e });
    }
    let den = 2 * levels + 1;
    Ok((1..=levels)
        .map(|j| {
            let num = 2 * (levels - j + 1) * e;
            let ej = num.div_ceil(den).clamp(1, e);
            1usize << ej
        })
        .collect())
}

/// `B(k) = 2√ℓ_k + 2·Σ_{j<k} √(ℓ_j / ℓ_{j+1}) + n/ℓ_1 + k`.
pub fn eval_bound(n: usize, lengths: &[usize], k: usize) -> f64 {
    assert!(k >= 1 && k <= lengths.len(), "k must name an existing level");
    let l = |j: usize| lengths[j - 1] as f64;
    let chain: f64 = (1..k).map(|j| (l(j) / l(j + 1)).sqrt()).sum();
    2.0 * l(k).sqrt() + 2.0 * chain + n as f64 / l(1) + k as f64
}

/// `L · n^{1/(2L+1)}`.
pub fn level_term(n: usize, levels: usize) -> f64 {
    levels as f64 * (n as f64).powf(1.0 / (2 * levels + 1) as f64)
}

/// A measured round count against [`eval_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepBound {
    pub bound: f64,
    pub measured: u64,
    /// `measured / bound`: the constant this run needs.
    pub ratio: f64,
}

impl StepBound {
    pub fn new(n: usize, lengths: &[usize], k: usize, measured: u64) -> Self {
        let bound = eval_bound(n, lengths, k);
        StepBound {
            bound,
            measured,
            ratio: measured as f64 / bound,
        }
    }
}

/// Wires per row or column: what the host needs against what the guest has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WireBudget {
    pub required: usize,
    pub available: usize,
    pub feasible: bool,
}

/// The guest's separable bus has `⌈log₂ n⌉` wires; the host needs one wire
/// per level in the bit model and a word's worth per level otherwise.
pub fn wire_budget(n: usize, levels: usize, model: BusModel) -> WireBudget {
    let w = word_width(n) as usize;
    let required = match model {
        BusModel::Bit => levels,
        BusModel::Word => levels * w,
    };
    WireBudget {
        required,
        available: w,
        feasible: required <= w,
    }
}
