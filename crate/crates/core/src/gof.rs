//! Pearson chi-square goodness of fit for discrete distributions.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Bins are pooled left to right until each expected count reaches this value.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Compares observed counts against category probabilities.
///
/// Adjacent categories are pooled so every expected count is at least
/// [`MIN_EXPECTED`]; a short remainder joins the last pooled bin. With a single
/// pooled bin there are no degrees of freedom and the p-value is 1. Any
/// observation in a zero-probability category gives a p-value of 0.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len(), "observed and expected lengths differ");
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    if observed.iter().zip(probs).any(|(&o, &p)| o > 0 && p <= 0.0) {
        return ChiSquareResult { statistic: f64::INFINITY, degrees_of_freedom: 0, p_value: 0.0 };
    }

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        pending.0 += o as f64;
        pending.1 += p * total;
        if pending.1 >= MIN_EXPECTED {
            bins.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.0 > 0.0 || pending.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => bins.push(pending),
        }
    }

    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let degrees_of_freedom = bins.len().saturating_sub(1);
    let p_value = if degrees_of_freedom == 0 {
        if statistic.is_finite() {
            1.0
        } else {
            0.0
        }
    } else if statistic.is_finite() {
        let dist = ChiSquared::new(degrees_of_freedom as f64).expect("positive degrees of freedom");
        dist.sf(statistic)
    } else {
        0.0
    };
    ChiSquareResult { statistic, degrees_of_freedom, p_value }
}
