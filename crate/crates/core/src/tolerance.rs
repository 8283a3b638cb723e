//! Productivity decisions for a rule over `N` items with `e` exceptions.
//!
//! Three criteria are provided:
//!
//! * the closed form `e <= N / ln N` ([`is_productive`]),
//! * the serial-search cost comparison `T(N, e) < T(N, N)` under Zipfian item
//!   frequencies with exponent 1 ([`productive_base_form`]),
//! * the largest tolerated `e` under the cost comparison, found by exhaustive
//!   scan ([`intermediate_threshold`]).
//!
//! The non-strict `<=` of the closed form and the strict `<` of the cost
//! comparison are kept as they are; [`threshold_agreement`] reports where the
//! two disagree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Above this index harmonic numbers come from the asymptotic expansion.
pub const HARMONIC_DIRECT_LIMIT: u64 = 1_000_000;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Distance from an integer below which the cutoff floor is reported.
const CUTOFF_PROXIMITY: f64 = 1e-12;

/// Item and exception counts for one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleStats {
    n_items: u64,
    n_exceptions: u64,
}

impl RuleStats {
    /// Requires `n_items >= 2` and `n_exceptions <= n_items`.
    pub fn new(n_items: u64, n_exceptions: u64) -> Result<Self> {
        if n_items < 2 {
            return Err(Error::TooFewItems { min: 2, found: n_items });
        }
        if n_exceptions > n_items {
            return Err(Error::ExceptionsExceedItems { n_items, n_exceptions });
        }
        Ok(RuleStats { n_items, n_exceptions })
    }

    pub fn n_items(&self) -> u64 {
        self.n_items
    }

    pub fn n_exceptions(&self) -> u64 {
        self.n_exceptions
    }
}

/// Zipfian rank-frequency law over `n_items` ranks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZipfSpec {
    n_items: u64,
    exponent: f64,
}

impl ZipfSpec {
    pub fn new(n_items: u64, exponent: f64) -> Result<Self> {
        if n_items < 1 {
            return Err(Error::TooFewItems { min: 1, found: n_items });
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::InvalidExponent(exponent));
        }
        Ok(ZipfSpec { n_items, exponent })
    }

    pub fn n_items(&self) -> u64 {
        self.n_items
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `sum_{k=1..N} k^-s`.
    pub fn normalizer(&self) -> f64 {
        (1..=self.n_items).map(|k| (k as f64).powf(-self.exponent)).collect::<NeumaierSum>().value()
    }
}

/// Expected lookup steps of the exception-first search and of the fully ranked listing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostPair {
    pub cost_ecm: f64,
    pub cost_ranked: f64,
}

/// Running harmonic numbers `H_0, H_1, H_2, ...`.
///
/// Yields exactly the same values as [`harmonic`] for every index.
#[derive(Debug, Clone)]
pub struct HarmonicSeq {
    next: u64,
    acc: NeumaierSum,
}

impl HarmonicSeq {
    pub fn new() -> Self {
        HarmonicSeq { next: 0, acc: NeumaierSum::new() }
    }
}

impl Default for HarmonicSeq {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for HarmonicSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let j = self.next;
        self.next += 1;
        if j == 0 {
            return Some(0.0);
        }
        if j > HARMONIC_DIRECT_LIMIT {
            return Some(harmonic_asymptotic(j));
        }
        self.acc.add(1.0 / j as f64);
        Some(self.acc.value())
    }
}

/// `H_j = sum_{k=1..j} 1/k`, with `H_0 = 0`.
pub fn harmonic(j: u64) -> f64 {
    if j > HARMONIC_DIRECT_LIMIT {
        return harmonic_asymptotic(j);
    }
    let mut acc = NeumaierSum::new();
    for k in 1..=j {
        acc.add(1.0 / k as f64);
    }
    acc.value()
}

/// `ln j + gamma + 1/(2j) - 1/(12 j^2)`.
pub fn harmonic_asymptotic(j: u64) -> f64 {
    let x = j as f64;
    let mut acc = NeumaierSum::new();
    acc.add(x.ln());
    acc.add(EULER_GAMMA);
    acc.add(0.5 / x);
    acc.add(-1.0 / (12.0 * x * x));
    acc.value()
}

/// `theta_N = N / ln N`, not floored.
pub fn tolerance_threshold(n_items: u64) -> Result<f64> {
    if n_items < 2 {
        return Err(Error::TooFewItems { min: 2, found: n_items });
    }
    let n = n_items as f64;
    Ok(n / n.ln())
}

/// `floor(N / ln N)`, the largest tolerated exception count.
pub fn threshold_cutoff(n_items: u64) -> Result<u64> {
    let theta = tolerance_threshold(n_items)?;
    let nearest = theta.round();
    if (theta - nearest).abs() < CUTOFF_PROXIMITY {
        log::warn!("N/ln N = {theta:.17} for N = {n_items} lies within {CUTOFF_PROXIMITY:e} of an integer");
    }
    Ok(theta.floor() as u64)
}

/// Closed-form criterion: productive iff `e <= N / ln N`.
pub fn is_productive(stats: RuleStats) -> bool {
    let n = stats.n_items as f64;
    stats.n_exceptions as f64 <= n / n.ln()
}

/// Frequency of `rank` under the Zipfian law.
pub fn zipf_frequency(spec: ZipfSpec, rank: u64) -> Result<f64> {
    if rank < 1 || rank > spec.n_items {
        return Err(Error::RankOutOfRange { rank, n_items: spec.n_items });
    }
    Ok((rank as f64).powf(-spec.exponent) / spec.normalizer())
}

/// `T(N, N) = N / H_N`.
pub fn expected_cost_ranked(n_items: u64) -> Result<f64> {
    if n_items < 1 {
        return Err(Error::TooFewItems { min: 1, found: n_items });
    }
    Ok(n_items as f64 / harmonic(n_items))
}

fn ecm_cost(n_items: u64, n_exceptions: u64, h_e: f64) -> f64 {
    if n_exceptions == 0 {
        return 0.0;
    }
    let n = n_items as f64;
    let e = n_exceptions as f64;
    let share = e / n;
    share * (e / h_e) + (1.0 - share) * e
}

/// `T(N, e) = (e/N)(e/H_e) + (1 - e/N) e`, with `T(N, 0) = 0`.
pub fn expected_cost_ecm(stats: RuleStats) -> f64 {
    ecm_cost(stats.n_items, stats.n_exceptions, harmonic(stats.n_exceptions))
}

pub fn cost_pair(stats: RuleStats) -> CostPair {
    CostPair { cost_ecm: expected_cost_ecm(stats), cost_ranked: stats.n_items as f64 / harmonic(stats.n_items) }
}

/// Cost criterion: productive iff `T(N, e) < T(N, N)`.
pub fn productive_base_form(stats: RuleStats) -> bool {
    let pair = cost_pair(stats);
    pair.cost_ecm < pair.cost_ranked
}

/// Result of scanning every `e` in `0..=N` under the cost criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseFormScan {
    pub n_items: u64,
    /// Largest `e` judged productive.
    pub largest_productive: u64,
    /// Productive exception counts form a prefix `0..=largest_productive`.
    pub prefix_shaped: bool,
    /// `T(N, e)` was nondecreasing in `e` over the whole scan.
    pub cost_nondecreasing: bool,
    /// Number of `e` where the cost criterion and `e <= N / ln N` disagree.
    pub disagreements: u64,
}

/// Exhaustive scan of the cost criterion over `e = 0..=N`.
pub fn scan_base_form(n_items: u64) -> Result<BaseFormScan> {
    let theta = tolerance_threshold(n_items)?;
    let ranked = n_items as f64 / harmonic(n_items);
    let mut largest = 0;
    let mut prefix_shaped = true;
    let mut cost_nondecreasing = true;
    let mut seen_unproductive = false;
    let mut previous_cost = f64::NEG_INFINITY;
    let mut disagreements = 0;
    for (e, h_e) in (0..=n_items).zip(HarmonicSeq::new()) {
        let cost = ecm_cost(n_items, e, h_e);
        if cost < previous_cost {
            cost_nondecreasing = false;
        }
        previous_cost = cost;
        let productive = cost < ranked;
        if productive {
            largest = e;
            if seen_unproductive {
                prefix_shaped = false;
            }
        } else {
            seen_unproductive = true;
        }
        if productive != (e as f64 <= theta) {
            disagreements += 1;
        }
    }
    Ok(BaseFormScan { n_items, largest_productive: largest, prefix_shaped, cost_nondecreasing, disagreements })
}

/// Largest `e` in `0..=N` that the cost criterion judges productive.
pub fn intermediate_threshold(n_items: u64) -> Result<u64> {
    let scan = scan_base_form(n_items)?;
    if !scan.prefix_shaped {
        log::warn!("productive exception counts do not form a prefix for N = {n_items}: {scan:?}");
    }
    Ok(scan.largest_productive)
}

/// One row of the comparison between the cost criterion and `N / ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub n_items: u64,
    pub theta: f64,
    pub floor_theta: u64,
    pub intermediate: u64,
    /// `intermediate / theta`.
    pub ratio: f64,
    pub disagreements: u64,
    /// Productive exception counts form a prefix of `0..=N`.
    pub monotone: bool,
}

pub fn threshold_row(n_items: u64) -> Result<ThresholdRow> {
    let theta = tolerance_threshold(n_items)?;
    let scan = scan_base_form(n_items)?;
    Ok(ThresholdRow {
        n_items,
        theta,
        floor_theta: theta.floor() as u64,
        intermediate: scan.largest_productive,
        ratio: scan.largest_productive as f64 / theta,
        disagreements: scan.disagreements,
        monotone: scan.prefix_shaped,
    })
}

/// Rows for every `N` in `from..=to`, computed in parallel.
pub fn threshold_agreement(from: u64, to: u64) -> Result<Vec<ThresholdRow>> {
    use rayon::prelude::*;
    if from < 2 {
        return Err(Error::TooFewItems { min: 2, found: from });
    }
    (from..=to).into_par_iter().map(threshold_row).collect()
}
