//! Binomial probabilities evaluated in log space.
//!
//! Terms are generated by the recurrence
//! `t_{k+1} = t_k * (n - k) / (k + 1) * p / (1 - p)` starting from
//! `t_0 = (1 - p)^n`, carried as logarithms so that neither `C(n, k)` nor
//! `(1 - p)^n` overflows or underflows for large `n`. Sums are taken relative to
//! the largest term with compensated accumulation, and the larger of the two
//! tails is taken as the complement of the smaller.

use crate::numeric::{log_sum_exp, NeumaierSum};
use crate::rng::SimRng;

/// `ln P(X = k)` for `k = 0..=upto`, `X ~ Binomial(n, p)`, with `0 < p < 1`.
fn ln_terms(n: u64, p: f64, upto: u64) -> Vec<f64> {
    debug_assert!(p > 0.0 && p < 1.0);
    let upto = upto.min(n);
    let ln_q = (-p).ln_1p();
    let ln_odds = p.ln() - ln_q;
    let mut out = Vec::with_capacity(upto as usize + 1);
    let mut acc = NeumaierSum::new();
    acc.add(n as f64 * ln_q);
    out.push(acc.value());
    for k in 0..upto {
        acc.add(((n - k) as f64 / (k + 1) as f64).ln());
        acc.add(ln_odds);
        out.push(acc.value());
    }
    out
}

/// `ln P(X <= cutoff)`.
pub fn ln_lower_tail(n: u64, p: f64, cutoff: u64) -> f64 {
    if cutoff >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    log_sum_exp(&ln_terms(n, p, cutoff)).min(0.0)
}

/// `ln P(X > cutoff)`, evaluated directly rather than as a complement.
pub fn ln_upper_tail(n: u64, p: f64, cutoff: u64) -> f64 {
    if cutoff >= n || p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let terms = ln_terms(n, p, n);
    log_sum_exp(&terms[cutoff as usize + 1..]).min(0.0)
}

/// Both tails for `0 < p < 1` and `cutoff < n`; the smaller one is summed and
/// the larger taken as its complement.
fn tails(n: u64, p: f64, cutoff: u64) -> (f64, f64) {
    let terms = ln_terms(n, p, n);
    let (lower, upper) = terms.split_at(cutoff as usize + 1);
    let ln_lower = log_sum_exp(lower);
    let ln_upper = log_sum_exp(upper);
    if ln_lower <= ln_upper {
        let lo = ln_lower.exp().min(1.0);
        (lo, 1.0 - lo)
    } else {
        let hi = ln_upper.exp().min(1.0);
        (1.0 - hi, hi)
    }
}

/// `P(X <= cutoff)` for `X ~ Binomial(n, p)`.
///
/// `p = 0` gives 1; `p = 1` gives 1 only when `cutoff >= n`.
pub fn lower_tail(n: u64, p: f64, cutoff: u64) -> f64 {
    if cutoff >= n || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    tails(n, p, cutoff).0
}

/// `P(X > cutoff)`.
pub fn upper_tail(n: u64, p: f64, cutoff: u64) -> f64 {
    if cutoff >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    tails(n, p, cutoff).1
}

/// Full mass function `P(X = k)`, `k = 0..=n`.
pub fn pmf(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    if p <= 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; len];
        v[len - 1] = 1.0;
        return v;
    }
    ln_terms(n, p, n).into_iter().map(f64::exp).collect()
}

/// Smallest `k` whose cumulative mass reaches `u`, scanning `masses` upward.
///
/// If rounding leaves the total below `u`, the last outcome with positive mass
/// is returned.
pub fn invert_cdf(masses: &[f64], u: f64) -> u64 {
    let mut cumulative = NeumaierSum::new();
    let mut last_positive = 0;
    for (k, &m) in masses.iter().enumerate() {
        if m > 0.0 {
            last_positive = k;
        }
        cumulative.add(m);
        if u < cumulative.value() {
            return k as u64;
        }
    }
    last_positive as u64
}

/// One `Binomial(n, p)` draw by CDF inversion.
pub fn sample(n: u64, p: f64, rng: &mut SimRng) -> u64 {
    invert_cdf(&pmf(n, p), rng.uniform())
}
