//! Dynamics where learners draw data from the last `M` generations, mixed by
//! fixed cohort weights.
//!
//! The exception probability seen by a learner is the weighted mixture
//! `Q = sum_s w_s (alpha_s p+ + (1 - alpha_s) p-)`, and the next proportion is
//! the same binomial tail as in the single-generation map, evaluated at `Q`.
//! A full initial history of `M` generations must be supplied.

use serde::Serialize;

use crate::deterministic::{self, fixed_points, mix_exception, productive_prob, EnvParams, PopulationState};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Tolerance on the sum of cohort weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Mixture weights over the last `M` generations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortWeights(Vec<f64>);

impl CohortWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeight { index, value });
        }
        let sum = weights.iter().copied().collect::<NeumaierSum>().value();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        Ok(CohortWeights(weights))
    }

    /// Equal weight `1/M` on each of `m` generations.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// All weight on the newest generation.
    pub fn newest_only(m: usize) -> Result<Self> {
        let mut w = vec![0.0; m];
        if let Some(last) = w.last_mut() {
            *last = 1.0;
        }
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Productive-speaker proportions of the last `M` generations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryState(Vec<f64>);

impl HistoryState {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidArgument("history must hold at least one generation".into()));
        }
        for &a in &alphas {
            PopulationState::new(a)?;
        }
        Ok(HistoryState(alphas))
    }

    /// `m` copies of `alpha`.
    pub fn constant(alpha: f64, m: usize) -> Result<Self> {
        Self::new(vec![alpha; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn newest(&self) -> f64 {
        *self.0.last().expect("history is nonempty")
    }

    /// Drops the oldest entry and appends `alpha`.
    pub fn shifted(&self, alpha: f64) -> HistoryState {
        let mut next = Vec::with_capacity(self.0.len());
        next.extend_from_slice(&self.0[1..]);
        next.push(alpha);
        HistoryState(next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Exception,
    Rule,
}

/// Probability that a speaker of a generation with proportion `alpha_s`
/// produces `outcome`.
pub fn g_term(alpha_s: f64, outcome: Outcome, params: &EnvParams) -> f64 {
    match outcome {
        Outcome::Exception => mix_exception(alpha_s, params),
        Outcome::Rule => alpha_s * params.p_plus_rule() + (1.0 - alpha_s) * params.p_minus_rule(),
    }
}

/// `Q = sum_s w_s g_s^e`. A constant history gives `g^e` itself.
pub fn mixture_exception_prob(history: &HistoryState, weights: &CohortWeights, params: &EnvParams) -> Result<f64> {
    if history.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), found: history.len() });
    }
    if history.0.iter().all(|&a| a == history.0[0]) {
        return Ok(g_term(history.0[0], Outcome::Exception, params));
    }
    let mut q = 0.0;
    for (&w, &a) in weights.0.iter().zip(&history.0) {
        q += w * g_term(a, Outcome::Exception, params);
    }
    Ok(q)
}

/// Next proportion of productive speakers.
pub fn step_multigen(history: &HistoryState, weights: &CohortWeights, params: &EnvParams) -> Result<f64> {
    let q = mixture_exception_prob(history, weights, params)?;
    Ok(productive_prob(q, params).clamp(0.0, 1.0))
}

/// Proportions `alpha` whose constant history is reproduced by the
/// multi-generation map, found with the same scan as
/// [`deterministic::fixed_points`].
pub fn constant_history_fixed_points(
    weights: &CohortWeights,
    params: &EnvParams,
    grid_size: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let m = weights.len();
    deterministic::scan_roots(
        |a| {
            let history = HistoryState(vec![a; m]);
            step_multigen(&history, weights, params).expect("history length matches weights") - a
        },
        grid_size,
        tol,
    )
}

/// Rolls the history forward, returning the `generations` new proportions.
pub fn trajectory_multigen(
    initial: &HistoryState,
    weights: &CohortWeights,
    params: &EnvParams,
    generations: usize,
) -> Result<Vec<f64>> {
    let mut history = initial.clone();
    let mut out = Vec::with_capacity(generations);
    for _ in 0..generations {
        let next = step_multigen(&history, weights, params)?;
        out.push(next);
        history = history.shifted(next);
    }
    Ok(out)
}

/// Comparison of a multi-generation run against the single-generation map
/// started from the newest entry of the same history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultigenComparison {
    pub multigen: Vec<f64>,
    pub single: Vec<f64>,
    /// Fixed point of the single-generation map nearest the single run's endpoint.
    pub fixed_point: Option<f64>,
    /// First generation (1-based) within `settle_tol` of the fixed point, if reached.
    pub multigen_settle: Option<usize>,
    pub single_settle: Option<usize>,
    /// `multigen_settle - single_settle`.
    pub lag: Option<i64>,
    /// Largest `|multigen_t - single_t|` over the run.
    pub max_gap: f64,
    /// Largest one-generation change along each run.
    pub multigen_max_jump: f64,
    pub single_max_jump: f64,
}

pub fn compare_with_single_generation(
    initial: &HistoryState,
    weights: &CohortWeights,
    params: &EnvParams,
    generations: usize,
    settle_tol: f64,
) -> Result<MultigenComparison> {
    let multigen = trajectory_multigen(initial, weights, params, generations)?;
    let start = PopulationState::new(initial.newest())?;
    let single: Vec<f64> = deterministic::trajectory(start, params, generations).alphas().skip(1).collect();
    let end = single.last().copied().unwrap_or(initial.newest());
    let fixed_point = fixed_points(params, deterministic::DEFAULT_GRID_SIZE, deterministic::DEFAULT_ROOT_TOL)?
        .into_iter()
        .map(|r| r.location)
        .min_by(|a, b| (a - end).abs().total_cmp(&(b - end).abs()));
    let settle =
        |run: &[f64]| fixed_point.and_then(|fp| run.iter().position(|a| (a - fp).abs() <= settle_tol).map(|i| i + 1));
    let multigen_settle = settle(&multigen);
    let single_settle = settle(&single);
    let lag = match (multigen_settle, single_settle) {
        (Some(m), Some(s)) => Some(m as i64 - s as i64),
        _ => None,
    };
    let max_gap = multigen.iter().zip(&single).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_jump = |run: &[f64]| {
        std::iter::once(initial.newest())
            .chain(run.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    };
    Ok(MultigenComparison {
        multigen_max_jump: max_jump(&multigen),
        single_max_jump: max_jump(&single),
        multigen,
        single,
        fixed_point,
        multigen_settle,
        single_settle,
        lag,
        max_gap,
    })
}
