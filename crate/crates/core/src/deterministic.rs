//! Infinite-population dynamics.
//!
//! Each learner of generation `t + 1` sees `N` i.i.d. tokens; a token is an
//! exception with probability `P(alpha) = alpha p+ + (1 - alpha) p-`, and the
//! learner keeps the rule productive iff at most `floor(N / ln N)` exceptions
//! occur. The next proportion of productive speakers is therefore the binomial
//! lower tail `f(alpha) = P(Binomial(N, P(alpha)) <= floor(N / ln N))`.

use serde::Serialize;

use crate::binomial;
use crate::error::{check_probability, Error, Result};
use crate::tolerance::threshold_cutoff;

/// Default number of grid points for the fixed-point scan.
pub const DEFAULT_GRID_SIZE: usize = 1001;
/// Default residual tolerance `|f(alpha) - alpha|` for located fixed points.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Half-width of the band around `|f'| = 1` classified as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;

/// Learner sample size and the two exception-production probabilities.
///
/// The rule-output probabilities are always derived as complements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvParams {
    sample_size: u64,
    p_plus_e: f64,
    p_minus_e: f64,
    #[serde(skip)]
    cutoff: u64,
}

impl EnvParams {
    pub fn new(sample_size: u64, p_plus_e: f64, p_minus_e: f64) -> Result<Self> {
        if sample_size < 2 {
            return Err(Error::SampleSizeTooSmall(sample_size));
        }
        check_probability("p_plus_e", p_plus_e)?;
        check_probability("p_minus_e", p_minus_e)?;
        Ok(EnvParams { sample_size, p_plus_e, p_minus_e, cutoff: threshold_cutoff(sample_size)? })
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// Probability that a productive-rule speaker produces an exception.
    pub fn p_plus_e(&self) -> f64 {
        self.p_plus_e
    }

    /// Probability that a non-productive speaker produces an exception.
    pub fn p_minus_e(&self) -> f64 {
        self.p_minus_e
    }

    pub fn p_plus_rule(&self) -> f64 {
        1.0 - self.p_plus_e
    }

    pub fn p_minus_rule(&self) -> f64 {
        1.0 - self.p_minus_e
    }

    /// `floor(N / ln N)`.
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn with_sample_size(&self, sample_size: u64) -> Result<Self> {
        Self::new(sample_size, self.p_plus_e, self.p_minus_e)
    }

    pub fn with_p_plus_e(&self, p: f64) -> Result<Self> {
        Self::new(self.sample_size, p, self.p_minus_e)
    }

    pub fn with_p_minus_e(&self, p: f64) -> Result<Self> {
        Self::new(self.sample_size, self.p_plus_e, p)
    }

    /// Which of the usually-expected orderings between the probabilities fail.
    ///
    /// These are advisory only; every combination is a valid model.
    pub fn constraint_warnings(&self) -> Vec<ConstraintWarning> {
        let mut out = Vec::new();
        if self.p_minus_e <= self.p_plus_e {
            out.push(ConstraintWarning::MinusNotMoreExceptional);
        }
        if self.p_plus_rule() <= self.p_plus_e {
            out.push(ConstraintWarning::PlusNotRuleDominant);
        }
        if self.p_minus_e <= self.p_minus_rule() {
            out.push(ConstraintWarning::MinusNotExceptionDominant);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintWarning {
    /// `p-(e) > p+(e)` does not hold.
    MinusNotMoreExceptional,
    /// `p+(R) > p+(e)` does not hold.
    PlusNotRuleDominant,
    /// `p-(e) > p-(R)` does not hold.
    MinusNotExceptionDominant,
}

impl std::fmt::Display for ConstraintWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::MinusNotMoreExceptional => "p_minus_e > p_plus_e does not hold",
            Self::PlusNotRuleDominant => "1 - p_plus_e > p_plus_e does not hold",
            Self::MinusNotExceptionDominant => "p_minus_e > 1 - p_minus_e does not hold",
        };
        f.write_str(s)
    }
}

/// Proportion of productive-rule speakers in a generation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct PopulationState(f64);

impl PopulationState {
    pub fn new(alpha: f64) -> Result<Self> {
        check_probability("alpha", alpha).map(PopulationState)
    }

    pub fn alpha(&self) -> f64 {
        self.0
    }

    /// Clamps a value produced by a probability computation into `[0, 1]`.
    pub(crate) fn from_probability(p: f64) -> Self {
        PopulationState(p.clamp(0.0, 1.0))
    }
}

/// States by generation with the matching rule-output frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<PopulationState>,
    pub variant_freqs: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(PopulationState::alpha)
    }

    pub fn last(&self) -> PopulationState {
        *self.states.last().expect("trajectory always holds the initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn classify(derivative: f64) -> Self {
        let slope = derivative.abs();
        if (slope - 1.0).abs() <= MARGINAL_BAND {
            Stability::Marginal
        } else if slope < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub location: f64,
    pub derivative_value: f64,
    pub stability: Stability,
}

/// `P(alpha)`, the probability that a presented token is an exception.
#[inline]
pub fn exception_prob(state: PopulationState, params: &EnvParams) -> f64 {
    mix_exception(state.alpha(), params)
}

#[inline]
pub(crate) fn mix_exception(alpha: f64, params: &EnvParams) -> f64 {
    if params.p_plus_e == params.p_minus_e {
        return params.p_plus_e;
    }
    alpha * params.p_plus_e + (1.0 - alpha) * params.p_minus_e
}

/// Probability that a learner facing exception probability `q` holds the rule productive.
#[inline]
pub fn productive_prob(q: f64, params: &EnvParams) -> f64 {
    binomial::lower_tail(params.sample_size, q.clamp(0.0, 1.0), params.cutoff)
}

/// Value of the update map at `alpha`.
#[inline]
pub fn map_value(alpha: f64, params: &EnvParams) -> f64 {
    productive_prob(mix_exception(alpha, params), params)
}

/// One generation of the update map.
pub fn step(state: PopulationState, params: &EnvParams) -> PopulationState {
    PopulationState::from_probability(map_value(state.alpha(), params))
}

/// `1 - f(alpha)`, evaluated as an upper tail rather than by subtraction.
pub fn step_complement(state: PopulationState, params: &EnvParams) -> f64 {
    binomial::upper_tail(params.sample_size, exception_prob(state, params), params.cutoff)
}

/// `ln f(alpha)` and `ln(1 - f(alpha))`; finite exactly when the value is
/// mathematically positive.
pub fn ln_step_and_complement(state: PopulationState, params: &EnvParams) -> (f64, f64) {
    let q = exception_prob(state, params);
    (
        binomial::ln_lower_tail(params.sample_size, q, params.cutoff),
        binomial::ln_upper_tail(params.sample_size, q, params.cutoff),
    )
}

/// Rule-output frequency `alpha p+(R) + (1 - alpha) p-(R)`.
pub fn variant_frequency(state: PopulationState, params: &EnvParams) -> f64 {
    let a = state.alpha();
    a * params.p_plus_rule() + (1.0 - a) * params.p_minus_rule()
}

/// Iterates the map `generations` times. `states[0]` is `initial`.
pub fn trajectory(initial: PopulationState, params: &EnvParams, generations: usize) -> Trajectory {
    let mut states = Vec::with_capacity(generations + 1);
    states.push(initial);
    let mut current = initial;
    for _ in 0..generations {
        current = step(current, params);
        states.push(current);
    }
    let variant_freqs = states.iter().map(|&s| variant_frequency(s, params)).collect();
    Trajectory { states, variant_freqs }
}

/// Closed-form derivative of the map:
/// `f'(alpha) = (p- - p+) N C(N-1, c) P^c (1 - P)^(N-c-1)` with `c = floor(N / ln N)`.
pub fn derivative(state: PopulationState, params: &EnvParams) -> f64 {
    let n = params.sample_size;
    let c = params.cutoff;
    let slope = params.p_minus_e - params.p_plus_e;
    if c >= n || slope == 0.0 {
        // c >= N only for N = 2, where the map is identically 1.
        return 0.0;
    }
    let p = exception_prob(state, params);
    let rest = n - c - 1;
    let ln_p_part = if c == 0 {
        0.0
    } else if p <= 0.0 {
        return 0.0;
    } else {
        c as f64 * p.ln()
    };
    let ln_q_part = if rest == 0 {
        0.0
    } else if p >= 1.0 {
        return 0.0;
    } else {
        rest as f64 * (-p).ln_1p()
    };
    let ln_mag = (n as f64).ln() + crate::numeric::ln_choose(n - 1, c) + ln_p_part + ln_q_part;
    slope * ln_mag.exp()
}

/// Roots of `f(alpha) - alpha` on `[0, 1]`.
///
/// A uniform grid of `grid_size` points is scanned for sign changes, each
/// bracketing interval is bisected until `|f(alpha) - alpha| <= tol`, and grid
/// points (including the endpoints) already within `tol` are reported as they
/// are. Roots closer together than the grid spacing may be missed.
pub fn fixed_points(params: &EnvParams, grid_size: usize, tol: f64) -> Result<Vec<FixedPointReport>> {
    let roots = scan_roots(|a| map_value(a, params) - a, grid_size, tol)?;
    Ok(roots
        .into_iter()
        .map(|location| {
            let d = derivative(PopulationState::from_probability(location), params);
            FixedPointReport { location, derivative_value: d, stability: Stability::classify(d) }
        })
        .collect())
}

/// Grid scan plus bisection for the roots of `g` on `[0, 1]`.
pub(crate) fn scan_roots(g: impl Fn(f64) -> f64, grid_size: usize, tol: f64) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!("grid_size must be at least 2, got {grid_size}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let last = grid_size - 1;
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 / last as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&a| g(a)).collect();

    let mut roots = Vec::new();
    for i in 0..grid_size {
        if values[i].abs() <= tol {
            roots.push(grid[i]);
            continue;
        }
        if i < last && values[i + 1].abs() > tol && values[i].signum() != values[i + 1].signum() {
            roots.push(bisect(&g, grid[i], grid[i + 1], values[i], tol));
        }
    }
    Ok(roots)
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut g_lo: f64, tol: f64) -> f64 {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid.abs() <= tol || mid <= lo || mid >= hi {
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Behaviour of the map at the homogeneous populations `alpha = 0` and `alpha = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousReport {
    pub f_zero: f64,
    pub f_one: f64,
    /// `f(1) = 1`, which happens exactly when `p+(e) = 0`.
    pub stays_homogeneous_plus: bool,
    /// `f(0) = 0`, which happens exactly when `p-(e) = 1`.
    pub stays_homogeneous_minus: bool,
    /// `f(1) = 0` or `f(0) = 1`.
    pub single_generation_flip_possible: bool,
}

pub fn homogeneous_report(params: &EnvParams) -> HomogeneousReport {
    let zero = PopulationState(0.0);
    let one = PopulationState(1.0);
    let (ln_f0, ln_f0_c) = ln_step_and_complement(zero, params);
    let (ln_f1, ln_f1_c) = ln_step_and_complement(one, params);
    HomogeneousReport {
        f_zero: map_value(0.0, params),
        f_one: map_value(1.0, params),
        stays_homogeneous_plus: ln_f1_c == f64::NEG_INFINITY,
        stays_homogeneous_minus: ln_f0 == f64::NEG_INFINITY,
        single_generation_flip_possible: ln_f1 == f64::NEG_INFINITY || ln_f0_c == f64::NEG_INFINITY,
    }
}
