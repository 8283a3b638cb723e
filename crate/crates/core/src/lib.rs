//! Acquisition-driven language-change dynamics for learners that apply the
//! Tolerance Principle.
//!
//! A learner sees `N` tokens covered by a rule and keeps the rule productive
//! when the number of exceptions `e` satisfies `e <= N / ln N`. Iterating this
//! decision over generations gives:
//!
//! * [`deterministic`]: the infinite-population map `alpha -> f(alpha)`, its
//!   derivative, fixed points and homogeneous-population behaviour;
//! * [`stochastic`]: the finite-population Markov chain over the number of
//!   productive speakers;
//! * [`multigen`]: learners fed by a fixed mixture of the last `M` generations;
//! * [`oracle`]: Monte Carlo simulation of individual learners, used to check
//!   the analytic maps;
//! * [`tolerance`]: the productivity criteria themselves and the Zipfian
//!   search-cost model behind them.

pub mod binomial;
pub mod deterministic;
pub mod error;
pub mod gof;
pub mod multigen;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod stochastic;
pub mod tolerance;

pub use deterministic::{
    derivative, exception_prob, fixed_points, homogeneous_report, step, trajectory, variant_frequency, EnvParams,
    FixedPointReport, HomogeneousReport, PopulationState, Stability, Trajectory,
};
pub use error::{Error, Result};
pub use multigen::{
    compare_with_single_generation, constant_history_fixed_points, step_multigen, trajectory_multigen, CohortWeights,
    HistoryState, MultigenComparison, Outcome,
};
pub use oracle::{
    empirical_convergence_prob, empirical_generation, empirical_productive_prob, simulate_learner, EmpiricalEstimate,
    LearnerOutcome, Verdict,
};
pub use stochastic::{
    absorbing_states, sample_trajectory, stationary_distribution, transition_matrix, ChainSpec, ChainState,
    TransitionMatrix,
};
pub use tolerance::{
    expected_cost_ecm, expected_cost_ranked, harmonic, intermediate_threshold, is_productive, productive_base_form,
    tolerance_threshold, zipf_frequency, CostPair, RuleStats, ZipfSpec,
};
