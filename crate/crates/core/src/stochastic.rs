//! Finite-population dynamics as a Markov chain on the number of
//! productive-rule speakers.
//!
//! With `S` adults, each of the `S` learners of the next generation
//! independently ends up productive with probability `f(count / S)`, so the
//! successor count is `Binomial(S, f(count / S))` and the chain has `S + 1`
//! states.

use rayon::prelude::*;
use serde::Serialize;

use crate::binomial;
use crate::deterministic::{map_value, EnvParams};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::rng::SimRng;

/// Largest population for which a dense transition matrix is built by default.
pub const DEFAULT_MATRIX_CAP: u64 = 5000;

/// Diagonal entries at least `1 - ABSORBING_TOL` count as absorbing.
pub const ABSORBING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSpec {
    pop_size: u64,
    params: EnvParams,
}

impl ChainSpec {
    pub fn new(pop_size: u64, params: EnvParams) -> Result<Self> {
        if pop_size < 1 {
            return Err(Error::EmptyPopulation);
        }
        Ok(ChainSpec { pop_size, params })
    }

    pub fn pop_size(&self) -> u64 {
        self.pop_size
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn state(&self, count: u64) -> Result<ChainState> {
        ChainState::new(count, self.pop_size)
    }

    /// Probability that one learner converges to the productive rule when
    /// `count` of the `S` adults are productive.
    pub fn success_prob(&self, count: u64) -> f64 {
        map_value(count as f64 / self.pop_size as f64, &self.params)
    }
}

/// Number of productive-rule speakers in a population of fixed size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainState {
    count: u64,
    pop_size: u64,
}

impl ChainState {
    pub fn new(count: u64, pop_size: u64) -> Result<Self> {
        if pop_size < 1 {
            return Err(Error::EmptyPopulation);
        }
        if count > pop_size {
            return Err(Error::CountOutOfRange { count, pop_size });
        }
        Ok(ChainState { count, pop_size })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn pop_size(&self) -> u64 {
        self.pop_size
    }

    /// `Y = count / S`.
    pub fn fraction(&self) -> f64 {
        self.count as f64 / self.pop_size as f64
    }
}

/// Dense row-stochastic matrix; row `i` is the successor distribution from `i`
/// productive speakers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a matrix from row-major entries; rows must be probability vectors.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidArgument("transition matrix has no rows".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidArgument(format!("row {i} has {} entries, expected {size}", row.len())));
            }
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidArgument(format!("row {i} has entries outside [0, 1]")));
            }
            let total = compensated_sum(row.iter().copied());
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("row {i} sums to {total}")));
            }
            entries.extend(row);
        }
        Ok(TransitionMatrix { size, entries })
    }

    /// Number of states, `S + 1`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    /// `v T` for a row vector `v`.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (vi, row) in v.iter().zip(self.rows()) {
            if *vi == 0.0 {
                continue;
            }
            for (o, t) in out.iter_mut().zip(row) {
                *o += vi * t;
            }
        }
        out
    }
}

/// Probability that a learner converges to the productive rule given the
/// current generation. Same numerics as the deterministic map.
pub fn convergence_prob(state: ChainState, params: &EnvParams) -> f64 {
    map_value(state.fraction(), params)
}

/// Successor distribution from `count` productive speakers.
pub fn transition_row(spec: &ChainSpec, count: u64) -> Result<Vec<f64>> {
    spec.state(count)?;
    Ok(binomial::pmf(spec.pop_size, spec.success_prob(count)))
}

/// Dense transition matrix, rejecting populations above [`DEFAULT_MATRIX_CAP`].
pub fn transition_matrix(spec: &ChainSpec) -> Result<TransitionMatrix> {
    transition_matrix_with_cap(spec, DEFAULT_MATRIX_CAP)
}

pub fn transition_matrix_with_cap(spec: &ChainSpec, cap: u64) -> Result<TransitionMatrix> {
    if spec.pop_size > cap {
        return Err(Error::MatrixTooLarge { pop_size: spec.pop_size, cap });
    }
    let size = spec.pop_size as usize + 1;
    let mut entries = vec![0.0; size * size];
    entries.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
        row.copy_from_slice(&binomial::pmf(spec.pop_size, spec.success_prob(i as u64)));
    });
    Ok(TransitionMatrix { size, entries })
}

/// Seeded sample path of the chain; `generations + 1` states including `initial`.
///
/// Successor counts are drawn by inverting the binomial CDF with one uniform
/// variate per generation.
pub fn sample_trajectory(
    spec: &ChainSpec,
    initial: ChainState,
    generations: usize,
    seed: u64,
) -> Result<Vec<ChainState>> {
    if initial.pop_size != spec.pop_size {
        return Err(Error::InvalidArgument(format!(
            "initial state has population {} but chain has {}",
            initial.pop_size, spec.pop_size
        )));
    }
    let mut rng = SimRng::new(seed);
    let mut out = Vec::with_capacity(generations + 1);
    out.push(initial);
    let mut count = initial.count;
    for _ in 0..generations {
        count = sample_successor(spec, count, &mut rng);
        out.push(ChainState { count, pop_size: spec.pop_size });
    }
    Ok(out)
}

/// One successor count from `count` productive speakers.
pub fn sample_successor(spec: &ChainSpec, count: u64, rng: &mut SimRng) -> u64 {
    binomial::sample(spec.pop_size, spec.success_prob(count), rng)
}

/// Indices `i` with `T[i][i] >= 1 - 1e-12`.
pub fn absorbing_states(matrix: &TransitionMatrix) -> Vec<usize> {
    (0..matrix.size).filter(|&i| matrix.get(i, i) >= 1.0 - ABSORBING_TOL).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    /// Limit of power iteration started from the uniform vector.
    pub distribution: Vec<f64>,
    pub iterations: usize,
    /// `||pi T - pi||_1` for the returned vector.
    pub residual: f64,
    /// The chain has at least one absorbing state, so the limit depends on the
    /// starting vector and is not a unique stationary distribution.
    pub has_absorbing: bool,
    /// Mass that the limit places on each absorbing state.
    pub absorbing_mass: Vec<(usize, f64)>,
}

impl StationaryReport {
    /// State index with the largest mass.
    pub fn mode(&self) -> usize {
        self.distribution
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
            .0
    }

    pub fn mean_state(&self) -> f64 {
        compensated_sum(self.distribution.iter().enumerate().map(|(i, m)| i as f64 * m))
    }
}

/// Power iteration `pi <- pi T` from the uniform vector until `||pi T - pi||_1 <= tol`.
pub fn stationary_distribution(matrix: &TransitionMatrix, tol: f64, max_iters: usize) -> Result<StationaryReport> {
    let n = matrix.size;
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for iteration in 0..=max_iters {
        let mut next = matrix.left_multiply(&pi);
        residual = compensated_sum(next.iter().zip(&pi).map(|(a, b)| (a - b).abs()));
        if residual <= tol {
            let absorbing = absorbing_states(matrix);
            let absorbing_mass = absorbing.iter().map(|&i| (i, pi[i])).collect();
            return Ok(StationaryReport {
                distribution: pi,
                iterations: iteration,
                residual,
                has_absorbing: !absorbing.is_empty(),
                absorbing_mass,
            });
        }
        let total = compensated_sum(next.iter().copied());
        next.iter_mut().for_each(|x| *x /= total);
        pi = next;
    }
    Err(Error::NotConverged { iterations: max_iters, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> EnvParams {
        EnvParams::new(9, 0.2, 0.7).unwrap()
    }

    #[test]
    fn convergence_prob_shares_map() {
        let p = EnvParams::new(9, 0.0, 0.7).unwrap();
        assert_eq!(convergence_prob(ChainState::new(10, 10).unwrap(), &p), 1.0);
        let q = EnvParams::new(9, 0.2, 1.0).unwrap();
        assert_eq!(convergence_prob(ChainState::new(0, 10).unwrap(), &q), 0.0);
        let a = convergence_prob(ChainState::new(9, 10).unwrap(), &reference());
        assert_eq!(a.to_bits(), map_value(0.9, &reference()).to_bits());
    }

    #[test]
    fn state_validation() {
        assert!(ChainState::new(11, 10).is_err());
        assert!(ChainState::new(0, 0).is_err());
        assert!(ChainSpec::new(0, reference()).is_err());
    }

    #[test]
    fn one_speaker_matrix() {
        let spec = ChainSpec::new(1, reference()).unwrap();
        let m = transition_matrix(&spec).unwrap();
        let f0 = map_value(0.0, &reference());
        let f1 = map_value(1.0, &reference());
        assert!((m.get(0, 0) - (1.0 - f0)).abs() < 1e-15);
        assert!((m.get(0, 1) - f0).abs() < 1e-15);
        assert!((m.get(1, 0) - (1.0 - f1)).abs() < 1e-15);
        assert!((m.get(1, 1) - f1).abs() < 1e-15);
    }

    #[test]
    fn rows_are_binomial_masses() {
        let spec = ChainSpec::new(10, reference()).unwrap();
        let m = transition_matrix(&spec).unwrap();
        let f = map_value(0.9, &reference());
        // Row for 9 of 10 speakers: direct C(10,j) f^j (1-f)^(10-j).
        let mut coeff = 1.0;
        for j in 0..=10u64 {
            if j > 0 {
                coeff = coeff * (10 - j + 1) as f64 / j as f64;
            }
            let direct = coeff * f.powi(j as i32) * (1.0 - f).powi(10 - j as i32);
            assert!((m.get(9, j as usize) - direct).abs() < 1e-14, "j={j}");
        }
        for row in m.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_cap_is_enforced() {
        let spec = ChainSpec::new(20, reference()).unwrap();
        let err = transition_matrix_with_cap(&spec, 10).unwrap_err();
        assert!(err.is_resource());
        assert_eq!(transition_row(&spec, 5).unwrap().len(), 21);
    }

    #[test]
    fn sampling_is_reproducible_and_absorbing() {
        let spec = ChainSpec::new(100, reference()).unwrap();
        let init = spec.state(90).unwrap();
        let a = sample_trajectory(&spec, init, 50, 11).unwrap();
        let b = sample_trajectory(&spec, init, 50, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 51);
        assert_eq!(sample_trajectory(&spec, init, 0, 3).unwrap(), vec![init]);

        let absorbing = ChainSpec::new(25, EnvParams::new(9, 0.0, 0.6).unwrap()).unwrap();
        for seed in 0..20 {
            let path = sample_trajectory(&absorbing, absorbing.state(25).unwrap(), 30, seed).unwrap();
            assert!(path.iter().all(|s| s.count() == 25));
        }
    }

    #[test]
    fn absorbing_state_detection() {
        let plus0 = ChainSpec::new(10, EnvParams::new(9, 0.0, 0.6).unwrap()).unwrap();
        assert!(absorbing_states(&transition_matrix(&plus0).unwrap()).contains(&10));
        let minus1 = ChainSpec::new(10, EnvParams::new(9, 0.3, 1.0).unwrap()).unwrap();
        assert!(absorbing_states(&transition_matrix(&minus1).unwrap()).contains(&0));
        let interior = ChainSpec::new(10, reference()).unwrap();
        assert!(absorbing_states(&transition_matrix(&interior).unwrap()).is_empty());
    }

    #[test]
    fn stationary_of_identity_is_start_vector() {
        let spec = ChainSpec::new(1, EnvParams::new(9, 0.0, 1.0).unwrap()).unwrap();
        let m = transition_matrix(&spec).unwrap();
        assert_eq!(absorbing_states(&m), vec![0, 1]);
        let r = stationary_distribution(&m, 1e-13, 10).unwrap();
        assert!(r.has_absorbing);
        assert_eq!(r.distribution, vec![0.5, 0.5]);
        assert_eq!(r.absorbing_mass, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn stationary_of_positive_chain() {
        let spec = ChainSpec::new(30, reference()).unwrap();
        let m = transition_matrix(&spec).unwrap();
        let r = stationary_distribution(&m, 1e-13, 10_000).unwrap();
        assert!(!r.has_absorbing);
        assert!(r.distribution.iter().all(|&x| x > 0.0));
        assert!((r.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let check = m.left_multiply(&r.distribution);
        let res: f64 = check.iter().zip(&r.distribution).map(|(a, b)| (a - b).abs()).sum();
        assert!(res <= 1e-13);
        let fp = 0.974_678_480_136_933_9;
        assert!((r.mode() as f64 / 30.0 - fp).abs() <= 2.0 / 30.0);
    }

    #[test]
    fn periodic_chain_does_not_converge() {
        let m = TransitionMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        // Uniform start is already stationary for the swap.
        assert!(stationary_distribution(&m, 1e-12, 5).is_ok());
        let m =
            TransitionMatrix::from_rows(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.0]]).unwrap();
        assert!(matches!(stationary_distribution(&m, 1e-300, 3), Err(Error::NotConverged { iterations: 3, .. })));
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
    }
}
