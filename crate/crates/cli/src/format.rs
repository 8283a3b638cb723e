//! Number formatting and CSV emission.

use std::fmt::Write as _;

use tpdyn::{ChainState, EnvParams, Trajectory};

/// Renders `x` with 17 significant digits, in positional notation for
/// exponents in `-5..17` and scientific notation otherwise.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        format!("{x:.prec$}", prec = (16 - exp) as usize)
    } else {
        sci
    }
}

pub const DETERMINISTIC_HEADER: &str = "generation,alpha,variant_frequency";
pub const STOCHASTIC_HEADER: &str = "generation,count,fraction";

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(DETERMINISTIC_HEADER);
    out.push('\n');
    for (t, (a, v)) in traj.alphas().zip(&traj.variant_freqs).enumerate() {
        writeln!(out, "{t},{},{}", sig17(a), sig17(*v)).unwrap();
    }
    out
}

/// CSV for a run given as `initial` followed by the new proportions.
pub fn alphas_csv(initial: f64, run: &[f64], params: &EnvParams) -> String {
    let mut out = String::from(DETERMINISTIC_HEADER);
    out.push('\n');
    for (t, &a) in std::iter::once(&initial).chain(run).enumerate() {
        let v = a * params.p_plus_rule() + (1.0 - a) * params.p_minus_rule();
        writeln!(out, "{t},{},{}", sig17(a), sig17(v)).unwrap();
    }
    out
}

pub fn chain_csv(states: &[ChainState]) -> String {
    let mut out = String::from(STOCHASTIC_HEADER);
    out.push('\n');
    for (t, s) in states.iter().enumerate() {
        writeln!(out, "{t},{},{}", s.count(), sig17(s.fraction())).unwrap();
    }
    out
}
