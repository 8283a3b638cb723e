//! Monte Carlo checks of the analytic maps for a scenario.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use tpdyn::deterministic::map_value;
use tpdyn::gof::{chi_square_gof, ChiSquareResult};
use tpdyn::multigen::mixture_exception_prob;
use tpdyn::oracle::{check_agreement, Agreement};
use tpdyn::rng::derive_seed;
use tpdyn::stochastic::transition_row;
use tpdyn::*;

use crate::config::{Initial, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::format::sig17;
use crate::output::CommandOutput;

pub const SIGMAS: f64 = 4.0;
pub const CHI_SQUARE_LEVEL: f64 = 0.001;
pub const DEFAULT_HISTOGRAM_DRAWS: u64 = 10_000;
const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    pub label: String,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramCheck {
    pub from_count: u64,
    pub draws: u64,
    pub result: ChiSquareResult,
    pub passed: bool,
}

fn point_line(c: &PointCheck) -> String {
    let a = &c.agreement;
    format!(
        "{}: analytic {} estimate {} (se {}, reference se {}, z {}) {}\n",
        c.label,
        sig17(a.analytic),
        sig17(a.estimate.point),
        sig17(a.estimate.std_error),
        sig17(a.reference_se),
        sig17(a.z),
        if a.passed { "PASS" } else { "FAIL" }
    )
}

pub fn validate(cfg: &ScenarioConfig) -> CliResult<CommandOutput> {
    let sc = cfg.scenario()?;
    let v = cfg.validate_section()?;
    let p = sc.params;

    let mut alphas = v.alphas.clone().unwrap_or_else(|| {
        let mut a = vec![sc.initial_alpha()];
        a.extend(DEFAULT_GRID.iter().filter(|&&x| x != sc.initial_alpha()));
        a
    });
    alphas.dedup();

    let mut points = Vec::new();
    for (i, &alpha) in alphas.iter().enumerate() {
        let est = empirical_convergence_prob(alpha, &p, v.trials, derive_seed(v.seed, i as u64))?;
        points.push(PointCheck {
            label: format!("alpha={}", sig17(alpha)),
            agreement: check_agreement(map_value(alpha, &p), est, SIGMAS),
        });
    }
    let mut histogram = None;
    match &sc.initial {
        Initial::Multigen { history, weights } => {
            let q = mixture_exception_prob(history, weights, &p)?;
            let est = empirical_productive_prob(q, &p, v.trials, derive_seed(v.seed, alphas.len() as u64))?;
            points.push(PointCheck {
                label: format!("history mixture Q={}", sig17(q)),
                agreement: check_agreement(step_multigen(history, weights, &p)?, est, SIGMAS),
            });
        }
        Initial::Stochastic { spec, state, .. } => {
            let draws = v.histogram_draws.unwrap_or(DEFAULT_HISTOGRAM_DRAWS);
            let base = derive_seed(v.seed, u64::MAX);
            let counts: Vec<u64> = (0..draws)
                .into_par_iter()
                .map(|d| empirical_generation(spec, *state, derive_seed(base, d)).map(|s| s.count()))
                .collect::<tpdyn::Result<_>>()?;
            let mut observed = vec![0u64; spec.pop_size() as usize + 1];
            for c in counts {
                observed[c as usize] += 1;
            }
            let result = chi_square_gof(&observed, &transition_row(spec, state.count())?);
            histogram = Some(HistogramCheck {
                from_count: state.count(),
                draws,
                result,
                passed: result.passes(CHI_SQUARE_LEVEL),
            });
        }
        Initial::Deterministic(_) => {}
    }

    let mut summary = format!(
        "oracle agreement for N={} p_plus_e={} p_minus_e={} ({} trials, seed {}, {SIGMAS} standard errors)\n",
        p.sample_size(),
        sig17(p.p_plus_e()),
        sig17(p.p_minus_e()),
        v.trials,
        v.seed
    );
    for c in &points {
        summary += &point_line(c);
    }
    if let Some(h) = &histogram {
        writeln!(
            summary,
            "successor histogram from count {} ({} draws): chi-square {} on {} df, p = {} {}",
            h.from_count,
            h.draws,
            sig17(h.result.statistic),
            h.result.degrees_of_freedom,
            sig17(h.result.p_value),
            if h.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    let failed = points.iter().filter(|c| !c.agreement.passed).count()
        + histogram.as_ref().map_or(0, |h| usize::from(!h.passed));
    let total = points.len() + usize::from(histogram.is_some());
    writeln!(summary, "{} of {total} checks passed", total - failed).unwrap();

    let json = json!({
        "command": "validate",
        "model": sc.model().as_str(),
        "trials": v.trials,
        "seed": v.seed,
        "sigmas": SIGMAS,
        "points": points,
        "histogram": histogram,
        "passed": failed == 0,
    });
    let failure = (failed > 0).then(|| CliError::ValidationFailed(format!("{failed} of {total} checks failed")));
    Ok(CommandOutput { summary, json, csv: None, svg: None, failure })
}
