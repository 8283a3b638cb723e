//! Subcommands other than `sweep` and `validate`.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;
use tpdyn::deterministic::{map_value, DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL};
use tpdyn::numeric::compensated_sum;
use tpdyn::stochastic::{stationary_distribution, transition_matrix_with_cap};
use tpdyn::tolerance::{cost_pair, threshold_agreement, threshold_row};
use tpdyn::*;

use crate::config::{Initial, Scenario, ScenarioConfig};
use crate::error::{ensure, CliError, CliResult};
use crate::format::{alphas_csv, chain_csv, sig17, trajectory_csv};
use crate::output::{write_file, CommandOutput};
use crate::svg::{line_chart, Series};

fn params_line(p: &EnvParams) -> String {
    format!(
        "params: sample_size={} p_plus_e={} p_minus_e={} cutoff={}\n",
        p.sample_size(),
        sig17(p.p_plus_e()),
        sig17(p.p_minus_e()),
        p.cutoff()
    )
}

fn params_json(p: &EnvParams) -> serde_json::Value {
    json!({
        "sample_size": p.sample_size(),
        "p_plus_e": p.p_plus_e(),
        "p_minus_e": p.p_minus_e(),
        "cutoff": p.cutoff(),
    })
}

fn warnings(p: &EnvParams) -> Vec<String> {
    let warnings: Vec<String> = p.constraint_warnings().iter().map(|w| w.to_string()).collect();
    for w in &warnings {
        log::warn!("empirical constraint: {w}");
    }
    warnings
}

fn fixed_point_lines(reports: &[FixedPointReport]) -> String {
    let mut s = String::from("fixed points:\n");
    if reports.is_empty() {
        s.push_str("  none found on the grid\n");
    }
    for r in reports {
        writeln!(s, "  {} {} (derivative {})", sig17(r.location), r.stability.as_str(), sig17(r.derivative_value))
            .unwrap();
    }
    s
}

fn check_unit(values: impl IntoIterator<Item = f64>, what: &str) -> CliResult<()> {
    for v in values {
        ensure((0.0..=1.0).contains(&v), || format!("{what} value {v} outside [0, 1]"))?;
    }
    Ok(())
}

fn mean_field_points(p: &EnvParams) -> CliResult<Vec<FixedPointReport>> {
    Ok(fixed_points(p, DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL)?)
}

/// Runs the configured model forward.
pub fn simulate(cfg: &ScenarioConfig) -> CliResult<CommandOutput> {
    let sc = cfg.scenario()?;
    let p = sc.params;
    let warnings = warnings(&p);
    let mut summary = format!("model: {}\n", sc.model().as_str());
    summary += &params_line(&p);
    writeln!(summary, "generations: {}", sc.generations).unwrap();
    let reports = mean_field_points(&p)?;

    let (csv, alphas, extra) = match &sc.initial {
        Initial::Deterministic(start) => {
            let traj = trajectory(*start, &p, sc.generations);
            ensure(traj.len() == sc.generations + 1, || "trajectory length".into())?;
            check_unit(traj.alphas(), "alpha")?;
            check_unit(traj.variant_freqs.iter().copied(), "variant frequency")?;
            let alphas: Vec<f64> = traj.alphas().collect();
            writeln!(summary, "initial alpha: {}", sig17(alphas[0])).unwrap();
            writeln!(summary, "final alpha: {}", sig17(*alphas.last().unwrap())).unwrap();
            (trajectory_csv(&traj), alphas, json!({}))
        }
        Initial::Stochastic { spec, state, seed, .. } => {
            let states = sample_trajectory(spec, *state, sc.generations, *seed)?;
            ensure(states.len() == sc.generations + 1, || "trajectory length".into())?;
            let last = *states.last().unwrap();
            writeln!(summary, "population: {} seed: {}", spec.pop_size(), seed).unwrap();
            writeln!(summary, "initial count: {}", state.count()).unwrap();
            writeln!(summary, "final count: {} (fraction {})", last.count(), sig17(last.fraction())).unwrap();
            let alphas = states.iter().map(|s| s.fraction()).collect();
            let extra = json!({
                "pop_size": spec.pop_size(),
                "seed": seed,
                "initial_count": state.count(),
                "final_count": last.count(),
            });
            (chain_csv(&states), alphas, extra)
        }
        Initial::Multigen { history, weights } => {
            let run = trajectory_multigen(history, weights, &p, sc.generations)?;
            check_unit(run.iter().copied(), "alpha")?;
            let alphas: Vec<f64> = std::iter::once(history.newest()).chain(run.iter().copied()).collect();
            writeln!(summary, "weights: {}", join(weights.as_slice())).unwrap();
            writeln!(summary, "history: {}", join(history.as_slice())).unwrap();
            writeln!(summary, "final alpha: {}", sig17(*alphas.last().unwrap())).unwrap();
            let extra = json!({ "weights": weights.as_slice(), "history": history.as_slice() });
            (alphas_csv(history.newest(), &run, &p), alphas, extra)
        }
    };
    summary += &fixed_point_lines(&reports);

    let y_label = if matches!(sc.initial, Initial::Stochastic { .. }) { "fraction R+" } else { "alpha" };
    let svg = line_chart(
        &format!("{} model, N={}", sc.model().as_str(), p.sample_size()),
        "generation",
        y_label,
        &[Series { label: y_label, values: &alphas }],
    );
    let json = json!({
        "command": "simulate",
        "model": sc.model().as_str(),
        "params": params_json(&p),
        "generations": sc.generations,
        "initial_alpha": alphas[0],
        "final_alpha": alphas.last(),
        "fixed_points": reports,
        "warnings": warnings,
        "details": extra,
    });
    Ok(CommandOutput { summary, json, csv: Some(csv), svg: Some(svg), failure: None })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| sig17(v)).collect::<Vec<_>>().join(", ")
}

pub fn fixed_points_report(cfg: &ScenarioConfig, grid_size: usize, tol: f64) -> CliResult<CommandOutput> {
    let p = cfg.env_params()?;
    if grid_size < 2 {
        return Err(CliError::Config(format!("--grid: must be at least 2, got {grid_size}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Config(format!("--tol: must be positive, got {tol}")));
    }
    let warnings = warnings(&p);
    let reports = fixed_points(&p, grid_size, tol)?;
    for r in &reports {
        ensure((map_value(r.location, &p) - r.location).abs() <= tol, || {
            format!("reported fixed point {} misses tolerance", r.location)
        })?;
    }
    let homog = homogeneous_report(&p);
    let mut summary = params_line(&p);
    summary += &fixed_point_lines(&reports);
    writeln!(summary, "f(0) = {}  f(1) = {}", sig17(homog.f_zero), sig17(homog.f_one)).unwrap();
    writeln!(summary, "stays homogeneous R+: {}", homog.stays_homogeneous_plus).unwrap();
    writeln!(summary, "stays homogeneous R-: {}", homog.stays_homogeneous_minus).unwrap();
    writeln!(summary, "single-generation flip possible: {}", homog.single_generation_flip_possible).unwrap();
    let mut csv = String::from("location,derivative,stability\n");
    for r in &reports {
        writeln!(csv, "{},{},{}", sig17(r.location), sig17(r.derivative_value), r.stability.as_str()).unwrap();
    }
    let json = json!({
        "command": "fixed-points",
        "params": params_json(&p),
        "grid_size": grid_size,
        "tol": tol,
        "fixed_points": reports,
        "homogeneous": homog,
        "warnings": warnings,
    });
    Ok(CommandOutput { summary, json, csv: Some(csv), svg: None, failure: None })
}

fn stochastic_parts(sc: &Scenario) -> CliResult<(ChainSpec, ChainState, u64)> {
    match &sc.initial {
        Initial::Stochastic { spec, state, matrix_cap, .. } => Ok((*spec, *state, *matrix_cap)),
        _ => {
            Err(CliError::Config(format!("this command needs model = \"stochastic\", got \"{}\"", sc.model().as_str())))
        }
    }
}

/// Transition matrix and power-iteration limit of the finite-population chain.
pub fn markov(
    cfg: &ScenarioConfig,
    tol: f64,
    max_iters: usize,
    matrix_path: Option<&Path>,
) -> CliResult<CommandOutput> {
    let sc = cfg.scenario()?;
    let (spec, _, cap) = stochastic_parts(&sc)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Config(format!("--tol: must be positive, got {tol}")));
    }
    let m = transition_matrix_with_cap(&spec, cap)?;
    for (i, row) in m.rows().enumerate() {
        let sum = compensated_sum(row.iter().copied());
        ensure((sum - 1.0).abs() <= 1e-12, || format!("row {i} sums to {sum}"))?;
    }
    let report = stationary_distribution(&m, tol, max_iters)?;
    let s = spec.pop_size();
    let absorbing = absorbing_states(&m);

    let mut summary = params_line(&sc.params);
    writeln!(summary, "population: {s}").unwrap();
    writeln!(
        summary,
        "absorbing states: {}",
        if absorbing.is_empty() {
            "none".to_string()
        } else {
            absorbing.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
        }
    )
    .unwrap();
    if report.has_absorbing {
        summary.push_str("limit from the uniform start (not unique: the chain has absorbing states)\n");
        for (i, mass) in &report.absorbing_mass {
            writeln!(summary, "  mass on {i}: {}", sig17(*mass)).unwrap();
        }
    }
    writeln!(summary, "power iterations: {} (residual {})", report.iterations, sig17(report.residual)).unwrap();
    writeln!(summary, "mode: {} (fraction {})", report.mode(), sig17(report.mode() as f64 / s as f64)).unwrap();
    writeln!(summary, "mean fraction: {}", sig17(report.mean_state() / s as f64)).unwrap();
    let reports = mean_field_points(&sc.params)?;
    summary += &fixed_point_lines(&reports);

    let mut csv = String::from("count,fraction,probability\n");
    for (i, &pi) in report.distribution.iter().enumerate() {
        writeln!(csv, "{i},{},{}", sig17(i as f64 / s as f64), sig17(pi)).unwrap();
    }
    if let Some(path) = matrix_path {
        let mut text = String::from("from,to,probability\n");
        for (i, row) in m.rows().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                writeln!(text, "{i},{j},{}", sig17(x)).unwrap();
            }
        }
        write_file(path, &text)?;
    }
    let json = json!({
        "command": "markov",
        "params": params_json(&sc.params),
        "pop_size": s,
        "absorbing_states": absorbing,
        "stationary": report,
        "mode": report.mode(),
        "mean_fraction": report.mean_state() / s as f64,
        "fixed_points": reports,
    });
    Ok(CommandOutput { summary, json, csv: Some(csv), svg: None, failure: None })
}

/// Multi-generation run compared with the single-generation map.
pub fn multigen(cfg: &ScenarioConfig, settle_tol: f64) -> CliResult<CommandOutput> {
    let sc = cfg.scenario()?;
    let Initial::Multigen { history, weights } = &sc.initial else {
        return Err(CliError::Config(format!("multigen needs model = \"multigen\", got \"{}\"", sc.model().as_str())));
    };
    let p = sc.params;
    let cmp = compare_with_single_generation(history, weights, &p, sc.generations, settle_tol)?;
    check_unit(cmp.multigen.iter().copied(), "alpha")?;
    let roots = constant_history_fixed_points(weights, &p, DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL)?;

    let opt = |v: Option<usize>| v.map_or("not reached".to_string(), |g| g.to_string());
    let mut summary = params_line(&p);
    writeln!(summary, "weights: {}", join(weights.as_slice())).unwrap();
    writeln!(summary, "history: {}", join(history.as_slice())).unwrap();
    writeln!(
        summary,
        "final alpha (M={}): {}",
        weights.len(),
        sig17(cmp.multigen.last().copied().unwrap_or(history.newest()))
    )
    .unwrap();
    writeln!(summary, "final alpha (M=1): {}", sig17(cmp.single.last().copied().unwrap_or(history.newest()))).unwrap();
    writeln!(summary, "constant-history fixed points: {}", join(&roots)).unwrap();
    if let Some(fp) = cmp.fixed_point {
        writeln!(summary, "reference fixed point: {}", sig17(fp)).unwrap();
    }
    writeln!(
        summary,
        "settles within {} at generation: M={} {}, M=1 {}",
        sig17(settle_tol),
        weights.len(),
        opt(cmp.multigen_settle),
        opt(cmp.single_settle)
    )
    .unwrap();
    if let Some(lag) = cmp.lag {
        writeln!(summary, "lag: {lag} generations").unwrap();
    }
    writeln!(summary, "largest gap between runs: {}", sig17(cmp.max_gap)).unwrap();
    writeln!(
        summary,
        "largest one-generation change: M={} {}, M=1 {}",
        weights.len(),
        sig17(cmp.multigen_max_jump),
        sig17(cmp.single_max_jump)
    )
    .unwrap();

    let multi: Vec<f64> = std::iter::once(history.newest()).chain(cmp.multigen.iter().copied()).collect();
    let single: Vec<f64> = std::iter::once(history.newest()).chain(cmp.single.iter().copied()).collect();
    let label = format!("M={}", weights.len());
    let svg = line_chart(
        &format!("multi-generation learners, N={}", p.sample_size()),
        "generation",
        "alpha",
        &[Series { label: &label, values: &multi }, Series { label: "M=1", values: &single }],
    );
    let json = json!({
        "command": "multigen",
        "params": params_json(&p),
        "weights": weights.as_slice(),
        "history": history.as_slice(),
        "settle_tol": settle_tol,
        "constant_history_fixed_points": roots,
        "comparison": cmp,
    });
    Ok(CommandOutput {
        summary,
        json,
        csv: Some(alphas_csv(history.newest(), &cmp.multigen, &p)),
        svg: Some(svg),
        failure: None,
    })
}

pub fn threshold(n: Option<u64>, range: Option<(u64, u64)>) -> CliResult<CommandOutput> {
    let rows = match (n, range) {
        (Some(n), None) => vec![threshold_row(n).map_err(|e| CliError::field("--n", e))?],
        (None, Some((from, to))) => {
            if from > to {
                return Err(CliError::Config(format!("--from {from} exceeds --to {to}")));
            }
            threshold_agreement(from, to).map_err(|e| CliError::field("--from", e))?
        }
        _ => return Err(CliError::Config("give either --n or both --from and --to".into())),
    };
    let mut csv = String::from("n_items,theta,floor_theta,intermediate,ratio,disagreements,monotone\n");
    let mut summary = String::new();
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.n_items,
            sig17(r.theta),
            r.floor_theta,
            r.intermediate,
            sig17(r.ratio),
            r.disagreements,
            r.monotone
        )
        .unwrap();
    }
    if let [r] = rows.as_slice() {
        writeln!(summary, "N = {}", r.n_items).unwrap();
        writeln!(summary, "theta = N / ln N = {}", sig17(r.theta)).unwrap();
        writeln!(summary, "floor(theta) = {}", r.floor_theta).unwrap();
        writeln!(summary, "largest e passing the cost criterion = {}", r.intermediate).unwrap();
        writeln!(summary, "ratio = {}", sig17(r.ratio)).unwrap();
        writeln!(summary, "exception counts where the criteria disagree = {}", r.disagreements).unwrap();
    } else {
        let worst = rows.iter().map(|r| r.disagreements).max().unwrap_or(0);
        let non_prefix = rows.iter().filter(|r| !r.monotone).count();
        writeln!(summary, "{} rows, N = {}..={}", rows.len(), rows[0].n_items, rows.last().unwrap().n_items).unwrap();
        writeln!(summary, "largest disagreement count: {worst}").unwrap();
        writeln!(summary, "rows where productive counts are not a prefix: {non_prefix}").unwrap();
    }
    let json = json!({ "command": "threshold", "rows": rows });
    Ok(CommandOutput { summary, json, csv: Some(csv), svg: None, failure: None })
}

fn rule_stats(n: u64, e: u64) -> CliResult<RuleStats> {
    RuleStats::new(n, e).map_err(|err| CliError::Config(format!("--n/--e: {err}")))
}

pub fn decide(n: u64, e: u64) -> CliResult<CommandOutput> {
    let stats = rule_stats(n, e)?;
    let theta = tolerance_threshold(n).map_err(|err| CliError::field("--n", err))?;
    let closed = is_productive(stats);
    let base = productive_base_form(stats);
    let word = |b: bool| if b { "productive" } else { "unproductive" };
    let mut summary = format!("N = {n}, e = {e}, theta = {}\n", sig17(theta));
    writeln!(summary, "threshold criterion (e <= N / ln N): {}", word(closed)).unwrap();
    writeln!(summary, "cost criterion: {}", word(base)).unwrap();
    if closed != base {
        summary.push_str("the two criteria disagree\n");
    }
    let json = json!({
        "command": "decide",
        "n_items": n,
        "n_exceptions": e,
        "theta": theta,
        "productive": closed,
        "productive_base_form": base,
    });
    Ok(CommandOutput { summary, json, ..Default::default() })
}

pub fn cost(n: u64, e: u64) -> CliResult<CommandOutput> {
    let stats = rule_stats(n, e)?;
    let pair = cost_pair(stats);
    let mut summary = format!("N = {n}, e = {e}\n");
    writeln!(summary, "exceptions-first cost: {}", sig17(pair.cost_ecm)).unwrap();
    writeln!(summary, "ranked listing cost: {}", sig17(pair.cost_ranked)).unwrap();
    writeln!(summary, "rule cheaper: {}", pair.cost_ecm < pair.cost_ranked).unwrap();
    let json = json!({
        "command": "cost",
        "n_items": n,
        "n_exceptions": e,
        "cost_ecm": pair.cost_ecm,
        "cost_ranked": pair.cost_ranked,
    });
    Ok(CommandOutput { summary, json, ..Default::default() })
}
