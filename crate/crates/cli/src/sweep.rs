//! Parameter grids.
//!
//! Cells are the row-major product of the declared axes (the first axis is the
//! outer loop). Each cell is evaluated independently on a worker pool and the
//! rows are assembled in declaration order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use tpdyn::deterministic::{DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL};
use tpdyn::rng::derive_seed;
use tpdyn::*;

use crate::config::{Axis, AxisName, Initial, Model, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::format::sig17;
use crate::output::CommandOutput;

/// Values taken along an axis; `min == max` gives a single value.
pub fn axis_values(axis: &Axis) -> Vec<f64> {
    if axis.min == axis.max {
        return vec![axis.min];
    }
    let last = axis.steps - 1;
    let mut values: Vec<f64> =
        (0..axis.steps).map(|i| axis.min + (axis.max - axis.min) * i as f64 / last as f64).collect();
    values[last] = axis.max;
    if axis.name.is_integer() {
        values.iter_mut().for_each(|v| *v = v.round());
    }
    values
}

/// Cell coordinates in row-major order.
pub fn cells(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let values = axis_values(axis);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    out
}

fn section<'a, T>(s: &'a mut Option<T>, name: &str, model: Model) -> CliResult<&'a mut T> {
    s.as_mut().ok_or_else(|| CliError::Config(format!("model = \"{}\" requires a [{name}] table", model.as_str())))
}

/// Copy of `cfg` with one axis set to `value`.
pub fn apply(cfg: &mut ScenarioConfig, axis: AxisName, value: f64) -> CliResult<()> {
    let model = cfg.model;
    let as_count = |v: f64, name: &str| -> CliResult<u64> {
        if v < 0.0 {
            return Err(CliError::Config(format!("sweep.axes.{name}: negative value {v}")));
        }
        Ok(v.round() as u64)
    };
    match axis {
        AxisName::PPlusE => cfg.params.p_plus_e = value,
        AxisName::PMinusE => cfg.params.p_minus_e = value,
        AxisName::SampleSize => cfg.params.sample_size = as_count(value, "sample_size")?,
        AxisName::Alpha0 => match model {
            Model::Deterministic => section(&mut cfg.deterministic, "deterministic", model)?.alpha0 = value,
            Model::Stochastic => {
                let s = section(&mut cfg.stochastic, "stochastic", model)?;
                s.count0 = as_count(value * s.pop_size as f64, "alpha0")?;
            }
            Model::Multigen => {
                let m = section(&mut cfg.multigen, "multigen", model)?;
                m.history = vec![value; m.history.len()];
            }
        },
        AxisName::PopSize => {
            let s = section(&mut cfg.stochastic, "stochastic", model)?;
            let fraction = if s.pop_size == 0 { 0.0 } else { s.count0 as f64 / s.pop_size as f64 };
            s.pop_size = as_count(value, "pop_size")?;
            s.count0 = (fraction * s.pop_size as f64).round() as u64;
        }
        AxisName::WeightNewest => {
            let m = section(&mut cfg.multigen, "multigen", model)?;
            let k = m.weights.len();
            if k > 1 {
                let rest = (1.0 - value) / (k - 1) as f64;
                m.weights = vec![rest; k];
            }
            m.weights[k - 1] = value;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub coords: Vec<f64>,
    pub endpoint: f64,
    /// Fixed point of the single-generation map nearest the endpoint.
    pub fixed_point: Option<f64>,
    pub stability: Option<Stability>,
    pub fixed_point_count: usize,
}

fn run_cell(base: &ScenarioConfig, axes: &[Axis], coords: &[f64], index: u64) -> CliResult<CellResult> {
    let mut cfg = base.clone();
    for (axis, &v) in axes.iter().zip(coords) {
        apply(&mut cfg, axis.name, v)?;
    }
    let sc = cfg.scenario()?;
    let p = sc.params;
    let endpoint = match &sc.initial {
        Initial::Deterministic(s) => trajectory(*s, &p, sc.generations).last().alpha(),
        Initial::Stochastic { spec, state, seed, .. } => {
            let path = sample_trajectory(spec, *state, sc.generations, derive_seed(*seed, index))?;
            path.last().map(ChainState::fraction).unwrap_or(state.fraction())
        }
        Initial::Multigen { history, weights } => {
            trajectory_multigen(history, weights, &p, sc.generations)?.last().copied().unwrap_or(history.newest())
        }
    };
    let reports = fixed_points(&p, DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL)?;
    let nearest = reports.iter().min_by(|a, b| (a.location - endpoint).abs().total_cmp(&(b.location - endpoint).abs()));
    Ok(CellResult {
        coords: coords.to_vec(),
        endpoint,
        fixed_point: nearest.map(|r| r.location),
        stability: nearest.map(|r| r.stability),
        fixed_point_count: reports.len(),
    })
}

fn describe(axes: &[Axis], coords: &[f64]) -> String {
    axes.iter().zip(coords).map(|(a, v)| format!("{}={v}", a.name.as_str())).collect::<Vec<_>>().join(", ")
}

pub fn run_sweep(cfg: &ScenarioConfig, workers: Option<usize>) -> CliResult<Vec<CellResult>> {
    let spec = cfg.sweep_section()?;
    let workers = match workers.or(spec.workers) {
        Some(0) => return Err(CliError::Config("--workers: must be positive".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let axes = spec.axes.clone();
    let grid = cells(&axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Resource(format!("starting {workers} workers: {e}")))?;
    pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, coords)| {
                run_cell(cfg, &axes, coords, i as u64).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("cell {}: {msg}", describe(&axes, coords))),
                    other => other,
                })
            })
            .collect()
    })
}

pub fn sweep(cfg: &ScenarioConfig, workers: Option<usize>) -> CliResult<CommandOutput> {
    let rows = run_sweep(cfg, workers)?;
    let axes = &cfg.sweep_section()?.axes;
    let mut csv = String::new();
    for a in axes {
        csv.push_str(a.name.as_str());
        csv.push(',');
    }
    csv.push_str("endpoint,fixed_point,stability,fixed_point_count\n");
    for r in &rows {
        for (a, &v) in axes.iter().zip(&r.coords) {
            if a.name.is_integer() {
                write!(csv, "{},", v as u64).unwrap();
            } else {
                write!(csv, "{},", sig17(v)).unwrap();
            }
        }
        writeln!(
            csv,
            "{},{},{},{}",
            sig17(r.endpoint),
            r.fixed_point.map(sig17).unwrap_or_default(),
            r.stability.map(|s| s.as_str()).unwrap_or(""),
            r.fixed_point_count
        )
        .unwrap();
    }
    let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    let summary = format!("sweep: {} cells over {} ({} model)\n", rows.len(), names.join(" x "), cfg.model.as_str());
    let json = json!({
        "command": "sweep",
        "model": cfg.model.as_str(),
        "axes": names,
        "cells": rows,
    });
    Ok(CommandOutput { summary, json, csv: Some(csv), svg: None, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(name: AxisName, min: f64, max: f64, steps: usize) -> Axis {
        Axis { name, min, max, steps }
    }

    #[test]
    fn values_hit_both_ends() {
        let v = axis_values(&axis(AxisName::PPlusE, 0.0, 0.4, 5));
        assert_eq!(v, vec![0.0, 0.1, 0.2, 0.30000000000000004, 0.4]);
        assert_eq!(axis_values(&axis(AxisName::Alpha0, 0.3, 0.3, 7)), vec![0.3]);
        assert_eq!(axis_values(&axis(AxisName::SampleSize, 9.0, 10.0, 3)), vec![9.0, 10.0, 10.0]);
    }

    #[test]
    fn row_major_order() {
        let grid = cells(&[axis(AxisName::PPlusE, 0.0, 1.0, 2), axis(AxisName::PMinusE, 0.0, 1.0, 3)]);
        assert_eq!(
            grid,
            vec![vec![0.0, 0.0], vec![0.0, 0.5], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.5], vec![1.0, 1.0]]
        );
    }
}
