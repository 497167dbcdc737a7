//! `sweep-gain`: steady-state deviation band against the continuum
//! prediction +-Delta u over a gain grid (Fig.-5d style data).

use anyhow::bail;
use ckm::continuum::{existence_threshold, solve_c};
use ckm::integrator::steady_state;
use ckm::model::{build_graph, initial_phases, wrap_to_pi, GraphKind, RotatingField, WeightMatrix};
use rayon::prelude::*;
use std::path::Path;

use crate::config::Config;
use crate::output::{fmt_f64, fmt_opt, write_csv, RunReport};

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub b1: f64,
    pub max_dev: f64,
    pub min_dev: f64,
    pub delta_u: Option<f64>,
    pub threshold: f64,
    pub converged: bool,
    pub t_reached: f64,
}

pub fn gain_grid(cfg: &Config) -> anyhow::Result<Vec<f64>> {
    let block = &cfg.experiment.sweep_gain;
    if let Some(list) = &block.b1_list {
        if list.is_empty() {
            bail!("sweep_gain.b1_list is empty");
        }
        return Ok(list.clone());
    }
    let params = cfg.model_params()?;
    let lo = block
        .b1_min
        .unwrap_or_else(|| 0.8 * existence_threshold(params.a, params.p_k()));
    let hi = block.b1_max;
    let m = block.points;
    if m < 2 || !(hi > lo) {
        bail!("sweep_gain grid needs points >= 2 and b1_max > b1_min");
    }
    match block.spacing.as_str() {
        "linear" => Ok((0..m)
            .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
            .collect()),
        "log" => {
            if lo <= 0.0 {
                bail!("log spacing needs b1_min > 0");
            }
            Ok((0..m)
                .map(|k| lo * (hi / lo).powf(k as f64 / (m - 1) as f64))
                .collect())
        }
        other => bail!("unknown spacing {other:?} (expected linear | log)"),
    }
}

/// One steady-state run at gain b1 from fresh random initial phases
/// (per-row seed offset keeps rows independent and reproducible).
fn sweep_row(
    cfg: &Config,
    graph: Option<&WeightMatrix>,
    b1: f64,
    row: usize,
) -> anyhow::Result<SweepRow> {
    let mut params = cfg.model_params()?.with_b1(b1);
    params.seed = params.seed.wrapping_add(row as u64);
    let block = &cfg.experiment.sweep_gain;
    let u0 = initial_phases(&params);
    let mut field = match graph {
        None => RotatingField::complete(&params),
        Some(g) => RotatingField::on_graph(&params, g),
    };
    let ss = steady_state(
        |t, v: &[f64], out: &mut [f64]| field.eval(t, v, out),
        &u0,
        &cfg.integrator_config(),
        block.t_max,
        block.window,
        block.eps,
    )?;
    let wrapped: Vec<f64> = ss.state.iter().map(|&v| wrap_to_pi(v)).collect();
    let max_dev = wrapped.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let min_dev = wrapped.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let delta_u = solve_c(params.a, params.p_k(), b1)?.map(|sol| sol.delta_u().unwrap());
    Ok(SweepRow {
        b1,
        max_dev,
        min_dev,
        delta_u,
        threshold: existence_threshold(params.a, params.p_k()),
        converged: ss.converged,
        t_reached: ss.t_reached,
    })
}

pub fn compute(cfg: &Config) -> anyhow::Result<Vec<SweepRow>> {
    let grid = gain_grid(cfg)?;
    let kind = cfg.graph_kind()?;
    let params = cfg.model_params()?;
    let graph = match kind {
        GraphKind::Complete => None,
        _ => Some(build_graph(kind, &params)?),
    };
    grid.par_iter()
        .enumerate()
        .map(|(row, &b1)| sweep_row(cfg, graph.as_ref(), b1, row))
        .collect()
}

pub fn run(cfg: &Config, out_dir: &Path) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new("sweep-gain");
    let rows = compute(cfg)?;
    let path = out_dir.join("gain_sweep.csv");
    write_csv(
        &path,
        "b1,max_dev,min_dev,delta_u,threshold,converged,t_reached",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                fmt_f64(r.b1),
                fmt_f64(r.max_dev),
                fmt_f64(r.min_dev),
                fmt_opt(r.delta_u),
                fmt_f64(r.threshold),
                r.converged,
                fmt_f64(r.t_reached),
            )
        }),
    )?;
    report.outputs.push(path);
    for r in rows.iter().filter(|r| !r.converged) {
        report.notes.push(format!("b1 = {}: no steady state by t = {}", r.b1, r.t_reached));
    }
    Ok(report)
}
