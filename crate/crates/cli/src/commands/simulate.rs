//! `simulate`: integrate the controlled model from uniform random phases and
//! emit trajectory samples (selected nodes) plus the full deviation vector at
//! t_end, with the continuum prediction alongside when it exists.

use anyhow::Context;
use ckm::continuum::solve_c;
use ckm::integrator::integrate;
use ckm::model::{build_graph, initial_phases, wrap_to_pi, GraphKind, RotatingField};
use std::path::Path;

use crate::config::Config;
use crate::output::{fmt_f64, fmt_opt, write_csv, RunReport};

pub struct FinalRow {
    /// 1-based node index.
    pub node: usize,
    /// Midpoint x = (node - 1/2) / n of the node's cell.
    pub x: f64,
    /// Deviation u - V(t_end), wrapped to (-pi, pi].
    pub deviation: f64,
    /// Continuum profile U(x), when the continuous solution exists.
    pub u_theory: Option<f64>,
}

pub struct SimulateResult {
    pub sample_times: Vec<f64>,
    /// 1-based indices of the tracked trajectory nodes.
    pub tracked_nodes: Vec<usize>,
    /// Per sample time, deviations of the tracked nodes (unwrapped).
    pub tracked: Vec<Vec<f64>>,
    pub final_rows: Vec<FinalRow>,
}

pub fn compute(cfg: &Config) -> anyhow::Result<SimulateResult> {
    let params = cfg.model_params()?;
    let kind = cfg.graph_kind()?;
    let block = &cfg.experiment.simulate;
    if block.node_start < 1 || block.node_stride < 1 {
        anyhow::bail!("simulate.node_start and node_stride must be >= 1");
    }
    if !(block.t_end > 0.0 && block.sample_dt > 0.0) {
        anyhow::bail!("simulate.t_end and sample_dt must be > 0");
    }

    let mut sample_times: Vec<f64> = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * block.sample_dt;
        if t >= block.t_end - 1e-9 {
            break;
        }
        sample_times.push(t);
        k += 1;
    }
    sample_times.push(block.t_end);

    let u0 = initial_phases(&params);
    let graph = match kind {
        GraphKind::Complete => None,
        _ => Some(build_graph(kind, &params)?),
    };
    let mut field = match &graph {
        None => RotatingField::complete(&params),
        Some(g) => RotatingField::on_graph(&params, g),
    };
    let traj = integrate(
        |t, v: &[f64], out: &mut [f64]| field.eval(t, v, out),
        &u0,
        (0.0, block.t_end),
        &cfg.integrator_config(),
        Some(&sample_times),
    )
    .context("integrating the rotating-frame model")?;

    let tracked_nodes: Vec<usize> = (block.node_start..=params.n)
        .step_by(block.node_stride)
        .collect();
    let tracked: Vec<Vec<f64>> = traj
        .states()
        .iter()
        .map(|s| tracked_nodes.iter().map(|&i| s[i - 1]).collect())
        .collect();

    let theory = solve_c(params.a, params.p_k(), params.b1)?;
    let last = traj.states().last().unwrap();
    let final_rows = (1..=params.n)
        .map(|node| {
            let x = (node as f64 - 0.5) / params.n as f64;
            FinalRow {
                node,
                x,
                deviation: wrap_to_pi(last[node - 1]),
                u_theory: theory.as_ref().map(|sol| sol.u(x).unwrap()),
            }
        })
        .collect();

    Ok(SimulateResult { sample_times: traj.times().to_vec(), tracked_nodes, tracked, final_rows })
}

pub fn run(cfg: &Config, out_dir: &Path) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new("simulate");
    let result = compute(cfg)?;

    let traj_path = out_dir.join("trajectory.csv");
    let header = std::iter::once("t".to_string())
        .chain(result.tracked_nodes.iter().map(|i| format!("node_{i}")))
        .collect::<Vec<_>>()
        .join(",");
    write_csv(
        &traj_path,
        &header,
        result.sample_times.iter().zip(&result.tracked).map(|(t, devs)| {
            std::iter::once(fmt_f64(*t))
                .chain(devs.iter().map(|d| fmt_f64(*d)))
                .collect::<Vec<_>>()
                .join(",")
        }),
    )?;
    report.outputs.push(traj_path);

    let final_path = out_dir.join("final_deviations.csv");
    write_csv(
        &final_path,
        "node,x,deviation,u_theory",
        result.final_rows.iter().map(|r| {
            format!("{},{},{},{}", r.node, fmt_f64(r.x), fmt_f64(r.deviation), fmt_opt(r.u_theory))
        }),
    )?;
    report.outputs.push(final_path);

    let params = cfg.model_params()?;
    match solve_c(params.a, params.p_k(), params.b1)? {
        Some(sol) => {
            let path = out_dir.join("u_curve.csv");
            write_csv(
                &path,
                "x,u",
                (0..=1000).map(|k| {
                    let x = k as f64 / 1000.0;
                    format!("{},{}", fmt_f64(x), fmt_f64(sol.u(x).unwrap()))
                }),
            )?;
            report.outputs.push(path);
        }
        None => {
            report.notes.push("continuum solution does not exist at this gain; u_theory left empty".into());
        }
    }
    Ok(report)
}
