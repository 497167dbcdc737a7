//! `compare`: L2 distance between the synchronized discrete state (solved on
//! complete graphs, simulated on random ones) and the continuum profile U,
//! across node counts and seeds.

use anyhow::Context;
use ckm::continuum::{embed, l2_distance, solve_c, ContinuumSolution};
use ckm::equilibria::{solve_equilibrium, SignPattern};
use ckm::integrator::steady_state;
use ckm::model::{build_graph, initial_phases, wrap_to_pi, GraphKind, RotatingField};
use rayon::prelude::*;
use std::path::Path;

use crate::config::Config;
use crate::output::{fmt_f64, write_csv, RunReport};

#[derive(Clone, Debug)]
pub struct CompareRow {
    pub kind: &'static str,
    pub n: usize,
    pub seed: u64,
    pub l2: f64,
    pub converged: bool,
}

fn compare_row(cfg: &Config, theory: &ContinuumSolution, n: usize, seed: u64) -> anyhow::Result<CompareRow> {
    let kind = cfg.graph_kind()?;
    let block = &cfg.experiment.compare;
    let mut params = cfg.model_params()?;
    params.n = n;
    params.seed = seed;
    params.validate()?;

    let (state, converged) = match kind {
        GraphKind::Complete => {
            // stable synchronized state in closed form: the all-plus root
            // below the fold
            let recs = solve_equilibrium(&SignPattern::all_plus(n), &params)?;
            match recs.first() {
                Some(rec) => (rec.v.clone(), true),
                None => anyhow::bail!("no synchronized equilibrium at b1 = {}", params.b1),
            }
        }
        _ => {
            let graph = build_graph(kind, &params)?;
            let u0 = initial_phases(&params);
            let mut field = RotatingField::on_graph(&params, &graph);
            let ss = steady_state(
                |t, v: &[f64], out: &mut [f64]| field.eval(t, v, out),
                &u0,
                &cfg.integrator_config(),
                block.t_max,
                block.window,
                block.eps,
            )?;
            (ss.state, ss.converged)
        }
    };
    let wrapped: Vec<f64> = state.iter().map(|&v| wrap_to_pi(v)).collect();
    let l2 = l2_distance(&embed(&wrapped), theory, block.m_sub);
    Ok(CompareRow { kind: kind.label(), n, seed, l2, converged })
}

pub fn compute(cfg: &Config) -> anyhow::Result<Vec<CompareRow>> {
    let params = cfg.model_params()?;
    let block = &cfg.experiment.compare;
    if block.n_list.is_empty() || block.seeds.is_empty() {
        anyhow::bail!("compare needs non-empty n_list and seeds");
    }
    if block.n_list.windows(2).any(|w| w[1] <= w[0]) {
        anyhow::bail!("compare.n_list must be strictly increasing");
    }
    let theory = solve_c(params.a, params.p_k(), params.b1)?
        .context("no continuum solution at this gain; nothing to compare against")?;
    let tasks: Vec<(usize, u64)> = block
        .n_list
        .iter()
        .flat_map(|&n| block.seeds.iter().map(move |&s| (n, s)))
        .collect();
    tasks
        .par_iter()
        .map(|&(n, seed)| compare_row(cfg, &theory, n, seed))
        .collect()
}

pub fn run(cfg: &Config, out_dir: &Path) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new("compare");
    let rows = compute(cfg)?;
    let path = out_dir.join("compare.csv");
    write_csv(
        &path,
        "kind,n,seed,l2,converged",
        rows.iter()
            .map(|r| format!("{},{},{},{},{}", r.kind, r.n, r.seed, fmt_f64(r.l2), r.converged)),
    )?;
    report.outputs.push(path);
    for r in rows.iter().filter(|r| !r.converged) {
        report.notes.push(format!("kind = {}, n = {}, seed = {}: not converged", r.kind, r.n, r.seed));
    }
    Ok(report)
}
