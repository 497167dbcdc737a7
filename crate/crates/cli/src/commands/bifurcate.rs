//! `bifurcate`: saddle-node and pitchfork points plus branch-diagram tables
//! for the configured sign patterns.

use anyhow::Context;
use ckm::bifurcation::{branch_diagram, pitchfork_points, saddle_node_points, BifurcationKind, BranchRow};
use ckm::equilibria::{BranchSign, SignPattern};
use rayon::prelude::*;
use std::path::Path;

use crate::config::Config;
use crate::output::{fmt_f64, fmt_opt, write_csv, RunReport};

pub struct PointsResult {
    pub points: Vec<(BifurcationKind, SignPattern, f64, f64, &'static str)>,
    pub degenerate: Vec<SignPattern>,
}

/// Saddle-node points for the configured patterns (default: every pattern
/// with sigma_1 = sigma_n = +1) and pitchfork points for all interior
/// patterns.
pub fn compute_points(cfg: &Config) -> anyhow::Result<PointsResult> {
    let params = cfg.model_params()?;
    let n = params.n;
    let sigmas: Vec<SignPattern> = match &cfg.experiment.bifurcate.sigmas {
        Some(list) => list
            .iter()
            .map(|s| s.parse::<SignPattern>().map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?,
        None => (0..1u64 << (n - 2))
            .map(|mask| {
                let mut signs = vec![1i8; n];
                for b in 0..n - 2 {
                    signs[b + 1] = if mask >> b & 1 == 1 { 1 } else { -1 };
                }
                SignPattern::new(signs).expect("valid pattern")
            })
            .collect(),
    };

    let mut points = Vec::new();
    let sn: Vec<_> = sigmas
        .par_iter()
        .map(|s| saddle_node_points(s, &params, BranchSign::Plus))
        .collect::<ckm::Result<Vec<_>>>()?;
    for pts in sn {
        for p in pts {
            points.push((BifurcationKind::SaddleNode, p.sigma, p.xi_star, p.b1_star, p.criticality.label()));
        }
    }
    let scan = pitchfork_points(&params).context("pitchfork scan")?;
    for p in scan.points {
        points.push((BifurcationKind::Pitchfork, p.sigma, p.xi_star, p.b1_star, p.criticality.label()));
    }
    Ok(PointsResult { points, degenerate: scan.degenerate })
}

pub fn compute_diagram(cfg: &Config, sigma: &SignPattern) -> anyhow::Result<Vec<BranchRow>> {
    let params = cfg.model_params()?;
    let m = cfg.experiment.bifurcate.diagram_points.max(2);
    let grid: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
    Ok(branch_diagram(sigma, &params, &grid, BranchSign::Plus)?)
}

pub fn run(cfg: &Config, out_dir: &Path) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new("bifurcate");
    let result = compute_points(cfg)?;

    let points_path = out_dir.join("bifurcation_points.csv");
    write_csv(
        &points_path,
        "kind,sigma,xi_star,b1_star,criticality",
        result.points.iter().map(|(kind, sigma, xi, b1, crit)| {
            let kind = match kind {
                BifurcationKind::SaddleNode => "saddle-node",
                BifurcationKind::Pitchfork => "pitchfork",
            };
            format!("{kind},{sigma},{},{},{crit}", fmt_f64(*xi), fmt_f64(*b1))
        }),
    )?;
    report.outputs.push(points_path);
    for s in &result.degenerate {
        report.notes.push(format!("pattern {s}: chibar(1) = 0, degenerate, unclassified"));
    }

    let diagram_sigmas: Vec<SignPattern> = match &cfg.experiment.bifurcate.diagram_sigmas {
        Some(list) => list
            .iter()
            .map(|s| s.parse::<SignPattern>().map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?,
        None => vec![SignPattern::all_plus(cfg.model.n)],
    };
    let diagram_path = out_dir.join("branch_diagram.csv");
    let mut rows = Vec::new();
    for sigma in &diagram_sigmas {
        for row in compute_diagram(cfg, sigma)? {
            rows.push(format!(
                "{sigma},{},{},{},{},{},{}",
                fmt_f64(row.xi),
                fmt_opt(row.chibar),
                fmt_opt(row.b1),
                row.n_positive.map(|v| v.to_string()).unwrap_or_default(),
                row.class.map(|c| c.label().to_string()).unwrap_or_default(),
                row.pole,
            ));
        }
    }
    write_csv(&diagram_path, "sigma,xi,chibar,b1,n_positive,class,pole", rows)?;
    report.outputs.push(diagram_path);
    Ok(report)
}
