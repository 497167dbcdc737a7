//! `enumerate`: census of all 2^n sign-pattern equilibria with spectral
//! classification, emitted as a JSON table.

use ckm::equilibria::{enumerate_equilibria, EquilibriumRecord};
use ckm::spectra::{stability, StabilityClass, StabilityReport};
use rayon::prelude::*;
use std::path::Path;

use crate::config::Config;
use crate::output::RunReport;

pub struct ClassifiedRecord {
    pub record: EquilibriumRecord,
    pub report: StabilityReport,
}

pub fn compute(cfg: &Config) -> anyhow::Result<Vec<ClassifiedRecord>> {
    let params = cfg.model_params()?;
    let records = enumerate_equilibria(&params)?;
    let classified = records
        .into_par_iter()
        .map(|record| {
            let report = stability(&record.v, &params)?;
            Ok(ClassifiedRecord { record, report })
        })
        .collect::<ckm::Result<Vec<_>>>()?;
    Ok(classified)
}

pub fn run(cfg: &Config, out_dir: &Path) -> anyhow::Result<RunReport> {
    let mut report = RunReport::new("enumerate");
    let classified = compute(cfg)?;
    let stable_count = classified
        .iter()
        .filter(|c| c.report.class == StabilityClass::AsymptoticallyStable)
        .count();

    let records: Vec<serde_json::Value> = classified
        .iter()
        .map(|c| {
            serde_json::json!({
                "sigma": c.record.sigma.to_string(),
                "xi": c.record.xi,
                "c_d": c.record.c_d,
                "branch": c.record.branch.label(),
                "residual": c.record.residual,
                "boundary": c.record.boundary,
                "eig_min": c.report.eigenvalues.first(),
                "eig_max": c.report.eigenvalues.last(),
                "n_positive": c.report.n_positive,
                "n_zero": c.report.n_zero,
                "class": c.report.class.label(),
            })
        })
        .collect();
    let table = serde_json::json!({
        "n": cfg.model.n,
        "b1": cfg.model.b1,
        "count": records.len(),
        "stable_count": stable_count,
        "records": records,
    });

    let path = out_dir.join("equilibria.json");
    std::fs::write(&path, serde_json::to_string_pretty(&table)?)?;
    report.outputs.push(path);
    Ok(report)
}
