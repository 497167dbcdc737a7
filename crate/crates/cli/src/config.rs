//! Experiment configuration: one JSON file with a block per module plus
//! per-command experiment sections. Unknown keys are rejected everywhere.

use anyhow::{bail, Context};
use ckm::integrator::IntegratorConfig;
use ckm::model::{GraphKind, ModelParams};
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelBlock,
    pub graph: GraphBlock,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub n: usize,
    pub a: f64,
    pub k: f64,
    pub p: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub b1: f64,
    #[serde(default = "one")]
    pub v1: f64,
    #[serde(default = "one")]
    pub v0: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphBlock {
    pub kind: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorBlock {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorBlock {
            rtol: d.rtol,
            atol: d.atol,
            h_init: d.h_init,
            h_max: d.h_max,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(default)]
    pub simulate: SimulateBlock,
    #[serde(default)]
    pub enumerate: EnumerateBlock,
    #[serde(default)]
    pub bifurcate: BifurcateBlock,
    #[serde(default)]
    pub sweep_gain: SweepGainBlock,
    #[serde(default)]
    pub compare: CompareBlock,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateBlock {
    /// Final time of the run (the steady-state sample of Fig.-5c style data).
    pub t_end: f64,
    /// Trajectory sampling interval.
    pub sample_dt: f64,
    /// First reported node (1-based) of the trajectory file.
    pub node_start: usize,
    /// Stride between reported nodes.
    pub node_stride: usize,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        SimulateBlock { t_end: 100.0, sample_dt: 0.5, node_start: 50, node_stride: 100 }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateBlock {}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcateBlock {
    /// Patterns scanned for saddle-nodes; None scans every pattern with
    /// sigma_1 = sigma_n = +1.
    pub sigmas: Option<Vec<String>>,
    /// Patterns tabulated as branch diagrams; None tabulates the all-plus
    /// pattern.
    pub diagram_sigmas: Option<Vec<String>>,
    pub diagram_points: usize,
}

impl Default for BifurcateBlock {
    fn default() -> Self {
        BifurcateBlock { sigmas: None, diagram_sigmas: None, diagram_points: 512 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGainBlock {
    /// Explicit gain list; overrides the generated grid when present.
    pub b1_list: Option<Vec<f64>>,
    /// Generated grid bounds; None defaults to 0.8 x existence threshold.
    pub b1_min: Option<f64>,
    pub b1_max: f64,
    pub points: usize,
    /// "linear" or "log".
    pub spacing: String,
    pub t_max: f64,
    pub window: f64,
    pub eps: f64,
}

impl Default for SweepGainBlock {
    fn default() -> Self {
        SweepGainBlock {
            b1_list: None,
            b1_min: None,
            b1_max: 1.0,
            points: 60,
            spacing: "log".into(),
            t_max: 400.0,
            window: 10.0,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareBlock {
    pub n_list: Vec<usize>,
    /// Graph/initial-condition seeds of the ensemble.
    pub seeds: Vec<u64>,
    /// Midpoint sub-samples per quadrature cell of the L2 distance.
    pub m_sub: usize,
    pub t_max: f64,
    pub window: f64,
    pub eps: f64,
}

impl Default for CompareBlock {
    fn default() -> Self {
        CompareBlock {
            n_list: vec![50, 100, 200, 400],
            seeds: vec![1],
            m_sub: 64,
            t_max: 200.0,
            window: 10.0,
            eps: 1e-7,
        }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.graph_kind()?;
        self.model_params()?.validate()?;
        self.integrator_config().validate()?;
        Ok(())
    }

    pub fn graph_kind(&self) -> anyhow::Result<GraphKind> {
        Ok(match self.graph.kind.as_str() {
            "complete" => GraphKind::Complete,
            "random-dense" => GraphKind::RandomDense,
            "random-sparse" => GraphKind::RandomSparse,
            other => bail!("unknown graph kind {other:?} (expected complete | random-dense | random-sparse)"),
        })
    }

    pub fn model_params(&self) -> anyhow::Result<ModelParams> {
        let m = &self.model;
        let mut p = ModelParams::new(m.n, m.a, m.k, m.p, m.b1, m.v1, m.v0, m.seed)?;
        if let Some(g) = m.gamma {
            p = p.with_gamma(g)?;
        }
        if self.graph.kind == "random-sparse" && m.gamma.is_none() {
            bail!("random-sparse graphs need model.gamma");
        }
        Ok(p)
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let b = &self.integrator;
        IntegratorConfig {
            rtol: b.rtol,
            atol: b.atol,
            h_init: b.h_init,
            h_max: b.h_max,
            max_steps: b.max_steps,
        }
    }
}
