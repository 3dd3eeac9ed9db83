//! Batch experiments.
//!
//! Trial `i` draws its target from `ChaCha8(derive_seed(master_seed, i))` and
//! its initial angles from `ChaCha8(derive_seed(target_seed, 1))`. In
//! FixedTargetMultiInit mode every trial uses trial 0's target. All layer
//! counts share the same seeds, so runs at different depths are paired.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use unisynth::exec::derive_seed;
use unisynth::optimizer::{synthesize, OptimizerConfig, Status};
use unisynth::{haar_random_unitary, Execution};

use crate::topology::{build_skeleton, Depth, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    RandomTargets,
    FixedTargetMultiInit,
    LayerSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    One(LayerValue),
    Many(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerValue {
    Count(usize),
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_qubits: usize,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    /// Single-qubit layer counts `l`; `"auto"` picks the minimal adequate depth.
    pub layers: Layers,
    pub trials: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_topology() -> Topology {
    Topology::Auto
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("experiment-out")
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub layers: usize,
    pub trial: usize,
    pub target_seed: u64,
    pub init_seed: u64,
    pub status: Option<Status>,
    pub final_cost: Option<f64>,
    pub sweeps_used: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Vec<(usize, f64)>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if let Layers::Many(v) = &self.layers {
            if v.is_empty() {
                bail!("layer list must not be empty");
            }
        }
        self.optimizer.validate()?;
        Ok(())
    }

    /// Concrete layer counts and topology.
    pub fn resolve(&self) -> Result<Self> {
        let topology = self.topology.resolve(self.n_qubits);
        let layers = match &self.layers {
            Layers::Many(v) => v.clone(),
            Layers::One(LayerValue::Count(l)) => vec![*l],
            Layers::One(LayerValue::Keyword(k)) if k == "auto" => {
                vec![build_skeleton(self.n_qubits, &topology, Depth::Auto)?.s_layer_count()]
            }
            Layers::One(LayerValue::Keyword(k)) => bail!("layers: expected a number, a list or \"auto\", got {k:?}"),
        };
        if layers.contains(&0) {
            bail!("layer counts must be at least 1");
        }
        Ok(Self { topology, layers: Layers::Many(layers), ..self.clone() })
    }

    fn layer_list(&self) -> Vec<usize> {
        match &self.layers {
            Layers::Many(v) => v.clone(),
            Layers::One(LayerValue::Count(l)) => vec![*l],
            Layers::One(LayerValue::Keyword(_)) => Vec::new(),
        }
    }
}

/// Runs every (layer count, trial) job; `cfg` must be resolved.
pub fn run(cfg: &ExperimentConfig, execution: Execution) -> Vec<TrialRecord> {
    let layers = cfg.layer_list();
    let jobs: Vec<(usize, usize)> =
        layers.iter().flat_map(|&l| (0..cfg.trials).map(move |t| (l, t))).collect();
    execution.map_indexed(jobs.len(), |k| {
        let (l, trial) = jobs[k];
        let target_index = if cfg.mode == Mode::FixedTargetMultiInit { 0 } else { trial };
        let target_seed = derive_seed(cfg.master_seed, target_index as u64);
        let init_seed = derive_seed(derive_seed(cfg.master_seed, trial as u64), 1);
        let mut record = TrialRecord {
            layers: l,
            trial,
            target_seed,
            init_seed,
            status: None,
            final_cost: None,
            sweeps_used: None,
            error: None,
            trace: Vec::new(),
        };
        let outcome = build_skeleton(cfg.n_qubits, &cfg.topology, Depth::SLayers(l)).and_then(|s| {
            let target = haar_random_unitary(cfg.n_qubits, &mut ChaCha8Rng::seed_from_u64(target_seed));
            let opt = OptimizerConfig { rng_seed: init_seed, ..cfg.optimizer };
            Ok(synthesize(&target, &s, &opt)?)
        });
        match outcome {
            Ok(r) => {
                record.status = Some(r.status);
                record.final_cost = Some(r.final_cost);
                record.sweeps_used = Some(r.sweeps_used);
                record.trace = r.cost_trace();
            }
            Err(e) => record.error = Some(format!("{e:#}")),
        }
        record
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> serde_json::Value {
    let per_layer: Vec<serde_json::Value> = cfg
        .layer_list()
        .into_iter()
        .map(|l| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.layers == l).collect();
            let count = |s: Status| rs.iter().filter(|r| r.status == Some(s)).count();
            let converged = count(Status::Converged);
            let mut costs: Vec<f64> = rs.iter().filter_map(|r| r.final_cost).collect();
            costs.sort_by(f64::total_cmp);
            let mut sweeps: Vec<f64> = rs.iter().filter_map(|r| r.sweeps_used.map(|s| s as f64)).collect();
            sweeps.sort_by(f64::total_cmp);
            json!({
                "layers": l,
                "trials": rs.len(),
                "converged": converged,
                "plateaued": count(Status::Plateaued),
                "budget_exhausted": count(Status::SweepBudgetExhausted),
                "failed": rs.iter().filter(|r| r.error.is_some()).count(),
                "success_rate": converged as f64 / rs.len().max(1) as f64,
                "median_sweeps": if sweeps.is_empty() { None } else { Some(quantile(&sweeps, 0.5)) },
                "cost_quantiles": if costs.is_empty() { None } else { Some(json!({
                    "min": costs[0],
                    "q25": quantile(&costs, 0.25),
                    "median": quantile(&costs, 0.5),
                    "q75": quantile(&costs, 0.75),
                    "max": costs[costs.len() - 1],
                })) },
            })
        })
        .collect();
    let converged = records.iter().filter(|r| r.status == Some(Status::Converged)).count();
    json!({
        "config": cfg,
        "seed_derivation": "target_seed = splitmix64(master_seed ^ splitmix64(i)); init_seed = splitmix64(splitmix64(master_seed ^ splitmix64(trial)) ^ splitmix64(1)); i = 0 for FixedTargetMultiInit, else trial",
        "total_trials": records.len(),
        "success_rate": converged as f64 / records.len().max(1) as f64,
        "by_layers": per_layer,
    })
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes `trials.json`, `aggregate.csv`, `summary.json` and one trace CSV
/// per trial under `dir/traces`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<serde_json::Value> {
    fs::create_dir_all(dir.join("traces")).with_context(|| format!("creating {}", dir.display()))?;
    let summary = summarize(cfg, records);
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(dir.join("trials.json"), serde_json::to_string_pretty(records)? + "\n")?;

    let mut csv = String::from("layers,trial,target_seed,init_seed,status,final_cost,sweeps_used,error\n");
    for r in records {
        let status = r.status.map(|s| format!("{s:?}")).unwrap_or_default();
        let sweeps = r.sweeps_used.map(|s| s.to_string()).unwrap_or_default();
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
        csv.push_str(&format!(
            "{},{},{},{},{status},{},{sweeps},{error}\n",
            r.layers,
            r.trial,
            r.target_seed,
            r.init_seed,
            opt_f64(r.final_cost)
        ));
    }
    fs::write(dir.join("aggregate.csv"), csv)?;

    for r in records.iter().filter(|r| !r.trace.is_empty()) {
        let mut t = String::from("sweep,cost,wall_seconds\n");
        for (s, c) in &r.trace {
            t.push_str(&format!("{s},{c:e},0\n"));
        }
        fs::write(dir.join("traces").join(format!("l{}_t{}.csv", r.layers, r.trial)), t)?;
    }
    Ok(summary)
}
