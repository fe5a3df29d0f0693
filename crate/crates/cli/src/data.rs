//! Instance generation, dataset lookup and environment construction.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use hqrl_core::bench::task_rng;
use hqrl_core::hamiltonians::io::{instance_file_name, Dataset, DatasetManifest, Instance, ProblemKind};
use hqrl_core::{KnapsackInstance, UcpInstance, WeightedGraph};
use hqrl_rl::envs::{KnapsackData, KnapsackEnv, MaxCutData, MaxCutEnv, UcpEnv};
use rand::Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TRAIN_STREAM: u64 = 0;
pub const VALIDATION_STREAM: u64 = 1;

/// Complete graph with weights in `(0, 1]`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightedGraph {
    WeightedGraph::complete(n, |_, _| 1.0 - rng.gen::<f64>())
}

/// Integer values and weights in `[1, 10]`, capacity `round(0.6 sum w)`.
pub fn random_knapsack<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<KnapsackInstance> {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
    let capacity = (0.6 * weights.iter().sum::<f64>()).round();
    Ok(KnapsackInstance::new(values, weights, capacity)?)
}

fn optimum(inst: &Instance) -> Result<Option<f64>> {
    Ok(match inst {
        Instance::MaxCut(g) => Some(g.max_cut()?.1),
        Instance::Knapsack(k) => Some(k.optimum()?.1),
        Instance::Ucp(_) => None,
    })
}

/// `count` instances of the configured problem from stream `stream` of
/// `cfg.seed`, with their brute-force optima.
pub fn generate(cfg: &ExperimentConfig, stream: u64, count: usize) -> Result<Dataset> {
    let mut rng = task_rng(cfg.seed, stream);
    let instances = (0..count)
        .map(|_| {
            Ok(match cfg.problem {
                ProblemKind::Maxcut => Instance::MaxCut(random_graph(cfg.size, &mut rng)),
                ProblemKind::Knapsack => Instance::Knapsack(random_knapsack(cfg.size, &mut rng)?),
                ProblemKind::Ucp => Instance::Ucp(UcpInstance::synthetic(cfg.size, &mut rng)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let optima = instances
        .par_iter()
        .map(optimum)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect::<Option<Vec<f64>>>();
    let manifest = DatasetManifest {
        problem: cfg.problem,
        count,
        size: cfg.size,
        seed: cfg.seed,
        stream,
        files: (0..count).map(|i| instance_file_name(cfg.problem, i)).collect(),
        optima,
    };
    Ok(Dataset {
        dir: PathBuf::new(),
        manifest,
        instances,
    })
}

fn load(dir: &Path, cfg: &ExperimentConfig) -> Result<Dataset> {
    let ds = Dataset::load(dir)
        .map_err(|e| CliError::config(format!("dataset {}: {e}", dir.display())))?;
    if ds.manifest.problem != cfg.problem {
        return Err(CliError::config(format!(
            "dataset {} holds {} instances but the problem is {}",
            dir.display(),
            ds.manifest.problem,
            cfg.problem
        )));
    }
    Ok(ds)
}

/// `dir/split` when `dir` is a gen-data output, else `dir` itself.
fn split_dir(dir: &Path, split: &str) -> Option<PathBuf> {
    let sub = dir.join(split);
    sub.is_dir().then_some(sub)
}

/// Training instances: `dataset` when given, otherwise generated in memory.
pub fn training_set(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.dataset {
        Some(d) => load(&split_dir(d, "train").unwrap_or_else(|| d.clone()), cfg),
        None => generate(cfg, TRAIN_STREAM, cfg.count),
    }
}

/// Held-out instances: `validation`, else the validation split next to
/// `dataset`, else generated in memory.
pub fn validation_set(cfg: &ExperimentConfig) -> Result<Dataset> {
    if let Some(v) = &cfg.validation {
        return load(&split_dir(v, "validation").unwrap_or_else(|| v.clone()), cfg);
    }
    if let Some(v) = cfg.dataset.as_deref().and_then(|d| split_dir(d, "validation")) {
        return load(&v, cfg);
    }
    generate(cfg, VALIDATION_STREAM, cfg.validation_count)
}

pub fn maxcut_env(ds: &Dataset) -> Result<MaxCutEnv> {
    let graphs = ds.graphs()?;
    let data = match &ds.manifest.optima {
        Some(o) => MaxCutData::with_optima(graphs, o.clone())?,
        None => MaxCutData::new(graphs)?,
    };
    Ok(MaxCutEnv::new(Arc::new(data)))
}

pub fn knapsack_env(ds: &Dataset, cfg: &ExperimentConfig) -> Result<KnapsackEnv> {
    let items = ds.knapsacks()?;
    let data = match &ds.manifest.optima {
        Some(o) => KnapsackData::with_optima(items, o.clone(), cfg.lambda1, cfg.lambda2)?,
        None => KnapsackData::new(items, cfg.lambda1, cfg.lambda2)?,
    };
    Ok(KnapsackEnv::new(Arc::new(data), cfg.masking))
}

/// Unit commitment trains on the first generator table of the dataset.
pub fn ucp_env(ds: &Dataset, cfg: &ExperimentConfig) -> Result<UcpEnv> {
    let inst = ds
        .ucps()?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::config("unit-commitment dataset is empty"))?;
    let lambda = cfg.lambda_eq.unwrap_or_else(|| inst.default_penalty());
    Ok(UcpEnv::new(Arc::new(inst), lambda)?)
}
