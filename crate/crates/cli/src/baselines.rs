//! `bench-variance`, `qaoa` and `brute-force`.

use std::collections::BTreeMap;
use std::path::Path;

use hqrl_core::bench::{decay_fit, task_rng, variance_run, VarianceRow};
use hqrl_core::hamiltonians::io::{Dataset, Instance, ProblemKind};
use hqrl_core::hamiltonians::{
    brute_force, knapsack_qubo_slack, knapsack_qubo_unbalanced, maxcut_ising, rank_of, ucp_qubo,
    IsingHamiltonian, ProblemInstance,
};
use hqrl_core::qaoa::{qaoa_circuit, qaoa_metrics, qaoa_optimize, QaoaConfig};
use hqrl_core::{AnsatzKind, KnapsackInstance, UcpInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Encoding, ExperimentConfig};
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::write_csv;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub kind: AnsatzKind,
    pub slope: f64,
    pub intercept: f64,
}

pub fn bench_variance(cfg: &ExperimentConfig, out: &Path) -> Result<(Vec<VarianceRow>, Vec<FitRow>)> {
    let b = &cfg.bench;
    let rows = b
        .kinds
        .iter()
        .map(|&k| Ok(variance_run(k, &b.ns, b.layers, b.samples, cfg.seed)?))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let mut fits = Vec::new();
    if b.ns.len() >= 3 {
        for &kind in &b.kinds {
            let pts: Vec<(usize, f64)> =
                rows.iter().filter(|r| r.kind == kind).map(|r| (r.n, r.variance)).collect();
            let f = decay_fit(&pts)?;
            fits.push(FitRow { kind, slope: f.slope, intercept: f.intercept });
        }
    }
    write_csv(&out.join("variance.csv"), &rows)?;
    write_csv(&out.join("fits.csv"), &fits)?;
    Ok((rows, fits))
}

/// Random demand and powers for a generator table, from its own stream.
fn ucp_context(inst: &UcpInstance, seed: u64, index: u64) -> (Vec<f64>, f64) {
    let mut rng = task_rng(seed, index);
    let powers = inst.sample_powers(&mut rng);
    let demand = inst.sample_demand(&mut rng);
    (powers, demand)
}

/// One QAOA target: the original problem and its cost Hamiltonians.
struct Target {
    problem: ProblemInstance,
    hams: Vec<(&'static str, IsingHamiltonian<f64>)>,
}

pub fn slack_penalty(cfg: &ExperimentConfig, k: &KnapsackInstance) -> f64 {
    cfg.slack_penalty
        .unwrap_or_else(|| k.values.iter().sum::<f64>() + 1.0)
}

fn targets(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<Target>> {
    ds.instances
        .iter()
        .map(|inst| {
            Ok(match inst {
                Instance::MaxCut(g) => Target {
                    problem: ProblemInstance::MaxCut(g.clone()),
                    hams: vec![("maxcut", maxcut_ising(g))],
                },
                Instance::Knapsack(k) => {
                    let hams = cfg
                        .qaoa
                        .encodings
                        .iter()
                        .map(|e| {
                            let q = match e {
                                Encoding::Unbalanced => {
                                    knapsack_qubo_unbalanced(k, cfg.lambda1, cfg.lambda2)?
                                }
                                Encoding::Slack => knapsack_qubo_slack(k, slack_penalty(cfg, k))?,
                            };
                            Ok((e.name(), q.to_ising()))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Target { problem: ProblemInstance::Knapsack(k.clone()), hams }
                }
                Instance::Ucp(_) => {
                    return Err(CliError::config("the qaoa baseline covers maxcut and knapsack"))
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaRow {
    pub instance_id: usize,
    pub encoding: String,
    pub restart: usize,
    pub p_optimal: f64,
    pub p_valid: f64,
    pub final_energy: f64,
}

/// Per encoding, the restart with the lowest energy on every instance,
/// averaged over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaSummary {
    pub encoding: String,
    pub instances: usize,
    pub p_optimal: f64,
    pub p_valid: f64,
}

pub fn qaoa_rows(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<QaoaRow>> {
    let targets = targets(cfg, ds)?;
    let qc = QaoaConfig {
        p: cfg.qaoa.p,
        max_iterations: cfg.qaoa.max_iterations,
        optimizer: cfg.qaoa.optimizer,
        init: None,
    };
    let restarts = cfg.qaoa.restarts;
    let mut jobs = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        for (e, _) in t.hams.iter().enumerate() {
            for r in 0..restarts {
                jobs.push((i, e, r));
            }
        }
    }
    let encodings = targets.first().map_or(1, |t| t.hams.len());
    jobs.into_par_iter()
        .map(|(i, e, r)| {
            let t = &targets[i];
            let (name, ham) = &t.hams[e];
            let task = ((i * encodings + e) * restarts + r) as u64;
            let res = qaoa_optimize(ham, &qc, &mut task_rng(cfg.seed, task))?;
            let state = qaoa_circuit(ham, &res.gammas, &res.betas)?;
            let m = qaoa_metrics(&state, &t.problem)?;
            Ok(QaoaRow {
                instance_id: i,
                encoding: name.to_string(),
                restart: r,
                p_optimal: m.p_optimal,
                p_valid: m.p_valid,
                final_energy: res.final_energy,
            })
        })
        .collect()
}

pub fn qaoa_summary(rows: &[QaoaRow]) -> Vec<QaoaSummary> {
    let mut best: BTreeMap<(&str, usize), &QaoaRow> = BTreeMap::new();
    for r in rows {
        let slot = best.entry((r.encoding.as_str(), r.instance_id)).or_insert(r);
        if r.final_energy < slot.final_energy {
            *slot = r;
        }
    }
    let mut by_enc: BTreeMap<&str, Vec<&QaoaRow>> = BTreeMap::new();
    for ((enc, _), r) in best {
        by_enc.entry(enc).or_default().push(r);
    }
    by_enc
        .into_iter()
        .map(|(enc, rs)| {
            let k = rs.len() as f64;
            QaoaSummary {
                encoding: enc.to_string(),
                instances: rs.len(),
                p_optimal: rs.iter().map(|r| r.p_optimal).sum::<f64>() / k,
                p_valid: rs.iter().map(|r| r.p_valid).sum::<f64>() / k,
            }
        })
        .collect()
}

pub fn qaoa(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<QaoaSummary>> {
    if cfg.problem == ProblemKind::Ucp {
        return Err(CliError::config("the qaoa baseline covers maxcut and knapsack"));
    }
    let ds = data::validation_set(cfg)?;
    let rows = qaoa_rows(cfg, &ds)?;
    let summary = qaoa_summary(&rows);
    write_csv(&out.join("qaoa.csv"), &rows)?;
    write_csv(&out.join("qaoa_summary.csv"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceRow {
    pub instance_id: usize,
    /// Cut weight, knapsack value, or penalized generation cost.
    pub optimum: f64,
    /// `x_0 x_1 ...` as a 0/1 string.
    pub assignment: String,
    /// Rank of the optimum in the unbalanced knapsack QUBO (1 = ground state).
    pub unbalanced_rank: Option<usize>,
    /// Whether the slack-encoding ground state selects the optimal items.
    pub slack_matches: Option<bool>,
}

fn bit_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn index_of(x: &[bool]) -> usize {
    x.iter().enumerate().filter(|p| *p.1).map(|p| 1usize << p.0).sum()
}

pub fn brute_force_rows(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<BruteForceRow>> {
    ds.instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            Ok(match inst {
                Instance::MaxCut(g) => {
                    let (x, v) = g.max_cut()?;
                    BruteForceRow {
                        instance_id: i,
                        optimum: v,
                        assignment: bit_string(&x),
                        unbalanced_rank: None,
                        slack_matches: None,
                    }
                }
                Instance::Knapsack(k) => {
                    let (x, v) = k.optimum()?;
                    let unbalanced = knapsack_qubo_unbalanced::<f64>(k, cfg.lambda1, cfg.lambda2)?;
                    let slack = brute_force(&knapsack_qubo_slack::<f64>(k, slack_penalty(cfg, k))?)?;
                    BruteForceRow {
                        instance_id: i,
                        optimum: v,
                        assignment: bit_string(&x),
                        unbalanced_rank: Some(rank_of(&unbalanced, index_of(&x))?),
                        slack_matches: Some(slack.assignment[..k.len()] == x[..]),
                    }
                }
                Instance::Ucp(u) => {
                    let (powers, demand) = ucp_context(u, cfg.seed, i as u64);
                    let lambda = cfg.lambda_eq.unwrap_or_else(|| u.default_penalty());
                    let r = brute_force(&ucp_qubo::<f64>(u, &powers, demand, lambda)?)?;
                    BruteForceRow {
                        instance_id: i,
                        optimum: r.value,
                        assignment: bit_string(&r.assignment),
                        unbalanced_rank: None,
                        slack_matches: None,
                    }
                }
            })
        })
        .collect()
}

pub fn brute(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<BruteForceRow>> {
    let ds = data::training_set(cfg)?;
    let rows = brute_force_rows(cfg, &ds)?;
    write_csv(&out.join("brute_force.csv"), &rows)?;
    Ok(rows)
}
