//! Experiment configuration: built-in defaults, then a JSON file, then
//! command-line overrides.
//!
//! Defaults depend on the problem and the step budget (schedules are
//! stretched over the run), so those two keys are read from the user layers
//! first and the remaining defaults are filled in around them.

use std::path::{Path, PathBuf};

use hqrl_core::hamiltonians::io::ProblemKind;
use hqrl_core::qaoa::QaoaOptimizer;
use hqrl_core::AnsatzKind;
use hqrl_rl::agents::{
    BernoulliLink, HeadKind, Model, QdqnConfig, QpgConfig, ScalingMode, Schedule,
};
use hqrl_rl::envs::Masking;
use hqrl_rl::train::{AgentConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Qdqn,
    Qpg,
    Qaoa,
    BruteForce,
}

/// Constraint encoding for the knapsack QAOA baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Unbalanced,
    Slack,
}

impl Encoding {
    pub fn name(&self) -> &'static str {
        match self {
            Encoding::Unbalanced => "unbalanced",
            Encoding::Slack => "slack",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaSection {
    pub p: usize,
    pub max_iterations: usize,
    pub optimizer: QaoaOptimizer,
    pub restarts: usize,
    pub encodings: Vec<Encoding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub kinds: Vec<AnsatzKind>,
    pub ns: Vec<usize>,
    pub layers: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Variables per instance: nodes, generators or items.
    pub size: usize,
    /// Training instances written by gen-data.
    pub count: usize,
    pub validation_count: usize,
    pub dataset: Option<PathBuf>,
    pub validation: Option<PathBuf>,

    pub ansatz: AnsatzKind,
    pub layers: usize,
    pub head: HeadKind,
    pub total_steps: u64,
    pub seeds: usize,
    pub log_every: u64,
    pub checkpoint_every: u64,
    /// Steps at the end of a run averaged into the final score.
    pub final_window: u64,

    pub lr: f64,
    pub lr_scaling: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync: u64,
    pub epsilon: Schedule,
    pub learning_starts: u64,
    pub temperature: Schedule,
    pub scaling: ScalingMode,
    pub baseline_decay: Option<f64>,
    pub episodes_per_update: usize,
    pub link: BernoulliLink,
    pub bandit: bool,

    pub lambda1: f64,
    pub lambda2: f64,
    /// Unit-commitment demand penalty; per-instance default when absent.
    pub lambda_eq: Option<f64>,
    /// Knapsack slack-encoding penalty; `sum(v) + 1` when absent.
    pub slack_penalty: Option<f64>,
    pub masking: Masking,

    pub checkpoint: Option<PathBuf>,
    pub episodes_per_instance: usize,

    pub qaoa: QaoaSection,
    pub bench: BenchSection,
}

pub fn default_steps(problem: ProblemKind) -> u64 {
    match problem {
        ProblemKind::Maxcut => 50_000,
        ProblemKind::Knapsack => 200_000,
        ProblemKind::Ucp => 150_000,
    }
}

impl ExperimentConfig {
    pub fn defaults(problem: ProblemKind, total_steps: u64) -> Self {
        let (algorithm, size, layers, head, seeds) = match problem {
            ProblemKind::Maxcut => (Algorithm::Qdqn, 5, 3, HeadKind::NodeX, 5),
            ProblemKind::Knapsack => (Algorithm::Qpg, 5, 5, HeadKind::ItemZ, 10),
            ProblemKind::Ucp => (Algorithm::Qpg, 5, 5, HeadKind::BernoulliZ, 5),
        };
        let temperature = match problem {
            ProblemKind::Maxcut => Schedule::linear(1.0, 10.0, total_steps / 2),
            ProblemKind::Knapsack => Schedule::linear(1.0, 25.0, total_steps),
            ProblemKind::Ucp => Schedule::constant(1.0),
        };
        let scaling = match problem {
            ProblemKind::Maxcut => ScalingMode::Global,
            ProblemKind::Knapsack => ScalingMode::None,
            ProblemKind::Ucp => ScalingMode::PerObservable,
        };
        let ucp = problem == ProblemKind::Ucp;
        let qdqn = QdqnConfig::default();
        let qpg = QpgConfig::default();
        Self {
            problem,
            algorithm,
            seed: 0,
            size,
            count: if ucp { 1 } else { 100 },
            validation_count: if ucp { 1 } else { 100 },
            dataset: None,
            validation: None,
            ansatz: AnsatzKind::SgeSgv,
            layers,
            head,
            total_steps,
            seeds,
            log_every: 100,
            checkpoint_every: 10_000,
            final_window: 1000,
            lr: qdqn.lr,
            lr_scaling: qpg.lr_scaling,
            gamma: if ucp { 1.0 } else { qdqn.gamma },
            batch_size: qdqn.batch_size,
            replay_capacity: qdqn.replay_capacity,
            target_sync: qdqn.target_sync,
            epsilon: qdqn.epsilon,
            learning_starts: qdqn.learning_starts,
            temperature,
            scaling,
            baseline_decay: qpg.baseline_decay,
            episodes_per_update: qpg.episodes_per_update,
            link: qpg.link,
            bandit: ucp,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda_eq: None,
            slack_penalty: None,
            masking: Masking::Hard,
            checkpoint: None,
            episodes_per_instance: 100,
            qaoa: QaoaSection {
                p: 3,
                max_iterations: 100,
                optimizer: QaoaOptimizer::Adam { lr: 0.05 },
                restarts: 5,
                encodings: vec![Encoding::Unbalanced, Encoding::Slack],
            },
            bench: BenchSection {
                kinds: AnsatzKind::ALL.to_vec(),
                ns: vec![4, 6, 8, 10],
                layers: 5,
                samples: 1000,
            },
        }
    }

    /// Every problem with the configuration, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        check(self.size >= 1, "size must be >= 1".into());
        check(self.size <= 20, format!("size {} exceeds the 20-qubit simulation limit", self.size));
        check(self.count >= 1, "count must be >= 1".into());
        check(self.seeds >= 1, "seeds must be >= 1".into());
        check(self.total_steps >= 1, "total_steps must be >= 1".into());
        check(self.log_every >= 1, "log_every must be >= 1".into());
        check(self.checkpoint_every >= 1, "checkpoint_every must be >= 1".into());
        check(self.episodes_per_instance >= 1, "episodes_per_instance must be >= 1".into());
        check(
            self.lambda1 >= 0.0 && self.lambda2 >= 0.0,
            "lambda1 and lambda2 must be >= 0".into(),
        );
        if let Some(l) = self.lambda_eq {
            check(l > 0.0, format!("lambda_eq must be > 0, got {l}"));
        }
        if let Some(p) = self.slack_penalty {
            check(p > 0.0, format!("slack_penalty must be > 0, got {p}"));
        }
        check(self.qaoa.p >= 1, "qaoa.p must be >= 1".into());
        check(self.qaoa.max_iterations >= 1, "qaoa.max_iterations must be >= 1".into());
        check(self.qaoa.restarts >= 1, "qaoa.restarts must be >= 1".into());
        check(self.bench.samples >= 2, "bench.samples must be >= 2".into());
        check(self.bench.layers >= 3, "bench.layers must be >= 3".into());
        check(
            self.bench.ns.iter().all(|&n| (2..=20).contains(&n)),
            "bench.ns entries must be in 2..=20".into(),
        );
        let head_ok = match self.problem {
            ProblemKind::Maxcut => matches!(self.head, HeadKind::NodeX | HeadKind::EdgeZz),
            ProblemKind::Knapsack => matches!(self.head, HeadKind::ItemZ | HeadKind::NodeX),
            ProblemKind::Ucp => self.head == HeadKind::BernoulliZ,
        };
        check(
            head_ok,
            format!("head {:?} does not fit problem {}", self.head, self.problem),
        );
        if self.problem == ProblemKind::Ucp {
            check(
                self.algorithm != Algorithm::Qdqn,
                "unit commitment has whole-vector actions; use algorithm qpg".into(),
            );
        }
        if matches!(self.algorithm, Algorithm::Qdqn | Algorithm::Qpg) {
            errs.extend(self.agent_config().validate());
        }
        errs
    }

    pub fn model(&self) -> Model {
        Model::new(self.ansatz, self.layers, self.head)
    }

    pub fn agent_config(&self) -> AgentConfig {
        match self.algorithm {
            Algorithm::Qdqn => AgentConfig::Qdqn(QdqnConfig {
                model: self.model(),
                lr: self.lr,
                gamma: self.gamma,
                batch_size: self.batch_size,
                replay_capacity: self.replay_capacity,
                target_sync: self.target_sync,
                epsilon: self.epsilon,
                learning_starts: self.learning_starts,
            }),
            _ => AgentConfig::Qpg(QpgConfig {
                model: self.model(),
                lr_circuit: self.lr,
                lr_scaling: self.lr_scaling,
                gamma: self.gamma,
                scaling: self.scaling,
                temperature: self.temperature,
                baseline_decay: self.baseline_decay,
                episodes_per_update: self.episodes_per_update,
                link: self.link,
            }),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            agent: self.agent_config(),
            total_steps: self.total_steps,
            log_every: self.log_every,
            bandit: self.bandit,
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Settings that make any command finish in seconds.
pub fn smoke_profile() -> Vec<(String, Value)> {
    vec![
        ("total_steps".into(), Value::from(200)),
        ("seeds".into(), Value::from(1)),
        ("size".into(), Value::from(4)),
        ("count".into(), Value::from(10)),
        ("validation_count".into(), Value::from(5)),
        ("episodes_per_instance".into(), Value::from(5)),
        ("checkpoint_every".into(), Value::from(100)),
        ("final_window".into(), Value::from(100)),
        ("qaoa.max_iterations".into(), Value::from(10)),
        ("qaoa.restarts".into(), Value::from(2)),
        ("bench.ns".into(), serde_json::json!([2, 3, 4])),
        ("bench.samples".into(), Value::from(20)),
    ]
}

/// `key=value` with `value` parsed as JSON, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override '{s}' is not key=value")))?;
    let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), v))
}

fn set_path(root: &mut Map<String, Value>, key: &str, value: Value) {
    match key.split_once('.') {
        None => {
            root.insert(key.to_string(), value);
        }
        Some((head, rest)) => {
            let child = root
                .entry(head.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            if !child.is_object() {
                *child = Value::Object(Map::new());
            }
            if let Value::Object(m) = child {
                set_path(m, rest, value);
            }
        }
    }
}

/// Deep merge of plain sections. Tagged values (schedules, optimizers) are
/// replaced as a whole.
fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) if !b.contains_key("kind") => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn unknown_keys(defaults: &Value, user: &Value, prefix: &str, out: &mut Vec<String>) {
    let (Value::Object(d), Value::Object(u)) = (defaults, user) else {
        return;
    };
    if d.contains_key("kind") {
        return;
    }
    for (k, v) in u {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match d.get(k) {
            None => out.push(format!("unknown key '{path}'")),
            Some(dv) => unknown_keys(dv, v, &path, out),
        }
    }
}

/// Resolves defaults < file < overrides into a validated config.
pub fn resolve(file: Option<&Path>, overrides: &[(String, Value)]) -> Result<ExperimentConfig> {
    let mut user = Map::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => user = m,
            Ok(_) => return Err(CliError::config(format!("{} is not a JSON object", path.display()))),
            Err(e) => return Err(CliError::config(format!("{}: {e}", path.display()))),
        }
    }
    let mut user = Value::Object(user);
    for (k, v) in overrides {
        if let Value::Object(m) = &mut user {
            set_path(m, k, v.clone());
        }
    }

    let mut errs = Vec::new();
    let problem = match user.get("problem") {
        None => ProblemKind::Maxcut,
        Some(v) => match serde_json::from_value::<ProblemKind>(v.clone()) {
            Ok(p) => p,
            Err(_) => {
                return Err(CliError::config(format!(
                    "problem: expected one of maxcut, ucp, knapsack, got {v}"
                )))
            }
        },
    };
    let steps = match user.get("total_steps") {
        None => default_steps(problem),
        Some(v) => match v.as_u64() {
            Some(s) => s,
            None => {
                errs.push(format!("total_steps: expected a non-negative integer, got {v}"));
                default_steps(problem)
            }
        },
    };
    let defaults = serde_json::to_value(ExperimentConfig::defaults(problem, steps))?;
    unknown_keys(&defaults, &user, "", &mut errs);

    // type errors, one key at a time so that all of them are reported
    if let Value::Object(u) = &user {
        for (k, v) in u {
            if defaults.get(k).is_none() {
                continue;
            }
            let mut probe = defaults.clone();
            let mut one = Map::new();
            one.insert(k.clone(), v.clone());
            merge(&mut probe, &Value::Object(one));
            if let Err(e) = serde_json::from_value::<ExperimentConfig>(probe) {
                errs.push(format!("{k}: {e}"));
            }
        }
    }
    if !errs.is_empty() {
        return Err(CliError::Config(errs));
    }
    let mut merged = defaults;
    merge(&mut merged, &user);
    let cfg: ExperimentConfig =
        serde_json::from_value(merged).map_err(|e| CliError::config(e.to_string()))?;
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(CliError::Config(errs));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, Value)]) -> Vec<(String, Value)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn defaults_follow_the_problem() {
        let k = resolve(None, &ov(&[("problem", "knapsack".into())])).unwrap();
        assert_eq!(k.algorithm, Algorithm::Qpg);
        assert_eq!(k.total_steps, 200_000);
        assert_eq!(k.seeds, 10);
        assert_eq!(k.temperature, Schedule::linear(1.0, 25.0, 200_000));
        let m = resolve(None, &ov(&[("total_steps", 1000.into())])).unwrap();
        assert_eq!(m.problem, ProblemKind::Maxcut);
        assert_eq!(m.seeds, 5);
        assert_eq!(m.temperature, Schedule::linear(1.0, 10.0, 500));
    }

    #[test]
    fn file_then_flags() {
        let dir = std::env::temp_dir().join(format!("hqrl-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"problem": "ucp", "layers": 2, "qaoa": {"p": 4}}"#).unwrap();
        let c = resolve(Some(&path), &ov(&[("layers", 7.into()), ("qaoa.restarts", 2.into())])).unwrap();
        assert_eq!(c.problem, ProblemKind::Ucp);
        assert_eq!(c.layers, 7);
        assert_eq!(c.qaoa.p, 4);
        assert_eq!(c.qaoa.restarts, 2);
        assert_eq!(c.qaoa.max_iterations, 100);
        assert!(c.bandit);
    }

    #[test]
    fn all_errors_are_reported_together() {
        let err = resolve(
            None,
            &ov(&[
                ("layerz", 3.into()),
                ("gamma", "high".into()),
                ("qaoa.q", 1.into()),
                ("seeds", 0.into()),
            ]),
        )
        .unwrap_err();
        let CliError::Config(msgs) = &err else { panic!("{err}") };
        let text = msgs.join("\n");
        assert!(text.contains("layerz") && text.contains("gamma") && text.contains("qaoa.q"), "{text}");
        assert_eq!(err.exit_code(), 2);
        let err = resolve(None, &ov(&[("seeds", 0.into()), ("lr", (-1.0).into())])).unwrap_err();
        let CliError::Config(msgs) = &err else { panic!("{err}") };
        assert_eq!(msgs.len(), 2, "{msgs:?}");
    }

    #[test]
    fn schedules_are_replaced_whole() {
        let c = resolve(
            None,
            &ov(&[("epsilon", serde_json::json!({"kind": "constant", "value": 0.1}))]),
        )
        .unwrap();
        assert_eq!(c.epsilon, Schedule::constant(0.1));
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::defaults(ProblemKind::Maxcut, 100);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn override_values_parse_as_json() {
        assert_eq!(parse_override("a=3").unwrap().1, Value::from(3));
        assert_eq!(parse_override("a=mge_sgv").unwrap().1, Value::from("mge_sgv"));
        assert_eq!(parse_override("a.b=[1,2]").unwrap(), ("a.b".to_string(), serde_json::json!([1, 2])));
        assert!(parse_override("novalue").is_err());
    }
}
