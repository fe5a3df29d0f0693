//! Instance files and dataset directories.
//!
//! - graphs: `{"n": 5, "edges": [[0, 1, 0.3], ...]}`
//! - knapsack: `{"values": [...], "weights": [...], "capacity": 12}`
//! - unit commitment: CSV with header `A,B,C,p_min,p_max`
//!
//! A dataset is a directory of numbered instance files plus `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::problems::{Generator, KnapsackInstance, UcpInstance, WeightedGraph};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Maxcut,
    Ucp,
    Knapsack,
}

impl ProblemKind {
    pub fn extension(&self) -> &'static str {
        match self {
            ProblemKind::Ucp => "csv",
            _ => "json",
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Maxcut => "maxcut",
            ProblemKind::Ucp => "ucp",
            ProblemKind::Knapsack => "knapsack",
        })
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut" => Ok(Self::Maxcut),
            "ucp" => Ok(Self::Ucp),
            "knapsack" => Ok(Self::Knapsack),
            other => Err(Error::Invalid(format!("unknown problem '{other}'"))),
        }
    }
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub problem: ProblemKind,
    pub count: usize,
    pub size: usize,
    pub seed: u64,
    /// RNG stream of `seed` the instances were drawn from; splits of one
    /// seed use different streams.
    #[serde(default)]
    pub stream: u64,
    pub files: Vec<String>,
    /// Brute-force optimum of every instance, in file order (maximization
    /// objectives). Absent for unit commitment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optima: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    MaxCut(WeightedGraph),
    Knapsack(KnapsackInstance),
    Ucp(UcpInstance),
}

pub fn write_graph(path: &Path, g: &WeightedGraph) -> Result<()> {
    g.validate()?;
    fs::write(path, serde_json::to_string(g)?)?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    let g: WeightedGraph = serde_json::from_str(&fs::read_to_string(path)?)?;
    WeightedGraph::new(g.num_nodes, g.edges)
}

pub fn write_knapsack(path: &Path, k: &KnapsackInstance) -> Result<()> {
    k.validate()?;
    fs::write(path, serde_json::to_string(k)?)?;
    Ok(())
}

pub fn read_knapsack(path: &Path) -> Result<KnapsackInstance> {
    let k: KnapsackInstance = serde_json::from_str(&fs::read_to_string(path)?)?;
    k.validate()?;
    Ok(k)
}

pub fn write_ucp(path: &Path, u: &UcpInstance) -> Result<()> {
    u.validate()?;
    let mut w = csv::Writer::from_path(path)?;
    for g in &u.generators {
        w.serialize(g)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ucp(path: &Path) -> Result<UcpInstance> {
    let mut r = csv::Reader::from_path(path)?;
    let generators = r.deserialize::<Generator>().collect::<Result<Vec<_>, _>>()?;
    UcpInstance::new(generators)
}

pub fn instance_file_name(kind: ProblemKind, index: usize) -> String {
    format!("{index:04}.{}", kind.extension())
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    match inst {
        Instance::MaxCut(g) => write_graph(path, g),
        Instance::Knapsack(k) => write_knapsack(path, k),
        Instance::Ucp(u) => write_ucp(path, u),
    }
}

pub fn read_instance(kind: ProblemKind, path: &Path) -> Result<Instance> {
    Ok(match kind {
        ProblemKind::Maxcut => Instance::MaxCut(read_graph(path)?),
        ProblemKind::Knapsack => Instance::Knapsack(read_knapsack(path)?),
        ProblemKind::Ucp => Instance::Ucp(read_ucp(path)?),
    })
}

/// A dataset loaded into memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: DatasetManifest =
            serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        if manifest.files.len() != manifest.count {
            return Err(Error::Invalid(format!(
                "manifest lists {} files but count is {}",
                manifest.files.len(),
                manifest.count
            )));
        }
        let instances = manifest
            .files
            .iter()
            .map(|f| read_instance(manifest.problem, &dir.join(f)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            instances,
        })
    }

    /// Writes instance files and the manifest into `dir` (created if needed).
    pub fn write(dir: &Path, manifest: &DatasetManifest, instances: &[Instance]) -> Result<()> {
        if instances.len() != manifest.count || manifest.files.len() != manifest.count {
            return Err(Error::Invalid("manifest does not match instances".into()));
        }
        fs::create_dir_all(dir)?;
        for (file, inst) in manifest.files.iter().zip(instances) {
            write_instance(&dir.join(file), inst)?;
        }
        fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(manifest)?,
        )?;
        Ok(())
    }

    pub fn graphs(&self) -> Result<Vec<WeightedGraph>> {
        self.instances
            .iter()
            .map(|i| match i {
                Instance::MaxCut(g) => Ok(g.clone()),
                _ => Err(Error::Invalid("dataset does not contain graphs".into())),
            })
            .collect()
    }

    pub fn knapsacks(&self) -> Result<Vec<KnapsackInstance>> {
        self.instances
            .iter()
            .map(|i| match i {
                Instance::Knapsack(k) => Ok(k.clone()),
                _ => Err(Error::Invalid("dataset does not contain knapsack instances".into())),
            })
            .collect()
    }

    pub fn ucps(&self) -> Result<Vec<UcpInstance>> {
        self.instances
            .iter()
            .map(|i| match i {
                Instance::Ucp(u) => Ok(u.clone()),
                _ => Err(Error::Invalid("dataset does not contain generator tables".into())),
            })
            .collect()
    }
}
