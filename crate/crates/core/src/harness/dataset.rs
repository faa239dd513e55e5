//! Dataset generation and loading.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::debug::DebugInstance;
use crate::graph::{emit_dimacs, generate_instance, label_solvability, parse_dimacs, GraphInstance};
use crate::memory::Domain;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub sizes: Vec<usize>,
    pub count_per_size: usize,
    pub edge_prob_range: (f64, f64),
    pub k: u32,
    pub seed: u64,
    pub oracle_budget_ms: u64,
    /// Redraws allowed per instance after oracle timeouts.
    pub max_redraws: usize,
}

impl Default for GenerateSpec {
    fn default() -> Self {
        Self {
            sizes: vec![5, 10, 15, 20, 25],
            count_per_size: 100,
            edge_prob_range: (0.1, 0.9),
            k: 4,
            seed: 0,
            oracle_budget_ms: 30_000,
            max_redraws: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Relative to the manifest's directory.
    pub file: PathBuf,
    #[serde(default)]
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solvable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub domain: Domain,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateReport {
    pub manifest: Manifest,
    pub solvable: usize,
    pub unsolvable: usize,
    pub redraws: usize,
}

/// Labeled instances for `spec`, drawn in size order. Each instance gets
/// its own edge probability and seed from a stream seeded by `spec.seed`.
pub fn generate_dataset(spec: &GenerateSpec) -> Result<(Vec<GraphInstance>, usize), HarnessError> {
    if spec.sizes.is_empty() {
        return Err(HarnessError::Spec("sizes must not be empty".into()));
    }
    let (lo, hi) = spec.edge_prob_range;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(HarnessError::Spec(format!("bad edge probability range [{lo}, {hi}]")));
    }
    if spec.k == 0 || spec.sizes.contains(&0) {
        return Err(HarnessError::Spec("k and sizes must be positive".into()));
    }
    let budget = Duration::from_millis(spec.oracle_budget_ms);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    let mut redraws = 0;
    for &n in &spec.sizes {
        for _ in 0..spec.count_per_size {
            let mut tries = 0;
            loop {
                let p = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                let seed: u64 = rng.gen();
                match label_solvability(generate_instance(n, p, seed, spec.k), budget) {
                    Ok(inst) => {
                        out.push(inst);
                        break;
                    }
                    Err(e) if tries < spec.max_redraws => {
                        tries += 1;
                        redraws += 1;
                        warn!("size {n}: {e}; redrawing");
                    }
                    Err(e) => return Err(HarnessError::Spec(format!("size {n}: {e} after {tries} redraws"))),
                }
            }
        }
    }
    Ok((out, redraws))
}

/// Generates, labels and writes one DIMACS file per instance plus a
/// manifest.
pub fn cmd_generate(spec: &GenerateSpec, out_dir: &Path) -> Result<GenerateReport, HarnessError> {
    let (instances, redraws) = generate_dataset(spec)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut entries = Vec::new();
    let mut counters = std::collections::BTreeMap::<usize, usize>::new();
    for inst in &instances {
        let n = inst.meta.size;
        let idx = counters.entry(n).or_default();
        *idx += 1;
        let id = format!("gc_n{n:02}_{idx:03}");
        let file = PathBuf::from(format!("{id}.dimacs"));
        let path = out_dir.join(&file);
        fs::write(&path, emit_dimacs(&inst.graph) + "\n").map_err(io_err(&path))?;
        entries.push(ManifestEntry {
            id,
            file,
            size: n,
            edge_prob: Some(inst.meta.edge_prob),
            seed: Some(inst.meta.seed),
            k: Some(inst.k),
            solvable: inst.meta.solvable,
        });
    }
    let manifest = Manifest {
        domain: Domain::GraphColoring,
        entries,
    };
    let path = out_dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    let solvable = instances.iter().filter(|i| i.meta.solvable == Some(true)).count();
    info!(
        "wrote {} instances ({solvable} solvable, {} unsolvable, {redraws} redraws) to {}",
        instances.len(),
        instances.len() - solvable,
        out_dir.display()
    );
    Ok(GenerateReport {
        solvable,
        unsolvable: instances.len() - solvable,
        redraws,
        manifest,
    })
}

#[derive(Debug, Clone)]
pub enum DatasetItem {
    Coloring { id: String, instance: GraphInstance },
    Debugging { id: String, instance: DebugInstance },
}

impl DatasetItem {
    pub fn id(&self) -> &str {
        match self {
            DatasetItem::Coloring { id, .. } | DatasetItem::Debugging { id, .. } => id,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            DatasetItem::Coloring { instance, .. } => instance.graph.vertex_count(),
            DatasetItem::Debugging { instance, .. } => instance.size(),
        }
    }

    pub fn solvable(&self) -> Option<bool> {
        match self {
            DatasetItem::Coloring { instance, .. } => instance.meta.solvable,
            DatasetItem::Debugging { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub domain: Domain,
    pub items: Vec<DatasetItem>,
}

impl Dataset {
    /// Reads a manifest (a `manifest.json` path or its directory). A
    /// directory without a manifest is read as code-debugging instances,
    /// one `*.json` file each, in file-name order.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let manifest_path = if path.is_dir() {
            path.join(MANIFEST)
        } else {
            path.to_path_buf()
        };
        if !manifest_path.exists() && path.is_dir() {
            return Self::load_debug_dir(path);
        }
        let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut items = Vec::new();
        for e in &manifest.entries {
            let file = base.join(&e.file);
            let item = match manifest.domain {
                Domain::GraphColoring => {
                    let text = fs::read_to_string(&file).map_err(io_err(&file))?;
                    let graph = parse_dimacs(&text)
                        .map_err(|err| HarnessError::Dataset(format!("{}: {err}", file.display())))?;
                    let k =
                        e.k.ok_or_else(|| HarnessError::Dataset(format!("{}: missing k", e.id)))?;
                    let mut instance = GraphInstance::new(graph, k);
                    instance.meta.edge_prob = e.edge_prob.unwrap_or(0.0);
                    instance.meta.seed = e.seed.unwrap_or(0);
                    instance.meta.solvable = e.solvable;
                    DatasetItem::Coloring {
                        id: e.id.clone(),
                        instance,
                    }
                }
                Domain::CodeDebugging => DatasetItem::Debugging {
                    id: e.id.clone(),
                    instance: DebugInstance::load(&file).map_err(|err| HarnessError::Dataset(err.to_string()))?,
                },
            };
            items.push(item);
        }
        Ok(Self {
            domain: manifest.domain,
            items,
        })
    }

    fn load_debug_dir(dir: &Path) -> Result<Self, HarnessError> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut items = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for f in files {
            let instance = DebugInstance::load(&f).map_err(|err| HarnessError::Dataset(err.to_string()))?;
            if !seen.insert(instance.slug.clone()) {
                return Err(HarnessError::Dataset(format!("duplicate slug {}", instance.slug)));
            }
            items.push(DatasetItem::Debugging {
                id: instance.slug.clone(),
                instance,
            });
        }
        Ok(Self {
            domain: Domain::CodeDebugging,
            items,
        })
    }
}
