//! End-to-end compilation: recording → graphs → units → primitives → plan.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bt::{build_bt, serialize_plan, BtNode};
use crate::error::{Error, Result};
use crate::primitives::{extract_primitives, ActivityPrimitives, ObjectConfig};
use crate::scene_graph::{generate_graphs, GraphSequence};
use crate::segmentation::{segment, Segmentation};
use crate::signal_io::{load_recording, ConfigFile, PipelineConfig, Recording, RecordingFormat};

/// Every intermediate artifact of one compilation.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub graphs: GraphSequence,
    pub segmentation: Segmentation,
    pub primitives: Vec<ActivityPrimitives>,
    pub plan: BtNode,
}

/// Runs every stage in memory. Errors name the stage that failed.
pub fn compile(recording: &Recording, config: &PipelineConfig, objects: &ObjectConfig) -> Result<Compiled> {
    let graphs = generate_graphs(recording, config).map_err(|e| e.in_stage("graph"))?;
    let segmentation = segment(&graphs, config).map_err(|e| e.in_stage("segment"))?;
    let primitives = extract_primitives(&segmentation, objects).map_err(|e| e.in_stage("primitives"))?;
    let plan = build_bt(&primitives).map_err(|e| e.in_stage("plan"))?;
    Ok(Compiled {
        graphs,
        segmentation,
        primitives,
        plan,
    })
}

/// Resolves configuration: defaults, then the file (if any), then overrides.
pub fn load_config(path: Option<&Path>, overrides: ConfigFile) -> Result<PipelineConfig> {
    let file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    PipelineConfig::resolve(&file.merged(overrides))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

/// What was run, on which inputs, and where each artifact went. Contains no
/// timestamps, so identical inputs give a byte-identical manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    pub object_config: ObjectConfig,
    pub inputs: Vec<InputRecord>,
    /// Stage name → artifact path.
    pub outputs: BTreeMap<String, String>,
    /// Leaf count per sequence of the generated plan.
    pub sequence_leaves: Vec<usize>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Loads the recording, compiles it and writes graphs, segmentation,
/// primitives and plan into `out_dir`, plus `manifest.json`.
pub fn run_pipeline(
    recording_path: &Path,
    config_path: Option<&Path>,
    objects_path: Option<&Path>,
    overrides: ConfigFile,
    out_dir: &Path,
) -> Result<RunManifest> {
    let config = load_config(config_path, overrides).map_err(|e| e.in_stage("config"))?;
    let objects = match objects_path {
        Some(p) => ObjectConfig::load(p).map_err(|e| e.in_stage("config"))?,
        None => ObjectConfig::default(),
    };
    let recording = load_recording(recording_path, RecordingFormat::from_path(recording_path), &config)
        .map_err(|e| e.in_stage("ingest"))?;
    let compiled = compile(&recording, &config, &objects)?;

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut outputs = BTreeMap::new();
    let mut put = |stage: &str, name: &str, bytes: Vec<u8>| -> Result<()> {
        let p: PathBuf = out_dir.join(name);
        write_file(&p, bytes)?;
        outputs.insert(stage.to_owned(), p.display().to_string());
        Ok(())
    };
    let mut graphs = Vec::new();
    compiled.graphs.write_jsonl(&mut graphs)?;
    put("graph", "graphs.jsonl", graphs)?;
    put(
        "segment",
        "segmentation.json",
        compiled.segmentation.to_json()?.into_bytes(),
    )?;
    put(
        "primitives",
        "primitives.json",
        serde_json::to_vec_pretty(&compiled.primitives)?,
    )?;
    put("plan", "plan.json", serialize_plan(&compiled.plan)?.into_bytes())?;

    let mut inputs = vec![InputRecord {
        path: recording_path.display().to_string(),
        sha256: sha256_file(recording_path)?,
    }];
    for p in [config_path, objects_path].into_iter().flatten() {
        inputs.push(InputRecord {
            path: p.display().to_string(),
            sha256: sha256_file(p)?,
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        config,
        object_config: objects,
        inputs,
        outputs,
        sequence_leaves: compiled.plan.children().iter().map(|s| s.children().len()).collect(),
    };
    write_file(&out_dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}
