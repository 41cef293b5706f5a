//! Run provenance and replay.
//!
//! Every direct subcommand invocation drops a `<subcommand>.manifest.json`
//! next to its outputs recording the fully resolved parameters, the input
//! and output paths, and a trace summary. `replay` reads either such a
//! file or a hand-written pipeline manifest and reruns the work; because
//! every operator is deterministic, replayed outputs are byte-identical
//! to the originals.

use crate::error::{CliError, CliResult};
use crate::exec::{self, WriteManifest};
use crate::params::StepParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

/// Final-iteration diagnostics for operators that iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    /// Iterations actually executed (early stop may shorten the budget).
    pub iterations: usize,
    pub final_out_of_range_fraction: f64,
    pub final_residual_l2: f64,
    pub final_max_update_mm: f64,
}

/// Provenance record for one subcommand invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub subcommand: String,
    /// Every parameter at its resolved value, defaults included.
    pub parameters: serde_json::Value,
    /// Input paths, relative to this manifest's directory where possible.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    /// Output file names, relative to this manifest's directory.
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
    /// Noise seed, for the generators that consume one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Wall-clock duration of the run. Informational: replay ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    /// Last-iteration diagnostics, present for the iterating operators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSummary>,
}

/// One stage of a multi-step pipeline manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineStep {
    pub subcommand: String,
    /// Output directory for this step, relative to the replay root.
    pub dir: String,
    /// Parameters; omitted fields take the same defaults as the flags.
    #[serde(default)]
    pub parameters: serde_json::Value,
    /// Input paths, relative to the replay root (earlier steps' outputs).
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
}

/// A self-contained multi-step recipe: each step runs in order into
/// `<root>/<dir>`, reading inputs relative to the root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub kind: String,
    #[serde(default)]
    pub steps: Vec<PipelineStep>,
}

fn manifest_err(path: &Path, reason: impl Into<String>) -> CliError {
    CliError::Manifest { path: path.to_path_buf(), reason: reason.into() }
}

/// Reruns the work a manifest describes, writing outputs under `out_root`.
///
/// Run manifests resolve relative input paths against the manifest's own
/// directory; pipeline manifests resolve them against `out_root`, since
/// their inputs name earlier steps' outputs. Replay writes the data files
/// only — the manifest being replayed already is the provenance record.
pub fn replay(manifest_path: &Path, out_root: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| manifest_err(manifest_path, format!("cannot read: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| manifest_err(manifest_path, format!("not valid JSON: {e}")))?;
    match value.get("kind").and_then(|k| k.as_str()).unwrap_or("run") {
        "run" => replay_run(manifest_path, value, out_root),
        "pipeline" => replay_pipeline(manifest_path, value, out_root),
        other => Err(manifest_err(manifest_path, format!("unknown kind '{other}'"))),
    }
}

fn replay_run(manifest_path: &Path, value: serde_json::Value, out_root: &Path) -> CliResult<()> {
    let manifest: RunManifest = serde_json::from_value(value)
        .map_err(|e| manifest_err(manifest_path, format!("malformed run manifest: {e}")))?;
    let step = StepParams::from_json(&manifest.subcommand, manifest.parameters)
        .map_err(|e| manifest_err(manifest_path, e))?;
    let base = absolutize(manifest_path)
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("/"));
    let inputs = resolve_inputs(&manifest.inputs, &base);
    exec::execute(&step, &inputs, out_root, WriteManifest::No)
}

fn replay_pipeline(manifest_path: &Path, value: serde_json::Value, out_root: &Path) -> CliResult<()> {
    let manifest: PipelineManifest = serde_json::from_value(value)
        .map_err(|e| manifest_err(manifest_path, format!("malformed pipeline manifest: {e}")))?;
    if manifest.steps.is_empty() {
        return Err(manifest_err(manifest_path, "pipeline has no steps"));
    }
    let root = absolutize(out_root);
    for (k, raw) in manifest.steps.into_iter().enumerate() {
        let dir = sanitize_step_dir(&raw.dir)
            .map_err(|e| manifest_err(manifest_path, format!("step {} ('{}'): {e}", k + 1, raw.subcommand)))?;
        let step = StepParams::from_json(&raw.subcommand, raw.parameters)
            .map_err(|e| manifest_err(manifest_path, format!("step {}: {e}", k + 1)))?;
        let inputs = resolve_inputs(&raw.inputs, &root);
        exec::execute(&step, &inputs, &root.join(dir), WriteManifest::No)?;
    }
    Ok(())
}

fn resolve_inputs(inputs: &BTreeMap<String, String>, base: &Path) -> BTreeMap<String, PathBuf> {
    inputs
        .iter()
        .map(|(k, v)| {
            let p = Path::new(v);
            let resolved = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            (k.clone(), resolved)
        })
        .collect()
}

/// A step directory must stay inside the replay root: relative, and free
/// of `..`. `.` means the root itself.
fn sanitize_step_dir(dir: &str) -> Result<PathBuf, String> {
    if dir.is_empty() {
        return Err("step dir is empty".into());
    }
    let p = Path::new(dir);
    for c in p.components() {
        match c {
            Component::Normal(_) | Component::CurDir => {}
            _ => return Err(format!("step dir '{dir}' must be relative and must not contain '..'")),
        }
    }
    Ok(p.to_path_buf())
}

/// Anchors `p` at the current directory if relative, then resolves `.`
/// and `..` lexically (no filesystem access, so symlinks are untouched).
pub fn absolutize(p: &Path) -> PathBuf {
    let joined = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().unwrap_or_else(|_| PathBuf::from("/")).join(p)
    };
    let mut out = PathBuf::new();
    for c in joined.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                let popped = out.pop();
                if !popped && !out.has_root() {
                    out.push("..");
                }
            }
            other => out.push(other),
        }
    }
    out
}

/// Expresses `target` relative to `base` (both normalized and absolute),
/// or `None` when they share no root (foreign prefixes).
pub fn relativize(target: &Path, base: &Path) -> Option<PathBuf> {
    let t: Vec<Component> = target.components().collect();
    let b: Vec<Component> = base.components().collect();
    if t.first() != b.first() {
        return None;
    }
    let common = t.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for c in &t[common..] {
        out.push(c);
    }
    if out.as_os_str().is_empty() {
        out.push(".");
    }
    Some(out)
}
