//! Runs one subcommand: loads inputs, calls the library, writes the
//! fixed-name outputs, and (for direct invocations) drops the manifest.
//!
//! Output names are fixed per subcommand so pipelines can chain steps by
//! directory alone. Everything here is deterministic: rerunning with the
//! same parameters and input bytes reproduces the same output bytes.

use crate::error::{CliError, CliResult};
use crate::manifest::{absolutize, relativize, RunManifest, TraceSummary};
use crate::params::{MetricsParams, StepParams};
use latref::io::Normalization;
use latref::phantom::PhantomSpec;
use latref::{
    cnr, compute_epr, epr_histogram, feasibility_loss, feasibility_mask,
    incompressibility_residual, io, refine, roi_stats, sr, DisplacementField, FeasibilityBounds,
    FeasibilityLossConfig, FeasibilityLossReport, GridGeometry, RefinementTrace, RoiSpec,
    StrainPair, DEFAULT_ORDER,
};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Whether this invocation records provenance. Direct runs do; `replay`
/// does not — the manifest being replayed already is the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteManifest {
    Yes,
    No,
}

/// Everything a run produced besides its files.
struct Outcome {
    /// Logical name → file name written under the output directory.
    outputs: BTreeMap<String, String>,
    /// Last-iteration diagnostics, for the iterating operators.
    trace: Option<TraceSummary>,
    /// A report to repeat on stdout (reports are files first).
    stdout: Option<String>,
}

impl Outcome {
    fn files<const N: usize>(names: [(&str, &str); N]) -> Self {
        Self {
            outputs: names.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            trace: None,
            stdout: None,
        }
    }
}

pub fn execute(
    step: &StepParams,
    inputs: &BTreeMap<String, PathBuf>,
    out_dir: &Path,
    write_manifest: WriteManifest,
) -> CliResult<()> {
    let sub = step.subcommand();
    let parameters = step.to_value();
    // a silently-defaulted flag is invisible in the command line itself,
    // so every run states its fully resolved parameter set up front
    eprintln!(
        "resolved {sub}: {}",
        serde_json::to_string(&parameters).expect("parameters already serialized once")
    );
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Output { path: out_dir.to_path_buf(), source: e })?;

    let started = Instant::now();
    let outcome = match step {
        StepParams::Phantom(p) => run_phantom(p, out_dir)?,
        StepParams::Strain(_) => run_strain(inputs, out_dir)?,
        StepParams::Epr(p) => run_epr(p, inputs, out_dir)?,
        StepParams::Clip(p) => run_clip(p, inputs, out_dir)?,
        StepParams::Guo(p) => run_guo(p, inputs, out_dir)?,
        StepParams::Refine(p) => run_refine(p, inputs, out_dir)?,
        StepParams::Metrics(p) => run_metrics(p, inputs, out_dir)?,
        StepParams::Hist(p) => run_hist(p, inputs, out_dir)?,
        StepParams::Render(p) => run_render(p, inputs, out_dir)?,
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    if let Some(report) = &outcome.stdout {
        println!("{report}");
    }
    if write_manifest == WriteManifest::Yes {
        let seed = match step {
            StepParams::Phantom(p) => Some(p.seed),
            _ => None,
        };
        let manifest = RunManifest {
            tool: "latref".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind: "run".into(),
            subcommand: sub.into(),
            parameters,
            inputs: portable_inputs(inputs, out_dir),
            outputs: outcome.outputs,
            seed,
            wall_time_ms: Some(wall_time_ms),
            trace: outcome.trace,
        };
        let path = out_dir.join(format!("{sub}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest)
            .expect("manifest fields always serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Output { path, source: e })?;
    }
    Ok(())
}

/// Records inputs relative to the manifest's directory when the paths
/// share a root, so a moved tree still replays.
fn portable_inputs(inputs: &BTreeMap<String, PathBuf>, out_dir: &Path) -> BTreeMap<String, String> {
    let base = absolutize(out_dir);
    inputs
        .iter()
        .map(|(k, p)| {
            let abs = absolutize(p);
            let shown = match relativize(&abs, &base) {
                Some(rel) => rel,
                None => abs,
            };
            (k.clone(), shown.display().to_string())
        })
        .collect()
}

fn input_path<'a>(
    inputs: &'a BTreeMap<String, PathBuf>,
    subcommand: &'static str,
    key: &'static str,
) -> CliResult<&'a Path> {
    inputs
        .get(key)
        .map(PathBuf::as_path)
        .ok_or(CliError::MissingInput { subcommand, key })
}

fn load_pair(
    inputs: &BTreeMap<String, PathBuf>,
    subcommand: &'static str,
) -> CliResult<(latref::Grid2D, latref::Grid2D)> {
    let axial = io::read_grid(input_path(inputs, subcommand, "axial")?)?;
    let lateral = io::read_grid(input_path(inputs, subcommand, "lateral")?)?;
    Ok((axial, lateral))
}

fn load_field(
    inputs: &BTreeMap<String, PathBuf>,
    subcommand: &'static str,
) -> CliResult<DisplacementField> {
    let (axial, lateral) = load_pair(inputs, subcommand)?;
    Ok(DisplacementField::new(axial, lateral)?)
}

fn load_strains(
    inputs: &BTreeMap<String, PathBuf>,
    subcommand: &'static str,
) -> CliResult<StrainPair> {
    let (axial, lateral) = load_pair(inputs, subcommand)?;
    Ok(StrainPair::new(axial, lateral)?)
}

fn run_phantom(p: &crate::params::PhantomParams, out: &Path) -> CliResult<Outcome> {
    let spec = PhantomSpec {
        geometry: GridGeometry::new(p.rows, p.cols, p.da, p.dl)?,
        applied_axial_strain: p.eps0,
        poisson_ratio: p.nu,
        inclusions: p.inclusions.iter().map(|i| i.to_inclusion()).collect(),
        noise_std_axial: p.noise_axial,
        noise_std_lateral: p.noise_lateral,
        seed: p.seed,
    };
    let (noisy, clean, strains) = latref::phantom::generate(&spec)?;
    io::write_grid(&out.join("axial.efg1"), noisy.axial())?;
    io::write_grid(&out.join("lateral.efg1"), noisy.lateral())?;
    io::write_grid(&out.join("clean_axial.efg1"), clean.axial())?;
    io::write_grid(&out.join("clean_lateral.efg1"), clean.lateral())?;
    io::write_grid(&out.join("strain_axial.efg1"), strains.axial())?;
    io::write_grid(&out.join("strain_lateral.efg1"), strains.lateral())?;
    Ok(Outcome::files([
        ("axial", "axial.efg1"),
        ("lateral", "lateral.efg1"),
        ("clean_axial", "clean_axial.efg1"),
        ("clean_lateral", "clean_lateral.efg1"),
        ("strain_axial", "strain_axial.efg1"),
        ("strain_lateral", "strain_lateral.efg1"),
    ]))
}

fn run_strain(inputs: &BTreeMap<String, PathBuf>, out: &Path) -> CliResult<Outcome> {
    let field = load_field(inputs, "strain")?;
    let strains = StrainPair::from_displacement(&field);
    io::write_grid(&out.join("strain_axial.efg1"), strains.axial())?;
    io::write_grid(&out.join("strain_lateral.efg1"), strains.lateral())?;
    Ok(Outcome::files([
        ("strain_axial", "strain_axial.efg1"),
        ("strain_lateral", "strain_lateral.efg1"),
    ]))
}

fn loss_report_json(report: &FeasibilityLossReport) -> serde_json::Value {
    json!({
        "l_vd": report.l_vd,
        "l_vs": report.l_vs,
        "l_v": report.l_v,
        "mean_inrange_epr": report.mean_inrange_epr,
        "out_of_range_fraction": report.out_of_range_fraction,
    })
}

fn write_json(out: &Path, name: &str, value: &serde_json::Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).expect("report values are plain JSON");
    text.push('\n');
    let path = out.join(name);
    std::fs::write(&path, &text).map_err(|e| CliError::Output { path, source: e })?;
    Ok(text)
}

fn run_epr(
    p: &crate::params::EprParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let strains = load_strains(inputs, "epr")?;
    let bounds = FeasibilityBounds::new(p.vmin, p.vmax)?;
    let epr = compute_epr(&strains, p.floor, bounds)?;
    let mask = feasibility_mask(&epr, bounds);
    let cfg = FeasibilityLossConfig {
        bounds,
        epr_floor: p.floor,
        beta: p.beta,
        lambda_vs: p.lambda_vs,
    };
    let report = feasibility_loss(&strains, &cfg)?;
    io::write_grid(&out.join("epr.efg1"), epr.values())?;
    io::write_grid(&out.join("mask.efg1"), mask.values())?;
    let text = write_json(out, "loss.json", &loss_report_json(&report))?;
    let mut outcome = Outcome::files([
        ("epr", "epr.efg1"),
        ("mask", "mask.efg1"),
        ("loss", "loss.json"),
    ]);
    outcome.stdout = Some(text.trim_end().to_string());
    Ok(outcome)
}

fn write_trace_csv(out: &Path, trace: &RefinementTrace) -> CliResult<Option<TraceSummary>> {
    let mut text = String::from("iteration,out_of_range_fraction,residual_l2,max_update_mm\n");
    for r in trace.records() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.iteration, r.out_of_range_fraction, r.residual_l2, r.max_update_mm
        ));
    }
    let path = out.join("trace.csv");
    std::fs::write(&path, text).map_err(|e| CliError::Output { path, source: e })?;
    Ok(trace.last().map(|r| TraceSummary {
        iterations: trace.len(),
        final_out_of_range_fraction: r.out_of_range_fraction,
        final_residual_l2: r.residual_l2,
        final_max_update_mm: r.max_update_mm,
    }))
}

fn write_refined(
    out: &Path,
    field: &DisplacementField,
    trace: &RefinementTrace,
) -> CliResult<Outcome> {
    io::write_grid(&out.join("axial.efg1"), field.axial())?;
    io::write_grid(&out.join("lateral.efg1"), field.lateral())?;
    let summary = write_trace_csv(out, trace)?;
    let mut outcome = Outcome::files([
        ("axial", "axial.efg1"),
        ("lateral", "lateral.efg1"),
        ("trace", "trace.csv"),
    ]);
    outcome.trace = summary;
    Ok(outcome)
}

fn run_clip(
    p: &crate::params::ClipParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let field = load_field(inputs, "clip")?;
    let (refined, trace) = latref::poisson_clipper(&field, &p.to_config()?)?;
    write_refined(out, &refined, &trace)
}

fn run_guo(
    p: &crate::params::GuoParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let field = load_field(inputs, "guo")?;
    let (refined, trace) = latref::guo_refine(&field, &p.to_config())?;
    write_refined(out, &refined, &trace)
}

fn run_refine(
    p: &crate::params::RefineParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let field = load_field(inputs, "refine")?;
    let (refined, trace) = refine(&field, &p.clip_config()?, &p.guo_config(), &DEFAULT_ORDER)?;
    write_refined(out, &refined, &trace)
}

fn roi_json(roi: [usize; 4], stats: latref::RoiStats) -> serde_json::Value {
    json!({
        "roi": roi,
        "mean": stats.mean,
        "std": stats.std,
        "count": stats.count,
    })
}

fn run_metrics(
    p: &MetricsParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    if p.roi.is_empty() || p.roi.len() > 2 {
        return Err(CliError::Usage(format!(
            "metrics needs one or two --roi regions (target, then background), got {}",
            p.roi.len()
        )));
    }
    let field = load_field(inputs, "metrics")?;
    let strains = StrainPair::from_displacement(&field);
    let lateral_strain = strains.lateral();

    let spec = |r: [usize; 4]| RoiSpec::new(r[0], r[1], r[2], r[3]);
    let target = roi_stats(lateral_strain, spec(p.roi[0])?)?;
    let mut doc = serde_json::Map::new();
    doc.insert("target".into(), roi_json(p.roi[0], target));
    if let Some(&broi) = p.roi.get(1) {
        let background = roi_stats(lateral_strain, spec(broi)?)?;
        doc.insert("background".into(), roi_json(broi, background));
        doc.insert("cnr".into(), json!(cnr(target, background)?));
        doc.insert("sr".into(), json!(sr(target, background)?));
    }
    let cfg = FeasibilityLossConfig {
        bounds: FeasibilityBounds::new(p.vmin, p.vmax)?,
        epr_floor: p.floor,
        beta: p.beta,
        lambda_vs: p.lambda_vs,
    };
    doc.insert("loss".into(), loss_report_json(&feasibility_loss(&strains, &cfg)?));
    let (_, residual_l2) = incompressibility_residual(&strains);
    doc.insert("residual_l2".into(), json!(residual_l2));

    let text = write_json(out, "metrics.json", &serde_json::Value::Object(doc))?;
    let mut outcome = Outcome::files([("metrics", "metrics.json")]);
    outcome.stdout = Some(text.trim_end().to_string());
    Ok(outcome)
}

fn run_hist(
    p: &crate::params::HistParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let strains = load_strains(inputs, "hist")?;
    let bounds = FeasibilityBounds::new(p.vmin, p.vmax)?;
    let epr = compute_epr(&strains, p.floor, bounds)?;
    let hist = epr_histogram(&epr, bounds, p.bins, p.range)?;
    io::write_histogram_csv(&out.join("hist.csv"), &hist)?;
    Ok(Outcome::files([("hist", "hist.csv")]))
}

fn run_render(
    p: &crate::params::RenderParams,
    inputs: &BTreeMap<String, PathBuf>,
    out: &Path,
) -> CliResult<Outcome> {
    let grid = io::read_grid(input_path(inputs, "render", "input")?)?;
    let norm = match p.range {
        Some((lo, hi)) => Normalization::Fixed { lo, hi },
        None => Normalization::MinMax,
    };
    io::render_pgm(&out.join("render.pgm"), &grid, norm)?;
    Ok(Outcome::files([("render", "render.pgm")]))
}
