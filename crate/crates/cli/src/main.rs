//! Command-line front end for lateral displacement refinement.
//!
//! Each subcommand reads/writes the binary grid format and drops a
//! manifest beside its outputs; `replay` reruns a manifest bit-identically.

mod error;
mod exec;
mod manifest;
mod params;

use clap::Parser;
use error::CliResult;
use exec::WriteManifest;
use params::{
    ClipParams, EprParams, GuoParams, HistParams, MetricsParams, PhantomParams, RefineParams,
    RenderParams, StepParams, StrainParams,
};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "latref",
    version,
    about = "Refine lateral displacement fields from quasi-static elastography",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Generate a synthetic displacement field with known ground truth
    Phantom {
        #[command(flatten)]
        params: PhantomParams,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Differentiate a displacement pair into strain grids
    Strain {
        /// Axial displacement grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral displacement grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compute the strain-ratio grid, feasibility mask, and loss report
    /// from a strain pair
    Epr {
        #[command(flatten)]
        params: EprParams,
        /// Axial strain grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral strain grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Clamp the strain ratio into its feasible range by re-integrating
    /// the lateral displacement
    Clip {
        #[command(flatten)]
        params: ClipParams,
        /// Axial displacement grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral displacement grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Relax the lateral displacement toward incompressibility
    Guo {
        #[command(flatten)]
        params: GuoParams,
        /// Axial displacement grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral displacement grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the composed pass: range clipping, then relaxation
    Refine {
        #[command(flatten)]
        params: RefineParams,
        /// Axial displacement grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral displacement grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Report ROI statistics, CNR/SR, loss terms, and the
    /// incompressibility residual of a displacement pair
    Metrics {
        #[command(flatten)]
        params: MetricsParams,
        /// Axial displacement grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral displacement grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Histogram the strain-ratio distribution of a strain pair
    Hist {
        #[command(flatten)]
        params: HistParams,
        /// Axial strain grid (EFG1)
        #[arg(long)]
        axial: PathBuf,
        /// Lateral strain grid (EFG1)
        #[arg(long)]
        lateral: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render a grid to an 8-bit PGM image
    Render {
        #[command(flatten)]
        params: RenderParams,
        /// Grid to render (EFG1)
        #[arg(long)]
        input: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Rerun a recorded manifest; outputs reproduce bit-identically
    Replay {
        /// Run or pipeline manifest (JSON)
        manifest: PathBuf,
        /// Output root directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn pair(axial: PathBuf, lateral: PathBuf) -> BTreeMap<String, PathBuf> {
    let mut m = BTreeMap::new();
    m.insert("axial".to_string(), axial);
    m.insert("lateral".to_string(), lateral);
    m
}

fn run(cli: Cli) -> CliResult<()> {
    let write = WriteManifest::Yes;
    match cli.command {
        Command::Phantom { params, out } => {
            exec::execute(&StepParams::Phantom(params), &BTreeMap::new(), &out, write)
        }
        Command::Strain { axial, lateral, out } => {
            exec::execute(&StepParams::Strain(StrainParams {}), &pair(axial, lateral), &out, write)
        }
        Command::Epr { params, axial, lateral, out } => {
            exec::execute(&StepParams::Epr(params), &pair(axial, lateral), &out, write)
        }
        Command::Clip { params, axial, lateral, out } => {
            exec::execute(&StepParams::Clip(params), &pair(axial, lateral), &out, write)
        }
        Command::Guo { params, axial, lateral, out } => {
            exec::execute(&StepParams::Guo(params), &pair(axial, lateral), &out, write)
        }
        Command::Refine { params, axial, lateral, out } => {
            exec::execute(&StepParams::Refine(params), &pair(axial, lateral), &out, write)
        }
        Command::Metrics { params, axial, lateral, out } => exec::execute(
            &StepParams::Metrics(params.normalize()),
            &pair(axial, lateral),
            &out,
            write,
        ),
        Command::Hist { params, axial, lateral, out } => {
            exec::execute(&StepParams::Hist(params), &pair(axial, lateral), &out, write)
        }
        Command::Render { params, input, out } => {
            let mut inputs = BTreeMap::new();
            inputs.insert("input".to_string(), input);
            exec::execute(&StepParams::Render(params), &inputs, &out, write)
        }
        Command::Replay { manifest, out } => manifest::replay(&manifest, &out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(error::exit_code(&e));
    }
}
