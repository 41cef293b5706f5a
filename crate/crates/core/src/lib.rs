//! Physics-guided refinement of lateral displacement fields from
//! quasi-static ultrasound elastography.
//!
//! Freehand compression imaging estimates tissue motion from RF echo
//! correlation. The component along the beam (axial) is precise; the
//! perpendicular (lateral) component is an order of magnitude noisier
//! because there is no carrier phase in that direction. This crate refines
//! the lateral estimate using two facts about soft tissue that hold
//! independently of any learned model:
//!
//! 1. the ratio of lateral to axial strain stays inside a known physical
//!    range (soft tissue is nearly incompressible), and
//! 2. the trace of the strain tensor is close to zero, so the lateral
//!    field must approximately satisfy a balance equation against the
//!    trusted axial field.
//!
//! The first fact powers [`clipper::poisson_clipper`], which clamps the
//! measured strain ratio into range and re-integrates the lateral field.
//! The second powers [`relax::guo_refine`], an iterative Jacobi-style
//! relaxation with per-iteration Gaussian smoothing. [`compose::refine`]
//! chains them. Everything is deterministic: same inputs, same bits.
//!
//! # Quick start
//!
//! ```
//! use latref::phantom::{generate, PhantomSpec};
//! use latref::{
//!     feasibility_loss, refine, ClipperConfig, FeasibilityLossConfig, GridGeometry,
//!     GuoConfig, StrainPair, DEFAULT_ORDER,
//! };
//!
//! # fn main() -> latref::Result<()> {
//! // A synthetic acquisition: uniform compression, noisy lateral channel.
//! let spec = PhantomSpec {
//!     geometry: GridGeometry::new(64, 64, 0.0385, 0.15)?,
//!     noise_std_lateral: 0.01,
//!     seed: 7,
//!     ..PhantomSpec::default()
//! };
//! let (noisy, _clean, _strains) = generate(&spec)?;
//!
//! let loss_cfg = FeasibilityLossConfig::default();
//! let before = feasibility_loss(&StrainPair::from_displacement(&noisy), &loss_cfg)?;
//! let (refined, trace) = refine(
//!     &noisy,
//!     &ClipperConfig::default(),
//!     &GuoConfig::default(),
//!     &DEFAULT_ORDER,
//! )?;
//! let after = feasibility_loss(&StrainPair::from_displacement(&refined), &loss_cfg)?;
//!
//! assert!(after.out_of_range_fraction < before.out_of_range_fraction);
//! assert_eq!(trace.len(), 110); // 10 clipper records + 100 relaxation records
//! # Ok(())
//! # }
//! ```
//!
//! # Module map
//!
//! - [`grid`]: validated grid geometry, scalar fields, displacement and
//!   strain pairs.
//! - [`stencil`], [`filter`]: finite differences and separable Gaussian
//!   smoothing — the only numerical kernels in the crate.
//! - [`epr`]: the effective strain-ratio field, its feasibility mask, and
//!   the diagnostic loss.
//! - [`clipper`], [`relax`], [`compose`]: the two refinement operators and
//!   their composition.
//! - [`phantom`]: strain-prescribed synthetic fields with exact ground
//!   truth, plus a targeted feasibility-violation generator.
//! - [`metrics`]: ROI statistics, contrast-to-noise, strain ratio,
//!   incompressibility residual, EPR histogram.
//! - [`io`]: the `EFG1` binary grid format, PGM renders, histogram CSV.
//!
//! The accompanying guide (under `book/` in the repository, embedded here
//! as [`guide`]) walks through the physics and the conventions; its code
//! samples compile and run as doc tests.

pub mod clipper;
pub mod compose;
pub mod epr;
mod error;
pub mod filter;
pub mod grid;
pub mod guide;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod relax;
pub mod stencil;
pub mod trace;

pub use crate::clipper::{poisson_clipper, ClipperConfig};
pub use crate::compose::{refine, RefineStage, DEFAULT_ORDER};
pub use crate::epr::{
    compute_epr, epr_smoothness_loss, feasibility_data_loss, feasibility_loss, feasibility_mask,
    EprField, FeasibilityBounds, FeasibilityLossConfig, FeasibilityLossReport, FeasibilityMask,
    DEFAULT_EPR_FLOOR,
};
pub use crate::error::{Error, Result};
pub use crate::filter::gaussian_filter;
pub use crate::grid::{DisplacementField, Grid2D, GridGeometry, StrainPair};
pub use crate::metrics::{
    cnr, epr_histogram, incompressibility_residual, roi_stats, sr, EprHistogram, RoiSpec,
    RoiStats, DEFAULT_HISTOGRAM_BINS, DEFAULT_HISTOGRAM_RANGE,
};
pub use crate::relax::{guo_refine, GuoConfig, StencilMode};
pub use crate::stencil::{gradient_axial, gradient_lateral};
pub use crate::trace::{RefinementTrace, TraceRecord};
