//! The Poisson's-ratio clipper: iterative EPR range enforcement by clamped
//! re-integration of the lateral displacement.
//!
//! Each iteration recomputes the EPR of the current lateral field, clamps it
//! into the feasible interval, converts the clamped ratio back into a lateral
//! strain (`ε₂₂ = −ṽ_e·ε₁₁`), and rebuilds the lateral displacement column by
//! column from that strain. Column 0 anchors the integration and is never
//! modified; the axial component passes through untouched.
//!
//! An out-of-range run shrinks by roughly one column per iteration from its
//! right edge (the central difference couples each rebuilt column to its
//! neighbors), which is why the default of 10 iterations clears isolated
//! violations comfortably.

use crate::epr::{compute_epr, feasibility_mask, FeasibilityBounds, DEFAULT_EPR_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{DisplacementField, Grid2D, StrainPair};
use crate::metrics::incompressibility_residual;
use crate::stencil::{gradient_axial, gradient_lateral};
use crate::trace::{RefinementTrace, TraceRecord};

/// Configuration for [`poisson_clipper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipperConfig {
    /// Feasible EPR interval the clamp enforces.
    pub bounds: FeasibilityBounds,
    /// Number of clip/re-integrate sweeps.
    pub iterations: usize,
    /// Denominator floor for EPR computation.
    pub epr_floor: f64,
    /// Optional early stop: finish when the max update falls below this (mm).
    pub convergence_tol: Option<f64>,
    /// Reproduce the sign- and spacing-free legacy update
    /// `w[i,j] = w[i,j−1] + ṽ_e·ε₁₁` instead of the self-consistent
    /// `w[i,j] = w[i,j−1] + (−ṽ_e·ε₁₁)·Δl`. For comparison experiments only:
    /// the legacy form reconstructs the negated lateral strain and ignores
    /// the physical spacing.
    pub literal_sign: bool,
}

impl Default for ClipperConfig {
    fn default() -> Self {
        Self {
            bounds: FeasibilityBounds::default(),
            iterations: 10,
            epr_floor: DEFAULT_EPR_FLOOR,
            convergence_tol: None,
            literal_sign: false,
        }
    }
}

/// Runs the clipper and reports per-iteration diagnostics.
///
/// The returned field shares the input's axial grid bitwise; only the lateral
/// component is rebuilt. The trace records the state *after* each update.
pub fn poisson_clipper(
    field: &DisplacementField,
    cfg: &ClipperConfig,
) -> Result<(DisplacementField, RefinementTrace)> {
    if cfg.iterations < 1 {
        return Err(Error::Parameter("clipper iterations must be >= 1".into()));
    }
    if let Some(tol) = cfg.convergence_tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::Parameter(format!(
                "convergence tolerance must be finite and >= 0, got {tol}"
            )));
        }
    }
    let geometry = field.geometry();
    let rows = geometry.rows();
    let cols = geometry.cols();
    let dl = geometry.lateral_spacing();

    let e11 = gradient_axial(field.axial());
    if e11.values().iter().all(|v| v.abs() < cfg.epr_floor) {
        return Err(Error::DegenerateStatistics(
            "axial strain is below the EPR floor everywhere; nothing to clip against".into(),
        ));
    }

    let mut wref = field.lateral().clone();
    let mut trace = RefinementTrace::new();
    for iteration in 1..=cfg.iterations {
        let e22 = gradient_lateral(&wref);
        let strains = StrainPair::new(e11.clone(), e22)?;
        let epr = compute_epr(&strains, cfg.epr_floor, cfg.bounds)?;

        let v11 = e11.values();
        let ve = epr.values().values();
        let mut new = wref.values().to_vec();
        let mut max_update = 0.0f64;
        for i in 0..rows {
            let r = i * cols;
            for j in 1..cols {
                let clipped = ve[r + j].clamp(cfg.bounds.v_min(), cfg.bounds.v_max());
                let step = if cfg.literal_sign {
                    clipped * v11[r + j]
                } else {
                    -clipped * v11[r + j] * dl
                };
                new[r + j] = new[r + j - 1] + step;
                let d = (new[r + j] - wref.values()[r + j]).abs();
                if d > max_update {
                    max_update = d;
                }
            }
        }
        wref = Grid2D::from_values(geometry, new)?;

        let e22_now = gradient_lateral(&wref);
        let strains_now = StrainPair::new(e11.clone(), e22_now)?;
        let epr_now = compute_epr(&strains_now, cfg.epr_floor, cfg.bounds)?;
        let mask = feasibility_mask(&epr_now, cfg.bounds);
        let (_, residual_l2) = incompressibility_residual(&strains_now);
        trace.push(TraceRecord {
            iteration,
            out_of_range_fraction: mask.out_of_range_fraction(),
            residual_l2,
            max_update_mm: max_update,
        });
        if cfg.convergence_tol.is_some_and(|tol| max_update < tol) {
            break;
        }
    }

    let out = DisplacementField::new(field.axial().clone(), wref)?;
    Ok((out, trace))
}
