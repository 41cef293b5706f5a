//! Composition of the two refinement operators into one pass.

use crate::clipper::{poisson_clipper, ClipperConfig};
use crate::error::Result;
use crate::grid::DisplacementField;
use crate::relax::{guo_refine, GuoConfig};
use crate::trace::RefinementTrace;

/// One stage in a composed refinement pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStage {
    /// EPR range enforcement ([`poisson_clipper`]).
    Clipper,
    /// Incompressibility relaxation ([`guo_refine`]).
    Guo,
}

/// The default order: clip the EPR range first, then relax toward
/// incompressibility.
pub const DEFAULT_ORDER: [RefineStage; 2] = [RefineStage::Clipper, RefineStage::Guo];

/// Applies the configured stages in order, concatenating their traces.
///
/// An empty `order` returns the input unchanged with an empty trace.
pub fn refine(
    field: &DisplacementField,
    clipper_cfg: &ClipperConfig,
    guo_cfg: &GuoConfig,
    order: &[RefineStage],
) -> Result<(DisplacementField, RefinementTrace)> {
    let mut current = field.clone();
    let mut trace = RefinementTrace::new();
    for stage in order {
        let (next, t) = match stage {
            RefineStage::Clipper => poisson_clipper(&current, clipper_cfg)?,
            RefineStage::Guo => guo_refine(&current, guo_cfg)?,
        };
        current = next;
        trace.extend(t);
    }
    Ok((current, trace))
}
