//! Effective Poisson's ratio (EPR) fields, the feasibility mask, and the
//! feasibility loss diagnostics.
//!
//! The EPR of a strain pair is `ṽ_e = −ε₂₂ / ε₁₁`. It is not the material
//! Poisson's ratio, but it shares the same physical range: under quasi-static
//! compression a pixel whose EPR falls outside a feasible interval —
//! `(0.1, 0.6)` by default — carries a physically implausible lateral strain
//! estimate. The mask flags those pixels, and the loss terms below turn the
//! violation into scalar diagnostics.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, StrainPair};
use crate::stencil;

/// Default threshold below which |ε₁₁| is treated as too small to divide by.
pub const DEFAULT_EPR_FLOOR: f64 = 1e-6;

/// Open interval `(v_min, v_max)` of physically plausible EPR values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityBounds {
    v_min: f64,
    v_max: f64,
}

impl FeasibilityBounds {
    /// Validates `0 <= v_min < v_max`, both finite.
    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        if !(v_min.is_finite() && v_max.is_finite() && 0.0 <= v_min && v_min < v_max) {
            return Err(Error::Parameter(format!(
                "feasibility bounds need 0 <= v_min < v_max, got ({v_min}, {v_max})"
            )));
        }
        Ok(Self { v_min, v_max })
    }

    /// Lower bound.
    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    /// Upper bound.
    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Midpoint of the interval, used as the stand-in for degenerate pixels.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.v_min + self.v_max)
    }

    /// Strict containment test.
    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.v_min < v && v < self.v_max
    }
}

impl Default for FeasibilityBounds {
    /// The standard quasi-static compression range `(0.1, 0.6)`.
    fn default() -> Self {
        Self { v_min: 0.1, v_max: 0.6 }
    }
}

/// An EPR field with its degenerate-pixel bookkeeping.
///
/// Pixels where `|ε₁₁|` fell below the denominator floor hold the bounds
/// midpoint instead of a quotient and are flagged here; they are excluded
/// from in-range averages and never contribute mask evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct EprField {
    values: Grid2D,
    degenerate: Vec<bool>,
    denominator_floor: f64,
}

impl EprField {
    /// EPR values (finite everywhere, midpoint-substituted where degenerate).
    pub fn values(&self) -> &Grid2D {
        &self.values
    }

    /// Per-pixel degenerate flags, row-major.
    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    /// The floor that was applied to |ε₁₁|.
    pub fn denominator_floor(&self) -> f64 {
        self.denominator_floor
    }

    /// Number of degenerate pixels.
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// Binary out-of-range indicator: 1 where the EPR is infeasible, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityMask {
    values: Grid2D,
}

impl FeasibilityMask {
    /// The 0/1 grid.
    pub fn values(&self) -> &Grid2D {
        &self.values
    }

    /// Fraction of flagged pixels, `mean(M)`.
    pub fn out_of_range_fraction(&self) -> f64 {
        self.values.mean()
    }
}

/// Computes `ṽ_e = −ε₂₂ / ε₁₁` with the degenerate-denominator policy.
///
/// Where `|ε₁₁| < floor` the quotient is unreliable; the pixel takes
/// `bounds.midpoint()` and is flagged degenerate. The bounds are needed for
/// exactly that substitution — they do not clamp anything here.
pub fn compute_epr(strains: &StrainPair, floor: f64, bounds: FeasibilityBounds) -> Result<EprField> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::Parameter(format!(
            "denominator floor must be finite and > 0, got {floor}"
        )));
    }
    let e11 = strains.axial().values();
    let e22 = strains.lateral().values();
    let mid = bounds.midpoint();
    let mut values = Vec::with_capacity(e11.len());
    let mut degenerate = vec![false; e11.len()];
    for k in 0..e11.len() {
        if e11[k].abs() < floor {
            values.push(mid);
            degenerate[k] = true;
        } else {
            values.push(-e22[k] / e11[k]);
        }
    }
    Ok(EprField {
        values: Grid2D::from_values(strains.geometry(), values)?,
        degenerate,
        denominator_floor: floor,
    })
}

/// Flags pixels whose EPR lies outside the open interval.
///
/// `M = 0` where `v_min < ṽ_e < v_max` (strict — a pixel sitting exactly on a
/// bound counts as out of range), `M = 1` otherwise. Degenerate pixels get
/// `M = 0`: they carry no evidence either way.
pub fn feasibility_mask(epr: &EprField, bounds: FeasibilityBounds) -> FeasibilityMask {
    let v = epr.values.values();
    let mut m = Vec::with_capacity(v.len());
    for (&value, &degenerate) in v.iter().zip(&epr.degenerate) {
        let flagged = !degenerate && !bounds.contains(value);
        m.push(if flagged { 1.0 } else { 0.0 });
    }
    FeasibilityMask {
        values: Grid2D::from_values(epr.values.geometry(), m)
            .expect("mask of a valid grid is valid"),
    }
}

/// The data term: how strongly infeasible pixels disagree with the mean
/// feasible ratio.
///
/// Returns `(l_vd, mean_inrange_epr)` where `⟨ṽ_e⟩` is the mean EPR over
/// in-range, non-degenerate pixels and
/// `l_vd = sqrt(mean((M · (ε₂₂ + ⟨ṽ_e⟩·ε₁₁))²))` — a mean-normalized
/// Euclidean norm, so values are comparable across grid sizes.
pub fn feasibility_data_loss(
    strains: &StrainPair,
    epr: &EprField,
    mask: &FeasibilityMask,
    bounds: FeasibilityBounds,
) -> Result<(f64, f64)> {
    let v = epr.values.values();
    let m = mask.values.values();
    let mut sum = 0.0;
    let mut n_in = 0usize;
    for k in 0..v.len() {
        if m[k] == 0.0 && !epr.degenerate[k] {
            sum += v[k];
            n_in += 1;
        }
    }
    if n_in == 0 {
        return Err(Error::DegenerateStatistics(format!(
            "no in-range EPR pixels to average; fall back to the bounds midpoint {}",
            bounds.midpoint()
        )));
    }
    let mean_inrange = sum / n_in as f64;
    let e11 = strains.axial().values();
    let e22 = strains.lateral().values();
    let mut acc = 0.0;
    for k in 0..v.len() {
        let r = m[k] * (e22[k] + mean_inrange * e11[k]);
        acc += r * r;
    }
    let l_vd = (acc / v.len() as f64).sqrt();
    Ok((l_vd, mean_inrange))
}

/// The smoothness term: mean absolute EPR gradient,
/// `l_vs = mean|∂ṽ_e/∂a| + β·mean|∂ṽ_e/∂l|`.
///
/// β gates only the lateral term. Gradients are per unit length, so the value
/// carries units of 1/mm under physical spacings.
pub fn epr_smoothness_loss(epr: &EprField, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    let ga = stencil::gradient_axial(&epr.values);
    let gl = stencil::gradient_lateral(&epr.values);
    let n = ga.values().len() as f64;
    let ma = ga.values().iter().map(|v| v.abs()).sum::<f64>() / n;
    let ml = gl.values().iter().map(|v| v.abs()).sum::<f64>() / n;
    Ok(ma + beta * ml)
}

/// Everything the combined feasibility loss needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityLossConfig {
    /// Feasible EPR interval.
    pub bounds: FeasibilityBounds,
    /// Denominator floor for EPR computation.
    pub epr_floor: f64,
    /// Weight of the lateral smoothness term.
    pub beta: f64,
    /// Weight of the smoothness loss in the combined loss.
    pub lambda_vs: f64,
}

impl Default for FeasibilityLossConfig {
    fn default() -> Self {
        Self {
            bounds: FeasibilityBounds::default(),
            epr_floor: DEFAULT_EPR_FLOOR,
            beta: 1.0,
            lambda_vs: 1.0,
        }
    }
}

/// Scalar summary of one feasibility-loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityLossReport {
    /// Data term (mean-normalized L2 over masked residuals).
    pub l_vd: f64,
    /// Smoothness term (mean absolute EPR gradient).
    pub l_vs: f64,
    /// Combined loss, exactly `l_vd + lambda_vs * l_vs`.
    pub l_v: f64,
    /// Mean EPR over in-range, non-degenerate pixels.
    pub mean_inrange_epr: f64,
    /// Fraction of pixels flagged by the mask.
    pub out_of_range_fraction: f64,
}

/// Computes EPR, mask, and both loss terms from a strain pair in one call.
pub fn feasibility_loss(strains: &StrainPair, cfg: &FeasibilityLossConfig) -> Result<FeasibilityLossReport> {
    if !(cfg.lambda_vs.is_finite() && cfg.lambda_vs >= 0.0) {
        return Err(Error::Parameter(format!(
            "lambda_vs must be finite and >= 0, got {}",
            cfg.lambda_vs
        )));
    }
    let epr = compute_epr(strains, cfg.epr_floor, cfg.bounds)?;
    let mask = feasibility_mask(&epr, cfg.bounds);
    let (l_vd, mean_inrange_epr) = feasibility_data_loss(strains, &epr, &mask, cfg.bounds)?;
    let l_vs = epr_smoothness_loss(&epr, cfg.beta)?;
    Ok(FeasibilityLossReport {
        l_vd,
        l_vs,
        l_v: l_vd + cfg.lambda_vs * l_vs,
        mean_inrange_epr,
        out_of_range_fraction: mask.out_of_range_fraction(),
    })
}
