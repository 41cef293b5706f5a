//! Quality and physics metrics: CNR, strain ratio, incompressibility
//! residual, and EPR histograms.

use crate::epr::{EprField, FeasibilityBounds};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, StrainPair};

/// A rectangular region of interest, in sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoiSpec {
    /// First row of the region.
    pub row_start: usize,
    /// First column of the region.
    pub col_start: usize,
    /// Number of rows.
    pub rows: usize,
    /// Number of columns.
    pub cols: usize,
}

impl RoiSpec {
    /// Builds a region, requiring at least 2 samples (std needs them).
    pub fn new(row_start: usize, col_start: usize, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols < 2 {
            return Err(Error::Parameter(format!(
                "ROI must contain at least 2 samples, got {rows}x{cols}"
            )));
        }
        Ok(Self { row_start, col_start, rows, cols })
    }
}

/// Mean, population standard deviation, and sample count of one ROI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiStats {
    /// Mean strain s̄.
    pub mean: f64,
    /// Population standard deviation σ (divides by N, not N−1 — keeps
    /// two-pixel hand examples exact).
    pub std: f64,
    /// Number of samples.
    pub count: usize,
}

/// Mean and population std over a rectangular region.
pub fn roi_stats(g: &Grid2D, roi: RoiSpec) -> Result<RoiStats> {
    let r_end = roi.row_start.checked_add(roi.rows);
    let c_end = roi.col_start.checked_add(roi.cols);
    match (r_end, c_end) {
        (Some(re), Some(ce)) if re <= g.rows() && ce <= g.cols() => {}
        _ => {
            return Err(Error::Dimension(format!(
                "ROI {roi:?} exceeds the {}x{} grid",
                g.rows(),
                g.cols()
            )))
        }
    }
    let n = (roi.rows * roi.cols) as f64;
    let mut sum = 0.0;
    for i in roi.row_start..roi.row_start + roi.rows {
        for j in roi.col_start..roi.col_start + roi.cols {
            sum += g.get(i, j);
        }
    }
    let mean = sum / n;
    let mut sq = 0.0;
    for i in roi.row_start..roi.row_start + roi.rows {
        for j in roi.col_start..roi.col_start + roi.cols {
            let d = g.get(i, j) - mean;
            sq += d * d;
        }
    }
    Ok(RoiStats { mean, std: (sq / n).sqrt(), count: roi.rows * roi.cols })
}

/// Contrast-to-noise ratio between two regions:
/// `sqrt(2·(s̄_b − s̄_t)² / (σ_b² + σ_t²))`.
pub fn cnr(target: RoiStats, background: RoiStats) -> Result<f64> {
    let var = background.std * background.std + target.std * target.std;
    if var == 0.0 {
        return Err(Error::DegenerateStatistics(
            "both ROIs have zero variance: contrast-to-noise is infinite".into(),
        ));
    }
    let d = background.mean - target.mean;
    Ok((2.0 * d * d / var).sqrt())
}

/// Strain ratio `s̄_t / s̄_b`. Lower means a better-resolved stiff target.
pub fn sr(target: RoiStats, background: RoiStats) -> Result<f64> {
    if background.mean == 0.0 {
        return Err(Error::DegenerateStatistics(
            "background mean strain is zero: strain ratio is undefined".into(),
        ));
    }
    Ok(target.mean / background.mean)
}

/// Per-pixel incompressibility residual `r = ε₁₁ + 2·ε₂₂` and its
/// mean-normalized L2 over interior pixels.
///
/// The residual field is returned over the full grid (border strains come
/// from one-sided stencils and are exact on affine fields), but the scalar
/// norm excludes the one-pixel border where those stencils are lower order:
/// `sqrt(mean(r_interior²))`.
pub fn incompressibility_residual(strains: &StrainPair) -> (Grid2D, f64) {
    let e11 = strains.axial().values();
    let e22 = strains.lateral().values();
    let rows = strains.geometry().rows();
    let cols = strains.geometry().cols();
    let mut r = Vec::with_capacity(e11.len());
    for k in 0..e11.len() {
        r.push(e11[k] + 2.0 * e22[k]);
    }
    let mut acc = 0.0;
    for i in 1..rows - 1 {
        for j in 1..cols - 1 {
            let v = r[i * cols + j];
            acc += v * v;
        }
    }
    let n_interior = ((rows - 2) * (cols - 2)) as f64;
    let l2 = (acc / n_interior).sqrt();
    let field = Grid2D::from_values(strains.geometry(), r)
        .expect("residual of finite strains is finite");
    (field, l2)
}

/// Default number of histogram bins.
pub const DEFAULT_HISTOGRAM_BINS: usize = 64;
/// Default histogram range, wide enough to show out-of-range populations on
/// both sides of the feasible interval.
pub const DEFAULT_HISTOGRAM_RANGE: (f64, f64) = (-0.5, 1.5);

/// Binned EPR distribution plus the feasible fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct EprHistogram {
    /// `bins + 1` edges, evenly spaced over the requested range.
    pub bin_edges: Vec<f64>,
    /// Per-bin counts over non-degenerate pixels.
    pub counts: Vec<u64>,
    /// Fraction of pixels strictly inside the feasibility interval
    /// (degenerate pixels count as in-range: they hold the bounds midpoint).
    pub in_range_fraction: f64,
}

impl EprHistogram {
    /// Total count across bins.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histograms the EPR values of non-degenerate pixels.
///
/// Values are clamped into `range` for binning, so outliers pile up in the
/// first/last bin rather than being dropped — every non-degenerate pixel is
/// counted exactly once.
pub fn epr_histogram(
    epr: &EprField,
    bounds: FeasibilityBounds,
    bins: usize,
    range: (f64, f64),
) -> Result<EprHistogram> {
    if bins < 1 {
        return Err(Error::Parameter("histogram needs at least 1 bin".into()));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!(
            "histogram range must be finite with lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut bin_edges = Vec::with_capacity(bins + 1);
    let width = (hi - lo) / bins as f64;
    for k in 0..=bins {
        bin_edges.push(lo + k as f64 * width);
    }
    let mut counts = vec![0u64; bins];
    let values = epr.values().values();
    let mut in_range = 0usize;
    for (k, &v) in values.iter().enumerate() {
        if bounds.contains(v) {
            in_range += 1;
        }
        if epr.degenerate()[k] {
            continue;
        }
        let clamped = v.clamp(lo, hi);
        let idx = (((clamped - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(EprHistogram {
        bin_edges,
        counts,
        in_range_fraction: in_range as f64 / values.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epr::{compute_epr, feasibility_mask, DEFAULT_EPR_FLOOR};
    use crate::grid::GridGeometry;

    fn geo() -> GridGeometry {
        GridGeometry::new(4, 4, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_roi_stats() {
        let g = Grid2D::constant(geo(), 0.01).unwrap();
        let s = roi_stats(&g, RoiSpec::new(1, 1, 2, 2).unwrap()).unwrap();
        assert_eq!(s.mean, 0.01);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.count, 4);
    }

    #[test]
    fn two_pixel_population_std() {
        let mut v = vec![0.0; 16];
        v[0] = 0.0;
        v[1] = 0.02;
        let g = Grid2D::from_values(geo(), v).unwrap();
        let s = roi_stats(&g, RoiSpec::new(0, 0, 1, 2).unwrap()).unwrap();
        assert!((s.mean - 0.01).abs() < 1e-15);
        assert!((s.std - 0.01).abs() < 1e-15);
    }

    #[test]
    fn roi_bounds_are_checked() {
        let g = Grid2D::constant(geo(), 0.0).unwrap();
        assert!(matches!(
            roi_stats(&g, RoiSpec::new(2, 2, 3, 3).unwrap()),
            Err(Error::Dimension(_))
        ));
        assert!(RoiSpec::new(0, 0, 1, 1).is_err());
    }

    #[test]
    fn cnr_hand_value_and_symmetry() {
        let t = RoiStats { mean: 0.5, std: 0.1, count: 4 };
        let b = RoiStats { mean: 1.0, std: 0.1, count: 4 };
        let v = cnr(t, b).unwrap();
        assert!((v - 5.0).abs() < 1e-12, "got {v}");
        assert_eq!(cnr(b, t).unwrap(), v);
        assert_eq!(cnr(t, t).unwrap(), 0.0);
    }

    #[test]
    fn cnr_degenerate_and_scale_invariance() {
        let t = RoiStats { mean: 0.5, std: 0.0, count: 4 };
        let b = RoiStats { mean: 1.0, std: 0.0, count: 4 };
        assert!(matches!(cnr(t, b), Err(Error::DegenerateStatistics(_))));

        let scale = |s: RoiStats, a: f64| RoiStats { mean: s.mean * a, std: s.std * a, count: s.count };
        let t = RoiStats { mean: 0.4, std: 0.05, count: 9 };
        let b = RoiStats { mean: 0.9, std: 0.07, count: 9 };
        let v = cnr(t, b).unwrap();
        let w = cnr(scale(t, 3.0), scale(b, 3.0)).unwrap();
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn sr_ratio_and_reciprocal() {
        let t = RoiStats { mean: 0.5, std: 0.1, count: 4 };
        let b = RoiStats { mean: 1.0, std: 0.1, count: 4 };
        assert_eq!(sr(t, b).unwrap(), 0.5);
        assert_eq!(sr(t, t).unwrap(), 1.0);
        let prod = sr(t, b).unwrap() * sr(b, t).unwrap();
        assert!((prod - 1.0).abs() < 1e-15);
        let zero = RoiStats { mean: 0.0, std: 0.1, count: 4 };
        assert!(matches!(sr(t, zero), Err(Error::DegenerateStatistics(_))));
    }

    #[test]
    fn residual_hand_values_and_linearity() {
        let s = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::constant(geo(), 0.01).unwrap(),
        )
        .unwrap();
        let (field, l2) = incompressibility_residual(&s);
        for &v in field.values() {
            assert!(v.abs() < 1e-15);
        }
        assert!(l2 < 1e-15);

        let s3 = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::constant(geo(), 0.006).unwrap(),
        )
        .unwrap();
        let (field, l2) = incompressibility_residual(&s3);
        for &v in field.values() {
            assert!((v - -0.008).abs() < 1e-15);
        }
        assert!((l2 - 0.008).abs() < 1e-15);

        // linearity: r(2ε) = 2·r(ε)
        let s6 = StrainPair::new(
            Grid2D::constant(geo(), -0.04).unwrap(),
            Grid2D::constant(geo(), 0.012).unwrap(),
        )
        .unwrap();
        let (_, l2b) = incompressibility_residual(&s6);
        assert!((l2b - 2.0 * l2).abs() < 1e-15);
    }

    #[test]
    fn histogram_constant_field() {
        let s = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::constant(geo(), 0.01).unwrap(),
        )
        .unwrap();
        let epr = compute_epr(&s, DEFAULT_EPR_FLOOR, FeasibilityBounds::default()).unwrap();
        let h = epr_histogram(&epr, FeasibilityBounds::default(), 64, DEFAULT_HISTOGRAM_RANGE).unwrap();
        assert_eq!(h.in_range_fraction, 1.0);
        assert_eq!(h.total(), 16);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.bin_edges.len(), 65);
    }

    #[test]
    fn histogram_half_out_of_range() {
        // Half the pixels at EPR 0.05 (below v_min), half at 0.5.
        let mut e22 = vec![0.001; 16]; // EPR 0.05 with e11 = -0.02
        for v in e22.iter_mut().skip(8) {
            *v = 0.01; // EPR 0.5
        }
        let s = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::from_values(geo(), e22).unwrap(),
        )
        .unwrap();
        let epr = compute_epr(&s, DEFAULT_EPR_FLOOR, FeasibilityBounds::default()).unwrap();
        let h = epr_histogram(&epr, FeasibilityBounds::default(), 64, DEFAULT_HISTOGRAM_RANGE).unwrap();
        assert_eq!(h.in_range_fraction, 0.5);
        assert_eq!(h.total(), 16);
    }

    #[test]
    fn histogram_clamps_outliers_into_edge_bins() {
        let s = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::constant(geo(), 0.2).unwrap(), // EPR 10, beyond the range hi
        )
        .unwrap();
        let epr = compute_epr(&s, DEFAULT_EPR_FLOOR, FeasibilityBounds::default()).unwrap();
        let h = epr_histogram(&epr, FeasibilityBounds::default(), 8, (-0.5, 1.5)).unwrap();
        assert_eq!(h.counts[7], 16);
        assert_eq!(h.in_range_fraction, 0.0);
    }

    #[test]
    fn histogram_agrees_with_mask_fraction() {
        let mut e22 = vec![0.01; 16];
        e22[3] = 0.02; // EPR 1.0, out of range
        e22[7] = -0.05; // EPR -2.5, out of range
        let s = StrainPair::new(
            Grid2D::constant(geo(), -0.02).unwrap(),
            Grid2D::from_values(geo(), e22).unwrap(),
        )
        .unwrap();
        let epr = compute_epr(&s, DEFAULT_EPR_FLOOR, FeasibilityBounds::default()).unwrap();
        let h = epr_histogram(&epr, FeasibilityBounds::default(), 64, DEFAULT_HISTOGRAM_RANGE).unwrap();
        let m = feasibility_mask(&epr, FeasibilityBounds::default());
        assert!((h.in_range_fraction - (1.0 - m.out_of_range_fraction())).abs() < 1e-15);
    }
}
