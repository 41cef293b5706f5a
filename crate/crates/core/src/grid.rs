//! Grid containers and coordinate conventions.
//!
//! Axes follow the ultrasound convention used throughout the crate: the
//! *axial* coordinate `a` runs along the beam and varies with the row index
//! `i`; the *lateral* coordinate `l` runs across beam lines and varies with
//! the column index `j`. Values are stored row-major.

use crate::error::{Error, Result};
use crate::stencil;

/// Shape and physical spacing shared by every grid in a pipeline.
///
/// Construction enforces the invariants every stencil in the crate relies
/// on: at least 3 samples per axis (one-sample margins for central
/// differences) and strictly positive, finite spacings in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    rows: usize,
    cols: usize,
    axial_spacing: f64,
    lateral_spacing: f64,
}

impl GridGeometry {
    /// Validates and builds a geometry.
    pub fn new(rows: usize, cols: usize, axial_spacing: f64, lateral_spacing: f64) -> Result<Self> {
        if rows < 3 || cols < 3 {
            return Err(Error::Dimension(format!(
                "grid must be at least 3x3, got {rows}x{cols}"
            )));
        }
        for (name, s) in [("axial_spacing", axial_spacing), ("lateral_spacing", lateral_spacing)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be strictly positive and finite, got {s}"
                )));
            }
        }
        Ok(Self { rows, cols, axial_spacing, lateral_spacing })
    }

    /// Number of axial samples (rows, index `i`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of lateral lines (columns, index `j`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Length per axial sample, mm.
    pub fn axial_spacing(&self) -> f64 {
        self.axial_spacing
    }

    /// Length per lateral line, mm.
    pub fn lateral_spacing(&self) -> f64 {
        self.lateral_spacing
    }

    /// Total sample count `rows * cols`.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    /// Never true: geometries have at least 9 samples.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same geometry with axes (and spacings) swapped.
    pub fn transposed(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            axial_spacing: self.lateral_spacing,
            lateral_spacing: self.axial_spacing,
        }
    }
}

/// A row-major 2-D scalar field with physical spacing.
///
/// This is the substrate for displacements, strains, EPR maps and masks.
/// Every public constructor rejects non-finite values, so code consuming a
/// `Grid2D` may assume all samples are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl Grid2D {
    /// Wraps a row-major value buffer, validating length and finiteness.
    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::Dimension(format!(
                "value buffer has {} samples, geometry needs {}",
                values.len(),
                geometry.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite value {} at flat index {k}",
                values[k]
            )));
        }
        Ok(Self { geometry, values })
    }

    /// A grid filled with one value.
    pub fn constant(geometry: GridGeometry, value: f64) -> Result<Self> {
        Self::from_values(geometry, vec![value; geometry.len()])
    }

    /// Builds a grid by evaluating `f(i, j)` at every sample.
    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(geometry.len());
        for i in 0..geometry.rows() {
            for j in 0..geometry.cols() {
                values.push(f(i, j));
            }
        }
        Self::from_values(geometry, values)
    }

    /// The grid's geometry.
    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Row count shorthand.
    pub fn rows(&self) -> usize {
        self.geometry.rows
    }

    /// Column count shorthand.
    pub fn cols(&self) -> usize {
        self.geometry.cols
    }

    /// Flat index of `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.geometry.cols + j
    }

    /// Value at `(i, j)`. Panics if out of bounds, like slice indexing.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.geometry.cols + j]
    }

    /// The raw row-major buffer.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Minimum and maximum sample values.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        (lo, hi)
    }

    /// Mean over all samples.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// The transposed grid (axes and spacings swapped).
    pub fn transposed(&self) -> Self {
        let g = self.geometry.transposed();
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.geometry.cols {
            for i in 0..self.geometry.rows {
                values.push(self.get(i, j));
            }
        }
        Self { geometry: g, values }
    }
}

/// Paired axial/lateral displacement grids sharing one geometry (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    axial: Grid2D,
    lateral: Grid2D,
}

impl DisplacementField {
    /// Pairs the two components, checking they share a geometry.
    pub fn new(axial: Grid2D, lateral: Grid2D) -> Result<Self> {
        if axial.geometry() != lateral.geometry() {
            return Err(Error::Dimension(
                "axial and lateral displacement grids must share one geometry".into(),
            ));
        }
        Ok(Self { axial, lateral })
    }

    /// Axial displacement w_a.
    pub fn axial(&self) -> &Grid2D {
        &self.axial
    }

    /// Lateral displacement w_l.
    pub fn lateral(&self) -> &Grid2D {
        &self.lateral
    }

    /// Shared geometry.
    pub fn geometry(&self) -> GridGeometry {
        self.axial.geometry()
    }

    /// Splits into `(axial, lateral)` grids.
    pub fn into_parts(self) -> (Grid2D, Grid2D) {
        (self.axial, self.lateral)
    }
}

/// Axial strain ε₁₁ = ∂w_a/∂a and lateral strain ε₂₂ = ∂w_l/∂l.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainPair {
    axial: Grid2D,
    lateral: Grid2D,
}

impl StrainPair {
    /// Pairs precomputed strain grids, checking they share a geometry.
    pub fn new(axial: Grid2D, lateral: Grid2D) -> Result<Self> {
        if axial.geometry() != lateral.geometry() {
            return Err(Error::Dimension(
                "axial and lateral strain grids must share one geometry".into(),
            ));
        }
        Ok(Self { axial, lateral })
    }

    /// Differentiates a displacement field into its strain pair.
    pub fn from_displacement(field: &DisplacementField) -> Self {
        Self {
            axial: stencil::gradient_axial(field.axial()),
            lateral: stencil::gradient_lateral(field.lateral()),
        }
    }

    /// Axial strain ε₁₁.
    pub fn axial(&self) -> &Grid2D {
        &self.axial
    }

    /// Lateral strain ε₂₂.
    pub fn lateral(&self) -> &Grid2D {
        &self.lateral
    }

    /// Shared geometry.
    pub fn geometry(&self) -> GridGeometry {
        self.axial.geometry()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(rows: usize, cols: usize) -> GridGeometry {
        GridGeometry::new(rows, cols, 0.0385, 0.15).unwrap()
    }

    #[test]
    fn rejects_grids_smaller_than_3x3() {
        assert!(matches!(
            GridGeometry::new(2, 8, 0.1, 0.1),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            GridGeometry::new(8, 2, 0.1, 0.1),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_bad_spacings() {
        for s in [0.0, -0.1, f64::NAN, f64::INFINITY] {
            assert!(GridGeometry::new(4, 4, s, 0.1).is_err());
            assert!(GridGeometry::new(4, 4, 0.1, s).is_err());
        }
    }

    #[test]
    fn rejects_wrong_length_and_nonfinite_values() {
        let g = geo(3, 3);
        assert!(matches!(
            Grid2D::from_values(g, vec![0.0; 8]),
            Err(Error::Dimension(_))
        ));
        let mut v = vec![0.0; 9];
        v[4] = f64::NAN;
        assert!(matches!(Grid2D::from_values(g, v), Err(Error::Parameter(_))));
    }

    #[test]
    fn indexing_is_row_major() {
        let g = Grid2D::from_fn(geo(3, 4), |i, j| (i * 10 + j) as f64).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(g.get(0, 3), 3.0);
        assert_eq!(g.get(2, 1), 21.0);
        assert_eq!(g.values()[g.idx(2, 1)], 21.0);
    }

    #[test]
    fn transpose_swaps_axes_and_spacings() {
        let g = Grid2D::from_fn(geo(3, 4), |i, j| (i * 10 + j) as f64).unwrap();
        let t = g.transposed();
        assert_eq!(t.rows(), 4);
        assert_eq!(t.cols(), 3);
        assert_eq!(t.geometry().axial_spacing(), 0.15);
        assert_eq!(t.get(3, 2), g.get(2, 3));
        assert_eq!(t.transposed(), g);
    }

    #[test]
    fn displacement_field_requires_matching_geometry() {
        let a = Grid2D::constant(geo(3, 3), 0.0).unwrap();
        let b = Grid2D::constant(geo(3, 4), 0.0).unwrap();
        assert!(matches!(
            DisplacementField::new(a, b),
            Err(Error::Dimension(_))
        ));
    }
}
