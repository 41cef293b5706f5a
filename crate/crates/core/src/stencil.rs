//! Finite-difference derivative operators.
//!
//! Central differences on interior samples, one-sided first-order differences
//! on the first and last row/column. Both schemes are exact on affine fields,
//! which the strain tests lean on heavily: a displacement ramp differentiates
//! to a bit-for-bit constant strain.

use crate::grid::Grid2D;

/// ∂g/∂a per unit length (derivative along rows, i.e. the axial axis).
pub fn gradient_axial(g: &Grid2D) -> Grid2D {
    let rows = g.rows();
    let cols = g.cols();
    let da = g.geometry().axial_spacing();
    let v = g.values();
    let mut out = vec![0.0; v.len()];
    for j in 0..cols {
        out[j] = (v[cols + j] - v[j]) / da;
        for i in 1..rows - 1 {
            out[i * cols + j] = (v[(i + 1) * cols + j] - v[(i - 1) * cols + j]) / (2.0 * da);
        }
        out[(rows - 1) * cols + j] = (v[(rows - 1) * cols + j] - v[(rows - 2) * cols + j]) / da;
    }
    Grid2D::from_values(g.geometry(), out).expect("derivative of a finite grid is finite")
}

/// ∂g/∂l per unit length (derivative along columns, i.e. the lateral axis).
pub fn gradient_lateral(g: &Grid2D) -> Grid2D {
    let rows = g.rows();
    let cols = g.cols();
    let dl = g.geometry().lateral_spacing();
    let v = g.values();
    let mut out = vec![0.0; v.len()];
    for i in 0..rows {
        let r = i * cols;
        out[r] = (v[r + 1] - v[r]) / dl;
        for j in 1..cols - 1 {
            out[r + j] = (v[r + j + 1] - v[r + j - 1]) / (2.0 * dl);
        }
        out[r + cols - 1] = (v[r + cols - 1] - v[r + cols - 2]) / dl;
    }
    Grid2D::from_values(g.geometry(), out).expect("derivative of a finite grid is finite")
}
