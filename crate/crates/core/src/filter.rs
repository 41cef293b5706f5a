//! Separable Gaussian filtering with replicate borders.

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Builds the truncated, normalized 1-D kernel for `sigma` (in samples).
///
/// Radius is `ceil(3 * sigma)`; weights are renormalized to sum to 1 so a
/// constant field maps to itself up to rounding.
fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k = Vec::with_capacity(2 * radius + 1);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for t in 0..=2 * radius {
        let d = t as f64 - radius as f64;
        k.push((-d * d * inv).exp());
    }
    let sum: f64 = k.iter().sum();
    for w in &mut k {
        *w /= sum;
    }
    k
}

/// Separable Gaussian convolution.
///
/// `sigma` is measured in samples, not millimetres; `sigma = 0` is the
/// identity. Borders are handled by replicating the edge sample
/// (clamp-to-edge), which keeps the output inside the input's value range —
/// zero padding would bleed artificial zeros into edge strains.
///
/// The two passes run lateral-then-axial with a fixed per-sample summation
/// order, so results are bit-identical across runs.
pub fn gaussian_filter(g: &Grid2D, sigma: f64) -> Result<Grid2D> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Parameter(format!(
            "gaussian sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(g.clone());
    }
    let k = kernel(sigma);
    let radius = k.len() / 2;
    let rows = g.rows();
    let cols = g.cols();
    let v = g.values();

    // Lateral pass.
    let mut tmp = vec![0.0; v.len()];
    for i in 0..rows {
        let r = i * cols;
        for j in 0..cols {
            let mut acc = 0.0;
            for (t, w) in k.iter().enumerate() {
                let jj = (j + t).saturating_sub(radius).min(cols - 1);
                acc += w * v[r + jj];
            }
            tmp[r + j] = acc;
        }
    }
    // Axial pass.
    let mut out = vec![0.0; v.len()];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0.0;
            for (t, w) in k.iter().enumerate() {
                let ii = (i + t).saturating_sub(radius).min(rows - 1);
                acc += w * tmp[ii * cols + j];
            }
            out[i * cols + j] = acc;
        }
    }
    Grid2D::from_values(g.geometry(), out)
}
