//! Synthetic ground-truth displacement fields.
//!
//! Real elastography frames come without ground truth, so the test bed is a
//! strain-prescribed phantom: pick an axial compression ε₀, a Poisson-style
//! lateral response ν, optionally carve stiff inclusions into the strain
//! map, integrate to displacements, and add measurement noise. Everything is
//! analytic, so recomputed strains and EPR have exact expected values.

use crate::epr::{compute_epr, FeasibilityBounds, DEFAULT_EPR_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{DisplacementField, Grid2D, GridGeometry, StrainPair};
use crate::stencil::{gradient_axial, gradient_lateral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A circular stiff (or soft) region in the strain map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclusion {
    /// Axial center, mm.
    pub center_axial_mm: f64,
    /// Lateral center, mm.
    pub center_lateral_mm: f64,
    /// Radius, mm.
    pub radius_mm: f64,
    /// Local strain multiplier: 0.5 halves the strain (a stiff inclusion of
    /// roughly double modulus), values above 1 soften.
    pub strain_contrast: f64,
    /// Width of the smooth radial ramp between inclusion and background, mm.
    /// Zero gives a hard edge.
    pub edge_softness_mm: f64,
}

/// Full description of one synthetic acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    /// Grid shape and spacing.
    pub geometry: GridGeometry,
    /// Applied axial compression magnitude ε₀ (> 0); axial strain is −ε₀
    /// in the background.
    pub applied_axial_strain: f64,
    /// Lateral response ratio ν: lateral strain is −ν · axial strain.
    /// Physical tissue sits in [0, 0.5]; larger values are accepted and
    /// synthesize deliberately infeasible fields for range-enforcement tests.
    pub poisson_ratio: f64,
    /// Stiffness structure. Overlapping inclusions multiply their contrasts.
    pub inclusions: Vec<Inclusion>,
    /// Std of Gaussian displacement noise added to the axial component, mm.
    pub noise_std_axial: f64,
    /// Std of Gaussian displacement noise added to the lateral component, mm.
    pub noise_std_lateral: f64,
    /// Seed for the noise generator.
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            geometry: GridGeometry::new(256, 256, 0.0385, 0.15)
                .expect("default geometry is valid"),
            applied_axial_strain: 0.02,
            poisson_ratio: 0.3,
            inclusions: Vec::new(),
            noise_std_axial: 0.0,
            noise_std_lateral: 0.0,
            seed: 0,
        }
    }
}

fn validate(spec: &PhantomSpec) -> Result<()> {
    if !(spec.applied_axial_strain.is_finite() && spec.applied_axial_strain > 0.0) {
        return Err(Error::Parameter(format!(
            "applied axial strain must be finite and > 0, got {}",
            spec.applied_axial_strain
        )));
    }
    if !(spec.poisson_ratio.is_finite() && spec.poisson_ratio >= 0.0) {
        return Err(Error::Parameter(format!(
            "poisson ratio must be finite and >= 0, got {}",
            spec.poisson_ratio
        )));
    }
    for (name, s) in [
        ("axial noise std", spec.noise_std_axial),
        ("lateral noise std", spec.noise_std_lateral),
    ] {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Parameter(format!("{name} must be finite and >= 0, got {s}")));
        }
    }
    let extent_a = (spec.geometry.rows() - 1) as f64 * spec.geometry.axial_spacing();
    let extent_l = (spec.geometry.cols() - 1) as f64 * spec.geometry.lateral_spacing();
    for (k, inc) in spec.inclusions.iter().enumerate() {
        if !(inc.strain_contrast.is_finite() && inc.strain_contrast > 0.0) {
            return Err(Error::Parameter(format!(
                "inclusion {k}: strain contrast must be finite and > 0, got {}",
                inc.strain_contrast
            )));
        }
        if !(inc.radius_mm.is_finite() && inc.radius_mm > 0.0)
            || !(inc.edge_softness_mm.is_finite() && inc.edge_softness_mm >= 0.0)
        {
            return Err(Error::Parameter(format!(
                "inclusion {k}: radius must be > 0 and edge softness >= 0"
            )));
        }
        let reach = inc.radius_mm + 0.5 * inc.edge_softness_mm;
        if inc.center_axial_mm - reach < 0.0
            || inc.center_axial_mm + reach > extent_a
            || inc.center_lateral_mm - reach < 0.0
            || inc.center_lateral_mm + reach > extent_l
        {
            return Err(Error::Parameter(format!(
                "inclusion {k} does not fit inside the {extent_a:.3} x {extent_l:.3} mm field of view"
            )));
        }
    }
    Ok(())
}

/// Local strain multiplier at physical position `(a, l)` mm.
fn strain_multiplier(spec: &PhantomSpec, a: f64, l: f64) -> f64 {
    let mut m = 1.0;
    for inc in &spec.inclusions {
        let d = ((a - inc.center_axial_mm).powi(2) + (l - inc.center_lateral_mm).powi(2)).sqrt();
        let f = if inc.edge_softness_mm == 0.0 {
            if d <= inc.radius_mm {
                inc.strain_contrast
            } else {
                1.0
            }
        } else {
            let t = ((d - (inc.radius_mm - 0.5 * inc.edge_softness_mm)) / inc.edge_softness_mm)
                .clamp(0.0, 1.0);
            let s = t * t * (3.0 - 2.0 * t); // smoothstep
            inc.strain_contrast + (1.0 - inc.strain_contrast) * s
        };
        m *= f;
    }
    m
}

/// Generates `(noisy, clean, clean_strains)`.
///
/// The clean axial strain is `ε₁₁ = −ε₀·m` with `m` the inclusion multiplier
/// map, the clean lateral strain is `ε₂₂ = −ν·ε₁₁`, and displacements come
/// from cumulative integration anchored at the top-left: `w_a(0,·) = 0`,
/// `w_l(·,0) = 0`, with the strain at index k covering the cell between
/// samples k−1 and k. Central differences of the result recover the
/// prescribed strains exactly wherever the strain map is locally constant.
///
/// Noise is drawn from a seeded generator, axial stream first, then lateral;
/// a component with σ = 0 consumes no draws, so a zero-noise spec returns a
/// bitwise copy of the clean field as its "noisy" output.
pub fn generate(spec: &PhantomSpec) -> Result<(DisplacementField, DisplacementField, StrainPair)> {
    validate(spec)?;
    let geo = spec.geometry;
    let rows = geo.rows();
    let cols = geo.cols();
    let da = geo.axial_spacing();
    let dl = geo.lateral_spacing();

    let mut e11 = vec![0.0; rows * cols];
    let mut e22 = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let m = strain_multiplier(spec, i as f64 * da, j as f64 * dl);
            let ax = -spec.applied_axial_strain * m;
            e11[i * cols + j] = ax;
            e22[i * cols + j] = -spec.poisson_ratio * ax;
        }
    }

    let mut wa = vec![0.0; rows * cols];
    for i in 1..rows {
        for j in 0..cols {
            wa[i * cols + j] = wa[(i - 1) * cols + j] + e11[i * cols + j] * da;
        }
    }
    let mut wl = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 1..cols {
            wl[i * cols + j] = wl[i * cols + j - 1] + e22[i * cols + j] * dl;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noisy_wa = wa.clone();
    if spec.noise_std_axial > 0.0 {
        for v in &mut noisy_wa {
            let z: f64 = rng.sample(StandardNormal);
            *v += z * spec.noise_std_axial;
        }
    }
    let mut noisy_wl = wl.clone();
    if spec.noise_std_lateral > 0.0 {
        for v in &mut noisy_wl {
            let z: f64 = rng.sample(StandardNormal);
            *v += z * spec.noise_std_lateral;
        }
    }

    let clean = DisplacementField::new(
        Grid2D::from_values(geo, wa)?,
        Grid2D::from_values(geo, wl)?,
    )?;
    let noisy = DisplacementField::new(
        Grid2D::from_values(geo, noisy_wa)?,
        Grid2D::from_values(geo, noisy_wl)?,
    )?;
    let strains = StrainPair::new(
        Grid2D::from_values(geo, e11)?,
        Grid2D::from_values(geo, e22)?,
    )?;
    Ok((noisy, clean, strains))
}

/// Pushes the *measured* EPR of randomly chosen cells out by ±`magnitude`,
/// re-integrating the lateral displacement so the displacement field stays
/// consistent with the edit.
///
/// Naively adding a bump to one cell's lateral strain will not do: the
/// central difference smears the edit across both neighbors, which then sit
/// exactly on the feasibility boundary. Instead, each affected row's cell
/// strains are rebuilt with the recurrence
///
/// ```text
/// d[1]   = −t[i,0]·ε₁₁[i,0]
/// d[j+1] = −2·t[i,j]·ε₁₁[i,j] − d[j]
/// ```
///
/// which makes the recomputed (central-difference) EPR equal the target `t`
/// exactly at every column except the last. Rows without a selected cell are
/// returned bitwise unchanged; rows containing a degenerate axial-strain
/// pixel are excluded from selection (the recurrence cannot preserve the
/// original field through a degenerate column).
///
/// Returns the perturbed field and the selected `(row, col)` indices in
/// row-major order. `fraction = 0` returns the input bitwise.
pub fn perturb_epr(
    field: &DisplacementField,
    fraction: f64,
    magnitude: f64,
    seed: u64,
) -> Result<(DisplacementField, Vec<(usize, usize)>)> {
    if !(fraction.is_finite() && (0.0..=1.0).contains(&fraction)) {
        return Err(Error::Parameter(format!(
            "perturbation fraction must be in [0, 1], got {fraction}"
        )));
    }
    if !magnitude.is_finite() {
        return Err(Error::Parameter("perturbation magnitude must be finite".into()));
    }
    let geo = field.geometry();
    let rows = geo.rows();
    let cols = geo.cols();
    let dl = geo.lateral_spacing();

    let e11 = gradient_axial(field.axial());
    let e22 = gradient_lateral(field.lateral());
    let strains = StrainPair::new(e11.clone(), e22)?;
    let epr = compute_epr(&strains, DEFAULT_EPR_FLOOR, FeasibilityBounds::default())?;

    let mut row_ok = vec![true; rows];
    for (i, ok) in row_ok.iter_mut().enumerate() {
        *ok = !epr.degenerate()[i * cols..(i + 1) * cols].contains(&true);
    }
    // The last column's EPR is set by its neighbors, not directly targetable.
    let mut eligible: Vec<(usize, usize)> = Vec::new();
    for (i, _) in row_ok.iter().enumerate().filter(|(_, ok)| **ok) {
        for j in 0..cols - 1 {
            eligible.push((i, j));
        }
    }

    let n = ((fraction * (rows * cols) as f64).round() as usize).min(eligible.len());
    if n == 0 {
        return Ok((field.clone(), Vec::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first n slots become the selection.
    for k in 0..n {
        let pick = k + rng.gen_range(0..eligible.len() - k);
        eligible.swap(k, pick);
    }
    let mut selected: Vec<(usize, usize)> = eligible[..n].to_vec();

    let mut target = epr.values().values().to_vec();
    for &(i, j) in &selected {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        target[i * cols + j] += sign * magnitude;
    }

    let mut rebuild = vec![false; rows];
    for &(i, _) in &selected {
        rebuild[i] = true;
    }
    let v11 = e11.values();
    let mut wl = field.lateral().values().to_vec();
    let mut d = vec![0.0; cols];
    for (i, _) in rebuild.iter().enumerate().filter(|(_, rb)| **rb) {
        let r = i * cols;
        d[1] = -target[r] * v11[r];
        for j in 1..cols - 1 {
            d[j + 1] = -2.0 * target[r + j] * v11[r + j] - d[j];
        }
        for j in 1..cols {
            wl[r + j] = wl[r + j - 1] + d[j] * dl;
        }
    }

    selected.sort_unstable();
    let out = DisplacementField::new(
        field.axial().clone(),
        Grid2D::from_values(geo, wl)?,
    )?;
    Ok((out, selected))
}
