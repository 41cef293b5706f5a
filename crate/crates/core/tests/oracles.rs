//! Cross-checks of every numeric primitive against an independently coded
//! oracle: streaming (Welford) statistics for the ROI metrics, direct
//! per-pixel index arithmetic for the gradients, and a dense 2-D
//! convolution for the separable Gaussian. Agreement is required to 1e-12.

use latref::{
    cnr, gaussian_filter, gradient_axial, gradient_lateral, roi_stats, sr, Grid2D, GridGeometry,
    RoiSpec, RoiStats,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn random_geometry(rng: &mut ChaCha8Rng) -> GridGeometry {
    let rows = rng.gen_range(3..=16);
    let cols = rng.gen_range(3..=16);
    let da = rng.gen_range(0.01..1.0);
    let dl = rng.gen_range(0.01..1.0);
    GridGeometry::new(rows, cols, da, dl).unwrap()
}

fn random_grid(rng: &mut ChaCha8Rng, geo: GridGeometry) -> Grid2D {
    let values: Vec<f64> = (0..geo.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Grid2D::from_values(geo, values).unwrap()
}

/// Streaming mean/variance, a different algorithm from the two-pass sums in
/// the library.
fn welford_stats(g: &Grid2D, roi: RoiSpec) -> RoiStats {
    let mut n = 0_usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in roi.row_start..roi.row_start + roi.rows {
        for j in roi.col_start..roi.col_start + roi.cols {
            n += 1;
            let x = g.get(i, j);
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
    }
    RoiStats { mean, std: (m2 / n as f64).sqrt(), count: n }
}

#[test]
fn roi_stats_cnr_and_sr_match_welford_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x524f49);
    for _ in 0..100 {
        let geo = random_geometry(&mut rng);
        let g = random_grid(&mut rng, geo);
        let random_roi = |rng: &mut ChaCha8Rng| loop {
            let r0 = rng.gen_range(0..geo.rows());
            let c0 = rng.gen_range(0..geo.cols());
            let h = rng.gen_range(1..=geo.rows() - r0);
            let w = rng.gen_range(1..=geo.cols() - c0);
            if h * w >= 2 {
                return RoiSpec { row_start: r0, col_start: c0, rows: h, cols: w };
            }
        };
        let target = random_roi(&mut rng);
        let background = random_roi(&mut rng);

        let t = roi_stats(&g, target).unwrap();
        let b = roi_stats(&g, background).unwrap();
        let to = welford_stats(&g, target);
        let bo = welford_stats(&g, background);

        assert_eq!(t.count, to.count);
        assert!((t.mean - to.mean).abs() <= TOL, "mean {} vs {}", t.mean, to.mean);
        assert!((t.std - to.std).abs() <= TOL, "std {} vs {}", t.std, to.std);

        // Continuous random data never has zero variance or a zero mean.
        let d = bo.mean - to.mean;
        let cnr_oracle = (2.0 * d * d / (bo.std * bo.std + to.std * to.std)).sqrt();
        let cnr_lib = cnr(t, b).unwrap();
        assert!((cnr_lib - cnr_oracle).abs() <= TOL * cnr_oracle.abs().max(1.0));

        let sr_oracle = to.mean / bo.mean;
        let sr_lib = sr(t, b).unwrap();
        assert!((sr_lib - sr_oracle).abs() <= TOL * sr_oracle.abs().max(1.0));
    }
}

#[test]
fn gradients_match_direct_index_arithmetic_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x475241);
    for _ in 0..100 {
        let geo = random_geometry(&mut rng);
        let g = random_grid(&mut rng, geo);
        let (rows, cols) = (geo.rows(), geo.cols());
        let (da, dl) = (geo.axial_spacing(), geo.lateral_spacing());
        let ga = gradient_axial(&g);
        let gl = gradient_lateral(&g);
        for i in 0..rows {
            for j in 0..cols {
                let expect_a = if i == 0 {
                    (g.get(1, j) - g.get(0, j)) / da
                } else if i == rows - 1 {
                    (g.get(rows - 1, j) - g.get(rows - 2, j)) / da
                } else {
                    (g.get(i + 1, j) - g.get(i - 1, j)) / (2.0 * da)
                };
                let expect_l = if j == 0 {
                    (g.get(i, 1) - g.get(i, 0)) / dl
                } else if j == cols - 1 {
                    (g.get(i, cols - 1) - g.get(i, cols - 2)) / dl
                } else {
                    (g.get(i, j + 1) - g.get(i, j - 1)) / (2.0 * dl)
                };
                assert!((ga.get(i, j) - expect_a).abs() <= TOL, "axial ({i},{j})");
                assert!((gl.get(i, j) - expect_l).abs() <= TOL, "lateral ({i},{j})");
            }
        }
    }
}

/// Dense 2-D correlation with a full outer-product kernel and clamp-to-edge
/// indexing — the definitional form the separable implementation must match.
fn dense_gaussian(g: &Grid2D, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k1 = Vec::with_capacity(2 * radius as usize + 1);
    for t in -radius..=radius {
        k1.push((-(t as f64 * t as f64) / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = k1.iter().sum();
    for v in &mut k1 {
        *v /= total;
    }
    let (rows, cols) = (g.rows() as isize, g.cols() as isize);
    let mut out = Vec::with_capacity((rows * cols) as usize);
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0.0;
            for u in -radius..=radius {
                for v in -radius..=radius {
                    let ii = (i + u).clamp(0, rows - 1) as usize;
                    let jj = (j + v).clamp(0, cols - 1) as usize;
                    acc += k1[(u + radius) as usize] * k1[(v + radius) as usize] * g.get(ii, jj);
                }
            }
            out.push(acc);
        }
    }
    out
}

#[test]
fn separable_gaussian_matches_dense_convolution_on_impulses() {
    let geo = GridGeometry::new(9, 9, 1.0, 1.0).unwrap();
    for sigma in [0.5, 1.0, 2.0] {
        for pos in 0..81 {
            let mut values = vec![0.0; 81];
            values[pos] = 1.0;
            let g = Grid2D::from_values(geo, values).unwrap();
            let lib = gaussian_filter(&g, sigma).unwrap();
            let oracle = dense_gaussian(&g, sigma);
            for (k, (a, b)) in lib.values().iter().zip(&oracle).enumerate() {
                assert!(
                    (a - b).abs() <= TOL,
                    "sigma {sigma}, impulse {pos}, pixel {k}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn separable_gaussian_matches_dense_convolution_on_a_random_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x474155);
    let geo = GridGeometry::new(11, 7, 0.3, 0.8).unwrap();
    let g = random_grid(&mut rng, geo);
    for sigma in [0.7, 1.3] {
        let lib = gaussian_filter(&g, sigma).unwrap();
        let oracle = dense_gaussian(&g, sigma);
        for (a, b) in lib.values().iter().zip(&oracle) {
            assert!((a - b).abs() <= TOL);
        }
    }
}
