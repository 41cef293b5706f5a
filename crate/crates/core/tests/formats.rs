//! The on-disk formats are byte-stable contracts. These tests regenerate
//! each artifact from library calls and compare it against a golden file
//! committed under `tests/golden/` — any byte of drift is a failure — and
//! round-trip the binary grid format over random data.

use latref::io::{read_grid, render_pgm, write_grid, write_histogram_csv, Normalization};
use latref::phantom::{generate, PhantomSpec};
use latref::{
    compute_epr, epr_histogram, FeasibilityBounds, Grid2D, GridGeometry, StrainPair,
    DEFAULT_EPR_FLOOR,
};
use proptest::prelude::*;
use std::fs;
use std::path::Path;

fn golden(name: &str) -> Vec<u8> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read(&path).unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()))
}

fn reference_grid() -> Grid2D {
    let geo = GridGeometry::new(3, 3, 1.0, 0.5).unwrap();
    Grid2D::from_values(geo, (0..9).map(f64::from).collect()).unwrap()
}

#[test]
fn grid_serialization_matches_the_golden_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.efg1");
    write_grid(&path, &reference_grid()).unwrap();
    assert_eq!(fs::read(&path).unwrap(), golden("grid.efg1"));
}

#[test]
fn golden_grid_parses_back_to_the_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.efg1");
    fs::write(&path, golden("grid.efg1")).unwrap();
    let g = read_grid(&path).unwrap();
    assert_eq!(g.geometry(), GridGeometry::new(3, 3, 1.0, 0.5).unwrap());
    assert_eq!(g.values(), reference_grid().values());
}

#[test]
fn pgm_render_matches_the_golden_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("render.pgm");
    render_pgm(&path, &reference_grid(), Normalization::MinMax).unwrap();
    assert_eq!(fs::read(&path).unwrap(), golden("render.pgm"));
}

#[test]
fn histogram_csv_matches_the_golden_bytes() {
    // Uniform-ratio phantom: all 24·24 pixels at ratio 0.3 land in one bin.
    let spec = PhantomSpec {
        geometry: GridGeometry::new(24, 24, 0.0385, 0.15).unwrap(),
        ..PhantomSpec::default()
    };
    let (clean, _, _) = generate(&spec).unwrap();
    let epr = compute_epr(
        &StrainPair::from_displacement(&clean),
        DEFAULT_EPR_FLOOR,
        FeasibilityBounds::default(),
    )
    .unwrap();
    let hist = epr_histogram(&epr, FeasibilityBounds::default(), 4, (-0.5, 1.5)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    write_histogram_csv(&path, &hist).unwrap();
    assert_eq!(fs::read(&path).unwrap(), golden("hist.csv"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn efg1_round_trips_any_finite_grid_at_f32_precision(
        rows in 3_usize..8,
        cols in 3_usize..8,
        da in 0.01_f64..2.0,
        dl in 0.01_f64..2.0,
        seed in 0_u64..u64::MAX,
    ) {
        use rand::{Rng, SeedableRng};
        let geo = GridGeometry::new(rows, cols, da, dl).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Grid2D::from_fn(geo, |_, _| rng.gen_range(-1e3..1e3)).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.efg1");
        write_grid(&path, &g).unwrap();
        let back = read_grid(&path).unwrap();
        prop_assert_eq!(back.geometry(), geo);
        for (a, b) in g.values().iter().zip(back.values()) {
            prop_assert_eq!(*a as f32 as f64, *b);
        }
    }
}
