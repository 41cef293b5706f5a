//! On-disk formats: the `EFG1` binary grid, 8-bit PGM renders, and the
//! histogram CSV.
//!
//! All three are fully specified down to the byte so that independent
//! implementations can exchange files and so that reruns can be compared
//! with `cmp`. Numbers in the binary format are little-endian; text formats
//! use `\n` line endings regardless of platform.
//!
//! # `EFG1` layout
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0      | 4    | magic `EFG1` |
//! | 4      | 4    | rows, u32 |
//! | 8      | 4    | cols, u32 |
//! | 12     | 8    | axial spacing mm, f64 |
//! | 20     | 8    | lateral spacing mm, f64 |
//! | 28     | 4·rows·cols | samples, f32, row-major |
//!
//! Samples are stored as f32: displacement and strain magnitudes sit far
//! above f32 resolution, and the files are half the size. Reading back
//! widens to f64, so a write/read round trip is exact at f32 precision.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridGeometry};
use crate::metrics::EprHistogram;
use std::fs;
use std::io::Write;
use std::path::Path;

const MAGIC: &[u8; 4] = b"EFG1";
const HEADER_LEN: usize = 28;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, offset: u64, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), offset, reason: reason.into() }
}

/// Serializes a grid to the `EFG1` format.
pub fn write_grid(path: &Path, grid: &Grid2D) -> Result<()> {
    let geo = grid.geometry();
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * grid.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(geo.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(geo.cols() as u32).to_le_bytes());
    buf.extend_from_slice(&geo.axial_spacing().to_le_bytes());
    buf.extend_from_slice(&geo.lateral_spacing().to_le_bytes());
    for &v in grid.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// Reads a grid written by [`write_grid`], validating every header field and
/// every sample. Errors carry the byte offset at which the problem sits.
pub fn read_grid(path: &Path) -> Result<Grid2D> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < HEADER_LEN {
        return Err(format_err(
            path,
            bytes.len() as u64,
            format!("file is {} bytes, shorter than the {HEADER_LEN}-byte header", bytes.len()),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(path, 0, "bad magic, expected \"EFG1\""));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if rows < 3 || cols < 3 {
        return Err(format_err(path, 4, format!("grid is {rows}x{cols}, need at least 3x3")));
    }
    let da = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if !(da.is_finite() && da > 0.0) {
        return Err(format_err(path, 12, format!("axial spacing {da} is not positive and finite")));
    }
    let dl = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if !(dl.is_finite() && dl > 0.0) {
        return Err(format_err(path, 20, format!("lateral spacing {dl} is not positive and finite")));
    }
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| format_err(path, 4, format!("grid {rows}x{cols} overflows")))?;
    let expected = HEADER_LEN + 4 * n;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            HEADER_LEN as u64,
            format!("payload should make the file {expected} bytes, found {}", bytes.len()),
        ));
    }
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let off = HEADER_LEN + 4 * k;
        let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        if !v.is_finite() {
            return Err(format_err(path, off as u64, format!("sample {k} is {v}, not finite")));
        }
        values.push(v as f64);
    }
    let geo = GridGeometry::new(rows, cols, da, dl).expect("header fields already validated");
    Ok(Grid2D::from_values(geo, values).expect("payload already validated"))
}

/// How sample values map to the 0–255 gray ramp of a PGM render.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Map the grid's own min to 0 and max to 255. A constant grid (no
    /// range to stretch) renders mid-gray, 128.
    MinMax,
    /// Map `lo` to 0 and `hi` to 255; values outside are clamped. Use this
    /// to render several frames on a comparable scale.
    Fixed { lo: f64, hi: f64 },
}

/// Renders a grid as a binary (P5) 8-bit PGM image.
pub fn render_pgm(path: &Path, grid: &Grid2D, norm: Normalization) -> Result<()> {
    let (lo, hi) = match norm {
        Normalization::MinMax => grid.min_max(),
        Normalization::Fixed { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parameter(format!(
                    "fixed normalization needs finite lo < hi, got {lo}..{hi}"
                )));
            }
            (lo, hi)
        }
    };
    let geo = grid.geometry();
    let mut buf = Vec::with_capacity(32 + grid.values().len());
    write!(buf, "P5\n{} {}\n255\n", geo.cols(), geo.rows()).expect("in-memory write");
    if hi > lo {
        let scale = 255.0 / (hi - lo);
        for &v in grid.values() {
            buf.push(((v - lo) * scale).round().clamp(0.0, 255.0) as u8);
        }
    } else {
        buf.resize(buf.len() + grid.values().len(), 128);
    }
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// Writes a histogram as CSV: a `bin_lo,bin_hi,count` header, one row per
/// bin, `\n` endings. Floats use Rust's shortest round-trip formatting.
pub fn write_histogram_csv(path: &Path, hist: &EprHistogram) -> Result<()> {
    let mut buf = String::from("bin_lo,bin_hi,count\n");
    for (k, &count) in hist.counts.iter().enumerate() {
        buf.push_str(&format!("{},{},{count}\n", hist.bin_edges[k], hist.bin_edges[k + 1]));
    }
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn grid_3x3() -> Grid2D {
        let geo = GridGeometry::new(3, 3, 1.0, 0.5).unwrap();
        Grid2D::from_values(geo, (0..9).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn efg1_bytes_are_exactly_as_documented() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.efg1");
        write_grid(&path, &grid_3x3()).unwrap();
        let bytes = fs::read(&path).unwrap();
        #[rustfmt::skip]
        let expected: Vec<u8> = vec![
            0x45, 0x46, 0x47, 0x31,                         // "EFG1"
            0x03, 0x00, 0x00, 0x00,                         // rows = 3
            0x03, 0x00, 0x00, 0x00,                         // cols = 3
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F, // 1.0
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xE0, 0x3F, // 0.5
            0x00, 0x00, 0x00, 0x00,                         // 0f32
            0x00, 0x00, 0x80, 0x3F,                         // 1f32
            0x00, 0x00, 0x00, 0x40,                         // 2f32
            0x00, 0x00, 0x40, 0x40,                         // 3f32
            0x00, 0x00, 0x80, 0x40,                         // 4f32
            0x00, 0x00, 0xA0, 0x40,                         // 5f32
            0x00, 0x00, 0xC0, 0x40,                         // 6f32
            0x00, 0x00, 0xE0, 0x40,                         // 7f32
            0x00, 0x00, 0x00, 0x41,                         // 8f32
        ];
        assert_eq!(bytes, expected);
    }

    #[test]
    fn efg1_round_trip_is_exact_at_f32_precision() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rt.efg1");
        let geo = GridGeometry::new(5, 7, 0.0385, 0.15).unwrap();
        let grid = Grid2D::from_fn(geo, |i, j| (i as f64 * 0.013 - j as f64 * 0.5).sin() * 1e-3)
            .unwrap();
        write_grid(&path, &grid).unwrap();
        let back = read_grid(&path).unwrap();
        assert_eq!(back.geometry(), geo);
        for (a, b) in grid.values().iter().zip(back.values()) {
            assert_eq!(*a as f32 as f64, *b);
        }
    }

    #[test]
    fn efg1_read_rejects_corruption_with_offsets() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.efg1");
        write_grid(&path, &grid_3x3()).unwrap();
        let good = fs::read(&path).unwrap();

        let check = |bytes: Vec<u8>, want_offset: u64| {
            fs::write(&path, bytes).unwrap();
            match read_grid(&path) {
                Err(Error::Format { offset, .. }) => assert_eq!(offset, want_offset),
                other => panic!("expected format error at {want_offset}, got {other:?}"),
            }
        };

        let mut b = good.clone();
        b[1] = b'X';
        check(b, 0); // bad magic
        let mut b = good.clone();
        b[4] = 2;
        check(b, 4); // 2 rows
        let mut b = good.clone();
        b[12..20].copy_from_slice(&(-1.0f64).to_le_bytes());
        check(b, 12); // negative spacing
        let mut b = good.clone();
        b.truncate(good.len() - 4);
        check(b, 28); // short payload
        let mut b = good.clone();
        b.push(0);
        check(b, 28); // trailing byte
        let mut b = good.clone();
        b[28 + 4 * 5..28 + 4 * 6].copy_from_slice(&f32::NAN.to_le_bytes());
        check(b, 28 + 4 * 5); // NaN sample 5
        check(good[..10].to_vec(), 10); // shorter than the header
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempdir().unwrap();
        match read_grid(&dir.path().join("absent.efg1")) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("absent.efg1")),
            other => panic!("expected io error, got {other:?}"),
        }
    }

    #[test]
    fn pgm_minmax_spans_the_full_ramp() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        render_pgm(&path, &grid_3x3(), Normalization::MinMax).unwrap();
        let bytes = fs::read(&path).unwrap();
        let mut expected = b"P5\n3 3\n255\n".to_vec();
        expected.extend_from_slice(&[0, 32, 64, 96, 128, 159, 191, 223, 255]);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn pgm_constant_grid_renders_mid_gray() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let geo = GridGeometry::new(3, 4, 1.0, 1.0).unwrap();
        render_pgm(&path, &Grid2D::constant(geo, 0.7).unwrap(), Normalization::MinMax).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..11], b"P5\n4 3\n255\n");
        assert!(bytes[11..].iter().all(|&b| b == 128));
        assert_eq!(bytes.len(), 11 + 12);
    }

    #[test]
    fn pgm_fixed_clamps_and_validates() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        render_pgm(&path, &grid_3x3(), Normalization::Fixed { lo: 2.0, hi: 6.0 }).unwrap();
        let bytes = fs::read(&path).unwrap();
        // values 0,1,2 clamp to 0; 6,7,8 clamp to 255; 4 is halfway, 128
        assert_eq!(&bytes[11..], &[0, 0, 0, 64, 128, 191, 255, 255, 255]);
        let bad = render_pgm(&path, &grid_3x3(), Normalization::Fixed { lo: 1.0, hi: 1.0 });
        assert!(matches!(bad, Err(Error::Parameter(_))));
    }

    #[test]
    fn histogram_csv_uses_shortest_float_form_and_lf() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let hist = EprHistogram {
            bin_edges: vec![-0.5, 0.0, 0.5, 1.5],
            counts: vec![3, 10, 0],
            in_range_fraction: 0.25,
        };
        write_histogram_csv(&path, &hist).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "bin_lo,bin_hi,count\n-0.5,0,3\n0,0.5,10\n0.5,1.5,0\n");
    }
}
