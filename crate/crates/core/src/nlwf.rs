//! NLWF binary field files.
//!
//! Layout: bytes 0-3 magic `NLWF`, u32 little-endian version (= 1), u32 rank,
//! rank x u64 dims (slowest-varying first: t, y, x), then float64
//! little-endian values in row-major order. Round trips are bit exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{SpaceTimeScalarField, SpaceTimeVectorField, SpatialField};
use crate::grid::SpaceTimeGrid;

pub const MAGIC: [u8; 4] = *b"NLWF";
pub const VERSION: u32 = 1;
/// Refuse headers that would allocate more than this many values.
const MAX_VALUES: u64 = 1 << 33;

/// A field as stored on disk: dims slowest-first plus the raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    pub dims: Vec<u64>,
    pub values: Vec<f64>,
}

fn write_raw(path: &Path, dims: &[u64], values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(dims.len() as u32).to_le_bytes())?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read and validate an NLWF file of any rank.
pub fn read_raw(path: &Path) -> Result<RawField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::BadFieldFile(format!(
            "magic mismatch: expected NLWF, got {:?}",
            magic
        )));
    }
    let version = read_u32(&mut r, "version")?;
    if version != VERSION {
        return Err(Error::BadFieldFile(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let rank = read_u32(&mut r, "rank")? as usize;
    if rank == 0 || rank > 8 {
        return Err(Error::BadFieldFile(format!("unreasonable rank {rank}")));
    }
    let mut dims = Vec::with_capacity(rank);
    let mut count: u64 = 1;
    for _ in 0..rank {
        let d = read_u64(&mut r, "dims")?;
        count = count
            .checked_mul(d)
            .ok_or(Error::ShapeOverflow(u64::MAX))?;
        if count > MAX_VALUES {
            return Err(Error::ShapeOverflow(count));
        }
        dims.push(d);
    }
    // minimum axis sizes: the stencil modules need 3 points per space axis
    // and 2 per time axis; enforce at read so corrupt headers fail early
    check_min_dims(&dims)?;
    let mut values = Vec::with_capacity(count as usize);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        read_exact(&mut r, &mut buf, "values")?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok(RawField { dims, values })
}

/// Interpret trailing axes as (t, y, x) for rank 3/4 and (y, x) for rank 2.
fn check_min_dims(dims: &[u64]) -> Result<()> {
    match dims.len() {
        2 => {
            enforce_axis("y", dims[0], 3)?;
            enforce_axis("x", dims[1], 3)?;
        }
        3 => {
            enforce_axis("t", dims[0], 2)?;
            enforce_axis("y", dims[1], 3)?;
            enforce_axis("x", dims[2], 3)?;
        }
        4 => {
            enforce_axis("t", dims[1], 2)?;
            enforce_axis("y", dims[2], 3)?;
            enforce_axis("x", dims[3], 3)?;
        }
        _ => {}
    }
    Ok(())
}

fn enforce_axis(axis: &'static str, len: u64, min: usize) -> Result<()> {
    if (len as usize) < min {
        return Err(Error::GridTooSmall { axis, len: len as usize, min });
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::BadFieldFile(format!("truncated while reading {what}: {e}")))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

/// Write a space-time scalar field (rank 3: t, y, x).
pub fn write_field(path: impl AsRef<Path>, field: &SpaceTimeScalarField) -> Result<()> {
    let g = &field.grid;
    write_raw(
        path.as_ref(),
        &[g.nt as u64, g.ny as u64, g.nx as u64],
        &field.values,
    )
}

/// Read a scalar field and bind it to the given grid.
pub fn read_field(path: impl AsRef<Path>, grid: &SpaceTimeGrid) -> Result<SpaceTimeScalarField> {
    let raw = read_raw(path.as_ref())?;
    let expected = [grid.nt as u64, grid.ny as u64, grid.nx as u64];
    if raw.dims != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", expected),
            got: format!("{:?}", raw.dims),
        });
    }
    SpaceTimeScalarField::from_values(grid, raw.values)
}

/// Write a spatial field (rank 2: y, x).
pub fn write_spatial(path: impl AsRef<Path>, field: &SpatialField) -> Result<()> {
    write_raw(path.as_ref(), &[field.ny as u64, field.nx as u64], &field.values)
}

pub fn read_spatial(path: impl AsRef<Path>, grid: &SpaceTimeGrid) -> Result<SpatialField> {
    let raw = read_raw(path.as_ref())?;
    let expected = [grid.ny as u64, grid.nx as u64];
    if raw.dims != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", expected),
            got: format!("{:?}", raw.dims),
        });
    }
    Ok(SpatialField { ny: grid.ny, nx: grid.nx, values: raw.values })
}

/// Write a vector field (rank 4: component, t, y, x; components t, x, y).
pub fn write_vector(path: impl AsRef<Path>, field: &SpaceTimeVectorField) -> Result<()> {
    let g = field.grid();
    let mut values = Vec::with_capacity(3 * g.n_points());
    values.extend_from_slice(&field.t.values);
    values.extend_from_slice(&field.x.values);
    values.extend_from_slice(&field.y.values);
    write_raw(
        path.as_ref(),
        &[3, g.nt as u64, g.ny as u64, g.nx as u64],
        &values,
    )
}

pub fn read_vector(path: impl AsRef<Path>, grid: &SpaceTimeGrid) -> Result<SpaceTimeVectorField> {
    let raw = read_raw(path.as_ref())?;
    let expected = [3u64, grid.nt as u64, grid.ny as u64, grid.nx as u64];
    if raw.dims != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", expected),
            got: format!("{:?}", raw.dims),
        });
    }
    let n = grid.n_points();
    let t = SpaceTimeScalarField::from_values(grid, raw.values[..n].to_vec())?;
    let x = SpaceTimeScalarField::from_values(grid, raw.values[n..2 * n].to_vec())?;
    let y = SpaceTimeScalarField::from_values(grid, raw.values[2 * n..].to_vec())?;
    SpaceTimeVectorField::new(t, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(6, 5, 4, 1.0, 1.0, 0.02, 1.0).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let g = grid();
        let f = SpaceTimeScalarField::from_fn(&g, |t, x, y| {
            (t * 1712.0 + x * 13.0).sin() * (y + 1e-307) + 0.1
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.nlwf");
        write_field(&path, &f).unwrap();
        let back = read_field(&path, &g).unwrap();
        assert_eq!(f.values, back.values);
    }

    #[test]
    fn vector_round_trip() {
        let g = grid();
        let v = SpaceTimeVectorField {
            t: SpaceTimeScalarField::from_fn(&g, |t, _, _| t),
            x: SpaceTimeScalarField::from_fn(&g, |_, x, _| -x),
            y: SpaceTimeScalarField::from_fn(&g, |_, _, y| 2.0 * y),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.nlwf");
        write_vector(&path, &v).unwrap();
        let back = read_vector(&path, &g).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn truncated_file_is_an_error_not_a_crash() {
        let g = grid();
        let f = SpaceTimeScalarField::zeros(&g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.nlwf");
        write_field(&path, &f).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match read_raw(&path) {
            Err(Error::BadFieldFile(msg)) => assert!(msg.contains("truncated")),
            other => panic!("expected BadFieldFile, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.nlwf");
        std::fs::write(&path, b"WLNFxxxxxxxxxxxxxxxx").unwrap();
        assert!(matches!(read_raw(&path), Err(Error::BadFieldFile(_))));

        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&MAGIC).unwrap();
        f.write_all(&7u32.to_le_bytes()).unwrap();
        f.write_all(&3u32.to_le_bytes()).unwrap();
        drop(f);
        match read_raw(&path) {
            Err(Error::BadFieldFile(msg)) => assert!(msg.contains("version")),
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn undersized_axis_rejected_at_read() {
        // header claims nx = 2, which no grid accepts
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.nlwf");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&MAGIC).unwrap();
        f.write_all(&VERSION.to_le_bytes()).unwrap();
        f.write_all(&3u32.to_le_bytes()).unwrap();
        for d in [4u64, 3, 2] {
            f.write_all(&d.to_le_bytes()).unwrap();
        }
        for _ in 0..24 {
            f.write_all(&0f64.to_le_bytes()).unwrap();
        }
        drop(f);
        assert!(matches!(
            read_raw(&path),
            Err(Error::GridTooSmall { axis: "x", len: 2, min: 3 })
        ));
    }

    #[test]
    fn hostile_dims_rejected_without_allocation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("huge.nlwf");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&MAGIC).unwrap();
        f.write_all(&VERSION.to_le_bytes()).unwrap();
        f.write_all(&3u32.to_le_bytes()).unwrap();
        for d in [u64::MAX / 2, 1000, 1000] {
            f.write_all(&d.to_le_bytes()).unwrap();
        }
        drop(f);
        assert!(matches!(read_raw(&path), Err(Error::ShapeOverflow(_))));
    }
}
