//! Sampled fields on a space-time grid.
//!
//! All field types are plain value containers, immutable by convention once
//! built: every operation takes `&self` and returns a fresh field, so shared
//! references are safe across threads.

use crate::error::{Error, Result};
use crate::grid::{Side, SpaceTimeGrid};

/// Scalar samples indexed (time, y, x).
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeScalarField {
    pub grid: SpaceTimeGrid,
    pub values: Vec<f64>,
}

impl SpaceTimeScalarField {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n_points()] }
    }

    pub fn from_values(grid: &SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", grid.n_points()),
                got: format!("{}", values.len()),
            });
        }
        let field = Self { grid: grid.clone(), values };
        field.ensure_finite()?;
        Ok(field)
    }

    /// Sample a closure f(t, x, y) on every node.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_points());
        for k in 0..grid.nt {
            let t = grid.t(k);
            for j in 0..grid.ny {
                let y = grid.y(j);
                for i in 0..grid.nx {
                    values.push(f(t, grid.x(i), y));
                }
            }
        }
        Self { grid: grid.clone(), values }
    }

    #[inline]
    pub fn at(&self, k: usize, j: usize, i: usize) -> f64 {
        self.values[self.grid.idx(k, j, i)]
    }

    #[inline]
    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.n_spatial();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for (pos, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                let n = self.grid.n_spatial();
                return Err(Error::NanDetected { step: pos / n });
            }
        }
        Ok(())
    }

    /// Pointwise linear combination a*self + b*other.
    pub fn axpy(&self, a: f64, b: f64, other: &Self) -> Result<Self> {
        self.grid.ensure_matches(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// Spatial slice at t = T as a standalone field.
    pub fn final_slice(&self) -> SpatialField {
        SpatialField {
            ny: self.grid.ny,
            nx: self.grid.nx,
            values: self.slice(self.grid.nt - 1).to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trilinear interpolation; zero outside Q_T ("extension by zero").
    pub fn interp_or_zero(&self, t: f64, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        if t < 0.0 || t > g.t_final || x < 0.0 || x > g.lx || y < 0.0 || y > g.ly {
            return 0.0;
        }
        let (k0, ft) = locate(t, g.dt, g.nt);
        let (i0, fx) = locate(x, g.dx, g.nx);
        let (j0, fy) = locate(y, g.dy, g.ny);
        let mut acc = 0.0;
        for (dk, wt) in [(0, 1.0 - ft), (1, ft)] {
            if wt == 0.0 {
                continue;
            }
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                if wy == 0.0 {
                    continue;
                }
                for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                    if wx == 0.0 {
                        continue;
                    }
                    acc += wt * wy * wx * self.at(k0 + dk, j0 + dj, i0 + di);
                }
            }
        }
        acc
    }
}

/// Cell index and fractional offset for interpolation; clamps the last node
/// onto the final cell so exact upper-boundary points stay in range.
#[inline]
fn locate(v: f64, dv: f64, n: usize) -> (usize, f64) {
    let s = v / dv;
    let mut c = s.floor() as usize;
    if c >= n - 1 {
        c = n - 2;
    }
    (c, s - c as f64)
}

/// Scalar samples on the spatial rectangle, indexed (y, x).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub ny: usize,
    pub nx: usize,
    pub values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self { ny: grid.ny, nx: grid.nx, values: vec![0.0; grid.n_spatial()] }
    }

    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_spatial());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { ny: grid.ny, nx: grid.nx, values }
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn matches(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if self.ny != grid.ny || self.nx != grid.nx {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", grid.ny, grid.nx),
                got: format!("{}x{}", self.ny, self.nx),
            });
        }
        Ok(())
    }

    pub fn axpy(&self, a: f64, b: f64, other: &Self) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        Self {
            ny: self.ny,
            nx: self.nx,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        }
    }
}

/// Vector-valued samples with (t, x, y) components, each a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeVectorField {
    pub t: SpaceTimeScalarField,
    pub x: SpaceTimeScalarField,
    pub y: SpaceTimeScalarField,
}

impl SpaceTimeVectorField {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            t: SpaceTimeScalarField::zeros(grid),
            x: SpaceTimeScalarField::zeros(grid),
            y: SpaceTimeScalarField::zeros(grid),
        }
    }

    pub fn new(
        t: SpaceTimeScalarField,
        x: SpaceTimeScalarField,
        y: SpaceTimeScalarField,
    ) -> Result<Self> {
        t.grid.ensure_matches(&x.grid)?;
        t.grid.ensure_matches(&y.grid)?;
        Ok(Self { t, x, y })
    }

    #[inline]
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.t.grid
    }

    #[inline]
    pub fn components(&self) -> [&SpaceTimeScalarField; 3] {
        [&self.t, &self.x, &self.y]
    }

    /// Pointwise squared Euclidean norm q0^2 + q1^2 + q2^2.
    pub fn norm_sq_field(&self) -> SpaceTimeScalarField {
        let values = self
            .t
            .values
            .iter()
            .zip(&self.x.values)
            .zip(&self.y.values)
            .map(|((a, b), c)| a * a + b * b + c * c)
            .collect();
        SpaceTimeScalarField { grid: self.grid().clone(), values }
    }

    /// Pointwise dot product with another vector field.
    pub fn dot_field(&self, other: &Self) -> Result<SpaceTimeScalarField> {
        self.grid().ensure_matches(other.grid())?;
        let n = self.t.values.len();
        let mut values = Vec::with_capacity(n);
        for p in 0..n {
            values.push(
                self.t.values[p] * other.t.values[p]
                    + self.x.values[p] * other.x.values[p]
                    + self.y.values[p] * other.y.values[p],
            );
        }
        Ok(SpaceTimeScalarField { grid: self.grid().clone(), values })
    }
}

/// Samples of a quantity on the four lateral faces of partial Q_T, each
/// face stored (time, arc) row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRecord {
    pub nt: usize,
    /// Face data in `Side::ALL` order.
    pub faces: [Vec<f64>; 4],
}

impl BoundaryRecord {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        let faces = [
            vec![0.0; grid.nt * grid.ny],
            vec![0.0; grid.nt * grid.ny],
            vec![0.0; grid.nt * grid.nx],
            vec![0.0; grid.nt * grid.nx],
        ];
        Self { nt: grid.nt, faces }
    }

    /// Sample a closure f(t, x, y) on the lateral boundary.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut rec = Self::zeros(grid);
        for (s, side) in Side::ALL.iter().enumerate() {
            let m = side.len(grid);
            for k in 0..grid.nt {
                let t = grid.t(k);
                for q in 0..m {
                    let (x, y) = boundary_point(grid, *side, q);
                    rec.faces[s][k * m + q] = f(t, x, y);
                }
            }
        }
        rec
    }

    #[inline]
    pub fn face(&self, side: Side) -> &[f64] {
        &self.faces[side_index(side)]
    }

    #[inline]
    pub fn face_mut(&mut self, side: Side) -> &mut [f64] {
        &mut self.faces[side_index(side)]
    }

    pub fn axpy(&self, a: f64, b: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for s in 0..4 {
            assert_eq!(self.faces[s].len(), other.faces[s].len());
            for (o, (u, v)) in out.faces[s]
                .iter_mut()
                .zip(self.faces[s].iter().zip(&other.faces[s]))
            {
                *o = a * u + b * v;
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for f in out.faces.iter_mut() {
            for v in f.iter_mut() {
                *v *= a;
            }
        }
        out
    }
}

#[inline]
pub fn side_index(side: Side) -> usize {
    match side {
        Side::XMinus => 0,
        Side::XPlus => 1,
        Side::YMinus => 2,
        Side::YPlus => 3,
    }
}

/// Physical coordinates of the q-th sample on a face.
#[inline]
pub fn boundary_point(grid: &SpaceTimeGrid, side: Side, q: usize) -> (f64, f64) {
    match side {
        Side::XMinus => (0.0, grid.y(q)),
        Side::XPlus => (grid.lx, grid.y(q)),
        Side::YMinus => (grid.x(q), 0.0),
        Side::YPlus => (grid.x(q), grid.ly),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(5, 4, 3, 1.0, 0.6, 0.01, 1.0).unwrap()
    }

    #[test]
    fn from_fn_indexing() {
        let g = grid();
        let f = SpaceTimeScalarField::from_fn(&g, |t, x, y| t + 10.0 * x + 100.0 * y);
        assert_eq!(f.at(1, 2, 3), g.t(1) + 10.0 * g.x(3) + 100.0 * g.y(2));
    }

    #[test]
    fn rejects_nonfinite() {
        let g = grid();
        let mut v = vec![0.0; g.n_points()];
        v[g.idx(1, 1, 1)] = f64::NAN;
        assert!(matches!(
            SpaceTimeScalarField::from_values(&g, v),
            Err(Error::NanDetected { step: 1 })
        ));
    }

    #[test]
    fn interp_reproduces_multilinear() {
        let g = grid();
        let f = SpaceTimeScalarField::from_fn(&g, |t, x, y| 2.0 + t - 3.0 * x * y);
        let (t, x, y) = (0.0043, 0.37, 0.21);
        let exact = 2.0 + t - 3.0 * x * y;
        // trilinear is exact on functions linear in each variable separately
        assert!((f.interp_or_zero(t, x, y) - exact).abs() < 1e-12);
        assert_eq!(f.interp_or_zero(-0.1, 0.5, 0.3), 0.0);
    }

    #[test]
    fn boundary_record_faces() {
        let g = grid();
        let r = BoundaryRecord::from_fn(&g, |t, x, y| t + x - y);
        // x+ face, q runs over y
        let m = Side::XPlus.len(&g);
        assert_eq!(m, g.ny);
        assert_eq!(r.face(Side::XPlus)[1 * m + 2], g.t(1) + g.lx - g.y(2));
    }
}
