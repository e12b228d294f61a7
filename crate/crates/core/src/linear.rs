//! Explicit leapfrog solver for the linear wave equation with potential,
//! d_tt u - Lap u + a(x) u = F, with Dirichlet data on the lateral boundary
//! and Cauchy data at t = 0.

use crate::error::{Error, Result};
use crate::field::{
    boundary_point, side_index, BoundaryRecord, SpaceTimeScalarField, SpatialField,
};
use crate::grid::{Side, SpaceTimeGrid};
use crate::ops::{pairwise_sum, trapezoid_weight};

/// Cauchy pair plus the lateral Dirichlet record.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBoundaryData {
    /// u at t = 0.
    pub phi: SpatialField,
    /// d_t u at t = 0.
    pub psi: SpatialField,
    /// Dirichlet values on the four faces for all times.
    pub f: BoundaryRecord,
}

impl InitialBoundaryData {
    pub fn zero(grid: &SpaceTimeGrid) -> Self {
        Self {
            phi: SpatialField::zeros(grid),
            psi: SpatialField::zeros(grid),
            f: BoundaryRecord::zeros(grid),
        }
    }

    /// Sample closures phi(x,y), psi(x,y), f(t,x,y).
    pub fn from_fns(
        grid: &SpaceTimeGrid,
        phi: impl Fn(f64, f64) -> f64,
        psi: impl Fn(f64, f64) -> f64,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        Self {
            phi: SpatialField::from_fn(grid, phi),
            psi: SpatialField::from_fn(grid, psi),
            f: BoundaryRecord::from_fn(grid, f),
        }
    }

    /// Read data off an existing space-time field: initial slice, one-sided
    /// second-order time derivative, and the four lateral traces.
    pub fn from_solution(u: &SpaceTimeScalarField) -> Result<Self> {
        let g = &u.grid;
        if g.nt < 3 {
            return Err(Error::GridTooSmall { axis: "t", len: g.nt, min: 3 });
        }
        let phi = SpatialField {
            ny: g.ny,
            nx: g.nx,
            values: u.slice(0).to_vec(),
        };
        let mut psi = SpatialField::zeros(g);
        for p in 0..g.n_spatial() {
            psi.values[p] = (-3.0 * u.values[p] + 4.0 * u.values[g.n_spatial() + p]
                - u.values[2 * g.n_spatial() + p])
                / (2.0 * g.dt);
        }
        let mut f = BoundaryRecord::zeros(g);
        for side in Side::ALL {
            let tr = crate::ops::lateral_trace(u, side);
            f.face_mut(side).copy_from_slice(&tr);
        }
        Ok(Self { phi, psi, f })
    }

    /// Compatibility at t = 0: f(0, .) must match phi on the boundary, and
    /// the four faces must agree at the corners.
    pub fn validate(&self, grid: &SpaceTimeGrid, tol: f64) -> Result<()> {
        self.phi.matches(grid)?;
        self.psi.matches(grid)?;
        for side in Side::ALL {
            let m = side.len(grid);
            let face = self.f.face(side);
            if face.len() != grid.nt * m {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} face samples", grid.nt * m),
                    got: format!("{}", face.len()),
                });
            }
            for q in 0..m {
                let (j, i) = crate::ops::face_node(grid, side, q);
                let d = (face[q] - self.phi.at(j, i)).abs();
                if d > tol {
                    let (x, y) = boundary_point(grid, side, q);
                    return Err(Error::IncompatibleData(format!(
                        "f(0, {x:.3}, {y:.3}) = {} but phi = {} there",
                        face[q],
                        self.phi.at(j, i)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Linear combination a*self + b*other of all three records.
    pub fn axpy(&self, a: f64, b: f64, other: &Self) -> Self {
        Self {
            phi: self.phi.axpy(a, b, &other.phi),
            psi: self.psi.axpy(a, b, &other.psi),
            f: self.f.axpy(a, b, &other.f),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            phi: SpatialField {
                ny: self.phi.ny,
                nx: self.phi.nx,
                values: self.phi.values.iter().map(|v| a * v).collect(),
            },
            psi: SpatialField {
                ny: self.psi.ny,
                nx: self.psi.nx,
                values: self.psi.values.iter().map(|v| a * v).collect(),
            },
            f: self.f.scaled(a),
        }
    }
}

/// 5-point Laplacian at an interior node.
#[inline]
fn laplacian_at(u: &[f64], nx: usize, p: usize, inv_dx2: f64, inv_dy2: f64) -> f64 {
    (u[p - 1] - 2.0 * u[p] + u[p + 1]) * inv_dx2 + (u[p - nx] - 2.0 * u[p] + u[p + nx]) * inv_dy2
}

fn overwrite_dirichlet(
    grid: &SpaceTimeGrid,
    level: &mut [f64],
    f: &BoundaryRecord,
    k: usize,
    scale: f64,
) {
    for side in Side::ALL {
        let m = side.len(grid);
        let face = &f.faces[side_index(side)][k * m..(k + 1) * m];
        for q in 0..m {
            let (j, i) = crate::ops::face_node(grid, side, q);
            level[j * grid.nx + i] = scale * face[q];
        }
    }
}

fn check_stiffness(grid: &SpaceTimeGrid, a: &SpatialField) -> Result<()> {
    let max_a = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let value = grid.dt * grid.dt * max_a;
    if value >= 2.0 {
        return Err(Error::StiffPotential { value });
    }
    Ok(())
}

/// Solve the IBVP by explicit leapfrog. The first step is the Taylor start
/// u^1 = phi + dt psi + dt^2/2 (Lap phi - a phi + F^0); Dirichlet rows are
/// overwritten from `data.f` after every step.
pub fn solve_linear_ibvp(
    grid: &SpaceTimeGrid,
    a: &SpatialField,
    data: &InitialBoundaryData,
    forcing: Option<&SpaceTimeScalarField>,
) -> Result<SpaceTimeScalarField> {
    a.matches(grid)?;
    check_stiffness(grid, a)?;
    if let Some(f) = forcing {
        grid.ensure_matches(&f.grid)?;
    }
    let n = grid.n_spatial();
    let nx = grid.nx;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);
    let dt2 = grid.dt * grid.dt;

    let mut u = vec![0.0; grid.n_points()];

    // level 0
    u[..n].copy_from_slice(&data.phi.values);
    overwrite_dirichlet(grid, &mut u[..n], &data.f, 0, 1.0);

    if grid.nt >= 2 {
        // Taylor start
        let (lvl0, rest) = u.split_at_mut(n);
        let lvl1 = &mut rest[..n];
        for j in 1..grid.ny - 1 {
            for i in 1..nx - 1 {
                let p = j * nx + i;
                let lap = laplacian_at(lvl0, nx, p, inv_dx2, inv_dy2);
                let f0 = forcing.map_or(0.0, |f| f.values[p]);
                lvl1[p] = lvl0[p]
                    + grid.dt * data.psi.values[p]
                    + 0.5 * dt2 * (lap - a.values[p] * lvl0[p] + f0);
            }
        }
        overwrite_dirichlet(grid, lvl1, &data.f, 1, 1.0);
    }

    for k in 1..grid.nt - 1 {
        let (prev_cur, next) = u.split_at_mut((k + 1) * n);
        let cur = &prev_cur[k * n..];
        let prev = &prev_cur[(k - 1) * n..k * n];
        let nextl = &mut next[..n];
        for j in 1..grid.ny - 1 {
            for i in 1..nx - 1 {
                let p = j * nx + i;
                let lap = laplacian_at(cur, nx, p, inv_dx2, inv_dy2);
                let fk = forcing.map_or(0.0, |f| f.values[k * n + p]);
                nextl[p] =
                    2.0 * cur[p] - prev[p] + dt2 * (lap - a.values[p] * cur[p] + fk);
            }
        }
        overwrite_dirichlet(grid, nextl, &data.f, k + 1, 1.0);
        for v in nextl.iter() {
            if !v.is_finite() {
                return Err(Error::NanDetected { step: k + 1 });
            }
        }
    }

    Ok(SpaceTimeScalarField { grid: grid.clone(), values: u })
}

/// Summed-midpoint discrete energy at time index k (1 <= k <= nt - 2):
/// E^k = 1/2 ||(u^{k+1} - u^k)/dt||^2 + 1/2 <grad u^k, grad u^{k+1}>
///     + 1/2 <a u^k, u^{k+1}>.
/// Exactly conserved by the homogeneous leapfrog step.
pub fn discrete_energy(u: &SpaceTimeScalarField, a: &SpatialField, k: usize) -> Result<f64> {
    let g = &u.grid;
    a.matches(g)?;
    if k < 1 || k > g.nt.saturating_sub(2) {
        return Err(Error::ShapeMismatch {
            expected: format!("time index in [1, {}]", g.nt - 2),
            got: format!("{k}"),
        });
    }
    let n = g.n_spatial();
    let cur = &u.values[k * n..(k + 1) * n];
    let next = &u.values[(k + 1) * n..(k + 2) * n];
    let cell = g.dx * g.dy;

    let mut terms = Vec::with_capacity(3 * n);
    // kinetic part
    for p in 0..n {
        let v = (next[p] - cur[p]) / g.dt;
        terms.push(0.5 * v * v * cell);
    }
    // Dirichlet form via forward differences over cells
    for j in 0..g.ny {
        for i in 0..g.nx - 1 {
            let p = j * g.nx + i;
            let du = (cur[p + 1] - cur[p]) / g.dx;
            let dv = (next[p + 1] - next[p]) / g.dx;
            terms.push(0.5 * du * dv * cell);
        }
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx {
            let p = j * g.nx + i;
            let du = (cur[p + g.nx] - cur[p]) / g.dy;
            let dv = (next[p + g.nx] - next[p]) / g.dy;
            terms.push(0.5 * du * dv * cell);
        }
    }
    // potential part, interior
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let p = j * g.nx + i;
            terms.push(0.5 * a.values[p] * cur[p] * next[p] * cell);
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Work done by the forcing between half-steps k-1 and k:
/// dt * <F^k, (u^{k+1} - u^{k-1})/(2 dt)> over the interior.
pub fn forcing_work(
    u: &SpaceTimeScalarField,
    forcing: &SpaceTimeScalarField,
    k: usize,
) -> f64 {
    let g = &u.grid;
    let n = g.n_spatial();
    let cell = g.dx * g.dy;
    let mut terms = Vec::with_capacity(n);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let p = j * g.nx + i;
            let vel = (u.values[(k + 1) * n + p] - u.values[(k - 1) * n + p]) / (2.0 * g.dt);
            terms.push(forcing.values[k * n + p] * vel * cell);
        }
    }
    g.dt * pairwise_sum(&terms)
}

/// Discrete L^2 trace norm over the four faces of the lateral boundary
/// (trapezoid in time and arc length), used by the input-output records.
pub fn boundary_l2(grid: &SpaceTimeGrid, rec: &BoundaryRecord) -> f64 {
    let mut total = 0.0;
    for side in Side::ALL {
        let m = side.len(grid);
        let ds = side.ds(grid);
        let face = rec.face(side);
        let mut terms = Vec::with_capacity(grid.nt * m);
        for k in 0..grid.nt {
            let wt = trapezoid_weight(k, grid.nt);
            for q in 0..m {
                let v = face[k * m + q];
                terms.push(wt * trapezoid_weight(q, m) * v * v);
            }
        }
        total += pairwise_sum(&terms) * grid.dt * ds;
    }
    total.sqrt()
}
