//! Discrete differential operators, quadrature and boundary traces.
//!
//! Stencils are second-order centered in the interior and second-order
//! one-sided at the extremes, chosen so that the discrete gradient and
//! divergence satisfy integration by parts to O(h^2), and exactly for
//! interior-supported data.

use crate::error::{Error, Result};
use crate::field::{SpaceTimeScalarField, SpaceTimeVectorField};
use crate::grid::{Side, SpaceTimeGrid};

/// Deterministic pairwise summation; order-independent of the caller's
/// accumulation strategy and accurate to O(log n) rounding.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for v in xs {
            s += v;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// d/ds along one line of samples: centered interior, one-sided second
/// order at both ends. `stride` walks the flat array, `n` points.
#[inline]
fn diff_line(values: &[f64], out: &mut [f64], base: usize, stride: usize, n: usize, h: f64) {
    let v = |m: usize| values[base + m * stride];
    out[base] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
    for m in 1..n - 1 {
        out[base + m * stride] = (v(m + 1) - v(m - 1)) / (2.0 * h);
    }
    out[base + (n - 1) * stride] = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h);
}

fn ensure_three_time_levels(grid: &SpaceTimeGrid) -> Result<()> {
    if grid.nt < 3 {
        return Err(Error::GridTooSmall { axis: "t", len: grid.nt, min: 3 });
    }
    Ok(())
}

/// Partial derivative along the time axis.
pub fn d_dt(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    ensure_three_time_levels(g)?;
    let mut out = vec![0.0; field.values.len()];
    let stride = g.n_spatial();
    for p in 0..stride {
        diff_line(&field.values, &mut out, p, stride, g.nt, g.dt);
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Partial derivative along the x axis.
pub fn d_dx(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    let mut out = vec![0.0; field.values.len()];
    for k in 0..g.nt {
        for j in 0..g.ny {
            diff_line(&field.values, &mut out, g.idx(k, j, 0), 1, g.nx, g.dx);
        }
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Partial derivative along the y axis.
pub fn d_dy(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    let mut out = vec![0.0; field.values.len()];
    for k in 0..g.nt {
        for i in 0..g.nx {
            diff_line(&field.values, &mut out, g.idx(k, 0, i), g.nx, g.ny, g.dy);
        }
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Space-time gradient (d/dt, d/dx, d/dy) of a scalar field.
pub fn gradient_tx(field: &SpaceTimeScalarField) -> Result<SpaceTimeVectorField> {
    Ok(SpaceTimeVectorField {
        t: d_dt(field)?,
        x: d_dx(field)?,
        y: d_dy(field)?,
    })
}

/// Space-time divergence of a vector field, with stencils matching
/// `gradient_tx`.
pub fn divergence_tx(field: &SpaceTimeVectorField) -> Result<SpaceTimeScalarField> {
    let dt = d_dt(&field.t)?;
    let dx = d_dx(&field.x)?;
    let dy = d_dy(&field.y)?;
    dt.axpy(1.0, 1.0, &dx)?.axpy(1.0, 1.0, &dy)
}

/// d2/ds2 along one line: centered interior, one-sided second order at the
/// ends (needs four points).
#[inline]
fn diff2_line(values: &[f64], out: &mut [f64], base: usize, stride: usize, n: usize, h: f64) {
    let v = |m: usize| values[base + m * stride];
    let h2 = h * h;
    out[base] = (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / h2;
    for m in 1..n - 1 {
        out[base + m * stride] = (v(m + 1) - 2.0 * v(m) + v(m - 1)) / h2;
    }
    out[base + (n - 1) * stride] =
        (2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)) / h2;
}

/// Second time derivative.
pub fn d2_dt2(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    if g.nt < 4 {
        return Err(Error::GridTooSmall { axis: "t", len: g.nt, min: 4 });
    }
    let mut out = vec![0.0; field.values.len()];
    let stride = g.n_spatial();
    for p in 0..stride {
        diff2_line(&field.values, &mut out, p, stride, g.nt, g.dt);
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Second x derivative.
pub fn d2_dx2(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    if g.nx < 4 {
        return Err(Error::GridTooSmall { axis: "x", len: g.nx, min: 4 });
    }
    let mut out = vec![0.0; field.values.len()];
    for k in 0..g.nt {
        for j in 0..g.ny {
            diff2_line(&field.values, &mut out, g.idx(k, j, 0), 1, g.nx, g.dx);
        }
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Second y derivative.
pub fn d2_dy2(field: &SpaceTimeScalarField) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    if g.ny < 4 {
        return Err(Error::GridTooSmall { axis: "y", len: g.ny, min: 4 });
    }
    let mut out = vec![0.0; field.values.len()];
    for k in 0..g.nt {
        for i in 0..g.nx {
            diff2_line(&field.values, &mut out, g.idx(k, 0, i), g.nx, g.ny, g.dy);
        }
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values: out })
}

/// Full wave operator d_tt - Lap + a applied by stencils; used to measure
/// how well a constructed field solves the homogeneous equation.
pub fn wave_operator(
    field: &SpaceTimeScalarField,
    a: &crate::field::SpatialField,
) -> Result<SpaceTimeScalarField> {
    let g = &field.grid;
    a.matches(g)?;
    let tt = d2_dt2(field)?;
    let xx = d2_dx2(field)?;
    let yy = d2_dy2(field)?;
    let n = g.n_spatial();
    let mut values = Vec::with_capacity(field.values.len());
    for (p, u) in field.values.iter().enumerate() {
        values.push(tt.values[p] - xx.values[p] - yy.values[p] + a.values[p % n] * u);
    }
    Ok(SpaceTimeScalarField { grid: g.clone(), values })
}

/// Trapezoid weight along one axis (1/2 at the two ends).
#[inline]
pub fn trapezoid_weight(m: usize, n: usize) -> f64 {
    if m == 0 || m == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Tensor-product trapezoid quadrature over Q_T.
pub fn integrate_qt(field: &SpaceTimeScalarField) -> f64 {
    let g = &field.grid;
    let mut terms = Vec::with_capacity(field.values.len());
    for k in 0..g.nt {
        let wt = trapezoid_weight(k, g.nt);
        for j in 0..g.ny {
            let w = wt * trapezoid_weight(j, g.ny);
            for i in 0..g.nx {
                terms.push(w * trapezoid_weight(i, g.nx) * field.at(k, j, i));
            }
        }
    }
    pairwise_sum(&terms) * g.dt * g.dx * g.dy
}

/// Trapezoid quadrature of a spatial slice.
pub fn integrate_slice(field: &SpaceTimeScalarField, k: usize) -> f64 {
    let g = &field.grid;
    let mut terms = Vec::with_capacity(g.n_spatial());
    for j in 0..g.ny {
        let w = trapezoid_weight(j, g.ny);
        for i in 0..g.nx {
            terms.push(w * trapezoid_weight(i, g.nx) * field.at(k, j, i));
        }
    }
    pairwise_sum(&terms) * g.dx * g.dy
}

/// Restrict a field to one lateral face for all times; (time, arc) layout.
pub fn lateral_trace(field: &SpaceTimeScalarField, side: Side) -> Vec<f64> {
    let g = &field.grid;
    let m = side.len(g);
    let mut out = Vec::with_capacity(g.nt * m);
    for k in 0..g.nt {
        for q in 0..m {
            let (j, i) = face_node(g, side, q);
            out.push(field.at(k, j, i));
        }
    }
    out
}

/// Outward normal derivative on a face via one-sided second-order
/// differences; (time, arc) layout.
pub fn neumann_trace(field: &SpaceTimeScalarField, side: Side) -> Vec<f64> {
    let g = &field.grid;
    let m = side.len(g);
    let mut out = Vec::with_capacity(g.nt * m);
    for k in 0..g.nt {
        for q in 0..m {
            out.push(match side {
                Side::XMinus => {
                    (3.0 * field.at(k, q, 0) - 4.0 * field.at(k, q, 1) + field.at(k, q, 2))
                        / (2.0 * g.dx)
                }
                Side::XPlus => {
                    (3.0 * field.at(k, q, g.nx - 1) - 4.0 * field.at(k, q, g.nx - 2)
                        + field.at(k, q, g.nx - 3))
                        / (2.0 * g.dx)
                }
                Side::YMinus => {
                    (3.0 * field.at(k, 0, q) - 4.0 * field.at(k, 1, q) + field.at(k, 2, q))
                        / (2.0 * g.dy)
                }
                Side::YPlus => {
                    (3.0 * field.at(k, g.ny - 1, q) - 4.0 * field.at(k, g.ny - 2, q)
                        + field.at(k, g.ny - 3, q))
                        / (2.0 * g.dy)
                }
            });
        }
    }
    out
}

/// Grid node (j, i) of the q-th point on a face.
#[inline]
pub fn face_node(grid: &SpaceTimeGrid, side: Side, q: usize) -> (usize, usize) {
    match side {
        Side::XMinus => (q, 0),
        Side::XPlus => (q, grid.nx - 1),
        Side::YMinus => (0, q),
        Side::YPlus => (grid.ny - 1, q),
    }
}
