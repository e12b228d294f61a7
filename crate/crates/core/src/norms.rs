//! Discrete L^2 and H^1-type norms used throughout the pipelines.

use crate::field::{SpaceTimeScalarField, SpatialField};
use crate::grid::SpaceTimeGrid;
use crate::ops::{pairwise_sum, trapezoid_weight};

/// L^2(Q_T) norm by tensor trapezoid quadrature of the square.
pub fn l2_qt(field: &SpaceTimeScalarField) -> f64 {
    let g = &field.grid;
    let mut terms = Vec::with_capacity(field.values.len());
    for k in 0..g.nt {
        let wt = trapezoid_weight(k, g.nt);
        for j in 0..g.ny {
            let w = wt * trapezoid_weight(j, g.ny);
            for i in 0..g.nx {
                let v = field.at(k, j, i);
                terms.push(w * trapezoid_weight(i, g.nx) * v * v);
            }
        }
    }
    (pairwise_sum(&terms) * g.dt * g.dx * g.dy).sqrt()
}

/// L^2(Omega) norm of one time slice.
pub fn l2_slice(field: &SpaceTimeScalarField, k: usize) -> f64 {
    let g = &field.grid;
    l2_spatial_slice(field.slice(k), g)
}

pub fn l2_spatial(field: &SpatialField, grid: &SpaceTimeGrid) -> f64 {
    l2_spatial_slice(&field.values, grid)
}

fn l2_spatial_slice(values: &[f64], g: &SpaceTimeGrid) -> f64 {
    let mut terms = Vec::with_capacity(values.len());
    for j in 0..g.ny {
        let wj = trapezoid_weight(j, g.ny);
        for i in 0..g.nx {
            let v = values[j * g.nx + i];
            terms.push(wj * trapezoid_weight(i, g.nx) * v * v);
        }
    }
    (pairwise_sum(&terms) * g.dx * g.dy).sqrt()
}

/// Squared H^1(Omega) seminorm of a slice via forward differences over cells.
fn h1_semi_sq_slice(values: &[f64], g: &SpaceTimeGrid) -> f64 {
    let nx = g.nx;
    let mut terms = Vec::new();
    for j in 0..g.ny {
        let wj = trapezoid_weight(j, g.ny);
        for i in 0..g.nx - 1 {
            let d = (values[j * nx + i + 1] - values[j * nx + i]) / g.dx;
            terms.push(wj * d * d);
        }
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx {
            let wi = trapezoid_weight(i, g.nx);
            let d = (values[(j + 1) * nx + i] - values[j * nx + i]) / g.dy;
            terms.push(wi * d * d);
        }
    }
    pairwise_sum(&terms) * g.dx * g.dy
}

/// sup over time of the H^1(Omega) norm of the slices.
pub fn sup_h1(field: &SpaceTimeScalarField) -> f64 {
    let g = &field.grid;
    let mut best: f64 = 0.0;
    for k in 0..g.nt {
        let vals = field.slice(k);
        let l2 = l2_spatial_slice(vals, g);
        let h1 = (l2 * l2 + h1_semi_sq_slice(vals, g)).sqrt();
        best = best.max(h1);
    }
    best
}

/// sup over time of (H^1 of the slice + L^2 of the discrete time derivative),
/// the discrete analogue of the H^1 x L^2 energy metric used to measure
/// fixed-point contraction.
pub fn sup_h1_energy(field: &SpaceTimeScalarField) -> f64 {
    let g = &field.grid;
    let mut best: f64 = 0.0;
    for k in 0..g.nt {
        let vals = field.slice(k);
        let l2 = l2_spatial_slice(vals, g);
        let h1_sq = l2 * l2 + h1_semi_sq_slice(vals, g);
        // one-sided time derivative at the ends, centered inside
        let dkm = k.saturating_sub(1);
        let dkp = (k + 1).min(g.nt - 1);
        let span = (dkp - dkm) as f64 * g.dt;
        let mut terms = Vec::with_capacity(g.n_spatial());
        for j in 0..g.ny {
            let wj = trapezoid_weight(j, g.ny);
            for i in 0..g.nx {
                let d = (field.at(dkp, j, i) - field.at(dkm, j, i)) / span;
                terms.push(wj * trapezoid_weight(i, g.nx) * d * d);
            }
        }
        let dt_l2_sq = pairwise_sum(&terms) * g.dx * g.dy;
        best = best.max((h1_sq + dt_l2_sq).sqrt());
    }
    best
}
