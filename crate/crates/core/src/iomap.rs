//! The input-output map: lateral conormal flux trace plus the final-time
//! Cauchy pair, its linearization, and the first/second-order defect
//! extraction in the data amplitude.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::field::{BoundaryRecord, SpatialField};
use crate::grid::{Side, SpaceTimeGrid};
use crate::linear::{boundary_l2, solve_linear_ibvp, InitialBoundaryData};
use crate::nonlinear::{flux_eval, solve_nonlinear, solve_u2, Scheme, SolverOptions};
use crate::norms::l2_spatial;
use crate::ops::{gradient_tx, lateral_trace, neumann_trace};
use crate::field::SpaceTimeScalarField;

/// One record of the input-output map.
#[derive(Debug, Clone, PartialEq)]
pub struct IOData {
    /// Per-face d_nu u + (0,nu) . (|grad u|^2 b + R) over the lateral
    /// boundary, (time, arc) layout.
    pub lateral_flux: BoundaryRecord,
    /// u at t = T.
    pub final_u: SpatialField,
    /// d_t u at t = T.
    pub final_ut: SpatialField,
}

impl IOData {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            lateral_flux: BoundaryRecord::zeros(grid),
            final_u: SpatialField::zeros(grid),
            final_ut: SpatialField::zeros(grid),
        }
    }

    pub fn axpy(&self, a: f64, b: f64, other: &Self) -> Self {
        Self {
            lateral_flux: self.lateral_flux.axpy(a, b, &other.lateral_flux),
            final_u: self.final_u.axpy(a, b, &other.final_u),
            final_ut: self.final_ut.axpy(a, b, &other.final_ut),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            lateral_flux: self.lateral_flux.scaled(a),
            final_u: SpatialField {
                ny: self.final_u.ny,
                nx: self.final_u.nx,
                values: self.final_u.values.iter().map(|v| a * v).collect(),
            },
            final_ut: SpatialField {
                ny: self.final_ut.ny,
                nx: self.final_ut.nx,
                values: self.final_ut.values.iter().map(|v| a * v).collect(),
            },
        }
    }

    /// Discrete trace norm: L2 over the four lateral faces plus L2 of the
    /// two final-time records, equally weighted.
    pub fn trace_norm(&self, grid: &SpaceTimeGrid) -> f64 {
        let b = boundary_l2(grid, &self.lateral_flux);
        let fu = l2_spatial(&self.final_u, grid);
        let fut = l2_spatial(&self.final_ut, grid);
        (b * b + fu * fu + fut * fut).sqrt()
    }
}

/// One-sided second-order time derivative at the final level.
fn final_time_derivative(u: &SpaceTimeScalarField) -> SpatialField {
    let g = &u.grid;
    let n = g.n_spatial();
    let last = g.nt - 1;
    let mut out = SpatialField::zeros(g);
    for p in 0..n {
        out.values[p] = (3.0 * u.values[last * n + p] - 4.0 * u.values[(last - 1) * n + p]
            + u.values[(last - 2) * n + p])
            / (2.0 * g.dt);
    }
    out
}

/// Assemble the three records from a solved field.
fn records_from_solution(
    coeffs: &CoefficientSet,
    u: &SpaceTimeScalarField,
    with_flux: bool,
) -> Result<IOData> {
    let g = &u.grid;
    let mut rec = IOData::zeros(g);
    if with_flux {
        let grad = gradient_tx(u)?;
        let s = flux_eval(coeffs, &grad)?;
        for side in Side::ALL {
            let nu = side.normal();
            let dnu = neumann_trace(u, side);
            let sx = lateral_trace(&s.x, side);
            let sy = lateral_trace(&s.y, side);
            let face = rec.lateral_flux.face_mut(side);
            for (o, ((d, x), y)) in face.iter_mut().zip(dnu.iter().zip(&sx).zip(&sy)) {
                *o = d + nu[0] * x + nu[1] * y;
            }
        }
    } else {
        for side in Side::ALL {
            let dnu = neumann_trace(u, side);
            rec.lateral_flux.face_mut(side).copy_from_slice(&dnu);
        }
    }
    rec.final_u = u.final_slice();
    rec.final_ut = final_time_derivative(u);
    Ok(rec)
}

/// Solve the nonlinear problem at amplitude eps and read off the record.
pub fn compute_iomap(
    grid: &SpaceTimeGrid,
    coeffs: &CoefficientSet,
    data: &InitialBoundaryData,
    eps: f64,
    scheme: Scheme,
    opts: &SolverOptions,
) -> Result<IOData> {
    let u = solve_nonlinear(grid, coeffs, data, eps, scheme, opts)?;
    records_from_solution(coeffs, &u, true)
}

/// Record of the linearized map: plain Neumann trace plus final Cauchy pair
/// of the potential-only solve (no quadratic flux contribution).
pub fn compute_linearized_iomap(
    grid: &SpaceTimeGrid,
    a: &SpatialField,
    data: &InitialBoundaryData,
) -> Result<IOData> {
    let u1 = solve_linear_ibvp(grid, a, data, None)?;
    let trivial = CoefficientSet::trivial(grid);
    records_from_solution(&trivial, &u1, false)
}

/// Second-order record simulated directly: solve u1 and then u2 with the
/// source div(b |grad u1|^2), and trace
/// (d_nu u2 + (0,nu) . b |grad u1|^2, u2|_T, d_t u2|_T).
pub fn direct_second_order(
    grid: &SpaceTimeGrid,
    coeffs: &CoefficientSet,
    data: &InitialBoundaryData,
) -> Result<IOData> {
    let u1 = solve_linear_ibvp(grid, &coeffs.a, data, None)?;
    let u2 = solve_u2(grid, coeffs, &u1)?;
    let grad1 = gradient_tx(&u1)?;
    let nsq = grad1.norm_sq_field();
    let mut rec = IOData::zeros(grid);
    for side in Side::ALL {
        let nu = side.normal();
        let dnu = neumann_trace(&u2, side);
        let bx = lateral_trace(&coeffs.b.x, side);
        let by = lateral_trace(&coeffs.b.y, side);
        let ns = lateral_trace(&nsq, side);
        let face = rec.lateral_flux.face_mut(side);
        for q in 0..face.len() {
            face[q] = dnu[q] + (nu[0] * bx[q] + nu[1] * by[q]) * ns[q];
        }
    }
    rec.final_u = u2.final_slice();
    rec.final_ut = final_time_derivative(&u2);
    Ok(rec)
}

/// Rows of the first-order defect sweep.
#[derive(Debug, Clone)]
pub struct DefectReport {
    /// (eps, ||L(eps .) - eps L_a||, same divided by eps).
    pub rows: Vec<(f64, f64, f64)>,
}

impl DefectReport {
    pub fn defect_pairs(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.0, r.1)).collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("eps,defect,defect_over_eps\n");
        for (e, d, q) in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::expansion::fmt(*e),
                crate::expansion::fmt(*d),
                crate::expansion::fmt(*q)
            ));
        }
        out
    }
}

/// Sweep the defect ||L(eps .) - eps L_a|| over amplitudes.
pub fn first_order_defect(
    grid: &SpaceTimeGrid,
    coeffs: &CoefficientSet,
    data: &InitialBoundaryData,
    eps_list: &[f64],
    scheme: Scheme,
    opts: &SolverOptions,
) -> Result<DefectReport> {
    let lin = compute_linearized_iomap(grid, &coeffs.a, data)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let full = compute_iomap(grid, coeffs, data, eps, scheme, opts)?;
        let defect = full.axpy(1.0, -eps, &lin).trace_norm(grid);
        rows.push((eps, defect, defect / eps));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(DefectReport { rows })
}

/// Result of the two-amplitude second-order extraction.
#[derive(Debug, Clone)]
pub struct SecondOrderExtract {
    pub record: IOData,
    /// Relative trace-norm disagreement of the two single-amplitude
    /// estimates; past 0.2 the expansion radius is considered exceeded.
    pub disagreement: f64,
    pub warn: bool,
}

/// Extract the second-order record from measurements at eps and eps/2.
/// The single-amplitude quotient A(e) = (L(e .) - e L_a)/e^2 carries an
/// O(e) error from the third-order term, so the pair is combined as
/// 2 A(eps/2) - A(eps), which cancels it.
pub fn second_order_extract(
    grid: &SpaceTimeGrid,
    coeffs: &CoefficientSet,
    data: &InitialBoundaryData,
    eps_pair: (f64, f64),
    scheme: Scheme,
    opts: &SolverOptions,
) -> Result<SecondOrderExtract> {
    let (e1, e2) = eps_pair;
    if (e2 - 0.5 * e1).abs() > 1e-12 * e1 {
        return Err(Error::IncompatibleData(format!(
            "eps pair must be (eps, eps/2), got ({e1}, {e2})"
        )));
    }
    let lin = compute_linearized_iomap(grid, &coeffs.a, data)?;
    let quotient = |eps: f64| -> Result<IOData> {
        let full = compute_iomap(grid, coeffs, data, eps, scheme, opts)?;
        Ok(full.axpy(1.0, -eps, &lin).scaled(1.0 / (eps * eps)))
    };
    let a1 = quotient(e1)?;
    let a2 = quotient(e2)?;
    let record = a2.axpy(2.0, -1.0, &a1);
    let diff = a1.axpy(1.0, -1.0, &a2).trace_norm(grid);
    let scale = a2.trace_norm(grid).max(1e-300);
    let disagreement = diff / scale;
    Ok(SecondOrderExtract { record, disagreement, warn: disagreement > 0.2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::MediumParams;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(17, 17, 81, 1.0, 1.0, 1.0, 0.9).unwrap()
    }

    fn eigen_data(g: &SpaceTimeGrid) -> InitialBoundaryData {
        use std::f64::consts::PI;
        InitialBoundaryData::from_fns(
            g,
            |x, y| (PI * x).sin() * (PI * y).sin(),
            |_, _| 0.0,
            |_, _, _| 0.0,
        )
    }

    #[test]
    fn zero_amplitude_gives_zero_record() {
        let g = grid();
        let coeffs = MediumParams::reference(g.t_final).build(&g);
        let rec = compute_iomap(
            &g,
            &coeffs,
            &eigen_data(&g),
            0.0,
            Scheme::Lagged,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(rec.trace_norm(&g), 0.0);
    }

    #[test]
    fn pure_linear_flux_reduces_to_neumann_trace() {
        let g = grid();
        let mut coeffs = CoefficientSet::trivial(&g);
        coeffs.a = SpatialField::from_fn(&g, |x, y| 1.0 + 0.5 * x * y);
        let data = eigen_data(&g);
        // eps = 1 is admissible here because the problem is exactly linear
        let opts = SolverOptions { eps_max: 1.0, ..Default::default() };
        let rec = compute_iomap(&g, &coeffs, &data, 1.0, Scheme::Lagged, &opts).unwrap();
        let lin = compute_linearized_iomap(&g, &coeffs.a, &data).unwrap();
        let diff = rec.axpy(1.0, -1.0, &lin).trace_norm(&g);
        let rel = diff / lin.trace_norm(&g);
        assert!(rel < 1e-12, "flux does not reduce to the Neumann trace: {rel:.3e}");
    }

    #[test]
    fn identical_media_give_bitwise_identical_records() {
        let g = grid();
        let coeffs = MediumParams::reference(g.t_final).build(&g);
        let data = eigen_data(&g);
        let opts = SolverOptions::default();
        let r1 = compute_iomap(&g, &coeffs, &data, 0.03, Scheme::Lagged, &opts).unwrap();
        let r2 = compute_iomap(&g, &coeffs, &data, 0.03, Scheme::Lagged, &opts).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn linearized_map_is_linear() {
        use std::f64::consts::PI;
        let g = grid();
        let a = SpatialField::from_fn(&g, |x, y| 1.0 + 0.3 * (PI * y).cos() * x);
        let d1 = eigen_data(&g);
        let window = crate::coeffs::TimeWindow::new(0.1, 0.9);
        let d2 = InitialBoundaryData::from_fns(
            &g,
            |_, _| 0.0,
            |x, y| x * y,
            |t, x, y| window.value(t) * (x - y),
        );
        let (al, be) = (1.7, -0.4);
        let r1 = compute_linearized_iomap(&g, &a, &d1).unwrap();
        let r2 = compute_linearized_iomap(&g, &a, &d2).unwrap();
        let combo = compute_linearized_iomap(&g, &a, &d1.axpy(al, be, &d2)).unwrap();
        let superposed = r1.axpy(al, be, &r2);
        let rel = combo.axpy(1.0, -1.0, &superposed).trace_norm(&g)
            / superposed.trace_norm(&g);
        assert!(rel < 1e-12, "linearized map superposition defect {rel:.3e}");
    }

    #[test]
    fn defect_at_floor_without_nonlinearity() {
        let g = grid();
        let mut coeffs = CoefficientSet::trivial(&g);
        coeffs.a = SpatialField::from_fn(&g, |_, _| 1.0);
        let rep = first_order_defect(
            &g,
            &coeffs,
            &eigen_data(&g),
            &[0.08, 0.04, 0.02],
            Scheme::Lagged,
            &SolverOptions::default(),
        )
        .unwrap();
        let lin = compute_linearized_iomap(&g, &coeffs.a, &eigen_data(&g)).unwrap();
        let scale = lin.trace_norm(&g);
        for (eps, defect, _) in &rep.rows {
            assert!(
                *defect <= 1e-12 * eps * scale,
                "defect {defect:.3e} above rounding floor at eps {eps}"
            );
        }
    }

    #[test]
    fn second_order_extract_wants_halved_pair() {
        let g = grid();
        let coeffs = MediumParams::reference(g.t_final).build(&g);
        let r = second_order_extract(
            &g,
            &coeffs,
            &eigen_data(&g),
            (0.04, 0.03),
            Scheme::Lagged,
            &SolverOptions::default(),
        );
        assert!(r.is_err());
    }
}
