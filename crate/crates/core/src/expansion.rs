//! Small-amplitude expansion driver: quantifies how fast the nonlinear
//! solution approaches eps*u1 + eps^2*u2 as the data amplitude shrinks.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::linear::{solve_linear_ibvp, InitialBoundaryData};
use crate::nonlinear::{
    solve_nonlinear, solve_nonlinear_lagged, solve_nonlinear_picard, solve_u2, Scheme,
    SolverOptions,
};
use crate::norms::{l2_qt, sup_h1};

/// One amplitude in the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionRow {
    pub eps: f64,
    /// ||u_eps - eps u1|| in L2(Q_T).
    pub norm1_l2: f64,
    /// ||u_eps - eps u1 - eps^2 u2|| in L2(Q_T).
    pub norm2_l2: f64,
    /// Same two defects in the sup-in-time H1 norm.
    pub norm1_h1: f64,
    pub norm2_h1: f64,
    /// Cross-scheme truncation floor at this eps (lagged vs fixed point,
    /// L2), used to exclude saturated rows from regressions. Zero when the
    /// floor measurement is disabled.
    pub floor_l2: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub rows: Vec<ExpansionRow>,
    pub scheme: Scheme,
}

impl ExpansionReport {
    /// Rows whose second defect sits safely above the measured floor.
    pub fn regression_rows(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.norm2_l2 > 10.0 * r.floor_l2)
            .map(|r| (r.eps, r.norm2_l2))
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("eps,norm1_L2,norm2_L2,norm1_H1,norm2_H1\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt(r.eps),
                fmt(r.norm1_l2),
                fmt(r.norm2_l2),
                fmt(r.norm1_h1),
                fmt(r.norm2_h1)
            ));
        }
        out
    }
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Run the sweep. `eps_list` must be strictly decreasing and below the
/// solver cap. When `measure_floor` is set, every amplitude is solved with
/// both schemes and the cross-scheme L2 distance recorded.
pub fn epsilon_expand(
    grid: &SpaceTimeGrid,
    coeffs: &CoefficientSet,
    data: &InitialBoundaryData,
    eps_list: &[f64],
    scheme: Scheme,
    opts: &SolverOptions,
    measure_floor: bool,
) -> Result<ExpansionReport> {
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::IncompatibleData(format!(
                "eps list must be strictly decreasing, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    for &e in eps_list {
        if e > opts.eps_max {
            return Err(Error::EpsilonTooLarge { eps: e, max: opts.eps_max });
        }
        if e <= 0.0 {
            return Err(Error::IncompatibleData(format!("eps must be positive, got {e}")));
        }
    }

    let u1 = solve_linear_ibvp(grid, &coeffs.a, data, None)?;
    let u2 = solve_u2(grid, coeffs, &u1)?;

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let u = solve_nonlinear(grid, coeffs, data, eps, scheme, opts)
            .map_err(|e| annotate(e, eps))?;
        let d1 = u.axpy(1.0, -eps, &u1)?;
        let d2 = d1.axpy(1.0, -eps * eps, &u2)?;
        // The floor guards small amplitudes against saturation; if the
        // cross-check scheme cannot run at a large amplitude (the lagged
        // stability ceiling), a zero floor is recorded, which never
        // excludes that row.
        let floor_l2 = if measure_floor {
            let other = match scheme {
                Scheme::Lagged => {
                    solve_nonlinear_picard(grid, coeffs, data, eps, opts).map(|s| s.u)
                }
                Scheme::Picard => solve_nonlinear_lagged(grid, coeffs, data, eps, opts),
            };
            match other {
                Ok(o) => l2_qt(&u.axpy(1.0, -1.0, &o)?),
                Err(_) => 0.0,
            }
        } else {
            0.0
        };
        rows.push(ExpansionRow {
            eps,
            norm1_l2: l2_qt(&d1),
            norm2_l2: l2_qt(&d2),
            norm1_h1: sup_h1(&d1),
            norm2_h1: sup_h1(&d2),
            floor_l2,
        });
    }
    // deterministic ordering no matter how callers assemble sweeps
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(ExpansionReport { rows, scheme })
}

fn annotate(e: Error, eps: f64) -> Error {
    Error::IncompatibleData(format!("solver failed at eps = {eps}: {e}"))
}

/// Least-squares line through (log eps, log value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn slope_fit(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPairs { need: 3, got: pairs.len() });
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(e, v) in pairs {
        if e <= 0.0 {
            return Err(Error::NonPositiveValue(e));
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveValue(v));
        }
        xs.push(e.ln());
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let p = intercept + slope * x;
            (y - p) * (y - p)
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(SlopeFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::MediumParams;

    #[test]
    fn slope_fit_exact_cubic() {
        let pairs: Vec<(f64, f64)> =
            [0.08, 0.04, 0.02, 0.01].iter().map(|&e| (e, e * e * e)).collect();
        let fit = slope_fit(&pairs).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_prefactor() {
        let pairs: Vec<(f64, f64)> =
            [0.3, 0.1, 0.05, 0.02].iter().map(|&e| (e, 5.0 * e * e)).collect();
        let fit = slope_fit(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_mixed_orders_sits_between() {
        // c3 e^3 + c4 e^4 fits between 3 and 4, approaching 3 as eps -> 0
        let mk = |scale: f64| -> Vec<(f64, f64)> {
            [0.8, 0.4, 0.2, 0.1]
                .iter()
                .map(|&e| {
                    let e = e * scale;
                    (e, e.powi(3) + 2.0 * e.powi(4))
                })
                .collect()
        };
        let coarse = slope_fit(&mk(1.0)).unwrap();
        let fine = slope_fit(&mk(0.01)).unwrap();
        assert!(coarse.slope > 3.0 && coarse.slope < 4.0);
        assert!(fine.slope > 3.0 && fine.slope < coarse.slope);
        assert!((fine.slope - 3.0).abs() < 0.05);
    }

    #[test]
    fn slope_fit_input_validation() {
        assert!(matches!(
            slope_fit(&[(0.1, 1.0), (0.05, 0.5)]),
            Err(Error::TooFewPairs { .. })
        ));
        assert!(matches!(
            slope_fit(&[(0.1, 1.0), (0.05, 0.5), (0.02, -0.1)]),
            Err(Error::NonPositiveValue(_))
        ));
    }

    #[test]
    fn expansion_rejects_bad_sweeps() {
        let g = SpaceTimeGrid::new(9, 9, 33, 1.0, 1.0, 0.2, 0.9).unwrap();
        let coeffs = CoefficientSet::trivial(&g);
        let data = InitialBoundaryData::zero(&g);
        let opts = SolverOptions::default();
        assert!(epsilon_expand(
            &g,
            &coeffs,
            &data,
            &[0.02, 0.04],
            Scheme::Lagged,
            &opts,
            false
        )
        .is_err());
        assert!(matches!(
            epsilon_expand(&g, &coeffs, &data, &[0.5, 0.2, 0.1], Scheme::Lagged, &opts, false),
            Err(Error::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn expansion_degenerate_medium_has_tiny_defects() {
        use std::f64::consts::PI;
        let g = SpaceTimeGrid::new(17, 17, 65, 1.0, 1.0, 1.0, 0.9).unwrap();
        let mut coeffs = CoefficientSet::trivial(&g);
        coeffs.a = crate::field::SpatialField::from_fn(&g, |_, _| 1.0);
        let data = InitialBoundaryData::from_fns(
            &g,
            |x, y| (PI * x).sin() * (PI * y).sin(),
            |_, _| 0.0,
            |_, _, _| 0.0,
        );
        let rep = epsilon_expand(
            &g,
            &coeffs,
            &data,
            &[0.08, 0.04, 0.02],
            Scheme::Lagged,
            &SolverOptions::default(),
            false,
        )
        .unwrap();
        for r in &rep.rows {
            // expansion terminates at first order; both defects at rounding
            assert!(r.norm1_l2 < 1e-13 * r.eps, "norm1 {:.3e}", r.norm1_l2);
            assert!((r.norm2_l2 - r.norm1_l2).abs() <= 1e-15);
        }
    }

    #[test]
    fn expansion_third_column_slope_near_three() {
        use std::f64::consts::PI;
        let g = SpaceTimeGrid::new(17, 17, 81, 1.0, 1.0, 1.0, 0.9).unwrap();
        let coeffs = MediumParams::reference(g.t_final).build(&g);
        let data = InitialBoundaryData::from_fns(
            &g,
            |x, y| (PI * x).sin() * (PI * y).sin(),
            |_, _| 0.0,
            |_, _, _| 0.0,
        );
        let rep = epsilon_expand(
            &g,
            &coeffs,
            &data,
            &[0.08, 0.04, 0.02, 0.01],
            Scheme::Picard,
            &SolverOptions::default(),
            true,
        )
        .unwrap();
        let fit = slope_fit(&rep.regression_rows()).unwrap();
        assert!(
            fit.slope > 2.6 && fit.slope < 3.4,
            "third-column slope {} (rows {:?})",
            fit.slope,
            rep.regression_rows()
        );
        let first: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.eps, r.norm1_l2)).collect();
        let fit1 = slope_fit(&first).unwrap();
        assert!(fit1.slope > 1.8 && fit1.slope < 2.3, "first-column slope {}", fit1.slope);
    }
}
