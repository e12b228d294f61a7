//! Media: potential a(x), quadratic-nonlinearity coefficient b(t,x) and the
//! cubic remainder, plus the closed-form bump/window building blocks.

use crate::error::{Error, Result};
use crate::field::{SpaceTimeScalarField, SpaceTimeVectorField, SpatialField};
use crate::grid::SpaceTimeGrid;

/// C-infinity compactly supported bump exp(1 - 1/(1 - r^2)) on |x - c| < w.
/// Carries closed-form gradient and Laplacian for the probe constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub center: [f64; 2],
    pub width: f64,
}

impl BumpProfile {
    pub fn new(center: [f64; 2], width: f64) -> Self {
        assert!(width > 0.0);
        Self { center, width }
    }

    #[inline]
    fn s(&self, x: f64, y: f64) -> f64 {
        let ux = (x - self.center[0]) / self.width;
        let uy = (y - self.center[1]) / self.width;
        ux * ux + uy * uy
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let s = self.s(x, y);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    /// Spatial gradient (d/dx, d/dy).
    #[inline]
    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let s = self.s(x, y);
        if s >= 1.0 {
            return [0.0, 0.0];
        }
        let phi = (1.0 - 1.0 / (1.0 - s)).exp();
        let dphi_ds = -phi / ((1.0 - s) * (1.0 - s));
        let w2 = self.width * self.width;
        [
            dphi_ds * 2.0 * (x - self.center[0]) / w2,
            dphi_ds * 2.0 * (y - self.center[1]) / w2,
        ]
    }

    /// Spatial Laplacian.
    #[inline]
    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        let s = self.s(x, y);
        if s >= 1.0 {
            return 0.0;
        }
        let one = 1.0 - s;
        let phi = (1.0 - 1.0 / one).exp();
        let d1 = -phi / (one * one);
        let d2 = phi / (one * one * one * one) - 2.0 * phi / (one * one * one);
        let w2 = self.width * self.width;
        d2 * 4.0 * s / w2 + d1 * 4.0 / w2
    }

    /// Spatial Hessian (d_xx, d_xy, d_yy).
    #[inline]
    pub fn hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let s = self.s(x, y);
        if s >= 1.0 {
            return [0.0, 0.0, 0.0];
        }
        let one = 1.0 - s;
        let phi = (1.0 - 1.0 / one).exp();
        let d1 = -phi / (one * one);
        let d2 = phi / (one * one * one * one) - 2.0 * phi / (one * one * one);
        let w = self.width;
        let w2 = w * w;
        let ux = (x - self.center[0]) / w;
        let uy = (y - self.center[1]) / w;
        [
            d2 * 4.0 * ux * ux / w2 + d1 * 2.0 / w2,
            d2 * 4.0 * ux * uy / w2,
            d2 * 4.0 * uy * uy / w2 + d1 * 2.0 / w2,
        ]
    }
}

/// Closed-form potential a(x,y), defined on all of the plane so that probe
/// characteristics can leave the rectangle. Grid-sampled media should pair
/// with the analytic form they were sampled from.
pub trait Potential: Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn grad(&self, x: f64, y: f64) -> [f64; 2];
    fn laplacian(&self, x: f64, y: f64) -> f64;

    fn sample(&self, grid: &SpaceTimeGrid) -> SpatialField {
        SpatialField::from_fn(grid, |x, y| self.value(x, y))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantPotential(pub f64);

impl Potential for ConstantPotential {
    fn value(&self, _: f64, _: f64) -> f64 {
        self.0
    }
    fn grad(&self, _: f64, _: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn laplacian(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}

/// a(x,y) = c0 + cx x + cy y.
#[derive(Debug, Clone, Copy)]
pub struct LinearPotential {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Potential for LinearPotential {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y
    }
    fn grad(&self, _: f64, _: f64) -> [f64; 2] {
        [self.cx, self.cy]
    }
    fn laplacian(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}

/// a(x,y) = base + amp sin(pi x) sin(pi y), the stock potential.
#[derive(Debug, Clone, Copy)]
pub struct SinSinPotential {
    pub base: f64,
    pub amp: f64,
}

impl Potential for SinSinPotential {
    fn value(&self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        self.base + self.amp * (PI * x).sin() * (PI * y).sin()
    }
    fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        use std::f64::consts::PI;
        [
            self.amp * PI * (PI * x).cos() * (PI * y).sin(),
            self.amp * PI * (PI * x).sin() * (PI * y).cos(),
        ]
    }
    fn laplacian(&self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        -2.0 * PI * PI * self.amp * (PI * x).sin() * (PI * y).sin()
    }
}

/// C-infinity window in time supported on (t0, t1): identically zero (hence
/// flat) outside, so it vanishes near t = 0 and at t = T by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, t1: f64) -> Self {
        assert!(t1 > t0);
        Self { t0, t1 }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let mid = 0.5 * (self.t0 + self.t1);
        let half = 0.5 * (self.t1 - self.t0);
        let s = (t - mid) / half;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// Shape of the cubic-and-higher flux remainder.
#[derive(Debug, Clone, PartialEq)]
pub enum RemainderSpec {
    Zero,
    /// R(t,x,q) = r(t,x) * q * |q|^2, valid for |q| below `validity_radius`.
    Cubic {
        r: SpaceTimeScalarField,
        validity_radius: f64,
    },
}

impl RemainderSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, RemainderSpec::Zero)
    }
}

/// One medium: the triple (a, b, remainder).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a: SpatialField,
    pub b: SpaceTimeVectorField,
    pub remainder: RemainderSpec,
}

impl CoefficientSet {
    /// Validate shapes and the structural constraints on b: components
    /// vanish identically for t <= flatness_margin and on the final slice.
    pub fn validate(&self, grid: &SpaceTimeGrid, flatness_margin: f64) -> Result<()> {
        self.a.matches(grid)?;
        grid.ensure_matches(self.b.grid())?;
        let k_margin = (flatness_margin / grid.dt).floor() as usize;
        for comp in self.b.components() {
            for k in 0..=k_margin.min(grid.nt - 1) {
                if comp.slice(k).iter().any(|v| *v != 0.0) {
                    return Err(Error::IncompatibleData(format!(
                        "b not flat near t = 0: nonzero at slice {k} within margin {flatness_margin}"
                    )));
                }
            }
            if comp.slice(grid.nt - 1).iter().any(|v| *v != 0.0) {
                return Err(Error::IncompatibleData(
                    "b does not vanish on the final time slice".into(),
                ));
            }
        }
        if let RemainderSpec::Cubic { r, validity_radius } = &self.remainder {
            grid.ensure_matches(&r.grid)?;
            if *validity_radius <= 0.0 {
                return Err(Error::IncompatibleData("validity radius must be positive".into()));
            }
            if r.slice(0).iter().any(|v| *v != 0.0) {
                return Err(Error::IncompatibleData("remainder amplitude not flat at t = 0".into()));
            }
        }
        Ok(())
    }

    /// Medium with a = 0, b = 0, R = 0.
    pub fn trivial(grid: &SpaceTimeGrid) -> Self {
        Self {
            a: SpatialField::zeros(grid),
            b: SpaceTimeVectorField::zeros(grid),
            remainder: RemainderSpec::Zero,
        }
    }

    pub fn max_abs_a(&self) -> f64 {
        self.a.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn b_is_zero(&self) -> bool {
        self.b.components().iter().all(|c| c.values.iter().all(|v| *v == 0.0))
    }
}

/// Parameters for the stock media used by the experiments and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Constant part of a(x).
    pub a_base: f64,
    /// Amplitude of the sin(pi x) sin(pi y) modulation of a(x).
    pub a_mod: f64,
    /// Per-component amplitudes of b = (b0, b1, b2).
    pub b_amp: [f64; 3],
    /// Spatial bump of b.
    pub b_center: [f64; 2],
    pub b_width: f64,
    /// Time window of b, strictly inside (0, T).
    pub b_t0: f64,
    pub b_t1: f64,
    /// Cubic remainder amplitude; 0 means RemainderSpec::Zero.
    pub r_amp: f64,
    pub r_validity: f64,
}

impl MediumParams {
    /// Stock configuration on the unit square over [0, T].
    pub fn reference(t_final: f64) -> Self {
        Self {
            a_base: 1.0,
            a_mod: 0.5,
            b_amp: [0.8, 0.5, -0.6],
            b_center: [0.45, 0.55],
            b_width: 0.3,
            b_t0: 0.15 * t_final,
            b_t1: 0.85 * t_final,
            r_amp: 0.0,
            r_validity: 1.0,
        }
    }

    pub fn with_b_amp(mut self, amp: [f64; 3]) -> Self {
        self.b_amp = amp;
        self
    }

    pub fn with_cubic_remainder(mut self, amp: f64) -> Self {
        self.r_amp = amp;
        self
    }

    /// Analytic form of the potential this medium samples.
    pub fn potential(&self) -> SinSinPotential {
        SinSinPotential { base: self.a_base, amp: self.a_mod }
    }

    pub fn build(&self, grid: &SpaceTimeGrid) -> CoefficientSet {
        let a = self.potential().sample(grid);
        let bump = BumpProfile::new(self.b_center, self.b_width);
        let window = TimeWindow::new(self.b_t0, self.b_t1);
        let shape = SpaceTimeScalarField::from_fn(grid, |t, x, y| window.value(t) * bump.value(x, y));
        let b = SpaceTimeVectorField {
            t: shape.scaled(self.b_amp[0]),
            x: shape.scaled(self.b_amp[1]),
            y: shape.scaled(self.b_amp[2]),
        };
        let remainder = if self.r_amp == 0.0 {
            RemainderSpec::Zero
        } else {
            RemainderSpec::Cubic {
                r: shape.scaled(self.r_amp),
                validity_radius: self.r_validity,
            }
        };
        CoefficientSet { a, b, remainder }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_compact_and_smooth_at_edge() {
        let b = BumpProfile::new([0.5, 0.5], 0.25);
        assert_eq!(b.value(0.5, 0.76), 0.0);
        assert_eq!(b.value(0.5, 0.5), 1.0);
        assert!(b.value(0.5, 0.749) < 1e-10); // decays hard near the edge
        assert_eq!(b.grad(0.9, 0.9), [0.0, 0.0]);
    }

    #[test]
    fn bump_gradient_matches_finite_differences() {
        let b = BumpProfile::new([0.4, 0.6], 0.3);
        let h = 1e-6;
        for (x, y) in [(0.45, 0.55), (0.35, 0.7), (0.5, 0.6)] {
            let g = b.grad(x, y);
            let fd_x = (b.value(x + h, y) - b.value(x - h, y)) / (2.0 * h);
            let fd_y = (b.value(x, y + h) - b.value(x, y - h)) / (2.0 * h);
            assert!((g[0] - fd_x).abs() < 1e-5 * (1.0 + g[0].abs()));
            assert!((g[1] - fd_y).abs() < 1e-5 * (1.0 + g[1].abs()));
        }
    }

    #[test]
    fn bump_laplacian_matches_finite_differences() {
        let b = BumpProfile::new([0.4, 0.6], 0.3);
        let h = 1e-4;
        for (x, y) in [(0.45, 0.55), (0.35, 0.7)] {
            let lap = b.laplacian(x, y);
            let fd = (b.value(x + h, y) + b.value(x - h, y) + b.value(x, y + h)
                + b.value(x, y - h)
                - 4.0 * b.value(x, y))
                / (h * h);
            assert!((lap - fd).abs() < 1e-4 * (1.0 + lap.abs()), "{lap} vs {fd}");
        }
    }

    #[test]
    fn bump_hessian_matches_finite_differences() {
        let b = BumpProfile::new([0.4, 0.6], 0.3);
        let h = 1e-4;
        for (x, y) in [(0.45, 0.55), (0.35, 0.7)] {
            let hess = b.hessian(x, y);
            let fd_xx = (b.value(x + h, y) - 2.0 * b.value(x, y) + b.value(x - h, y)) / (h * h);
            let fd_yy = (b.value(x, y + h) - 2.0 * b.value(x, y) + b.value(x, y - h)) / (h * h);
            let fd_xy = (b.value(x + h, y + h) - b.value(x + h, y - h) - b.value(x - h, y + h)
                + b.value(x - h, y - h))
                / (4.0 * h * h);
            assert!((hess[0] - fd_xx).abs() < 1e-3 * (1.0 + fd_xx.abs()));
            assert!((hess[1] - fd_xy).abs() < 1e-3 * (1.0 + fd_xy.abs()));
            assert!((hess[2] - fd_yy).abs() < 1e-3 * (1.0 + fd_yy.abs()));
            assert!((hess[0] + hess[2] - b.laplacian(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn potentials_differentiate_correctly() {
        let p = SinSinPotential { base: 1.0, amp: 0.5 };
        let h = 1e-6;
        for (x, y) in [(0.3, 0.7), (1.4, -0.2)] {
            let g = p.grad(x, y);
            let fdx = (p.value(x + h, y) - p.value(x - h, y)) / (2.0 * h);
            let fdy = (p.value(x, y + h) - p.value(x, y - h)) / (2.0 * h);
            assert!((g[0] - fdx).abs() < 1e-7);
            assert!((g[1] - fdy).abs() < 1e-7);
        }
    }

    #[test]
    fn reference_medium_validates() {
        let g = SpaceTimeGrid::new(17, 17, 81, 1.0, 1.0, 2.5, 0.75).unwrap();
        let m = MediumParams::reference(g.t_final).build(&g);
        m.validate(&g, 0.1 * g.t_final).unwrap();
        let mc = MediumParams::reference(g.t_final)
            .with_cubic_remainder(1.0)
            .build(&g);
        mc.validate(&g, 0.1 * g.t_final).unwrap();
    }

    #[test]
    fn validate_rejects_b_alive_at_final_time() {
        let g = SpaceTimeGrid::new(9, 9, 33, 1.0, 1.0, 1.0, 1.0).unwrap();
        let mut m = MediumParams::reference(g.t_final).build(&g);
        let n = g.n_points();
        m.b.t.values[n - 1] = 0.3;
        assert!(m.validate(&g, 0.05).is_err());
    }
}
