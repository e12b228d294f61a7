//! Uniform space-time grid over Q_T = (0,T) x Omega with Omega a 2D rectangle.

use crate::error::{Error, Result};

/// Stability margin: dt must not exceed `cfl_safety * min(dx,dy) / sqrt(2)`
/// for the explicit 5-point leapfrog step.
pub const CFL_DENOMINATOR: f64 = std::f64::consts::SQRT_2;

/// Discretization of Q_T. Owns all index <-> coordinate maps; immutable
/// after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub lx: f64,
    pub ly: f64,
    pub t_final: f64,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub cfl_safety: f64,
}

impl SpaceTimeGrid {
    /// Build a grid and check every invariant, including the CFL margin.
    pub fn new(
        nx: usize,
        ny: usize,
        nt: usize,
        lx: f64,
        ly: f64,
        t_final: f64,
        cfl_safety: f64,
    ) -> Result<Self> {
        if nx < 3 {
            return Err(Error::GridTooSmall { axis: "x", len: nx, min: 3 });
        }
        if ny < 3 {
            return Err(Error::GridTooSmall { axis: "y", len: ny, min: 3 });
        }
        if nt < 2 {
            return Err(Error::GridTooSmall { axis: "t", len: nt, min: 2 });
        }
        assert!(lx > 0.0 && ly > 0.0 && t_final > 0.0, "extents must be positive");
        assert!(
            cfl_safety > 0.0 && cfl_safety <= 1.0,
            "cfl_safety must lie in (0, 1]"
        );
        let dx = lx / (nx - 1) as f64;
        let dy = ly / (ny - 1) as f64;
        let dt = t_final / (nt - 1) as f64;
        let limit = cfl_safety * dx.min(dy) / CFL_DENOMINATOR;
        if dt > limit {
            return Err(Error::CflViolation { dt, limit, safety: cfl_safety });
        }
        Ok(Self { nx, ny, nt, lx, ly, t_final, dx, dy, dt, cfl_safety })
    }

    /// Convenience: pick the smallest nt whose dt satisfies the margin
    /// `dt <= cfl * min(dx,dy) / sqrt(2)` exactly.
    pub fn with_cfl(nx: usize, ny: usize, lx: f64, ly: f64, t_final: f64, cfl: f64) -> Result<Self> {
        let dx = lx / (nx - 1) as f64;
        let dy = ly / (ny - 1) as f64;
        let dt_max = cfl * dx.min(dy) / CFL_DENOMINATOR;
        let steps = (t_final / dt_max).ceil() as usize;
        Self::new(nx, ny, steps.max(1) + 1, lx, ly, t_final, cfl)
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.nt * self.ny * self.nx
    }

    #[inline]
    pub fn n_spatial(&self) -> usize {
        self.ny * self.nx
    }

    /// Flat index in (time, y, x) row-major order.
    #[inline]
    pub fn idx(&self, k: usize, j: usize, i: usize) -> usize {
        debug_assert!(k < self.nt && j < self.ny && i < self.nx);
        (k * self.ny + j) * self.nx + i
    }

    #[inline]
    pub fn sidx(&self, j: usize, i: usize) -> usize {
        debug_assert!(j < self.ny && i < self.nx);
        j * self.nx + i
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    /// Diameter of the spatial rectangle.
    pub fn diameter(&self) -> f64 {
        self.lx.hypot(self.ly)
    }

    /// Nearest grid node to a physical point, or an error if outside Q_T.
    pub fn nearest_node(&self, t: f64, x: f64, y: f64) -> Result<(usize, usize, usize)> {
        let tol = 1e-12;
        if t < -tol
            || t > self.t_final + tol
            || x < -tol
            || x > self.lx + tol
            || y < -tol
            || y > self.ly + tol
        {
            return Err(Error::PointOutsideGrid { t, x, y });
        }
        let k = ((t / self.dt).round() as usize).min(self.nt - 1);
        let i = ((x / self.dx).round() as usize).min(self.nx - 1);
        let j = ((y / self.dy).round() as usize).min(self.ny - 1);
        Ok((k, j, i))
    }

    /// Check that another grid is the same discretization.
    pub fn ensure_matches(&self, other: &SpaceTimeGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.nt, self.ny, self.nx, other.nt, other.ny, other.nx
            )));
        }
        Ok(())
    }
}

/// One of the four lateral faces of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    XMinus,
    XPlus,
    YMinus,
    YPlus,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XMinus, Side::XPlus, Side::YMinus, Side::YPlus];

    /// Parse the spec tokens `x-`, `x+`, `y-`, `y+`.
    pub fn parse(token: &str) -> Result<Side> {
        match token {
            "x-" => Ok(Side::XMinus),
            "x+" => Ok(Side::XPlus),
            "y-" => Ok(Side::YMinus),
            "y+" => Ok(Side::YPlus),
            other => Err(Error::InvalidSide(other.to_string())),
        }
    }

    /// Outward unit normal of the face.
    pub fn normal(&self) -> [f64; 2] {
        match self {
            Side::XMinus => [-1.0, 0.0],
            Side::XPlus => [1.0, 0.0],
            Side::YMinus => [0.0, -1.0],
            Side::YPlus => [0.0, 1.0],
        }
    }

    /// Number of samples along the face.
    pub fn len(&self, grid: &SpaceTimeGrid) -> usize {
        match self {
            Side::XMinus | Side::XPlus => grid.ny,
            Side::YMinus | Side::YPlus => grid.nx,
        }
    }

    /// Arc-length step along the face.
    pub fn ds(&self, grid: &SpaceTimeGrid) -> f64 {
        match self {
            Side::XMinus | Side::XPlus => grid.dy,
            Side::YMinus | Side::YPlus => grid.dx,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings_are_exact_ratios() {
        let g = SpaceTimeGrid::new(33, 17, 65, 1.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(g.dx, 1.0 / 32.0);
        assert_eq!(g.dy, 0.5 / 16.0);
        assert_eq!(g.dt, 0.5 / 64.0);
    }

    #[test]
    fn rejects_small_axes() {
        assert!(matches!(
            SpaceTimeGrid::new(2, 5, 5, 1.0, 1.0, 0.1, 1.0),
            Err(Error::GridTooSmall { axis: "x", .. })
        ));
        assert!(matches!(
            SpaceTimeGrid::new(5, 5, 1, 1.0, 1.0, 0.1, 1.0),
            Err(Error::GridTooSmall { axis: "t", .. })
        ));
    }

    #[test]
    fn rejects_cfl_violation() {
        // dt = 0.1, limit = 0.5 * (1/4) / sqrt(2) ~ 0.0884
        let r = SpaceTimeGrid::new(5, 5, 11, 1.0, 1.0, 1.0, 0.5);
        assert!(matches!(r, Err(Error::CflViolation { .. })));
    }

    #[test]
    fn with_cfl_saturates_margin() {
        let g = SpaceTimeGrid::with_cfl(33, 33, 1.0, 1.0, 2.5, 0.5).unwrap();
        let limit = 0.5 * g.dx.min(g.dy) / CFL_DENOMINATOR;
        assert!(g.dt <= limit + 1e-15);
        // one fewer step would violate the margin
        assert!(SpaceTimeGrid::new(33, 33, g.nt - 1, 1.0, 1.0, 2.5, 0.5).is_err());
    }

    #[test]
    fn side_tokens() {
        assert_eq!(Side::parse("x-").unwrap(), Side::XMinus);
        assert_eq!(Side::parse("y+").unwrap(), Side::YPlus);
        assert!(Side::parse("z+").is_err());
    }

    #[test]
    fn nearest_node_bounds() {
        let g = SpaceTimeGrid::new(5, 5, 9, 1.0, 1.0, 0.2, 1.0).unwrap();
        assert_eq!(g.nearest_node(0.0, 0.0, 0.0).unwrap(), (0, 0, 0));
        assert_eq!(g.nearest_node(0.2, 1.0, 1.0).unwrap(), (8, 4, 4));
        assert!(g.nearest_node(0.3, 0.5, 0.5).is_err());
    }
}
